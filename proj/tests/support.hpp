#pragma once

#include <random>
#include <vector>

#include <hdae/surrogate.hpp>

namespace hdae::test {

/// Random tanh net over the machine input domain; weights ~ U(-scale, scale).
inline SurrogateNet randomMachineNet(std::mt19937_64& rng, std::vector<int> hidden = {8, 8}, int outputs = 2,
	double scale = 0.8) {
	std::uniform_real_distribution<double> u(-scale, scale);
	std::vector<DenseLayer> layers;
	int width = kMachineInputs;
	hidden.push_back(outputs);
	for (int n : hidden) {
		DenseLayer l;
		l.w = Matrix::NullaryExpr(n, width, [&] { return u(rng); });
		l.b = Vector::NullaryExpr(n, [&] { return u(rng); });
		layers.push_back(std::move(l));
		width = n;
	}
	Vector s = Vector::NullaryExpr(outputs, [&] { return 0.1 + std::abs(u(rng)) * 5.0; });
	return SurrogateNet(std::move(layers), machineInputDomain(), s, 40e-3);
}

/// Uniform point inside the net's input domain.
inline std::vector<double> randomFeatures(std::mt19937_64& rng, const SurrogateNet& net) {
	std::vector<double> f;
	for (const auto& in : net.inputs())
		f.push_back(std::uniform_real_distribution<double>(in.lo, in.hi)(rng));
	return f;
}

} // namespace hdae::test
