#include <hdae/dae.hpp>

namespace hdae {

int DaeSystem::numStates() const {
	int n = 0;
	for (std::size_t i = 0; i < numComponents(); ++i)
		n += component(i).numStates();
	return n;
}

std::vector<int> DaeSystem::stateOffsets() const {
	std::vector<int> out;
	int n = 0;
	for (std::size_t i = 0; i < numComponents(); ++i) {
		out.push_back(n);
		n += component(i).numStates();
	}
	return out;
}

Vector DaeSystem::gatherBoundary(std::size_t i, const Vector& y) const {
	const auto& idx = boundaryIndices(i);
	Vector out(static_cast<Eigen::Index>(idx.size()));
	for (std::size_t k = 0; k < idx.size(); ++k)
		out[static_cast<Eigen::Index>(k)] = y[idx[k]];
	return out;
}

Component::Evaluation MachineComponent::evaluate(const Vector& x, const Vector& y) const {
	const auto p = machineJacobians(mParams, MachineState::fromVec(x), y[0], y[1], mFrequencyHz);
	return {p.f, p.dfdx, p.dfdv};
}

PowerSystemDae::PowerSystemDae(NetworkModel model) : mModel(std::move(model)) {
	for (const auto& m : mModel.machines()) {
		mMachines.emplace_back(m.params, mModel.frequencyHz());
		mBoundary.push_back({2 * m.bus, 2 * m.bus + 1});
	}
	const auto n = static_cast<Eigen::Index>(mModel.numBuses());
	const auto& y = mModel.ybus();
	mNegYReal = Matrix::Zero(2 * n, 2 * n);
	for (Eigen::Index i = 0; i < n; ++i)
		for (Eigen::Index j = 0; j < n; ++j) {
			const double g = y(i, j).real(), b = y(i, j).imag();
			if (g == 0.0 && b == 0.0)
				continue;
			mNegYReal(2 * i, 2 * j) = -g;
			mNegYReal(2 * i, 2 * j + 1) = b;
			mNegYReal(2 * i + 1, 2 * j) = -b;
			mNegYReal(2 * i + 1, 2 * j + 1) = -g;
		}
}

DaeSystem::AlgebraicEvaluation PowerSystemDae::algebraic(const Vector& x, const Vector& y, double) const {
	AlgebraicEvaluation out;
	out.g = mNegYReal * y;
	out.dgdx = Matrix::Zero(numAlgebraic(), x.size());
	out.dgdy = mNegYReal;
	for (std::size_t k = 0; k < mMachines.size(); ++k) {
		const int bus = mModel.machines()[k].bus;
		const int off = static_cast<int>(k) * MachineState::kSize;
		const auto p = machineJacobians(mMachines[k].params(), MachineState::fromVec(x.segment<4>(off)),
			y[2 * bus], y[2 * bus + 1], mModel.frequencyHz());
		out.g.segment<2>(2 * bus) += p.current;
		out.dgdx.block<2, 4>(2 * bus, off) = p.didx;
		out.dgdy.block<2, 2>(2 * bus, 2 * bus) += p.didv;
	}
	return out;
}

Vector interleave(const ComplexVector& v) {
	Vector y(2 * v.size());
	for (Eigen::Index i = 0; i < v.size(); ++i) {
		y[2 * i] = v[i].real();
		y[2 * i + 1] = v[i].imag();
	}
	return y;
}

ComplexVector deinterleave(const Vector& y) {
	ComplexVector v(y.size() / 2);
	for (Eigen::Index i = 0; i < v.size(); ++i)
		v[i] = Complex(y[2 * i], y[2 * i + 1]);
	return v;
}

} // namespace hdae
