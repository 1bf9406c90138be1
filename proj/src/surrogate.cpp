#include <hdae/surrogate.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include <hdae/log.hpp>

namespace hdae {

SurrogateNet::SurrogateNet(std::vector<DenseLayer> layers, std::vector<InputSpec> inputs, Vector outputScale,
	double hMax, Provenance provenance)
	: mLayers(std::move(layers)), mInputs(std::move(inputs)), mOutputScale(std::move(outputScale)), mHMax(hMax),
	  mProvenance(std::move(provenance)) {
	if (mLayers.empty())
		throw DimensionError("surrogate needs at least an output layer");
	if (!(mHMax > 0.0))
		throw Error("surrogate h_max must be positive");
	for (const auto& in : mInputs)
		if (!(in.hi > in.lo))
			throw Error("input '" + in.name + "' has an empty normalization range");
	for (Eigen::Index i = 0; i < mOutputScale.size(); ++i)
		if (!(mOutputScale[i] > 0.0))
			throw Error("output_scale entries must be positive");
	Eigen::Index width = static_cast<Eigen::Index>(mInputs.size());
	for (std::size_t k = 0; k < mLayers.size(); ++k) {
		const auto& l = mLayers[k];
		if (l.w.cols() != width)
			throw DimensionError(fmt::format("layer {} has {} columns, expected {}", k, l.w.cols(), width));
		if (l.b.size() != l.w.rows())
			throw DimensionError(fmt::format("layer {} bias length {} differs from {} rows", k, l.b.size(),
				l.w.rows()));
		width = l.w.rows();
	}
	if (width != mOutputScale.size())
		throw DimensionError(fmt::format("output layer has {} rows but output_scale has {} entries", width,
			mOutputScale.size()));
}

Vector SurrogateNet::normalize(std::span<const double> features) const {
	if (static_cast<int>(features.size()) != numInputs())
		throw DimensionError(fmt::format("surrogate expects {} inputs, got {}", numInputs(), features.size()));
	Vector z(numInputs());
	for (int i = 0; i < numInputs(); ++i) {
		const auto& in = mInputs[i];
		z[i] = 2.0 * (features[i] - in.lo) / (in.hi - in.lo) - 1.0;
	}
	return z;
}

Vector SurrogateNet::increment(std::span<const double> features) const {
	Vector z = normalize(features);
	for (const auto& l : mLayers)
		z = (l.w * z + l.b).array().tanh().matrix();
	return mOutputScale.cwiseProduct(z);
}

std::pair<Vector, Matrix> SurrogateNet::incrementWithJacobian(std::span<const double> features) const {
	Vector z = normalize(features);
	Matrix dz = Matrix::Zero(numInputs(), numInputs());
	for (int i = 0; i < numInputs(); ++i)
		dz(i, i) = 2.0 / (mInputs[i].hi - mInputs[i].lo);
	for (const auto& l : mLayers) {
		z = (l.w * z + l.b).array().tanh().matrix();
		const Vector slope = (1.0 - z.array().square()).matrix();
		dz = slope.asDiagonal() * (l.w * dz);
	}
	return {mOutputScale.cwiseProduct(z), mOutputScale.asDiagonal() * dz};
}

std::vector<InputSpec> machineInputDomain(double hMin, double hMax) {
	return {
		{"h", hMin, hMax},
		{"delta_minus_theta", 0.0, kPi / 3.0},
		{"d_omega", -0.015, 0.015},
		{"v_n", 0.97, 1.03},
		{"v_np1", 0.97, 1.03},
		{"d_theta", -kPi, kPi},
	};
}

std::array<double, kMachineInputs> machineFeatures(double h, const MachineState& xN, PolarVoltage yN,
	PolarVoltage yNp1) {
	return {h, wrapAngle(xN.delta - yN.theta), xN.dOmega, yN.v, yNp1.v, wrapAngle(yNp1.theta - yN.theta)};
}

namespace {

void checkMachineNet(const SurrogateNet& net) {
	if (net.numInputs() != kMachineInputs)
		throw DimensionError(fmt::format("machine surrogate needs {} inputs, has {}", kMachineInputs,
			net.numInputs()));
	if (net.numOutputs() != 2 && net.numOutputs() != MachineState::kSize)
		throw DimensionError("machine surrogate must have 2 or 4 outputs");
}

/// Row of the machine state vector driven by output k.
int stateRow(const SurrogateNet& net, int k) {
	return net.numOutputs() == 2 ? MachineState::kDelta + k : k;
}

} // namespace

MachineState forward(const SurrogateNet& net, double h, const MachineState& xN, PolarVoltage yN,
	PolarVoltage yNp1) {
	checkMachineNet(net);
	if (h < 0.0)
		throw Error("surrogate step must be non-negative");
	const auto features = machineFeatures(h, xN, yN, yNp1);
	const Vector inc = net.increment(features);
	Eigen::Vector4d x = xN.vec();
	for (int k = 0; k < net.numOutputs(); ++k)
		x[stateRow(net, k)] += h * inc[k];
	return MachineState::fromVec(x);
}

ForwardJacobian inputJacobian(const SurrogateNet& net, double h, const MachineState& xN, PolarVoltage yN,
	PolarVoltage yNp1) {
	checkMachineNet(net);
	const auto features = machineFeatures(h, xN, yN, yNp1);
	const auto [inc, jf] = net.incrementWithJacobian(features);
	ForwardJacobian out;
	out.dh.setZero();
	out.dxN.setIdentity();
	out.dyN.setZero();
	out.dyNp1.setZero();
	for (int k = 0; k < net.numOutputs(); ++k) {
		const int row = stateRow(net, k);
		out.dh[row] = inc[k] + h * jf(k, 0);
		out.dxN(row, MachineState::kDelta) += h * jf(k, 1);
		out.dxN(row, MachineState::kDOmega) += h * jf(k, 2);
		out.dyN(row, 0) = h * jf(k, 3);
		out.dyN(row, 1) = -h * (jf(k, 1) + jf(k, 5));
		out.dyNp1(row, 0) = h * jf(k, 4);
		out.dyNp1(row, 1) = h * jf(k, 5);
	}
	return out;
}

MachineSurrogateModel::MachineSurrogateModel(std::shared_ptr<const SurrogateNet> net, DomainPolicy policy)
	: mNet(std::move(net)), mPolicy(policy) {
	if (!mNet)
		throw Error("machine surrogate model needs a network");
	checkMachineNet(*mNet);
}

IncrementModel::Result MachineSurrogateModel::evaluate(double h, const Vector& xN, const Vector& yN,
	const Vector& yNp1) const {
	if (xN.size() != MachineState::kSize || yN.size() != 2 || yNp1.size() != 2)
		throw DimensionError("machine surrogate: input dimension mismatch");
	const PolarVoltage pN{std::hypot(yN[0], yN[1]), std::atan2(yN[1], yN[0])};
	const double vNp1 = std::hypot(yNp1[0], yNp1[1]);
	const PolarVoltage pNp1{vNp1, std::atan2(yNp1[1], yNp1[0])};
	auto features = machineFeatures(h, MachineState::fromVec(xN), pN, pNp1);

	std::array<bool, kMachineInputs> clamped{};
	const auto& domain = mNet->inputs();
	for (int i = 0; i < kMachineInputs; ++i) {
		if (features[i] >= domain[i].lo && features[i] <= domain[i].hi)
			continue;
		if (mPolicy == DomainPolicy::Reject)
			throw DomainError(fmt::format("surrogate input '{}' = {:.6g} outside [{:.6g}, {:.6g}]", domain[i].name,
				features[i], domain[i].lo, domain[i].hi));
		log().warn("surrogate input '{}' = {:.6g} clamped to [{:.6g}, {:.6g}]", domain[i].name, features[i],
			domain[i].lo, domain[i].hi);
		features[i] = std::clamp(features[i], domain[i].lo, domain[i].hi);
		clamped[i] = true;
	}

	const auto [inc, jf] = mNet->incrementWithJacobian(features);
	Result out;
	out.increment = Vector::Zero(MachineState::kSize);
	out.dIncrementDyNp1 = Matrix::Zero(MachineState::kSize, 2);
	// d(V, theta)/d(V_re, V_im) at the end of the step
	Eigen::Matrix2d polar;
	polar << yNp1[0] / vNp1, yNp1[1] / vNp1, -yNp1[1] / (vNp1 * vNp1), yNp1[0] / (vNp1 * vNp1);
	for (int k = 0; k < mNet->numOutputs(); ++k) {
		const int row = stateRow(*mNet, k);
		out.increment[row] = inc[k];
		const double dV = clamped[4] ? 0.0 : jf(k, 4);
		const double dTheta = clamped[5] ? 0.0 : jf(k, 5);
		out.dIncrementDyNp1.row(row) = Eigen::RowVector2d(dV, dTheta) * polar;
	}
	return out;
}

std::string machineFingerprint(const MachineParams& p, double eqp, double edp, double frequencyHz) {
	const std::string text = fmt::format(
		"{:.17g};{:.17g};{:.17g};{:.17g};{:.17g};{:.17g};{:.17g};{:.17g};{:.17g};{:.17g};{:.17g};{};{:.17g};"
		"{:.17g};{:.17g}",
		p.inertia, p.damping, p.xd, p.xdp, p.xq, p.xqp, p.rs, p.tdop, p.tqop, p.pm, p.efd, p.classical ? 1 : 0,
		eqp, edp, frequencyHz);
	// FNV-1a, 64 bit
	std::uint64_t hash = 0xcbf29ce484222325ULL;
	for (unsigned char c : text) {
		hash ^= c;
		hash *= 0x100000001b3ULL;
	}
	return fmt::format("{:016x}", hash);
}

namespace {

std::string num(double v) {
	return fmt::format("{:.17g}", v);
}

std::string quoted(const std::string& s) {
	return nlohmann::json(s).dump();
}

template <typename Range>
std::string numList(const Range& values) {
	std::string out = "[";
	bool first = true;
	for (double v : values) {
		if (!first)
			out += ", ";
		out += num(v);
		first = false;
	}
	return out + "]";
}

} // namespace

std::string serializeWeights(const SurrogateNet& net) {
	std::string out = "{\n";
	out += fmt::format("  \"schema\": {},\n", kWeightSchemaVersion);
	out += "  \"activation\": \"tanh\",\n";
	out += fmt::format("  \"h_max_s\": {},\n", num(net.hMax()));
	out += "  \"inputs\": [\n";
	for (std::size_t i = 0; i < net.inputs().size(); ++i) {
		const auto& in = net.inputs()[i];
		out += fmt::format("    {{\"name\": {}, \"lo\": {}, \"hi\": {}}}{}\n", quoted(in.name), num(in.lo),
			num(in.hi), i + 1 < net.inputs().size() ? "," : "");
	}
	out += "  ],\n";
	const auto& s = net.outputScale();
	out += "  \"output_scale\": " + numList(std::vector<double>(s.data(), s.data() + s.size())) + ",\n";
	out += "  \"layers\": [\n";
	for (std::size_t k = 0; k < net.layers().size(); ++k) {
		const auto& l = net.layers()[k];
		std::vector<double> w;
		w.reserve(static_cast<std::size_t>(l.w.size()));
		for (Eigen::Index r = 0; r < l.w.rows(); ++r)
			for (Eigen::Index c = 0; c < l.w.cols(); ++c)
				w.push_back(l.w(r, c));
		out += fmt::format("    {{\"rows\": {}, \"cols\": {},\n     \"w\": {},\n     \"b\": {}}}{}\n", l.w.rows(),
			l.w.cols(), numList(w), numList(std::vector<double>(l.b.data(), l.b.data() + l.b.size())),
			k + 1 < net.layers().size() ? "," : "");
	}
	out += "  ],\n";
	const auto& p = net.provenance();
	out += fmt::format("  \"provenance\": {{\"machine_params_hash\": {}, \"trained_at\": {}, \"epochs\": {}, "
					   "\"seed\": {}}}\n",
		quoted(p.machineParamsHash), quoted(p.trainedAt), p.epochs, p.seed);
	out += "}\n";
	return out;
}

namespace {

const nlohmann::json& need(const nlohmann::json& obj, const std::string& path, const char* key) {
	if (!obj.is_object())
		throw SchemaError(path, "expected an object");
	auto it = obj.find(key);
	if (it == obj.end())
		throw SchemaError(path.empty() ? key : path + "." + key, "missing field");
	return *it;
}

double needNumber(const nlohmann::json& obj, const std::string& path, const char* key) {
	const auto& v = need(obj, path, key);
	if (!v.is_number())
		throw SchemaError(path.empty() ? key : path + "." + key, "expected a number");
	return v.get<double>();
}

std::vector<double> needNumbers(const nlohmann::json& obj, const std::string& path, const char* key) {
	const auto& v = need(obj, path, key);
	const std::string where = path.empty() ? key : path + "." + key;
	if (!v.is_array())
		throw SchemaError(where, "expected an array");
	std::vector<double> out;
	out.reserve(v.size());
	for (const auto& e : v) {
		if (!e.is_number())
			throw SchemaError(where, "expected numbers");
		out.push_back(e.get<double>());
	}
	return out;
}

} // namespace

SurrogateNet parseWeights(std::string_view text) {
	nlohmann::json doc;
	try {
		doc = nlohmann::json::parse(text);
	} catch (const nlohmann::json::parse_error& e) {
		throw SchemaError("$", e.what());
	}
	if (!doc.is_object())
		throw SchemaError("$", "expected an object");
	const auto& schema = need(doc, "", "schema");
	if (!schema.is_number_integer() || schema.get<int>() != kWeightSchemaVersion)
		throw SchemaError("schema", "unsupported weight schema version " + schema.dump());
	const auto& act = need(doc, "", "activation");
	if (!act.is_string() || act.get<std::string>() != "tanh")
		throw SchemaError("activation", "only tanh is supported");
	const double hMax = needNumber(doc, "", "h_max_s");

	const auto& jin = need(doc, "", "inputs");
	if (!jin.is_array() || jin.empty())
		throw SchemaError("inputs", "missing normalization metadata");
	std::vector<InputSpec> inputs;
	for (std::size_t i = 0; i < jin.size(); ++i) {
		const std::string path = fmt::format("inputs[{}]", i);
		const auto& name = need(jin[i], path, "name");
		if (!name.is_string())
			throw SchemaError(path + ".name", "expected a string");
		inputs.push_back({name.get<std::string>(), needNumber(jin[i], path, "lo"), needNumber(jin[i], path, "hi")});
	}

	const auto scale = needNumbers(doc, "", "output_scale");
	const auto& jl = need(doc, "", "layers");
	if (!jl.is_array())
		throw SchemaError("layers", "expected an array");
	std::vector<DenseLayer> layers;
	for (std::size_t k = 0; k < jl.size(); ++k) {
		const std::string path = fmt::format("layers[{}]", k);
		const auto& rows = need(jl[k], path, "rows");
		const auto& cols = need(jl[k], path, "cols");
		if (!rows.is_number_integer() || !cols.is_number_integer() || rows.get<long>() <= 0 || cols.get<long>() <= 0)
			throw SchemaError(path, "rows/cols must be positive integers");
		const auto r = rows.get<Eigen::Index>(), c = cols.get<Eigen::Index>();
		const auto w = needNumbers(jl[k], path, "w");
		const auto b = needNumbers(jl[k], path, "b");
		if (static_cast<Eigen::Index>(w.size()) != r * c)
			throw SchemaError(path + ".w", fmt::format("expected {} entries, got {}", r * c, w.size()));
		if (static_cast<Eigen::Index>(b.size()) != r)
			throw SchemaError(path + ".b", fmt::format("expected {} entries, got {}", r, b.size()));
		DenseLayer layer;
		layer.w = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(w.data(), r, c);
		layer.b = Eigen::Map<const Vector>(b.data(), r);
		layers.push_back(std::move(layer));
	}

	Provenance prov;
	if (doc.contains("provenance")) {
		const auto& p = doc.at("provenance");
		if (!p.is_object())
			throw SchemaError("provenance", "expected an object");
		prov.machineParamsHash = p.value("machine_params_hash", std::string{});
		prov.trainedAt = p.value("trained_at", std::string{});
		prov.epochs = p.value("epochs", std::int64_t{0});
		prov.seed = p.value("seed", std::uint64_t{0});
	}
	try {
		return SurrogateNet(std::move(layers), std::move(inputs), Eigen::Map<const Vector>(scale.data(),
			static_cast<Eigen::Index>(scale.size())), hMax, std::move(prov));
	} catch (const DimensionError& e) {
		throw SchemaError("layers", std::string("dimension chain mismatch: ") + e.what());
	}
}

void saveWeights(const SurrogateNet& net, const std::filesystem::path& path) {
	const auto tmp = path.string() + ".tmp";
	{
		std::ofstream out(tmp);
		if (!out)
			throw Error("cannot write '" + tmp + "'");
		out << serializeWeights(net);
		if (!out)
			throw Error("write failed for '" + tmp + "'");
	}
	std::filesystem::rename(tmp, path);
}

SurrogateNet loadWeights(const std::filesystem::path& path) {
	std::ifstream in(path);
	if (!in)
		throw Error("cannot open weight file '" + path.string() + "'");
	std::stringstream ss;
	ss << in.rdbuf();
	return parseWeights(ss.str());
}

std::vector<std::string> selfCheck(const SurrogateNet& net, int points, std::uint64_t seed) {
	std::vector<std::string> failures;
	std::mt19937_64 rng(seed);
	const auto& domain = net.inputs();
	const double bound = net.outputScale().maxCoeff();
	for (int p = 0; p < points; ++p) {
		std::vector<double> f(domain.size());
		for (std::size_t i = 0; i < domain.size(); ++i)
			f[i] = std::uniform_real_distribution<double>(domain[i].lo, domain[i].hi)(rng);
		const auto [inc, jac] = net.incrementWithJacobian(f);
		if (!inc.allFinite()) {
			failures.push_back(fmt::format("point {}: non-finite output", p));
			continue;
		}
		if (inc.cwiseAbs().maxCoeff() > bound)
			failures.push_back(fmt::format("point {}: increment exceeds output scale", p));
		if (net.increment(f) != inc)
			failures.push_back(fmt::format("point {}: forward is not deterministic", p));
		for (std::size_t i = 0; i < domain.size(); ++i) {
			const double step = 1e-6 * std::max(1.0, domain[i].hi - domain[i].lo);
			auto fp = f, fm = f;
			fp[i] += step;
			fm[i] -= step;
			const Vector fd = (net.increment(fp) - net.increment(fm)) / (2.0 * step);
			for (Eigen::Index k = 0; k < fd.size(); ++k) {
				const double a = jac(k, static_cast<Eigen::Index>(i));
				if (std::abs(a - fd[k]) > 1e-6 * std::max(1.0, std::abs(a)))
					failures.push_back(fmt::format("point {}: d out[{}] / d {} analytic {:.10g} vs FD {:.10g}", p, k,
						domain[i].name, a, fd[k]));
			}
		}
		if (net.numInputs() == kMachineInputs && (net.numOutputs() == 2 || net.numOutputs() == 4)) {
			const MachineState x{1.0, 0.0, f[1], f[2]};
			const PolarVoltage yN{f[3], 0.0}, yNp1{f[4], f[5]};
			const auto hard = forward(net, 0.0, x, yN, yNp1);
			if (hard.vec() != x.vec())
				failures.push_back(fmt::format("point {}: h = 0 does not reproduce x_n", p));
		}
	}
	return failures;
}

} // namespace hdae
