#include <hdae/netmodel.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace hdae {

namespace {

std::string at(const std::string& base, std::size_t i) {
	return base + "[" + std::to_string(i) + "]";
}

const nlohmann::json& field(const nlohmann::json& obj, const std::string& path, const char* key) {
	if (!obj.is_object())
		throw SchemaError(path, "expected an object");
	auto it = obj.find(key);
	if (it == obj.end())
		throw SchemaError(path + "." + key, "missing field");
	return *it;
}

double number(const nlohmann::json& obj, const std::string& path, const char* key) {
	const auto& v = field(obj, path, key);
	if (!v.is_number())
		throw SchemaError(path + "." + key, "expected a number");
	double d = v.get<double>();
	if (!std::isfinite(d))
		throw SchemaError(path + "." + key, "not finite");
	return d;
}

double numberOr(const nlohmann::json& obj, const std::string& path, const char* key, double fallback) {
	if (!obj.contains(key))
		return fallback;
	return number(obj, path, key);
}

int integer(const nlohmann::json& obj, const std::string& path, const char* key) {
	const auto& v = field(obj, path, key);
	if (!v.is_number_integer())
		throw SchemaError(path + "." + key, "expected an integer");
	return v.get<int>();
}

const nlohmann::json& array(const nlohmann::json& doc, const char* key, bool required = true) {
	static const nlohmann::json empty = nlohmann::json::array();
	if (!doc.contains(key)) {
		if (required)
			throw SchemaError(key, "missing field");
		return empty;
	}
	const auto& v = doc.at(key);
	if (!v.is_array())
		throw SchemaError(key, "expected an array");
	return v;
}

BusKind parseKind(const nlohmann::json& v, const std::string& path) {
	if (!v.is_string())
		throw SchemaError(path, "expected a string");
	const auto s = v.get<std::string>();
	if (s == "generator-terminal")
		return BusKind::GeneratorTerminal;
	if (s == "load")
		return BusKind::Load;
	if (s == "connection")
		return BusKind::Connection;
	throw SchemaError(path, "unknown bus kind '" + s + "'");
}

void checkBus(int bus, std::size_t n, const std::string& path) {
	if (bus < 0 || static_cast<std::size_t>(bus) >= n)
		throw SchemaError(path, "dangling bus reference " + std::to_string(bus));
}

} // namespace

ComplexMatrix buildYbus(const std::vector<Bus>& buses, const std::vector<Branch>& branches,
	const std::vector<Load>& loads) {
	const auto n = static_cast<Eigen::Index>(buses.size());
	ComplexMatrix y = ComplexMatrix::Zero(n, n);
	for (const auto& bus : buses)
		y(bus.id, bus.id) += Complex(0.0, bus.shuntSusceptance);
	for (const auto& br : branches) {
		if (br.impedance == Complex(0.0, 0.0))
			throw Error("branch " + std::to_string(br.from) + "-" + std::to_string(br.to)
				+ " has zero series impedance");
		const Complex ys = 1.0 / br.impedance;
		const Complex half(0.0, 0.5 * br.shuntSusceptance);
		y(br.from, br.from) += ys + half;
		y(br.to, br.to) += ys + half;
		y(br.from, br.to) -= ys;
		y(br.to, br.from) -= ys;
	}
	for (const auto& ld : loads)
		y(ld.bus, ld.bus) += ld.admittance;
	return y;
}

NetworkModel::NetworkModel(std::vector<Bus> buses, std::vector<Branch> branches, std::vector<Load> loads,
	std::vector<MachineUnit> machines, double frequencyHz)
	: mBuses(std::move(buses)), mBranches(std::move(branches)), mLoads(std::move(loads)),
	  mMachines(std::move(machines)), mFrequencyHz(frequencyHz) {
	const auto n = mBuses.size();
	if (!(mFrequencyHz > 0.0))
		throw SchemaError("frequency_hz", "must be positive");
	for (std::size_t i = 0; i < n; ++i)
		if (mBuses[i].id != static_cast<int>(i))
			throw SchemaError(at("buses", i) + ".id", "bus ids must be unique and contiguous from 0");
	for (std::size_t i = 0; i < mBranches.size(); ++i) {
		const auto& br = mBranches[i];
		checkBus(br.from, n, at("branches", i) + ".from");
		checkBus(br.to, n, at("branches", i) + ".to");
		if (br.from == br.to)
			throw SchemaError(at("branches", i), "from and to bus coincide");
		if (br.impedance == Complex(0.0, 0.0))
			throw SchemaError(at("branches", i), "zero series impedance");
	}
	for (std::size_t i = 0; i < mLoads.size(); ++i) {
		checkBus(mLoads[i].bus, n, at("loads", i) + ".bus");
		if (!std::isfinite(mLoads[i].admittance.real()) || !std::isfinite(mLoads[i].admittance.imag()))
			throw SchemaError(at("loads", i), "admittance not finite");
	}
	std::vector<int> perBus(n, 0);
	for (std::size_t i = 0; i < mMachines.size(); ++i) {
		const auto& m = mMachines[i];
		checkBus(m.bus, n, at("machines", i) + ".bus");
		if (mBuses[m.bus].kind != BusKind::GeneratorTerminal)
			throw SchemaError(at("machines", i) + ".bus", "machine placed on a non generator-terminal bus");
		++perBus[m.bus];
		try {
			m.params.validate();
		} catch (const Error& e) {
			throw SchemaError(at("machines", i), e.what());
		}
		if (i > 0 && !m.vSet)
			throw SchemaError(at("machines", i) + ".v_set", "required for every non-reference machine");
	}
	for (std::size_t b = 0; b < n; ++b)
		if (mBuses[b].kind == BusKind::GeneratorTerminal && perBus[b] != 1)
			throw SchemaError(at("buses", b), "generator-terminal bus must host exactly one machine");
	mBaseYbus = buildYbus(mBuses, mBranches, mLoads);
	mLoadDeltas = ComplexVector::Zero(static_cast<Eigen::Index>(n));
	mYbus = mBaseYbus;
}

NetworkModel NetworkModel::withMachineParams(std::size_t machine, const MachineParams& p) const {
	p.validate();
	NetworkModel out = *this;
	out.mMachines.at(machine).params = p;
	return out;
}

NetworkModel NetworkModel::withLoadDelta(int bus, Complex delta) const {
	if (bus < 0 || static_cast<std::size_t>(bus) >= numBuses())
		throw Error("unknown bus " + std::to_string(bus));
	NetworkModel out = *this;
	// The delta is tracked apart from the base matrix so that a step and its
	// reversal restore the original entry exactly.
	out.mLoadDeltas[bus] += delta;
	out.mYbus(bus, bus) = mBaseYbus(bus, bus) + out.mLoadDeltas[bus];
	return out;
}

Vector networkResidual(const NetworkModel& model, const ComplexVector& machineCurrents,
	const ComplexVector& voltages) {
	const auto n = static_cast<Eigen::Index>(model.numBuses());
	if (voltages.size() != n || machineCurrents.size() != static_cast<Eigen::Index>(model.numMachines()))
		throw DimensionError("networkResidual: dimension mismatch");
	ComplexVector mismatch = -(model.ybus() * voltages);
	for (std::size_t k = 0; k < model.numMachines(); ++k)
		mismatch[model.machines()[k].bus] += machineCurrents[static_cast<Eigen::Index>(k)];
	Vector r(2 * n);
	for (Eigen::Index i = 0; i < n; ++i) {
		r[2 * i] = mismatch[i].real();
		r[2 * i + 1] = mismatch[i].imag();
	}
	return r;
}

NetworkModel applyDisturbance(const NetworkModel& model, const Disturbance& d) {
	if (!(d.time >= 0.0))
		throw Error("disturbance time must be non-negative");
	switch (d.kind) {
	case Disturbance::Kind::MechanicalPowerStep: {
		if (d.target < 0 || static_cast<std::size_t>(d.target) >= model.numMachines())
			throw Error("disturbance targets unknown machine " + std::to_string(d.target));
		auto p = model.machines()[d.target].params;
		p.pm += d.magnitude.real();
		return model.withMachineParams(static_cast<std::size_t>(d.target), p);
	}
	case Disturbance::Kind::LoadAdmittanceStep:
		if (d.target < 0 || static_cast<std::size_t>(d.target) >= model.numBuses())
			throw Error("disturbance targets unknown bus " + std::to_string(d.target));
		return model.withLoadDelta(d.target, d.magnitude);
	}
	throw Error("unknown disturbance kind");
}

NetworkModel loadNetwork(const nlohmann::json& doc) {
	if (!doc.is_object())
		throw SchemaError("$", "expected an object");
	const double freq = number(doc, "$", "frequency_hz");

	std::vector<Bus> buses;
	const auto& jb = array(doc, "buses");
	for (std::size_t i = 0; i < jb.size(); ++i) {
		const auto path = at("buses", i);
		Bus b;
		b.id = integer(jb[i], path, "id");
		b.kind = parseKind(field(jb[i], path, "kind"), path + ".kind");
		b.baseVoltage = numberOr(jb[i], path, "base_voltage", 1.0);
		b.shuntSusceptance = numberOr(jb[i], path, "b_shunt", 0.0);
		buses.push_back(b);
	}

	std::vector<Branch> branches;
	const auto& jbr = array(doc, "branches");
	for (std::size_t i = 0; i < jbr.size(); ++i) {
		const auto path = at("branches", i);
		Branch br;
		br.from = integer(jbr[i], path, "from");
		br.to = integer(jbr[i], path, "to");
		br.impedance = {number(jbr[i], path, "r"), number(jbr[i], path, "x")};
		br.shuntSusceptance = numberOr(jbr[i], path, "b_shunt", 0.0);
		branches.push_back(br);
	}

	std::vector<Load> loads;
	const auto& jl = array(doc, "loads", false);
	for (std::size_t i = 0; i < jl.size(); ++i) {
		const auto path = at("loads", i);
		// Constant impedance drawing (p + jq) at 1.0 p.u.: y = conj(S) / |V|^2.
		loads.push_back({integer(jl[i], path, "bus"), {number(jl[i], path, "p"), -number(jl[i], path, "q")}});
	}

	std::vector<MachineUnit> machines;
	const auto& jm = array(doc, "machines");
	for (std::size_t i = 0; i < jm.size(); ++i) {
		const auto path = at("machines", i);
		const auto& m = jm[i];
		MachineUnit u;
		u.bus = integer(m, path, "bus");
		auto& p = u.params;
		p.inertia = number(m, path, "H");
		p.damping = number(m, path, "D");
		p.xd = number(m, path, "x_d");
		p.xdp = number(m, path, "x_d_prime");
		p.rs = number(m, path, "r_s");
		p.pm = number(m, path, "p_m");
		p.efd = number(m, path, "e_fd");
		p.classical = m.contains("classical") && field(m, path, "classical").get<bool>();
		p.xq = numberOr(m, path, "x_q", p.classical ? p.xdp : p.xd);
		p.xqp = numberOr(m, path, "x_q_prime", p.xdp);
		p.tdop = numberOr(m, path, "t_d0_prime", 0.0);
		p.tqop = numberOr(m, path, "t_q0_prime", 0.0);
		if (p.classical)
			p = p.classicalReduction();
		if (m.contains("v_set"))
			u.vSet = number(m, path, "v_set");
		machines.push_back(u);
	}
	return NetworkModel(std::move(buses), std::move(branches), std::move(loads), std::move(machines), freq);
}

NetworkModel loadNetworkText(std::string_view text) {
	nlohmann::json doc;
	try {
		doc = nlohmann::json::parse(text);
	} catch (const nlohmann::json::parse_error& e) {
		throw SchemaError("$", e.what());
	}
	return loadNetwork(doc);
}

NetworkModel loadNetworkSource(const std::string& presetOrPath) {
	if (presetOrPath == "ieee9" || presetOrPath == "ieee57")
		return loadNetworkText(presetDocument(presetOrPath));
	std::ifstream in(presetOrPath);
	if (!in)
		throw Error("cannot open network file '" + presetOrPath + "'");
	std::stringstream ss;
	ss << in.rdbuf();
	return loadNetworkText(ss.str());
}

} // namespace hdae
