#include <hdae/oracle.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include <fmt/format.h>

#include <hdae/equilibrium.hpp>
#include <hdae/log.hpp>

namespace hdae {

namespace {

double trajectoryDeviation(const TrajectoryResult& a, const TrajectoryResult& b) {
	if (a.size() != b.size())
		throw OracleError("reference runs recorded different grids", 0.0);
	double d = 0.0;
	for (std::size_t r = 0; r < a.size(); ++r) {
		d = std::max(d, (a.x[r] - b.x[r]).cwiseAbs().maxCoeff());
		d = std::max(d, (a.y[r] - b.y[r]).cwiseAbs().maxCoeff());
	}
	return d;
}

} // namespace

ReferenceResult referenceTrajectory(const NetworkModel& model, const SystemState& initial, double tEnd,
	const std::vector<Disturbance>& disturbances, const ReferenceOptions& options) {
	if (!(options.hRef > 0.0) || !(options.tolerance > 0.0) || options.maxRefinements < 0)
		throw Error("invalid reference options");
	auto run = [&](double h) {
		SolverConfig cfg;
		cfg.h = h;
		cfg.reuseJacobian = true;
		auto traj = simulate(model, cfg, initial, tEnd, disturbances, {options.recordEvery, true});
		traj.throwIfFailed();
		return traj;
	};

	double h = options.hRef;
	TrajectoryResult coarse = run(h);
	for (int refinement = 0;; ++refinement) {
		TrajectoryResult fine = run(h / 2);
		const double dev = trajectoryDeviation(coarse, fine);
		log().info("reference check h = {:.4g} s: deviation {:.3e}", h, dev);
		if (dev < options.tolerance)
			return {std::move(fine), dev, h, refinement};
		if (refinement == options.maxRefinements)
			throw OracleError(fmt::format("reference self-check failed: h = {:.4g} s vs h/2 deviate by {:.3e} "
										  "(tolerance {:.1e})",
								  h, dev, options.tolerance),
				dev);
		h /= 2;
		coarse = std::move(fine);
	}
}

namespace {

Eigen::Vector4d rk4(const MachineParams& p, double freq, double h, const Eigen::Vector4d& x0, PolarVoltage yN,
	PolarVoltage yNp1, int substeps) {
	auto f = [&](double t, const Eigen::Vector4d& x) {
		const double v = linearProfile(yN.v, yNp1.v, t, h);
		const double th = linearAngleProfile(yN.theta, yNp1.theta, t, h);
		return machineF(p, MachineState::fromVec(x), v, th, freq);
	};
	const double dt = h / substeps;
	Eigen::Vector4d x = x0;
	for (int i = 0; i < substeps; ++i) {
		const double t = i * dt;
		// The last node is pinned to h so rounding never leaves [0, h].
		const double tMid = t + 0.5 * dt;
		const double tEnd = i + 1 == substeps ? h : t + dt;
		const Eigen::Vector4d k1 = f(t, x);
		const Eigen::Vector4d k2 = f(tMid, x + 0.5 * dt * k1);
		const Eigen::Vector4d k3 = f(tMid, x + 0.5 * dt * k2);
		const Eigen::Vector4d k4 = f(tEnd, x + dt * k3);
		x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
	}
	return x;
}

} // namespace

MachineState componentTruth(const MachineParams& p, double frequencyHz, double h, const MachineState& xN,
	PolarVoltage yN, PolarVoltage yNp1, const TruthOptions& options) {
	if (!(h > 0.0))
		throw DomainError("component truth needs h > 0");
	if (options.substeps < 1)
		throw Error("component truth needs at least one substep");
	const Eigen::Vector4d x0 = xN.vec();
	const Eigen::Vector4d a = rk4(p, frequencyHz, h, x0, yN, yNp1, options.substeps);
	const Eigen::Vector4d b = rk4(p, frequencyHz, h, x0, yN, yNp1, 2 * options.substeps);
	const double dev = (a - b).cwiseAbs().maxCoeff();
	if (!(dev < options.tolerance))
		throw OracleError(fmt::format("component truth halving check failed: {:.3e} (tolerance {:.1e})", dev,
							  options.tolerance),
			dev);
	return MachineState::fromVec(b);
}

MachineSetup machinePreset(const std::string& name) {
	static const std::vector<std::string> names{"m1", "m2", "m3"};
	const auto it = std::find(names.begin(), names.end(), name);
	if (it == names.end())
		throw Error("unknown machine preset '" + name + "' (expected m1, m2 or m3)");
	const auto k = static_cast<std::size_t>(it - names.begin());
	const auto eq = initEquilibrium(loadNetworkSource("ieee9"));
	MachineSetup out;
	out.params = eq.model.machines()[k].params;
	out.eqp = eq.state.x[4 * static_cast<Eigen::Index>(k) + MachineState::kEqp];
	out.edp = eq.state.x[4 * static_cast<Eigen::Index>(k) + MachineState::kEdp];
	out.frequencyHz = eq.model.frequencyHz();
	return out;
}

void parallelFor(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
	const auto workers = static_cast<std::size_t>(std::max(1, jobs));
	if (workers == 1 || n < 2) {
		for (std::size_t i = 0; i < n; ++i)
			fn(i);
		return;
	}
	std::atomic<std::size_t> next{0};
	std::exception_ptr failure;
	std::mutex failureMutex;
	std::vector<std::thread> pool;
	for (std::size_t w = 0; w < std::min(workers, n); ++w)
		pool.emplace_back([&] {
			for (std::size_t i = next++; i < n; i = next++) {
				try {
					fn(i);
				} catch (...) {
					std::lock_guard lock(failureMutex);
					if (!failure)
						failure = std::current_exception();
				}
			}
		});
	for (auto& t : pool)
		t.join();
	if (failure)
		std::rethrow_exception(failure);
}

namespace {

std::array<double, kMachineInputs> sampleInputs(const std::vector<InputSpec>& domain, std::uint64_t seed,
	std::size_t index) {
	if (domain.size() != kMachineInputs)
		throw DimensionError(fmt::format("machine domain needs {} inputs", kMachineInputs));
	std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
		static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32)};
	std::mt19937_64 rng(seq);
	std::array<double, kMachineInputs> out{};
	for (int k = 0; k < kMachineInputs; ++k) {
		const auto& in = domain[static_cast<std::size_t>(k)];
		// Own mapping instead of uniform_real_distribution: identical across standard libraries.
		const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
		out[static_cast<std::size_t>(k)] = in.lo + (in.hi - in.lo) * u;
	}
	return out;
}

} // namespace

std::vector<DatasetRecord> generateDatasetC(const std::vector<InputSpec>& domain, std::size_t count,
	std::uint64_t seed, int jobs) {
	std::vector<DatasetRecord> out(count);
	parallelFor(count, jobs, [&](std::size_t i) { out[i].inputs = sampleInputs(domain, seed, i); });
	return out;
}

std::vector<DatasetRecord> generateDatasetX(const MachineSetup& machine, const std::vector<InputSpec>& domain,
	std::size_t count, std::uint64_t seed, int jobs) {
	auto out = generateDatasetC(domain, count, seed, jobs);
	const bool classical = machine.params.classical;
	parallelFor(count, jobs, [&](std::size_t i) {
		const auto& in = out[i].inputs;
		const MachineState xN{machine.eqp, machine.edp, in[1], in[2]};
		const auto x = componentTruth(machine.params, machine.frequencyHz, in[0], xN, {in[3], 0.0}, {in[4], in[5]});
		if (classical)
			out[i].labels = {x.delta, x.dOmega};
		else
			out[i].labels = {x.eqp, x.edp, x.delta, x.dOmega};
	});
	return out;
}

std::vector<std::string> labelNames(const MachineSetup& machine) {
	if (machine.params.classical)
		return {"x_np1_delta", "x_np1_d_omega"};
	return {"x_np1_e_q_prime", "x_np1_e_d_prime", "x_np1_delta", "x_np1_d_omega"};
}

void writeDatasetCsv(const std::vector<InputSpec>& domain, const std::vector<std::string>& labels,
	const std::vector<DatasetRecord>& records, std::ostream& out) {
	std::string header;
	for (const auto& in : domain)
		header += (header.empty() ? "" : ",") + in.name;
	for (const auto& l : labels)
		header += "," + l;
	out << header << "\n";
	for (const auto& r : records) {
		if (!r.labels.empty() && r.labels.size() != labels.size())
			throw DimensionError("dataset record has the wrong number of labels");
		std::string line;
		for (std::size_t k = 0; k < r.inputs.size(); ++k)
			line += fmt::format("{}{:.17g}", k ? "," : "", r.inputs[k]);
		for (double l : r.labels)
			line += fmt::format(",{:.17g}", l);
		out << line << "\n";
	}
}

std::string machineSetupJson(const MachineSetup& m) {
	const auto& p = m.params;
	return fmt::format("{{\n  \"H\": {:.17g},\n  \"D\": {:.17g},\n  \"x_d\": {:.17g},\n  \"x_d_prime\": {:.17g},\n"
					   "  \"x_q\": {:.17g},\n  \"x_q_prime\": {:.17g},\n  \"r_s\": {:.17g},\n  \"t_d0_prime\": {:.17g},\n"
					   "  \"t_q0_prime\": {:.17g},\n  \"p_m\": {:.17g},\n  \"e_fd\": {:.17g},\n  \"classical\": {},\n"
					   "  \"e_q_prime\": {:.17g},\n  \"e_d_prime\": {:.17g},\n  \"frequency_hz\": {:.17g},\n"
					   "  \"machine_params_hash\": \"{}\"\n}}\n",
		p.inertia, p.damping, p.xd, p.xdp, p.xq, p.xqp, p.rs, p.tdop, p.tqop, p.pm, p.efd, p.classical, m.eqp, m.edp,
		m.frequencyHz, machineFingerprint(p, m.eqp, m.edp, m.frequencyHz));
}

} // namespace hdae
