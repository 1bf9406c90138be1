#include <hdae/harness.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include <hdae/log.hpp>

namespace hdae {

SolverSpec pureSolver() {
	return {"pure", {}, nullptr, DomainPolicy::Reject};
}

SolverSpec hybridSolver(std::size_t numMachines, const std::vector<int>& surrogateMachines,
	std::shared_ptr<const SurrogateNet> net, DomainPolicy policy) {
	if (!net)
		throw Error("the hybrid solver needs surrogate weights");
	SolverSpec spec{"hybrid", std::vector<Method>(numMachines, Method::Trapezoidal), std::move(net), policy};
	for (int k : surrogateMachines) {
		if (k < 0 || static_cast<std::size_t>(k) >= numMachines)
			throw Error(fmt::format("surrogate machine {} does not exist", k + 1));
		spec.methods[static_cast<std::size_t>(k)] = Method::Surrogate;
	}
	return spec;
}

SolverSpec parseSolver(const std::string& text, std::size_t numMachines, const std::vector<int>& surrogateMachines,
	std::shared_ptr<const SurrogateNet> net, DomainPolicy policy) {
	if (text == "pure")
		return pureSolver();
	if (text == "hybrid")
		return hybridSolver(numMachines, surrogateMachines, std::move(net), policy);
	const std::string prefix = "custom:";
	if (text.rfind(prefix, 0) != 0)
		throw Error("solver must be pure, hybrid or custom:<map>, got '" + text + "'");
	// Commas would break the report CSVs.
	std::string label = text;
	std::replace(label.begin(), label.end(), ',', '+');
	SolverSpec spec{label, std::vector<Method>(numMachines, Method::Trapezoidal), nullptr, policy};
	std::stringstream ss(text.substr(prefix.size()));
	std::string item;
	bool needsNet = false;
	while (std::getline(ss, item, ',')) {
		const auto eq = item.find('=');
		if (eq == std::string::npos)
			throw Error("custom solver entry '" + item + "' must read <machine>=<method>");
		int k = 0;
		try {
			std::size_t used = 0;
			k = std::stoi(item.substr(0, eq), &used);
			if (used != eq)
				throw std::invalid_argument("trailing characters");
		} catch (const std::exception&) {
			throw Error("custom solver entry '" + item + "' has a bad machine number");
		}
		if (k < 1 || static_cast<std::size_t>(k) > numMachines)
			throw Error(fmt::format("custom solver: machine {} does not exist", k));
		const std::string m = item.substr(eq + 1);
		Method method;
		if (m == "trap")
			method = Method::Trapezoidal;
		else if (m == "be")
			method = Method::BackwardEuler;
		else if (m == "pinn") {
			method = Method::Surrogate;
			needsNet = true;
		} else
			throw Error("custom solver: unknown method '" + m + "' (trap, be, pinn)");
		spec.methods[static_cast<std::size_t>(k - 1)] = method;
	}
	if (needsNet) {
		if (!net)
			throw Error("custom solver uses pinn but no weights were given");
		spec.net = std::move(net);
	}
	return spec;
}

std::vector<int> defaultSurrogateMachines(const std::string& preset) {
	if (preset == "ieee9")
		return {2};
	if (preset == "ieee57")
		return {1, 2, 4, 6}; // machines at buses 2, 3, 8 and 12
	return {};
}

SolverConfig makeSolverConfig(const SolverSpec& spec, std::size_t numMachines, double h) {
	SolverConfig cfg;
	cfg.h = h;
	if (spec.methods.empty())
		return cfg;
	if (spec.methods.size() != numMachines)
		throw DimensionError(fmt::format("solver '{}' assigns {} machines, network has {}", spec.label,
			spec.methods.size(), numMachines));
	const auto trap = std::make_shared<TrapezoidalRule>();
	const auto be = std::make_shared<BackwardEuler>();
	std::shared_ptr<const Algebraizer> surrogate;
	for (auto m : spec.methods) {
		switch (m) {
		case Method::Trapezoidal:
			cfg.algebraizers.push_back(trap);
			break;
		case Method::BackwardEuler:
			cfg.algebraizers.push_back(be);
			break;
		case Method::Surrogate:
			if (!spec.net)
				throw Error("solver '" + spec.label + "' needs surrogate weights");
			if (!surrogate)
				surrogate = std::make_shared<SurrogateAlgebraizer>(
					std::make_shared<MachineSurrogateModel>(spec.net, spec.policy), "pinn");
			cfg.algebraizers.push_back(surrogate);
			break;
		}
	}
	return cfg;
}

Scenario equilibriumScenario(const NetworkModel& model, std::vector<Disturbance> disturbances, double tEnd) {
	auto eq = initEquilibrium(model);
	return {eq.model, eq.state, std::move(disturbances), tEnd, {}};
}

Stats summarize(std::vector<double> values) {
	Stats s;
	s.count = values.size();
	if (values.empty())
		return s;
	std::sort(values.begin(), values.end());
	auto quantile = [&](double q) {
		const double pos = q * static_cast<double>(values.size() - 1);
		const auto lo = static_cast<std::size_t>(std::floor(pos));
		const auto hi = std::min(lo + 1, values.size() - 1);
		return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
	};
	s.max = values.back();
	s.median = quantile(0.5);
	s.q1 = quantile(0.25);
	s.q3 = quantile(0.75);
	s.iqr = s.q3 - s.q1;
	s.whisker = std::min(s.q3 + 1.5 * s.iqr, s.max);
	return s;
}

const std::vector<double>& ErrorReport::series(const std::string& variable) const {
	const auto it = std::find(variables.begin(), variables.end(), variable);
	if (it == variables.end())
		throw Error("report has no variable '" + variable + "'");
	return errors[static_cast<std::size_t>(it - variables.begin())];
}

double ErrorReport::maxError(const std::string& variable) const {
	const auto& s = series(variable);
	return s.empty() ? 0.0 : *std::max_element(s.begin(), s.end());
}

namespace {

std::vector<std::string> variableNames(std::size_t machines, std::size_t buses) {
	std::vector<std::string> out;
	for (const char* kind : {"delta", "load_angle", "domega"})
		for (std::size_t k = 1; k <= machines; ++k)
			out.push_back(fmt::format("{}_{}", kind, k));
	for (std::size_t j = 1; j <= buses; ++j)
		out.push_back(fmt::format("V_{}", j));
	return out;
}

} // namespace

std::vector<std::string> reportVariables(const NetworkModel& model) {
	return variableNames(model.numMachines(), model.numBuses());
}

double reportValue(const TrajectoryResult& traj, std::size_t row, const std::string& variable) {
	const auto us = variable.rfind('_');
	if (us == std::string::npos)
		throw Error("bad report variable '" + variable + "'");
	const std::string kind = variable.substr(0, us);
	const std::string digits = variable.substr(us + 1);
	if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos || digits.size() > 6)
		throw Error("bad report variable '" + variable + "'");
	const auto number = std::stoul(digits);
	const bool isBus = kind == "V";
	const auto limit = isBus ? traj.numBuses : traj.numMachines();
	if (number < 1 || number > limit)
		throw Error("report variable '" + variable + "' is out of range");
	const auto index = static_cast<std::size_t>(number) - 1;
	if (kind == "delta")
		return traj.delta(row, index);
	if (kind == "load_angle")
		return traj.loadAngle(row, index);
	if (kind == "domega")
		return traj.dOmega(row, index);
	if (kind == "V")
		return traj.voltage(row, index);
	throw Error("bad report variable '" + variable + "'");
}

ErrorReport compareToTruth(const std::string& solver, double h, const TrajectoryResult& predicted,
	const TrajectoryResult& truth) {
	if (truth.size() < 2 && predicted.size() > 1)
		throw DimensionError("truth grid is too short");
	ErrorReport rep;
	rep.solver = solver;
	rep.h = h;
	rep.completed = predicted.completed;
	rep.failure = predicted.failure;
	const double dt = truth.size() > 1 ? truth.t[1] - truth.t[0] : 1.0;
	std::vector<std::size_t> rows;
	for (std::size_t r = 0; r < predicted.size(); ++r) {
		const auto idx = static_cast<std::size_t>(std::llround(predicted.t[r] / dt));
		std::size_t match = idx;
		// The truth's last row may sit at t_end off the regular grid.
		if (match >= truth.size() || std::abs(truth.t[match] - predicted.t[r]) > 1e-9) {
			if (std::abs(truth.t.back() - predicted.t[r]) <= 1e-9)
				match = truth.size() - 1;
			else
				throw DimensionError(fmt::format("grid mismatch: no truth sample at t = {:.9g}", predicted.t[r]));
		}
		rows.push_back(match);
		rep.t.push_back(predicted.t[r]);
	}
	const auto vars = variableNames(predicted.numMachines(), predicted.numBuses);
	rep.variables = vars;
	for (const auto& v : vars) {
		std::vector<double> e;
		for (std::size_t r = 0; r < predicted.size(); ++r) {
			double d = reportValue(predicted, r, v) - reportValue(truth, rows[r], v);
			if (v.rfind("load_angle", 0) == 0)
				d = wrapAngle(d);
			e.push_back(std::abs(d));
		}
		rep.errors.push_back(std::move(e));
	}
	return rep;
}

std::vector<Disturbance> snapDisturbances(const std::vector<Disturbance>& disturbances, double h) {
	auto out = disturbances;
	for (auto& d : out)
		d.time = static_cast<double>(std::llround(d.time / h)) * h;
	return out;
}

namespace {

TrajectoryResult runSolver(const Scenario& scenario, const SolverSpec& spec, const SystemState& initial, double h,
	double tEnd, const std::vector<Disturbance>& disturbances) {
	const auto cfg = makeSolverConfig(spec, scenario.model.numMachines(), h);
	return simulate(scenario.model, cfg, initial, tEnd, disturbances);
}

std::string disturbanceKey(const std::vector<Disturbance>& ds) {
	std::string key;
	for (const auto& d : ds)
		key += fmt::format("{:.17g};", d.time);
	return key;
}

std::vector<std::string> machineVariables(const Scenario& scenario, int machine) {
	const auto k = machine + 1;
	const auto bus = scenario.model.machines().at(static_cast<std::size_t>(machine)).bus + 1;
	return {fmt::format("delta_{}", k), fmt::format("load_angle_{}", k), fmt::format("domega_{}", k),
		fmt::format("V_{}", bus)};
}

/// Reference options whose recording grid contains every step in `hs`.
ReferenceOptions truthOptions(const ReferenceOptions& base, const std::vector<double>& hs) {
	long long ticks = 0;
	for (double h : hs) {
		const long long n = std::llround(h / base.hRef);
		if (n < 1 || std::abs(static_cast<double>(n) * base.hRef - h) > 1e-9 * h)
			throw Error(fmt::format("step {} s is not a multiple of the reference step {} s", h, base.hRef));
		ticks = std::gcd(ticks, n);
	}
	ReferenceOptions out = base;
	out.recordEvery = static_cast<double>(ticks) * base.hRef;
	return out;
}

} // namespace

GlobalErrorResult globalErrorStudy(const Scenario& scenario, const std::vector<SolverSpec>& solvers, double h,
	int jobs) {
	if (solvers.empty())
		throw Error("a study needs at least one solver");
	const auto ds = snapDisturbances(scenario.disturbances, h);
	const auto ref = referenceTrajectory(scenario.model, scenario.initial, scenario.tEnd, ds,
		truthOptions(scenario.reference, {h}));
	GlobalErrorResult out;
	out.referenceDeviation = ref.deviation;
	out.reports.resize(solvers.size());
	parallelFor(solvers.size(), jobs, [&](std::size_t i) {
		const auto traj = runSolver(scenario, solvers[i], scenario.initial, h, scenario.tEnd, ds);
		out.reports[i] = compareToTruth(solvers[i].label, h, traj, ref.truth);
	});
	for (const auto& r : out.reports)
		if (!r.completed)
			log().warn("solver {} failed at h = {} s: {}", r.solver, r.h, r.failure);
	return out;
}

std::vector<SweepRow> stepSweep(const Scenario& scenario, const std::vector<SolverSpec>& solvers,
	const std::vector<double>& hList, int jobs) {
	if (solvers.empty() || hList.empty())
		throw Error("a sweep needs at least one solver and one step size");
	const auto ro = truthOptions(scenario.reference, hList);
	std::map<std::string, TrajectoryResult> truths;
	for (double h : hList) {
		const auto ds = snapDisturbances(scenario.disturbances, h);
		const auto key = disturbanceKey(ds);
		if (!truths.count(key))
			truths.emplace(key,
				referenceTrajectory(scenario.model, scenario.initial, scenario.tEnd, ds, ro).truth);
	}
	std::vector<ErrorReport> reports(hList.size() * solvers.size());
	parallelFor(reports.size(), jobs, [&](std::size_t i) {
		const double h = hList[i / solvers.size()];
		const auto& spec = solvers[i % solvers.size()];
		const auto ds = snapDisturbances(scenario.disturbances, h);
		const auto traj = runSolver(scenario, spec, scenario.initial, h, scenario.tEnd, ds);
		reports[i] = compareToTruth(spec.label, h, traj, truths.at(disturbanceKey(ds)));
	});
	std::vector<SweepRow> rows;
	for (const auto& r : reports)
		for (const auto& v : r.variables)
			rows.push_back({r.solver, r.h, v, r.maxError(v), r.completed});
	return rows;
}

double orderSlope(const std::vector<SweepRow>& rows, const std::string& solver, const std::string& variable) {
	std::vector<double> lx, ly;
	for (const auto& r : rows)
		if (r.solver == solver && r.variable == variable && r.completed && r.maxError > 0.0) {
			lx.push_back(std::log(r.h));
			ly.push_back(std::log(r.maxError));
		}
	if (lx.size() < 2)
		throw Error("order slope needs at least two completed step sizes");
	const double n = static_cast<double>(lx.size());
	const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
	const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
	double sxy = 0.0, sxx = 0.0;
	for (std::size_t i = 0; i < lx.size(); ++i) {
		sxy += (lx[i] - mx) * (ly[i] - my);
		sxx += (lx[i] - mx) * (lx[i] - mx);
	}
	return sxy / sxx;
}

SystemState sampleInitialCondition(const Scenario& scenario, const IcSampling& sampling, std::size_t index) {
	if (sampling.machine < 0 || static_cast<std::size_t>(sampling.machine) >= scenario.model.numMachines())
		throw Error(fmt::format("machine {} does not exist", sampling.machine + 1));
	if (sampling.domain.size() != kMachineInputs)
		throw DimensionError("sampling domain must list the machine inputs");
	std::seed_seq seq{static_cast<std::uint32_t>(sampling.seed), static_cast<std::uint32_t>(sampling.seed >> 32),
		static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32),
		0x1cu};
	std::mt19937_64 rng(seq);
	auto draw = [&](const InputSpec& in) {
		const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
		return in.lo + (in.hi - in.lo) * u;
	};
	const double loadAngle = draw(sampling.domain[1]);
	const double dOmega = draw(sampling.domain[2]);

	PowerSystemDae system(scenario.model);
	SystemState state = scenario.initial;
	const auto off = static_cast<Eigen::Index>(4 * sampling.machine);
	const int bus = scenario.model.machines()[static_cast<std::size_t>(sampling.machine)].bus;
	state.x[off + MachineState::kDOmega] = dOmega;
	// The projection moves the terminal angle; re-anchor the rotor a few times.
	for (int pass = 0; pass < 4; ++pass) {
		const double theta = std::atan2(state.y[2 * bus + 1], state.y[2 * bus]);
		state.x[off + MachineState::kDelta] = theta + loadAngle;
		state = projectAlgebraic(system, state);
	}
	return state;
}

std::vector<LocalErrorRow> localErrorStudy(const Scenario& scenario, const IcSampling& sampling,
	const std::vector<SolverSpec>& solvers, const std::vector<double>& hList, int jobs) {
	if (solvers.empty() || hList.empty())
		throw Error("a local-error study needs at least one solver and one step size");
	const auto vars = machineVariables(scenario, sampling.machine);
	const std::size_t ns = solvers.size(), nh = hList.size();
	// errors[ic][h][solver][var]; NaN marks a failed step
	std::vector<std::vector<std::vector<std::vector<double>>>> errors(sampling.count);
	parallelFor(sampling.count, jobs, [&](std::size_t i) {
		auto& slot = errors[i];
		slot.assign(nh, std::vector<std::vector<double>>(ns, std::vector<double>(vars.size(), std::nan(""))));
		SystemState ic;
		try {
			ic = sampleInitialCondition(scenario, sampling, i);
		} catch (const Error& e) {
			log().warn("initial condition {} rejected: {}", i, e.what());
			return;
		}
		for (std::size_t a = 0; a < nh; ++a) {
			const double h = hList[a];
			const auto ro = truthOptions(scenario.reference, {h});
			TrajectoryResult truth;
			try {
				truth = referenceTrajectory(scenario.model, ic, h, {}, ro).truth;
			} catch (const Error& e) {
				log().warn("truth for initial condition {} at h = {} failed: {}", i, h, e.what());
				continue;
			}
			for (std::size_t b = 0; b < ns; ++b) {
				const auto traj = runSolver(scenario, solvers[b], ic, h, h, {});
				if (!traj.completed || traj.size() != 2) {
					log().info("{} step from initial condition {} at h = {} failed: {}", solvers[b].label, i, h,
						traj.failure);
					continue;
				}
				const auto rep = compareToTruth(solvers[b].label, h, traj, truth);
				for (std::size_t v = 0; v < vars.size(); ++v)
					slot[a][b][v] = rep.series(vars[v]).back();
			}
		}
	});
	std::vector<LocalErrorRow> rows;
	for (std::size_t b = 0; b < ns; ++b)
		for (std::size_t a = 0; a < nh; ++a)
			for (std::size_t v = 0; v < vars.size(); ++v) {
				std::vector<double> sample;
				std::size_t failures = 0;
				for (std::size_t i = 0; i < sampling.count; ++i) {
					const double e = errors[i][a][b][v];
					if (std::isnan(e))
						++failures;
					else
						sample.push_back(e);
				}
				rows.push_back({solvers[b].label, hList[a], vars[v], summarize(sample), failures});
			}
	return rows;
}

std::vector<FanRun> monteCarloFan(const Scenario& scenario, const IcSampling& sampling,
	const std::vector<SolverSpec>& solvers, double h, int jobs) {
	if (solvers.empty())
		throw Error("a fan needs at least one solver");
	if (sampling.count < 1)
		throw Error("a fan needs at least one initial condition");
	const auto ds = snapDisturbances(scenario.disturbances, h);
	const auto ro = truthOptions(scenario.reference, {h});
	std::vector<FanRun> runs(sampling.count);
	parallelFor(sampling.count, jobs, [&](std::size_t i) {
		runs[i].run = i;
		const auto ic = sampleInitialCondition(scenario, sampling, i);
		const auto truth = referenceTrajectory(scenario.model, ic, scenario.tEnd, ds, ro).truth;
		for (const auto& spec : solvers) {
			const auto traj = runSolver(scenario, spec, ic, h, scenario.tEnd, ds);
			runs[i].reports.push_back(compareToTruth(spec.label, h, traj, truth));
		}
	});
	return runs;
}

double accuracyBoost(const ErrorReport& pure, const ErrorReport& hybrid, const std::vector<std::string>& variables) {
	if (pure.t != hybrid.t)
		throw DimensionError("accuracy boost needs reports on identical grids");
	if (variables.empty())
		throw Error("accuracy boost needs at least one variable");
	double ep = 0.0, eh = 0.0;
	for (const auto& v : variables) {
		ep += pure.maxError(v);
		eh += hybrid.maxError(v);
	}
	ep /= static_cast<double>(variables.size());
	eh /= static_cast<double>(variables.size());
	if (ep == 0.0)
		return eh == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
	return 100.0 * (1.0 - eh / ep);
}

namespace {

std::string num(double v) {
	return fmt::format("{:.17g}", v);
}

} // namespace

void writeGlobalErrorCsv(const GlobalErrorResult& result, std::ostream& out, bool longFormat) {
	if (longFormat) {
		out << "solver,h,t,variable,error\n";
		for (const auto& r : result.reports)
			for (std::size_t v = 0; v < r.variables.size(); ++v)
				for (std::size_t i = 0; i < r.t.size(); ++i)
					out << r.solver << "," << num(r.h) << "," << num(r.t[i]) << "," << r.variables[v] << ","
						<< num(r.errors[v][i]) << "\n";
		return;
	}
	std::size_t rows = 0;
	const ErrorReport* longest = nullptr;
	out << "t";
	for (const auto& r : result.reports) {
		for (const auto& v : r.variables)
			out << "," << r.solver << ":" << v;
		if (r.t.size() > rows) {
			rows = r.t.size();
			longest = &r;
		}
	}
	out << "\n";
	for (std::size_t i = 0; i < rows; ++i) {
		out << num(longest->t[i]);
		for (const auto& r : result.reports)
			for (std::size_t v = 0; v < r.variables.size(); ++v)
				out << "," << (i < r.t.size() ? num(r.errors[v][i]) : "");
		out << "\n";
	}
}

void writeSweepCsv(const std::vector<SweepRow>& rows, std::ostream& out, bool longFormat) {
	if (longFormat) {
		out << "solver,h,variable,max_error,completed\n";
		for (const auto& r : rows)
			out << r.solver << "," << num(r.h) << "," << r.variable << "," << num(r.maxError) << ","
				<< (r.completed ? 1 : 0) << "\n";
		return;
	}
	std::vector<std::string> vars;
	for (const auto& r : rows)
		if (std::find(vars.begin(), vars.end(), r.variable) == vars.end())
			vars.push_back(r.variable);
	out << "solver,h,completed";
	for (const auto& v : vars)
		out << "," << v;
	out << "\n";
	for (std::size_t i = 0; i < rows.size(); i += vars.size()) {
		out << rows[i].solver << "," << num(rows[i].h) << "," << (rows[i].completed ? 1 : 0);
		for (std::size_t v = 0; v < vars.size(); ++v)
			out << "," << num(rows[i + v].maxError);
		out << "\n";
	}
}

void writeLocalErrorCsv(const std::vector<LocalErrorRow>& rows, std::ostream& out, bool longFormat) {
	if (longFormat) {
		out << "solver,h,variable,statistic,value\n";
		for (const auto& r : rows) {
			const std::pair<const char*, double> stats[] = {{"count", static_cast<double>(r.stats.count)},
				{"failures", static_cast<double>(r.failures)}, {"median", r.stats.median}, {"q1", r.stats.q1},
				{"q3", r.stats.q3}, {"iqr", r.stats.iqr}, {"whisker", r.stats.whisker}, {"max", r.stats.max}};
			for (const auto& [name, value] : stats)
				out << r.solver << "," << num(r.h) << "," << r.variable << "," << name << "," << num(value) << "\n";
		}
		return;
	}
	out << "solver,h,variable,count,failures,median,q1,q3,iqr,whisker,max\n";
	for (const auto& r : rows)
		out << r.solver << "," << num(r.h) << "," << r.variable << "," << r.stats.count << "," << r.failures << ","
			<< num(r.stats.median) << "," << num(r.stats.q1) << "," << num(r.stats.q3) << "," << num(r.stats.iqr)
			<< "," << num(r.stats.whisker) << "," << num(r.stats.max) << "\n";
}

void writeFanCsv(const std::vector<FanRun>& runs, std::ostream& out, bool longFormat) {
	if (runs.empty() || runs.front().reports.empty()) {
		out << (longFormat ? "run,solver,t,variable,error\n" : "run,solver,t\n");
		return;
	}
	const auto& vars = runs.front().reports.front().variables;
	if (longFormat)
		out << "run,solver,t,variable,error\n";
	else {
		out << "run,solver,completed,t";
		for (const auto& v : vars)
			out << "," << v;
		out << "\n";
	}
	for (const auto& run : runs)
		for (const auto& r : run.reports) {
			if (longFormat) {
				for (std::size_t v = 0; v < r.variables.size(); ++v)
					for (std::size_t i = 0; i < r.t.size(); ++i)
						out << run.run << "," << r.solver << "," << num(r.t[i]) << "," << r.variables[v] << ","
							<< num(r.errors[v][i]) << "\n";
				continue;
			}
			for (std::size_t i = 0; i < r.t.size(); ++i) {
				out << run.run << "," << r.solver << "," << (r.completed ? 1 : 0) << "," << num(r.t[i]);
				for (std::size_t v = 0; v < r.variables.size(); ++v)
					out << "," << num(r.errors[v][i]);
				out << "\n";
			}
		}
}

void writeBoostCsv(const std::vector<BoostRow>& rows, std::ostream& out) {
	out << "group,pure_error,hybrid_error,boost_percent\n";
	for (const auto& r : rows)
		out << r.group << "," << num(r.pureError) << "," << num(r.hybridError) << "," << num(r.boost) << "\n";
}

} // namespace hdae
