// Command-line front end: simulations, studies, datasets and weight checks.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <hdae/equilibrium.hpp>
#include <hdae/harness.hpp>
#include <hdae/log.hpp>
#include <hdae/oracle.hpp>
#include <hdae/surrogate.hpp>

using namespace hdae;

namespace {

struct CommonOptions {
	std::string network = "ieee9";
	std::vector<std::string> solvers;
	std::string weights;
	bool clamp = false;
	std::vector<int> surrogateMachines; // one-based
	std::vector<std::string> disturbances;
	double tEnd = 10.0;
	std::string out = "-";
	std::uint64_t seed = 1;
	int jobs = 1;
	bool longFormat = false;
	double hRefMs = 0.05;
	int maxRefinements = 2;
};

Disturbance parseDisturbance(const std::string& text) {
	const auto at = text.find('@');
	if (at == std::string::npos)
		throw Error("disturbance '" + text + "' needs @<time>");
	std::vector<std::string> parts;
	std::stringstream ss(text.substr(0, at));
	for (std::string p; std::getline(ss, p, ':');)
		parts.push_back(p);
	auto number = [&](const std::string& s) {
		std::size_t used = 0;
		double v = 0.0;
		try {
			v = std::stod(s, &used);
		} catch (const std::exception&) {
			used = 0;
		}
		if (used != s.size() || s.empty() || !std::isfinite(v))
			throw Error("disturbance '" + text + "': bad number '" + s + "'");
		return v;
	};
	auto index = [&](const std::string& s) {
		const double v = number(s);
		if (v != std::floor(v) || v < 1)
			throw Error("disturbance '" + text + "': index must be a positive integer");
		return static_cast<int>(v) - 1;
	};
	Disturbance d;
	d.time = number(text.substr(at + 1));
	if (parts.size() == 3 && parts[0] == "pm") {
		d.kind = Disturbance::Kind::MechanicalPowerStep;
		d.target = index(parts[1]);
		d.magnitude = {number(parts[2]), 0.0};
	} else if ((parts.size() == 3 || parts.size() == 4) && parts[0] == "load") {
		d.kind = Disturbance::Kind::LoadAdmittanceStep;
		d.target = index(parts[1]);
		const double dq = parts.size() == 4 ? number(parts[3]) : 0.0;
		d.magnitude = {number(parts[2]), -dq};
	} else
		throw Error("disturbance '" + text + "' must read pm:<machine>:<dp>@<t> or load:<bus>:<dp>[:<dq>]@<t>");
	return d;
}

std::vector<Disturbance> parseDisturbances(const std::vector<std::string>& texts) {
	std::vector<Disturbance> out;
	for (const auto& t : texts)
		out.push_back(parseDisturbance(t));
	return out;
}

std::vector<double> msToSeconds(const std::vector<double>& ms) {
	std::vector<double> out;
	for (double v : ms) {
		if (!(v > 0.0))
			throw Error("step sizes must be positive");
		out.push_back(v / 1000.0);
	}
	return out;
}

/// Writes to a file, or stdout for "-".
void writeOutput(const std::string& path, const std::function<void(std::ostream&)>& fn) {
	if (path == "-") {
		fn(std::cout);
		return;
	}
	std::ofstream f(path, std::ios::binary);
	if (!f)
		throw Error("cannot write '" + path + "'");
	fn(f);
	if (!f)
		throw Error("failed writing '" + path + "'");
}

std::string reportPath(const std::string& outDir, const std::string& file) {
	if (outDir == "-")
		return "-";
	std::filesystem::create_directories(outDir);
	return (std::filesystem::path(outDir) / file).string();
}

struct Setup {
	NetworkModel model;
	Scenario scenario;
	std::vector<int> surrogateMachines; // zero-based
	std::shared_ptr<const SurrogateNet> net;
};

Setup makeSetup(const CommonOptions& o, double tEnd) {
	auto model = loadNetworkSource(o.network);
	auto scenario = equilibriumScenario(model, parseDisturbances(o.disturbances), tEnd);
	scenario.reference.hRef = o.hRefMs / 1000.0;
	scenario.reference.maxRefinements = o.maxRefinements;
	std::vector<int> machines;
	if (o.surrogateMachines.empty())
		machines = defaultSurrogateMachines(o.network);
	else
		for (int k : o.surrogateMachines)
			machines.push_back(k - 1);
	std::shared_ptr<const SurrogateNet> net;
	if (!o.weights.empty()) {
		net = std::make_shared<SurrogateNet>(loadWeights(o.weights));
		for (int k : machines) {
			if (k < 0 || static_cast<std::size_t>(k) >= model.numMachines())
				throw Error(fmt::format("surrogate machine {} does not exist", k + 1));
			const auto& p = scenario.model.machines()[static_cast<std::size_t>(k)].params;
			const auto off = 4 * k;
			const auto fp = machineFingerprint(p, scenario.initial.x[off + MachineState::kEqp],
				scenario.initial.x[off + MachineState::kEdp], model.frequencyHz());
			if (!net->provenance().machineParamsHash.empty() && net->provenance().machineParamsHash != fp)
				log().warn("weights were trained for machine {}, not machine {} ({})",
					net->provenance().machineParamsHash, k + 1, fp);
		}
	}
	return {std::move(model), std::move(scenario), std::move(machines), std::move(net)};
}

std::vector<SolverSpec> makeSolvers(const CommonOptions& o, const Setup& s) {
	auto names = o.solvers;
	if (names.empty()) {
		names.push_back("pure");
		if (s.net)
			names.push_back("hybrid");
	}
	const auto policy = o.clamp ? DomainPolicy::Clamp : DomainPolicy::Reject;
	std::vector<SolverSpec> out;
	std::set<std::string> seen;
	for (const auto& n : names) {
		if (!seen.insert(n).second)
			throw Error("solver '" + n + "' listed twice");
		out.push_back(parseSolver(n, s.model.numMachines(), s.surrogateMachines, s.net, policy));
	}
	return out;
}

void addCommon(CLI::App* app, CommonOptions& o, bool studies) {
	app->add_option("--network", o.network, "Preset (ieee9, ieee57) or network JSON file")->capture_default_str();
	app->add_option("--weights", o.weights, "Surrogate weight file")->check(CLI::ExistingFile);
	app->add_flag("--clamp", o.clamp, "Clamp surrogate inputs to the trained domain instead of failing");
	app->add_option("--surrogate-machines", o.surrogateMachines,
		"Machines (1-based) the hybrid solver replaces; default depends on the preset");
	app->add_option("--disturb", o.disturbances, "pm:<machine>:<dp>@<t> or load:<bus>:<dp>[:<dq>]@<t>");
	app->add_option("--t-end", o.tEnd, "Horizon in seconds")->capture_default_str()->check(CLI::PositiveNumber);
	app->add_option("--out", o.out, studies ? "Output directory" : "Output file, - for stdout")
		->capture_default_str();
	app->add_option("--jobs", o.jobs, "Parallel runs")->capture_default_str()->check(CLI::PositiveNumber);
	app->add_option("--h-ref-ms", o.hRefMs, "Reference step in ms")->capture_default_str()->check(
		CLI::PositiveNumber);
	app->add_option("--max-refinements", o.maxRefinements, "Reference step halvings allowed by the self-check")
		->capture_default_str()
		->check(CLI::NonNegativeNumber);
	if (studies) {
		app->add_option("--solver", o.solvers, "pure, hybrid or custom:<k>=<trap|be|pinn>,...; repeatable");
		app->add_flag("--long", o.longFormat, "Long (tidy) CSV layout");
	}
}

/// Appends flags from a JSON --config file that the command line does not set.
std::vector<std::string> applyConfigOverlay(std::vector<std::string> args) {
	const auto it = std::find(args.begin(), args.end(), "--config");
	if (it == args.end())
		return args;
	if (it + 1 == args.end())
		throw Error("--config needs a file");
	const std::string path = *(it + 1);
	args.erase(it, it + 2);
	std::ifstream in(path);
	if (!in)
		throw Error("cannot open config '" + path + "'");
	nlohmann::json doc;
	try {
		doc = nlohmann::json::parse(in);
	} catch (const nlohmann::json::exception& e) {
		throw SchemaError(path, e.what());
	}
	if (!doc.is_object())
		throw SchemaError(path, "config must be a JSON object");
	std::string sub = args.size() > 1 ? args[1] : "";
	std::vector<std::string> extra;
	auto present = [&](const std::string& flag) {
		auto match = [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; };
		return std::any_of(args.begin(), args.end(), match) || std::any_of(extra.begin(), extra.end(), match);
	};
	auto addItems = [&](const nlohmann::json& obj, const std::string& where) {
		for (const auto& [key, value] : obj.items()) {
			if (value.is_object())
				continue;
			const std::string flag = "--" + key;
			if (present(flag))
				continue;
			auto text = [&](const nlohmann::json& v) -> std::string {
				if (v.is_string())
					return v.get<std::string>();
				if (v.is_number() || v.is_boolean())
					return v.dump();
				throw SchemaError(where + key, "config values must be strings, numbers, booleans or arrays");
			};
			if (value.is_boolean()) {
				if (value.get<bool>())
					extra.push_back(flag);
			} else if (value.is_array()) {
				for (const auto& v : value) {
					extra.push_back(flag);
					extra.push_back(text(v));
				}
			} else {
				extra.push_back(flag);
				extra.push_back(text(value));
			}
		}
	};
	if (!sub.empty() && doc.contains(sub) && doc[sub].is_object())
		addItems(doc[sub], sub + ".");
	addItems(doc, "");
	args.insert(args.end(), extra.begin(), extra.end());
	return args;
}

void printError(const std::string& kind, const std::string& message, const std::string& path = {}) {
	nlohmann::json j{{"error", kind}, {"message", message}};
	if (!path.empty())
		j["path"] = path;
	std::cerr << j.dump() << "\n";
}

} // namespace

int main(int argc, char** argv) {
	CLI::App app{"Hybrid numerical/surrogate power system simulator"};
	app.require_subcommand(1);
	app.set_version_flag("--version", "hdae 1.0");
	CommonOptions o;

	// simulate
	auto* sim = app.add_subcommand("simulate", "Simulate one scenario from equilibrium");
	addCommon(sim, o, false);
	std::string solverName = "pure";
	double hMs = 10.0;
	sim->add_option("--solver", solverName, "pure, hybrid or custom:<k>=<trap|be|pinn>,...")->capture_default_str();
	sim->add_option("--h-ms", hMs, "Step size in ms")->capture_default_str()->check(CLI::PositiveNumber);

	// equilibrium
	auto* eqc = app.add_subcommand("equilibrium", "Solve the steady state and print it as JSON");
	eqc->add_option("--network", o.network, "Preset or network file")->capture_default_str();
	eqc->add_option("--out", o.out, "Output file, - for stdout")->capture_default_str();

	// reference
	auto* ref = app.add_subcommand("reference", "Fine-step reference trajectory with its self-check");
	addCommon(ref, o, false);
	double recordMs = 1.0;
	ref->add_option("--record-ms", recordMs, "Recording interval in ms")->capture_default_str()->check(
		CLI::PositiveNumber);

	// gen-dataset
	auto* gen = app.add_subcommand("gen-dataset", "Emit labelled and collocation datasets for one machine");
	std::string preset = "m3";
	std::size_t nx = 100000, nc = 100000;
	std::optional<std::uint64_t> seedC;
	double hMinMs = 1.0, hMaxMs = 40.0;
	gen->add_option("--machine-preset", preset, "m1, m2 or m3 of the ieee9 equilibrium")->capture_default_str();
	gen->add_option("--n-x", nx, "Labelled records")->capture_default_str();
	gen->add_option("--n-c", nc, "Collocation records")->capture_default_str();
	gen->add_option("--seed", o.seed, "Seed of the labelled set")->capture_default_str();
	gen->add_option("--seed-c", seedC, "Seed of the collocation set (default seed + 1)");
	gen->add_option("--h-min-ms", hMinMs, "Smallest step in the domain")->capture_default_str();
	gen->add_option("--h-max-ms", hMaxMs, "Largest step in the domain")->capture_default_str();
	gen->add_option("--out", o.out, "Output directory")->required();
	gen->add_option("--jobs", o.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

	// validate-weights
	auto* val = app.add_subcommand("validate-weights", "Load a weight file and run its self-checks");
	std::string weightFile;
	int points = 100;
	val->add_option("file", weightFile, "Weight file")->required()->check(CLI::ExistingFile);
	val->add_option("--points", points, "Random points per check")->capture_default_str();
	val->add_option("--seed", o.seed, "Seed")->capture_default_str();

	// studies
	auto* glob = app.add_subcommand("global-error", "Error trajectories against the reference");
	addCommon(glob, o, true);
	glob->add_option("--h-ms", hMs, "Step size in ms")->capture_default_str()->check(CLI::PositiveNumber);

	auto* sweep = app.add_subcommand("sweep", "Maximum error against step size");
	addCommon(sweep, o, true);
	std::vector<double> hList{1, 2, 4, 8, 10, 20, 40};
	sweep->add_option("--h-ms", hList, "Step sizes in ms")->capture_default_str();

	auto* local = app.add_subcommand("local-error", "One-step error distributions over sampled states");
	addCommon(local, o, true);
	std::vector<double> hLocal{5, 10, 15, 20, 25, 30, 35, 40};
	int machine = 0;
	std::size_t count = 100;
	local->add_option("--h-ms", hLocal, "Step sizes in ms")->capture_default_str();
	local->add_option("--machine", machine, "Sampled machine (1-based); default the first surrogate machine");
	local->add_option("--n", count, "Initial conditions")->capture_default_str();
	local->add_option("--seed", o.seed, "Seed")->capture_default_str();

	auto* fan = app.add_subcommand("fan", "Error trajectories from sampled initial conditions");
	addCommon(fan, o, true);
	fan->add_option("--h-ms", hMs, "Step size in ms")->capture_default_str()->check(CLI::PositiveNumber);
	fan->add_option("--machine", machine, "Sampled machine (1-based); default the first surrogate machine");
	fan->add_option("--n", count, "Initial conditions")->capture_default_str();
	fan->add_option("--seed", o.seed, "Seed")->capture_default_str();

	auto* boost = app.add_subcommand("boost", "Accuracy gain of the hybrid over the pure solver");
	addCommon(boost, o, true);
	boost->add_option("--h-ms", hMs, "Step size in ms")->capture_default_str()->check(CLI::PositiveNumber);

	std::vector<std::string> args(argv, argv + argc);
	try {
		args = applyConfigOverlay(args);
		std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
		app.parse(reversed);
	} catch (const CLI::ParseError& e) {
		if (e.get_exit_code() == 0)
			return app.exit(e);
		printError("usage", e.what());
		return 2;
	} catch (const SchemaError& e) {
		printError("schema", e.what(), e.path());
		return 2;
	} catch (const Error& e) {
		printError("usage", e.what());
		return 2;
	}

	try {
		if (*sim) {
			auto s = makeSetup(o, o.tEnd);
			const auto spec = parseSolver(solverName, s.model.numMachines(), s.surrogateMachines, s.net,
				o.clamp ? DomainPolicy::Clamp : DomainPolicy::Reject);
			const auto cfg = makeSolverConfig(spec, s.model.numMachines(), hMs / 1000.0);
			const auto traj = simulate(s.scenario.model, cfg, s.scenario.initial, o.tEnd, s.scenario.disturbances);
			writeOutput(o.out, [&](std::ostream& os) { writeTrajectoryCsv(traj, os); });
			if (!traj.completed) {
				printError("solver", traj.failure);
				return 1;
			}
		} else if (*eqc) {
			const auto model = loadNetworkSource(o.network);
			const auto eq = initEquilibrium(model);
			nlohmann::ordered_json j;
			j["iterations"] = eq.iterations;
			j["residual_norm"] = eq.residualNorm;
			for (std::size_t k = 0; k < model.numMachines(); ++k) {
				const auto& u = eq.model.machines()[k];
				const auto s = MachineState::fromVec(eq.state.x.segment<4>(4 * static_cast<Eigen::Index>(k)));
				j["machines"].push_back({{"machine", k + 1}, {"bus", u.bus + 1}, {"e_q_prime", s.eqp},
					{"e_d_prime", s.edp}, {"delta", s.delta}, {"d_omega", s.dOmega}, {"p_m", u.params.pm},
					{"e_fd", u.params.efd}});
			}
			for (std::size_t b = 0; b < model.numBuses(); ++b) {
				const Complex v(eq.state.y[2 * static_cast<Eigen::Index>(b)],
					eq.state.y[2 * static_cast<Eigen::Index>(b) + 1]);
				j["buses"].push_back({{"bus", b + 1}, {"v", std::abs(v)}, {"theta", std::arg(v)}});
			}
			writeOutput(o.out, [&](std::ostream& os) { os << j.dump(2) << "\n"; });
		} else if (*ref) {
			auto s = makeSetup(o, o.tEnd);
			s.scenario.reference.recordEvery = recordMs / 1000.0;
			const auto r = referenceTrajectory(s.scenario.model, s.scenario.initial, o.tEnd,
				s.scenario.disturbances, s.scenario.reference);
			log().info("reference step {:.4g} s, self-check deviation {:.3e}", r.hUsed / 2, r.deviation);
			writeOutput(o.out, [&](std::ostream& os) { writeTrajectoryCsv(r.truth, os); });
		} else if (*gen) {
			const auto m = machinePreset(preset);
			if (!m.params.classical)
				throw Error("datasets are generated for classical machines only");
			const auto domain = machineInputDomain(hMinMs / 1000.0, hMaxMs / 1000.0);
			std::filesystem::create_directories(o.out);
			const auto dir = std::filesystem::path(o.out);
			const auto dx = generateDatasetX(m, domain, nx, o.seed, o.jobs);
			writeOutput((dir / "dataset_x.csv").string(),
				[&](std::ostream& os) { writeDatasetCsv(domain, labelNames(m), dx, os); });
			const auto dc = generateDatasetC(domain, nc, seedC.value_or(o.seed + 1), o.jobs);
			writeOutput((dir / "dataset_c.csv").string(), [&](std::ostream& os) { writeDatasetCsv(domain, {}, dc, os); });
			writeOutput((dir / "machine.json").string(), [&](std::ostream& os) { os << machineSetupJson(m); });
		} else if (*val) {
			const auto net = loadWeights(weightFile);
			const auto failures = selfCheck(net, points, o.seed);
			for (const auto& f : failures)
				printError("self-check", f);
			if (!failures.empty())
				return 1;
			std::cout << fmt::format("{}: {} inputs, {} outputs, {} layers, h_max {} s: ok\n", weightFile,
				net.numInputs(), net.numOutputs(), net.layers().size(), net.hMax());
		} else if (*glob) {
			auto s = makeSetup(o, o.tEnd);
			const auto result = globalErrorStudy(s.scenario, makeSolvers(o, s), hMs / 1000.0, o.jobs);
			writeOutput(reportPath(o.out, "global_error.csv"),
				[&](std::ostream& os) { writeGlobalErrorCsv(result, os, o.longFormat); });
		} else if (*sweep) {
			auto s = makeSetup(o, o.tEnd);
			const auto rows = stepSweep(s.scenario, makeSolvers(o, s), msToSeconds(hList), o.jobs);
			writeOutput(reportPath(o.out, "sweep.csv"), [&](std::ostream& os) { writeSweepCsv(rows, os, o.longFormat); });
		} else if (*local || *fan) {
			auto s = makeSetup(o, o.tEnd);
			IcSampling sampling;
			sampling.count = count;
			sampling.seed = o.seed;
			if (machine > 0)
				sampling.machine = machine - 1;
			else if (!s.surrogateMachines.empty())
				sampling.machine = s.surrogateMachines.front();
			if (*local) {
				const auto rows = localErrorStudy(s.scenario, sampling, makeSolvers(o, s), msToSeconds(hLocal), o.jobs);
				writeOutput(reportPath(o.out, "local_error.csv"),
					[&](std::ostream& os) { writeLocalErrorCsv(rows, os, o.longFormat); });
			} else {
				const auto runs = monteCarloFan(s.scenario, sampling, makeSolvers(o, s), hMs / 1000.0, o.jobs);
				writeOutput(reportPath(o.out, "fan.csv"), [&](std::ostream& os) { writeFanCsv(runs, os, o.longFormat); });
			}
		} else if (*boost) {
			auto s = makeSetup(o, o.tEnd);
			if (!s.net)
				throw Error("boost needs --weights");
			const auto policy = o.clamp ? DomainPolicy::Clamp : DomainPolicy::Reject;
			const std::vector<SolverSpec> solvers{pureSolver(),
				hybridSolver(s.model.numMachines(), s.surrogateMachines, s.net, policy)};
			const auto result = globalErrorStudy(s.scenario, solvers, hMs / 1000.0, o.jobs);
			const auto& pure = result.reports[0];
			const auto& hybrid = result.reports[1];
			if (!pure.completed || !hybrid.completed)
				throw Error("a solver failed: " + (pure.completed ? hybrid.failure : pure.failure));
			std::vector<std::string> angles, voltages;
			for (int k : s.surrogateMachines)
				angles.push_back(fmt::format("delta_{}", k + 1));
			for (std::size_t b = 1; b <= s.model.numBuses(); ++b)
				voltages.push_back(fmt::format("V_{}", b));
			auto row = [&](const std::string& group, const std::vector<std::string>& vars) {
				double ep = 0.0, eh = 0.0;
				for (const auto& v : vars) {
					ep += pure.maxError(v) / static_cast<double>(vars.size());
					eh += hybrid.maxError(v) / static_cast<double>(vars.size());
				}
				return BoostRow{group, accuracyBoost(pure, hybrid, vars), ep, eh};
			};
			std::vector<BoostRow> rows;
			if (!angles.empty())
				rows.push_back(row("surrogate_rotor_angles", angles));
			rows.push_back(row("bus_voltages", voltages));
			writeOutput(reportPath(o.out, "boost.csv"), [&](std::ostream& os) { writeBoostCsv(rows, os); });
		}
	} catch (const SchemaError& e) {
		printError("schema", e.what(), e.path());
		return 1;
	} catch (const ConvergenceError& e) {
		printError("convergence", e.what());
		return 1;
	} catch (const Error& e) {
		printError("error", e.what());
		return 1;
	} catch (const std::exception& e) {
		printError("internal", e.what());
		return 1;
	}
	return 0;
}
