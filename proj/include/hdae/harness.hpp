#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <hdae/equilibrium.hpp>
#include <hdae/oracle.hpp>
#include <hdae/stepper.hpp>
#include <hdae/surrogate.hpp>

namespace hdae {

enum class Method { Trapezoidal, BackwardEuler, Surrogate };

/// Per-machine choice of algebraizer.
struct SolverSpec {
	std::string label;
	std::vector<Method> methods; ///< one per machine; empty means trapezoidal everywhere
	std::shared_ptr<const SurrogateNet> net;
	DomainPolicy policy = DomainPolicy::Reject;
};

SolverSpec pureSolver();
/// Surrogate on the listed (zero-based) machines, trapezoidal elsewhere.
SolverSpec hybridSolver(std::size_t numMachines, const std::vector<int>& surrogateMachines,
	std::shared_ptr<const SurrogateNet> net, DomainPolicy policy = DomainPolicy::Reject);
/// "pure", "hybrid" or "custom:<k>=<method>,..." with one-based k and method
/// in {trap, be, pinn}; unlisted machines use the trapezoidal rule.
SolverSpec parseSolver(const std::string& text, std::size_t numMachines, const std::vector<int>& surrogateMachines,
	std::shared_ptr<const SurrogateNet> net, DomainPolicy policy = DomainPolicy::Reject);
/// Machines replaced by the surrogate in the bundled studies.
std::vector<int> defaultSurrogateMachines(const std::string& preset);

SolverConfig makeSolverConfig(const SolverSpec& spec, std::size_t numMachines, double h);

/// Network at equilibrium plus what happens to it.
struct Scenario {
	NetworkModel model;
	SystemState initial;
	std::vector<Disturbance> disturbances;
	double tEnd = 1.0;
	ReferenceOptions reference;
};

Scenario equilibriumScenario(const NetworkModel& model, std::vector<Disturbance> disturbances, double tEnd);

struct Stats {
	double max = 0.0;
	double median = 0.0;
	double q1 = 0.0;
	double q3 = 0.0;
	double iqr = 0.0;
	double whisker = 0.0; ///< Q3 + 1.5 IQR capped at the sample max
	std::size_t count = 0;
};
/// Quartiles by linear interpolation between order statistics.
Stats summarize(std::vector<double> values);

/// |predicted - truth| per variable on the solver's time grid.
struct ErrorReport {
	std::string solver;
	double h = 0.0;
	std::vector<double> t;
	std::vector<std::string> variables;
	std::vector<std::vector<double>> errors; ///< [variable][row]
	bool completed = true;
	std::string failure;

	const std::vector<double>& series(const std::string& variable) const;
	double maxError(const std::string& variable) const;
};

/// delta_i, load_angle_i, domega_i for each machine and V_j for each bus
/// (one-based).
std::vector<std::string> reportVariables(const NetworkModel& model);
double reportValue(const TrajectoryResult& traj, std::size_t row, const std::string& variable);

ErrorReport compareToTruth(const std::string& solver, double h, const TrajectoryResult& predicted,
	const TrajectoryResult& truth);

/// Disturbance times snapped to the grid of step h.
std::vector<Disturbance> snapDisturbances(const std::vector<Disturbance>& disturbances, double h);

struct GlobalErrorResult {
	std::vector<ErrorReport> reports;
	double referenceDeviation = 0.0;
};
GlobalErrorResult globalErrorStudy(const Scenario& scenario, const std::vector<SolverSpec>& solvers, double h,
	int jobs = 1);

struct SweepRow {
	std::string solver;
	double h = 0.0;
	std::string variable;
	double maxError = 0.0;
	bool completed = true;
};
std::vector<SweepRow> stepSweep(const Scenario& scenario, const std::vector<SolverSpec>& solvers,
	const std::vector<double>& hList, int jobs = 1);

/// Least-squares slope of log(max error) against log(h) for one solver and variable.
double orderSlope(const std::vector<SweepRow>& rows, const std::string& solver, const std::string& variable);

/// Random initial conditions: the target machine's load angle and speed drawn
/// from the domain, other machines at equilibrium, voltages projected.
struct IcSampling {
	int machine = 0;
	std::vector<InputSpec> domain = machineInputDomain();
	std::size_t count = 100;
	std::uint64_t seed = 1;
};
SystemState sampleInitialCondition(const Scenario& scenario, const IcSampling& sampling, std::size_t index);

struct LocalErrorRow {
	std::string solver;
	double h = 0.0;
	std::string variable;
	Stats stats;
	std::size_t failures = 0;
};
/// One step from each sampled state per h and solver, compared with the fine
/// oracle over the same step.
std::vector<LocalErrorRow> localErrorStudy(const Scenario& scenario, const IcSampling& sampling,
	const std::vector<SolverSpec>& solvers, const std::vector<double>& hList, int jobs = 1);

struct FanRun {
	std::size_t run = 0;
	std::vector<ErrorReport> reports; ///< one per solver
};
std::vector<FanRun> monteCarloFan(const Scenario& scenario, const IcSampling& sampling,
	const std::vector<SolverSpec>& solvers, double h, int jobs = 1);

/// 100 (1 - mean_v max_t err_hybrid / mean_v max_t err_pure).
double accuracyBoost(const ErrorReport& pure, const ErrorReport& hybrid, const std::vector<std::string>& variables);

void writeGlobalErrorCsv(const GlobalErrorResult& result, std::ostream& out, bool longFormat = false);
void writeSweepCsv(const std::vector<SweepRow>& rows, std::ostream& out, bool longFormat = false);
void writeLocalErrorCsv(const std::vector<LocalErrorRow>& rows, std::ostream& out, bool longFormat = false);
void writeFanCsv(const std::vector<FanRun>& runs, std::ostream& out, bool longFormat = false);

struct BoostRow {
	std::string group;
	double boost = 0.0;
	double pureError = 0.0;
	double hybridError = 0.0;
};
void writeBoostCsv(const std::vector<BoostRow>& rows, std::ostream& out);

} // namespace hdae
