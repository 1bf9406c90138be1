#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <hdae/algebraizer.hpp>
#include <hdae/dae.hpp>
#include <hdae/netmodel.hpp>
#include <hdae/types.hpp>

namespace hdae {

struct NewtonOptions {
	double epsilon = 1e-8; ///< on max |X^{k+1} - X^k|
	int kMax = 20;
};

struct NewtonReport {
	int iterations = 0;
	std::vector<double> updates; ///< max-norm of each update
};

/// Plain Newton-Raphson on `eval(X, F, J)`, updating X in place. Throws
/// ConvergenceError when k_max is reached or the Jacobian is singular.
NewtonReport newtonIterate(const std::function<void(const Vector&, Vector&, Matrix&)>& eval, Vector& x,
	const NewtonOptions& options);

struct SolverConfig {
	double epsilon = 1e-8;
	int kMax = 20;
	double h = 0.01;
	/// One per component; empty means trapezoidal for all.
	std::vector<std::shared_ptr<const Algebraizer>> algebraizers;
	/// Keep the LU factors across iterations and steps, refactoring only when
	/// convergence slows. Used by the fine-step oracle.
	bool reuseJacobian = false;
};

struct SystemState {
	double t = 0.0;
	Vector x;
	Vector y;
};

/// Global residual F(x_{n+1}, y_{n+1}; h, x_n, y_n): component rows first,
/// then the algebraic equations at t_n + h.
struct ResidualSystem {
	Vector F;
	Matrix J;
};

ResidualSystem assemble(const DaeSystem& system, const SolverConfig& cfg, const SystemState& stateN,
	const Vector& iterate, double h);

struct StepOutcome {
	SystemState state;
	int iterations = 0;
	std::vector<double> updates;
};

/// Advances one step at a time, holding the factorization between steps
/// when cfg.reuseJacobian is set.
class StepSolver {
public:
	StepSolver(const DaeSystem& system, SolverConfig cfg);
	StepOutcome step(const SystemState& stateN, double h);
	void invalidate() { mHaveLu = false; }
	const SolverConfig& config() const { return mCfg; }

private:
	const DaeSystem& mSystem;
	SolverConfig mCfg;
	Eigen::PartialPivLU<Matrix> mLu;
	bool mHaveLu = false;
	double mLuH = 0.0;
};

/// One Newton step from stateN with step cfg.h; initial guess {x_n, y_n}.
StepOutcome newtonSolve(const DaeSystem& system, const SolverConfig& cfg, const SystemState& stateN);

/// Holds x fixed and solves g(x, y, t) = 0 for y.
SystemState projectAlgebraic(const DaeSystem& system, SystemState state, const NewtonOptions& options = {});

/// Time-gridded trajectory of a power system simulation.
struct TrajectoryResult {
	std::vector<double> t;
	std::vector<Vector> x;
	std::vector<Vector> y;
	std::vector<int> newtonIterations;       ///< per recorded row; 0 for the initial state
	std::vector<std::array<double, 2>> lastUpdates; ///< last two Newton update norms per row
	std::vector<int> machineBus;
	std::size_t numBuses = 0;
	bool completed = true;
	std::string failure;

	std::size_t size() const { return t.size(); }
	std::size_t numMachines() const { return machineBus.size(); }
	double delta(std::size_t row, std::size_t m) const { return x[row][4 * m + MachineState::kDelta]; }
	double dOmega(std::size_t row, std::size_t m) const { return x[row][4 * m + MachineState::kDOmega]; }
	double voltage(std::size_t row, std::size_t bus) const;
	double angle(std::size_t row, std::size_t bus) const;
	/// delta_m - theta_bus(m), wrapped.
	double loadAngle(std::size_t row, std::size_t m) const;
	void throwIfFailed() const;
};

struct SimulationOptions {
	/// Recording interval in seconds; 0 records every step.
	double recordEvery = 0.0;
	/// Re-solve the algebraic variables after each applied disturbance.
	bool projectAfterDisturbance = true;
};

/// Fixed-step march from `initial` to t_end. Disturbances apply at the step
/// boundary nearest to their time. A failed step ends the march and leaves the
/// partial trajectory with completed = false.
TrajectoryResult simulate(const NetworkModel& model, const SolverConfig& cfg, const SystemState& initial,
	double tEnd, const std::vector<Disturbance>& disturbances, const SimulationOptions& options = {});

/// CSV with t, delta_i, domega_i, V_j, theta_j, newton_iters; 17 significant digits.
void writeTrajectoryCsv(const TrajectoryResult& traj, std::ostream& out);

} // namespace hdae
