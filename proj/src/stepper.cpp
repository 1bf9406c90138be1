#include <hdae/stepper.hpp>

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include <hdae/log.hpp>

namespace hdae {

namespace {

/// Throws when the factorization has a zero (or numerically zero) pivot.
void checkPivots(const Eigen::PartialPivLU<Matrix>& lu) {
	const Vector diag = lu.matrixLU().diagonal().cwiseAbs();
	Eigen::Index where = 0;
	const double smallest = diag.minCoeff(&where);
	const double largest = diag.maxCoeff();
	if (!std::isfinite(smallest) || !std::isfinite(largest) || smallest == 0.0 || smallest < 1e-15 * largest)
		throw ConvergenceError(fmt::format("singular Jacobian: pivot {} = {:.3g} (largest {:.3g})", where, smallest,
			largest), smallest, 0);
}

} // namespace

NewtonReport newtonIterate(const std::function<void(const Vector&, Vector&, Matrix&)>& eval, Vector& x,
	const NewtonOptions& options) {
	if (!(options.epsilon > 0.0) || options.kMax < 1)
		throw Error("Newton options need epsilon > 0 and k_max >= 1");
	NewtonReport report;
	Vector f;
	Matrix j;
	for (int k = 1; k <= options.kMax; ++k) {
		eval(x, f, j);
		Eigen::PartialPivLU<Matrix> lu(j);
		checkPivots(lu);
		const Vector dx = lu.solve(f);
		x -= dx;
		const double update = dx.cwiseAbs().maxCoeff();
		report.updates.push_back(update);
		report.iterations = k;
		if (!std::isfinite(update))
			throw ConvergenceError("Newton update is not finite", update, k);
		if (update < options.epsilon)
			return report;
	}
	eval(x, f, j);
	const double norm = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
	throw ConvergenceError(fmt::format("Newton did not converge in {} iterations (|F| = {:.3e}, last update {:.3e})",
		options.kMax, norm, report.updates.back()), norm, options.kMax);
}

ResidualSystem assemble(const DaeSystem& system, const SolverConfig& cfg, const SystemState& stateN,
	const Vector& iterate, double h) {
	const int nx = system.numStates();
	const int ny = system.numAlgebraic();
	if (iterate.size() != nx + ny || stateN.x.size() != nx || stateN.y.size() != ny)
		throw DimensionError("assemble: iterate does not match the system");
	if (!cfg.algebraizers.empty() && cfg.algebraizers.size() != system.numComponents())
		throw DimensionError("assemble: one algebraizer per component is required");

	static const TrapezoidalRule trapezoidal;
	ResidualSystem out;
	out.F.resize(nx + ny);
	out.J = Matrix::Zero(nx + ny, nx + ny);
	const Vector xNp1 = iterate.head(nx);
	const Vector yNp1 = iterate.tail(ny);

	int offset = 0;
	for (std::size_t i = 0; i < system.numComponents(); ++i) {
		const auto& comp = system.component(i);
		const int n = comp.numStates();
		const Vector xn = stateN.x.segment(offset, n);
		const Vector yn = system.gatherBoundary(i, stateN.y);
		const Vector xp = xNp1.segment(offset, n);
		const Vector yp = system.gatherBoundary(i, yNp1);
		const Algebraizer& alg = cfg.algebraizers.empty() ? trapezoidal : *cfg.algebraizers[i];
		const auto res = alg.residual(comp, StepContext{h, xn, yn, xp, yp});
		out.F.segment(offset, n) = res.r;
		out.J.block(offset, offset, n, n) = res.drdx;
		const auto& idx = system.boundaryIndices(i);
		for (std::size_t k = 0; k < idx.size(); ++k)
			out.J.col(nx + idx[k]).segment(offset, n) += res.drdy.col(static_cast<Eigen::Index>(k));
		offset += n;
	}

	const auto alg = system.algebraic(xNp1, yNp1, stateN.t + h);
	out.F.tail(ny) = alg.g;
	out.J.block(nx, 0, ny, nx) = alg.dgdx;
	out.J.block(nx, nx, ny, ny) = alg.dgdy;
	return out;
}

StepSolver::StepSolver(const DaeSystem& system, SolverConfig cfg) : mSystem(system), mCfg(std::move(cfg)) {
	if (!(mCfg.epsilon > 0.0) || mCfg.kMax < 1 || !(mCfg.h > 0.0))
		throw Error("solver config needs epsilon > 0, k_max >= 1 and h > 0");
}

StepOutcome StepSolver::step(const SystemState& stateN, double h) {
	const int nx = mSystem.numStates();
	const int ny = mSystem.numAlgebraic();
	Vector iterate(nx + ny);
	iterate << stateN.x, stateN.y;

	if (mCfg.reuseJacobian && mHaveLu && mLuH != h)
		mHaveLu = false;
	bool refresh = !mCfg.reuseJacobian || !mHaveLu;

	StepOutcome out;
	double previous = 0.0;
	for (int k = 1; k <= mCfg.kMax; ++k) {
		const auto rs = assemble(mSystem, mCfg, stateN, iterate, h);
		if (refresh) {
			mLu.compute(rs.J);
			checkPivots(mLu);
			mHaveLu = true;
			mLuH = h;
			refresh = !mCfg.reuseJacobian;
		}
		const Vector dx = mLu.solve(rs.F);
		iterate -= dx;
		const double update = dx.cwiseAbs().maxCoeff();
		out.updates.push_back(update);
		out.iterations = k;
		if (!std::isfinite(update))
			throw ConvergenceError(fmt::format("non-finite Newton update at t = {:.6g}", stateN.t + h), update, k);
		if (update < mCfg.epsilon) {
			out.state.t = stateN.t + h;
			out.state.x = iterate.head(nx);
			out.state.y = iterate.tail(ny);
			return out;
		}
		// Stale factors: refactor when the contraction is poor.
		if (mCfg.reuseJacobian && k > 1 && update > 0.25 * previous)
			refresh = true;
		previous = update;
	}
	mHaveLu = false;
	const auto rs = assemble(mSystem, mCfg, stateN, iterate, h);
	const double norm = rs.F.cwiseAbs().maxCoeff();
	throw ConvergenceError(fmt::format("step at t = {:.6g} did not converge in {} iterations (|F| = {:.3e}, last "
									   "update {:.3e})",
							   stateN.t + h, mCfg.kMax, norm, out.updates.back()),
		norm, mCfg.kMax);
}

StepOutcome newtonSolve(const DaeSystem& system, const SolverConfig& cfg, const SystemState& stateN) {
	StepSolver solver(system, cfg);
	return solver.step(stateN, cfg.h);
}

SystemState projectAlgebraic(const DaeSystem& system, SystemState state, const NewtonOptions& options) {
	Vector y = state.y;
	newtonIterate(
		[&](const Vector& yk, Vector& f, Matrix& j) {
			auto alg = system.algebraic(state.x, yk, state.t);
			f = std::move(alg.g);
			j = std::move(alg.dgdy);
		},
		y, options);
	state.y = y;
	return state;
}

double TrajectoryResult::voltage(std::size_t row, std::size_t bus) const {
	return std::hypot(y[row][2 * bus], y[row][2 * bus + 1]);
}

double TrajectoryResult::angle(std::size_t row, std::size_t bus) const {
	return std::atan2(y[row][2 * bus + 1], y[row][2 * bus]);
}

double TrajectoryResult::loadAngle(std::size_t row, std::size_t m) const {
	return wrapAngle(delta(row, m) - angle(row, static_cast<std::size_t>(machineBus[m])));
}

void TrajectoryResult::throwIfFailed() const {
	if (!completed)
		throw Error("simulation failed: " + failure);
}

TrajectoryResult simulate(const NetworkModel& model, const SolverConfig& cfg, const SystemState& initial,
	double tEnd, const std::vector<Disturbance>& disturbances, const SimulationOptions& options) {
	if (!(tEnd > 0.0))
		throw Error("simulation end time must be positive");
	if (!(cfg.h > 0.0))
		throw Error("step size must be positive");
	const double h = cfg.h;
	const long long steps = std::max<long long>(1, std::llround(tEnd / h));
	long long stride = 1;
	if (options.recordEvery > 0.0) {
		stride = std::llround(options.recordEvery / h);
		if (stride < 1 || std::abs(static_cast<double>(stride) * h - options.recordEvery) > 1e-9 * options.recordEvery)
			throw Error(fmt::format("recording interval {} s is not a multiple of the step {} s", options.recordEvery, h));
	}

	std::vector<std::pair<long long, Disturbance>> pending;
	for (const auto& d : disturbances) {
		if (!(d.time >= 0.0))
			throw Error("disturbance time must be non-negative");
		pending.emplace_back(std::llround(d.time / h), d);
	}
	std::stable_sort(pending.begin(), pending.end(),
		[](const auto& a, const auto& b) { return a.first < b.first; });

	NetworkModel current = model;
	auto system = std::make_unique<PowerSystemDae>(current);
	auto solver = std::make_unique<StepSolver>(*system, cfg);
	if (initial.x.size() != system->numStates() || initial.y.size() != system->numAlgebraic())
		throw DimensionError("initial state does not match the network");

	TrajectoryResult traj;
	for (const auto& m : model.machines())
		traj.machineBus.push_back(m.bus);
	traj.numBuses = model.numBuses();

	SystemState state = initial;
	state.t = 0.0;
	auto record = [&](int iterations, const std::vector<double>& updates) {
		traj.t.push_back(state.t);
		traj.x.push_back(state.x);
		traj.y.push_back(state.y);
		traj.newtonIterations.push_back(iterations);
		const auto n = updates.size();
		traj.lastUpdates.push_back({n >= 2 ? updates[n - 2] : 0.0, n >= 1 ? updates[n - 1] : 0.0});
	};
	record(0, {});

	std::size_t next = 0;
	for (long long n = 0; n < steps; ++n) {
		bool changed = false;
		while (next < pending.size() && pending[next].first <= n) {
			current = applyDisturbance(current, pending[next].second);
			changed = true;
			++next;
		}
		try {
			if (changed) {
				system = std::make_unique<PowerSystemDae>(current);
				solver = std::make_unique<StepSolver>(*system, cfg);
				if (options.projectAfterDisturbance)
					state = projectAlgebraic(*system, state, {cfg.epsilon, cfg.kMax});
			}
			auto outcome = solver->step(state, h);
			state = std::move(outcome.state);
			state.t = static_cast<double>(n + 1) * h;
			if ((n + 1) % stride == 0 || n + 1 == steps)
				record(outcome.iterations, outcome.updates);
		} catch (const Error& e) {
			traj.completed = false;
			traj.failure = e.what();
			log().warn("simulation stopped at t = {:.6g}: {}", state.t, e.what());
			break;
		}
	}
	return traj;
}

void writeTrajectoryCsv(const TrajectoryResult& traj, std::ostream& out) {
	const auto m = traj.numMachines();
	const auto nb = traj.numBuses;
	out << "t";
	for (std::size_t i = 0; i < m; ++i)
		out << ",delta_" << i + 1;
	for (std::size_t i = 0; i < m; ++i)
		out << ",domega_" << i + 1;
	for (std::size_t j = 0; j < nb; ++j)
		out << ",V_" << j + 1;
	for (std::size_t j = 0; j < nb; ++j)
		out << ",theta_" << j + 1;
	out << ",newton_iters\n";
	for (std::size_t r = 0; r < traj.size(); ++r) {
		out << fmt::format("{:.17g}", traj.t[r]);
		for (std::size_t i = 0; i < m; ++i)
			out << fmt::format(",{:.17g}", traj.delta(r, i));
		for (std::size_t i = 0; i < m; ++i)
			out << fmt::format(",{:.17g}", traj.dOmega(r, i));
		for (std::size_t j = 0; j < nb; ++j)
			out << fmt::format(",{:.17g}", traj.voltage(r, j));
		for (std::size_t j = 0; j < nb; ++j)
			out << fmt::format(",{:.17g}", traj.angle(r, j));
		out << "," << traj.newtonIterations[r] << "\n";
	}
}

} // namespace hdae
