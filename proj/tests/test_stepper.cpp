#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <hdae/equilibrium.hpp>
#include <hdae/stepper.hpp>

using namespace hdae;

namespace {

const Equilibrium& ieee9() {
	static const Equilibrium eq = initEquilibrium(loadNetworkSource("ieee9"));
	return eq;
}

Disturbance pmStep(int machine, double dp, double t) {
	Disturbance d;
	d.kind = Disturbance::Kind::MechanicalPowerStep;
	d.target = machine;
	d.magnitude = dp;
	d.time = t;
	return d;
}

Vector stacked(const SystemState& s) {
	Vector z(s.x.size() + s.y.size());
	z << s.x, s.y;
	return z;
}

SolverConfig mixedConfig(std::size_t machines, bool backwardEuler) {
	SolverConfig cfg;
	for (std::size_t i = 0; i < machines; ++i) {
		if (backwardEuler && i % 2)
			cfg.algebraizers.push_back(std::make_shared<BackwardEuler>());
		else
			cfg.algebraizers.push_back(std::make_shared<TrapezoidalRule>());
	}
	return cfg;
}

} // namespace

TEST_CASE("Newton on a scalar quadratic") {
	Vector x = Vector::Constant(1, 3.0);
	const auto rep = newtonIterate(
		[](const Vector& z, Vector& f, Matrix& j) {
			f = Vector::Constant(1, z[0] * z[0] - 4.0);
			j = Matrix::Constant(1, 1, 2.0 * z[0]);
		},
		x, {1e-12, 20});
	CHECK(x[0] == doctest::Approx(2.0).epsilon(1e-14));
	CHECK(rep.iterations <= 6);
	// quadratic contraction once close
	const auto& u = rep.updates;
	for (std::size_t k = 2; k + 1 < u.size(); ++k)
		CHECK(u[k + 1] <= 10.0 * u[k] * u[k]);
}

TEST_CASE("Newton stops after one iteration at a fixed point") {
	Vector x = Vector::Constant(2, 1.0);
	const auto rep = newtonIterate(
		[](const Vector& z, Vector& f, Matrix& j) {
			f = z.array() - 1.0;
			j = Matrix::Identity(2, 2);
		},
		x, {});
	CHECK(rep.iterations == 1);
	CHECK(rep.updates[0] == 0.0);
}

TEST_CASE("Newton failures") {
	Vector x = Vector::Constant(2, 1.0);
	auto singular = [](const Vector& z, Vector& f, Matrix& j) {
		f = z;
		j = Matrix::Zero(2, 2);
		j(0, 0) = 1.0;
	};
	CHECK_THROWS_AS(newtonIterate(singular, x, {}), ConvergenceError);

	Vector y = Vector::Constant(1, 0.5);
	auto noRoot = [](const Vector& z, Vector& f, Matrix& j) {
		f = Vector::Constant(1, z[0] * z[0] + 1.0);
		j = Matrix::Constant(1, 1, 2.0 * z[0]);
	};
	try {
		newtonIterate(noRoot, y, {1e-10, 7});
		FAIL("expected a convergence error");
	} catch (const ConvergenceError& e) {
		CHECK(e.iterations() == 7);
		CHECK(e.norm() >= 1.0);
	}
	CHECK_THROWS_AS(newtonIterate(noRoot, y, {0.0, 5}), Error);
}

TEST_CASE("assembled Jacobian matches central differences") {
	const auto& eq = ieee9();
	PowerSystemDae dae(eq.model);
	std::mt19937_64 rng(7);
	std::uniform_real_distribution<double> u(-0.05, 0.05);
	for (bool be : {false, true}) {
		auto cfg = mixedConfig(eq.model.numMachines(), be);
		for (int trial = 0; trial < 5; ++trial) {
			SystemState sN = eq.state;
			for (auto& v : sN.x)
				v += u(rng);
			Vector z = stacked(eq.state);
			for (auto& v : z)
				v += u(rng);
			const double h = 0.01;
			const auto rs = assemble(dae, cfg, sN, z, h);
			for (Eigen::Index c = 0; c < z.size(); ++c) {
				const double e = 1e-6 * std::max(1.0, std::abs(z[c]));
				Vector zp = z, zm = z;
				zp[c] += e;
				zm[c] -= e;
				const Vector fd = (assemble(dae, cfg, sN, zp, h).F - assemble(dae, cfg, sN, zm, h).F) / (2 * e);
				for (Eigen::Index r = 0; r < z.size(); ++r)
					CHECK(std::abs(rs.J(r, c) - fd[r]) <= 1e-6 * std::max(1.0, std::abs(fd[r])));
			}
		}
	}
}

TEST_CASE("component rows do not couple to other components") {
	const auto& eq = ieee9();
	PowerSystemDae dae(eq.model);
	const auto rs = assemble(dae, SolverConfig{}, eq.state, stacked(eq.state), 0.01);
	const int m = static_cast<int>(eq.model.numMachines());
	for (int i = 0; i < m; ++i)
		for (int j = 0; j < m; ++j)
			if (i != j)
				CHECK(rs.J.block(4 * i, 4 * j, 4, 4).isZero(0.0));
	// each machine sees only its own bus voltage
	for (int i = 0; i < m; ++i) {
		const int bus = eq.model.machines()[i].bus;
		for (int c = 0; c < dae.numAlgebraic(); ++c)
			if (c / 2 != bus)
				CHECK(rs.J.block(4 * i, 4 * m + c, 4, 1).isZero(0.0));
	}
}

TEST_CASE("assemble rejects mismatched inputs") {
	const auto& eq = ieee9();
	PowerSystemDae dae(eq.model);
	CHECK_THROWS_AS(assemble(dae, SolverConfig{}, eq.state, Vector::Zero(3), 0.01), DimensionError);
	SolverConfig one;
	one.algebraizers.push_back(std::make_shared<TrapezoidalRule>());
	CHECK_THROWS_AS(assemble(dae, one, eq.state, stacked(eq.state), 0.01), DimensionError);
}

TEST_CASE("one disturbed step converges quadratically") {
	const auto& eq = ieee9();
	const auto model = applyDisturbance(eq.model, pmStep(1, -0.2, 0.0));
	PowerSystemDae dae(model);
	SolverConfig cfg;
	cfg.h = 8e-3;
	const auto out = newtonSolve(dae, cfg, eq.state);
	CHECK(out.iterations <= 10);
	CHECK(out.state.t == doctest::Approx(8e-3));
	const auto rs = assemble(dae, cfg, eq.state, stacked(out.state), cfg.h);
	CHECK(rs.F.tail(dae.numAlgebraic()).cwiseAbs().maxCoeff() < 10 * cfg.epsilon);
	CHECK(rs.F.cwiseAbs().maxCoeff() < 10 * cfg.epsilon);
	for (std::size_t k = 1; k < out.updates.size(); ++k)
		CHECK(out.updates[k] < out.updates[k - 1]);
}

TEST_CASE("step failure is reported") {
	const auto& eq = ieee9();
	PowerSystemDae dae(eq.model);
	SolverConfig cfg;
	cfg.h = 0.01;
	cfg.kMax = 1;
	SystemState far = eq.state;
	far.x[2] += 1.0;
	CHECK_THROWS_AS(newtonSolve(dae, cfg, far), ConvergenceError);
	CHECK_THROWS_AS(StepSolver(dae, SolverConfig{0.0, 20, 0.01, {}, false}), Error);
}

TEST_CASE("equilibrium holds") {
	const auto& eq = ieee9();
	SolverConfig cfg;
	cfg.h = 0.02;
	const auto traj = simulate(eq.model, cfg, eq.state, 10.0, {});
	REQUIRE(traj.completed);
	CHECK(traj.size() == 501);
	double dw = 0.0, dv = 0.0;
	for (std::size_t r = 0; r < traj.size(); ++r) {
		for (std::size_t m = 0; m < traj.numMachines(); ++m)
			dw = std::max(dw, std::abs(traj.dOmega(r, m)));
		for (std::size_t b = 0; b < traj.numBuses; ++b)
			dv = std::max(dv, std::abs(traj.voltage(r, b) - traj.voltage(0, b)));
	}
	CHECK(dw < 1e-8);
	CHECK(dv < 1e-8);
}

TEST_CASE("disturbance timing and recording") {
	const auto& eq = ieee9();
	SolverConfig cfg;
	cfg.h = 0.01;
	SimulationOptions opts;
	opts.recordEvery = 0.02;
	const auto traj = simulate(eq.model, cfg, eq.state, 0.2, {pmStep(1, -0.2, 0.05)}, opts);
	REQUIRE(traj.completed);
	REQUIRE(traj.size() == 11);
	for (std::size_t r = 0; r < traj.size(); ++r)
		CHECK(traj.t[r] == doctest::Approx(0.02 * static_cast<double>(r)));
	// applied at the start of the sixth step, so t = 0.04 is still at rest
	CHECK(std::abs(traj.dOmega(2, 1)) < 1e-12);
	CHECK(traj.dOmega(3, 1) < -1e-5);
	opts.recordEvery = 0.015;
	CHECK_THROWS_AS(simulate(eq.model, cfg, eq.state, 0.2, {}, opts), Error);
	CHECK_THROWS_AS(simulate(eq.model, cfg, eq.state, 0.0, {}), Error);
	CHECK_THROWS_AS(simulate(eq.model, cfg, eq.state, 0.1, {pmStep(7, 0.1, 0.0)}), Error);
}

TEST_CASE("projection restores the network equations") {
	const auto& eq = ieee9();
	const auto model = applyDisturbance(eq.model, pmStep(0, 0.0, 0.0)).withLoadDelta(5, {0.3, -0.1});
	PowerSystemDae dae(model);
	const auto before = dae.algebraic(eq.state.x, eq.state.y, 0.0).g.cwiseAbs().maxCoeff();
	CHECK(before > 1e-3);
	const auto s = projectAlgebraic(dae, eq.state, {1e-12, 20});
	CHECK(dae.algebraic(s.x, s.y, 0.0).g.cwiseAbs().maxCoeff() < 1e-12);
	CHECK(s.x == eq.state.x);
}

TEST_CASE("chord iteration agrees with full Newton") {
	const auto& eq = ieee9();
	SolverConfig full;
	full.h = 1e-3;
	full.epsilon = 1e-12;
	SolverConfig chord = full;
	chord.reuseJacobian = true;
	const auto a = simulate(eq.model, full, eq.state, 0.5, {pmStep(1, -0.2, 0.0)});
	const auto b = simulate(eq.model, chord, eq.state, 0.5, {pmStep(1, -0.2, 0.0)});
	REQUIRE(a.completed);
	REQUIRE(b.completed);
	CHECK((a.x.back() - b.x.back()).cwiseAbs().maxCoeff() < 1e-10);
	CHECK((a.y.back() - b.y.back()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("simulation is deterministic") {
	const auto& eq = ieee9();
	SolverConfig cfg;
	cfg.h = 0.01;
	std::ostringstream a, b;
	writeTrajectoryCsv(simulate(eq.model, cfg, eq.state, 1.0, {pmStep(2, 0.1, 0.1)}), a);
	writeTrajectoryCsv(simulate(eq.model, cfg, eq.state, 1.0, {pmStep(2, 0.1, 0.1)}), b);
	CHECK(a.str() == b.str());
	const auto header = a.str().substr(0, a.str().find('\n'));
	CHECK(header.rfind("t,delta_1,delta_2,delta_3,domega_1", 0) == 0);
	CHECK(header.find(",V_9,theta_1,") != std::string::npos);
}
