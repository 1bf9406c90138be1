// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <fmt/format.h>

#include <hdae/harness.hpp>

#include "support.hpp"

using namespace hdae;
namespace fs = std::filesystem;

namespace {

struct Outcome {
	bool pass = false;
	std::string detail;
};

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body) {
	const auto start = std::chrono::steady_clock::now();
	Outcome o;
	try {
		o = body();
	} catch (const std::exception& e) {
		o = {false, std::string("exception: ") + e.what()};
	}
	const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
	if (!o.pass)
		++failures;
	std::cout << fmt::format("{} {:<28} {} [{:.1f} s]", o.pass ? "PASS" : "FAIL", name, o.detail, secs) << std::endl;
}

Disturbance pmStep(int machine, double dp) {
	Disturbance d;
	d.target = machine;
	d.magnitude = dp;
	return d;
}

/// ieee9 with P_m of machine 2 stepped by -0.2 p.u. at t = 0, one second.
Scenario orderScenario() {
	auto sc = equilibriumScenario(loadNetworkSource("ieee9"), {pmStep(1, -0.2)}, 1.0);
	sc.reference.maxRefinements = 0;
	return sc;
}

double relErr(double analytic, double fd) {
	return std::abs(analytic - fd) / std::max(1.0, std::abs(fd));
}

// --- exact-linear plug-in ---------------------------------------------------

/// One linear component driven by y(t) = a + b t, imposed by g = y - a - b t.
class RampDae final : public DaeSystem {
public:
	RampDae(Matrix a, Matrix b, double y0, double slope) : mComp(a, b), mY0(y0), mSlope(slope) {}
	std::size_t numComponents() const override { return 1; }
	const Component& component(std::size_t) const override { return mComp; }
	const std::vector<int>& boundaryIndices(std::size_t) const override { return mIdx; }
	int numAlgebraic() const override { return 1; }
	AlgebraicEvaluation algebraic(const Vector& x, const Vector& y, double t) const override {
		AlgebraicEvaluation e;
		e.g = Vector::Constant(1, y[0] - mY0 - mSlope * t);
		e.dgdx = Matrix::Zero(1, x.size());
		e.dgdy = Matrix::Identity(1, 1);
		return e;
	}

private:
	LinearComponent mComp;
	double mY0;
	double mSlope;
	std::vector<int> mIdx{0};
};

/// x(t) for dx/dt = A x + B (a + b t), A 2x2 with distinct eigenvalues, by
/// modal decomposition.
Eigen::Vector2d closedForm(const Eigen::Matrix2d& A, const Eigen::Vector2d& B, const Eigen::Vector2d& x0, double a,
	double b, double t) {
	Eigen::EigenSolver<Eigen::Matrix2d> es(A);
	const Eigen::Matrix2cd V = es.eigenvectors();
	const Eigen::Vector2cd lam = es.eigenvalues();
	const Eigen::Matrix2cd Vi = V.inverse();
	const Eigen::Vector2cd z0 = Vi * x0.cast<std::complex<double>>();
	const Eigen::Vector2cd bz = Vi * B.cast<std::complex<double>>();
	Eigen::Vector2cd z;
	for (int i = 0; i < 2; ++i) {
		const auto l = lam[i];
		const auto e = std::exp(l * t);
		z[i] = e * z0[i] + bz[i] * (a * (e - 1.0) / l + b * (e - 1.0 - l * t) / (l * l));
	}
	return (V * z).real();
}

// --- CLI ----------------------------------------------------------------------

int run(const std::string& cli, const std::string& args) {
	const std::string cmd = "'" + cli + "' " + args + " >/dev/null 2>&1";
	const int status = std::system(cmd.c_str());
	return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
	std::ifstream in(p, std::ios::binary);
	std::stringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

/// Small hand-built net with gentle weights, saved for the hybrid studies.
void writeHandNet(const fs::path& path) {
	std::vector<DenseLayer> layers;
	DenseLayer l1{Matrix::Zero(4, kMachineInputs), Vector::Zero(4)};
	l1.w(0, 2) = 1.0;
	l1.w(1, 1) = 0.5;
	l1.w(2, 4) = -0.5;
	l1.w(3, 5) = 0.25;
	DenseLayer l2{Matrix::Zero(2, 4), Vector::Zero(2)};
	l2.w(0, 0) = 0.2;
	l2.w(1, 1) = -0.05;
	l2.w(1, 2) = 0.05;
	l2.w(1, 3) = 0.01;
	layers = {l1, l2};
	saveWeights(SurrogateNet(layers, machineInputDomain(), (Vector(2) << 5.7, 0.5).finished(), 40e-3), path);
}

} // namespace

int main(int argc, char** argv) {
	if (argc < 2) {
		std::cerr << "usage: acceptance <path to hdae cli>\n";
		return 2;
	}
	const std::string cli = argv[1];

	std::vector<SweepRow> orderRows;
	criterion("trapezoidal-global-order", [&] {
		const auto sc = orderScenario();
		orderRows = stepSweep(sc, {pureSolver(), parseSolver("custom:1=be,2=be,3=be", 3, {}, nullptr)},
			{1e-3, 2e-3, 4e-3, 8e-3});
		const double slope = orderSlope(orderRows, "pure", "load_angle_3");
		return Outcome{std::abs(slope - 2.0) <= 0.3, fmt::format("slope {:.3f} (2.0 +/- 0.3)", slope)};
	});

	criterion("trapezoidal-beats-be", [&] {
		double trap = NAN, be = NAN;
		for (const auto& r : orderRows)
			if (r.h == 8e-3 && r.variable == "load_angle_3")
				(r.solver == "pure" ? trap : be) = r.maxError;
		return Outcome{trap < be, fmt::format("h = 8 ms: trapezoidal {:.3e} < backward Euler {:.3e}", trap, be)};
	});

	criterion("equilibrium-hold", [&] {
		double dw = 0.0, dv = 0.0;
		for (const char* net : {"ieee9", "ieee57"}) {
			const auto eq = initEquilibrium(loadNetworkSource(net));
			SolverConfig cfg;
			cfg.h = 0.02;
			const auto traj = simulate(eq.model, cfg, eq.state, 10.0, {});
			traj.throwIfFailed();
			for (std::size_t r = 0; r < traj.size(); ++r) {
				for (std::size_t m = 0; m < traj.numMachines(); ++m)
					dw = std::max(dw, std::abs(traj.dOmega(r, m)));
				for (std::size_t b = 0; b < traj.numBuses; ++b)
					dv = std::max(dv, std::abs(traj.voltage(r, b) - traj.voltage(0, b)));
			}
		}
		return Outcome{dw < 1e-8 && dv < 1e-8, fmt::format("max |dw| {:.2e}, max |V - V0| {:.2e} (< 1e-8)", dw, dv)};
	});

	criterion("jacobian-suite", [&] {
		std::mt19937_64 rng(2024);
		std::uniform_real_distribution<double> u(0.0, 1.0);
		const double tol = 1e-6;

		// assembled dF/dX: trapezoidal, backward Euler and surrogate rows mixed
		const auto eq = initEquilibrium(loadNetworkSource("ieee9"));
		PowerSystemDae dae(eq.model);
		auto net = std::make_shared<SurrogateNet>(test::randomMachineNet(rng, {8, 8}, 2, 0.5));
		SolverConfig cfg;
		cfg.algebraizers = {std::make_shared<TrapezoidalRule>(), std::make_shared<BackwardEuler>(),
			std::make_shared<SurrogateAlgebraizer>(std::make_shared<MachineSurrogateModel>(net, DomainPolicy::Clamp))};
		double worstF = 0.0;
		for (int p = 0; p < 100; ++p) {
			SystemState sN = eq.state;
			Vector z(sN.x.size() + sN.y.size());
			z << sN.x, sN.y;
			for (auto& v : z)
				v += 0.02 * (u(rng) - 0.5);
			const double h = 0.005 + 0.03 * u(rng);
			const auto rs = assemble(dae, cfg, sN, z, h);
			for (Eigen::Index c = 0; c < z.size(); ++c) {
				const double e = 1e-6 * std::max(1.0, std::abs(z[c]));
				Vector zp = z, zm = z;
				zp[c] += e;
				zm[c] -= e;
				const Vector fd = (assemble(dae, cfg, sN, zp, h).F - assemble(dae, cfg, sN, zm, h).F) / (2 * e);
				for (Eigen::Index r = 0; r < z.size(); ++r)
					worstF = std::max(worstF, relErr(rs.J(r, c), fd[r]));
			}
		}

		// machine partials, classical and two-axis
		MachineParams two;
		two.inertia = 6.4;
		two.damping = 1.5;
		two.xd = 0.8958;
		two.xdp = 0.1198;
		two.xq = 0.8645;
		two.xqp = 0.1969;
		two.rs = 0.002;
		two.tdop = 6.0;
		two.tqop = 0.535;
		two.pm = 1.63;
		two.efd = 1.8;
		const MachineParams cls = eq.model.machines()[2].params;
		double worstM = 0.0;
		for (int p = 0; p < 100; ++p) {
			const auto& mp = p % 2 ? two : cls;
			const MachineState s{0.8 + 0.4 * u(rng), 0.3 * u(rng), 2.0 * u(rng) - 1.0, 0.02 * (u(rng) - 0.5)};
			const double vre = 0.8 + 0.3 * u(rng), vim = 0.6 * (u(rng) - 0.5);
			const auto j = machineJacobians(mp, s, vre, vim, 60.0);
			auto eval = [&](const Eigen::Vector4d& x, double a, double b) {
				const auto st = MachineState::fromVec(x);
				Eigen::Matrix<double, 6, 1> out;
				const Complex i = injectedCurrent(machineCurrentsRect(mp, st, a, b), st.delta);
				out << machineFRect(mp, st, a, b, 60.0), i.real(), i.imag();
				return out;
			};
			Eigen::Matrix<double, 6, 6> an;
			an.topLeftCorner<4, 4>() = j.dfdx;
			an.topRightCorner<4, 2>() = j.dfdv;
			an.bottomLeftCorner<2, 4>() = j.didx;
			an.bottomRightCorner<2, 2>() = j.didv;
			for (int c = 0; c < 6; ++c) {
				const double e = 1e-6;
				Eigen::Vector4d xp = s.vec(), xm = s.vec();
				double ap = vre, am = vre, bp = vim, bm = vim;
				if (c < 4) {
					xp[c] += e;
					xm[c] -= e;
				} else if (c == 4) {
					ap += e;
					am -= e;
				} else {
					bp += e;
					bm -= e;
				}
				const auto fd = ((eval(xp, ap, bp) - eval(xm, am, bm)) / (2 * e)).eval();
				for (int r = 0; r < 6; ++r)
					worstM = std::max(worstM, relErr(an(r, c), fd[r]));
			}
		}

		// surrogate input Jacobian
		double worstS = 0.0;
		for (int p = 0; p < 100; ++p) {
			const auto sn = test::randomMachineNet(rng, {16, 16}, p % 2 ? 4 : 2);
			const auto f = test::randomFeatures(rng, sn);
			const MachineState x{1.0 + 0.1 * u(rng), 0.05 * u(rng), f[1] + 0.2, f[2]};
			const PolarVoltage yN{f[3], 0.2}, yNp1{f[4], 0.2 + f[5] * 0.1};
			const double h = f[0];
			const auto j = inputJacobian(sn, h, x, yN, yNp1);
			const double e = 1e-6;
			auto fwd = [&](double hh, Eigen::Vector4d xx, PolarVoltage a, PolarVoltage b) {
				return forward(sn, hh, MachineState::fromVec(xx), a, b).vec();
			};
			for (int r = 0; r < 4; ++r) {
				worstS = std::max(worstS,
					relErr(j.dh[r], (fwd(h + e, x.vec(), yN, yNp1)[r] - fwd(h - e, x.vec(), yN, yNp1)[r]) / (2 * e)));
				for (int c = 0; c < 4; ++c) {
					Eigen::Vector4d xp = x.vec(), xm = x.vec();
					xp[c] += e;
					xm[c] -= e;
					worstS = std::max(worstS, relErr(j.dxN(r, c), (fwd(h, xp, yN, yNp1)[r] - fwd(h, xm, yN, yNp1)[r]) / (2 * e)));
				}
				for (int c = 0; c < 2; ++c) {
					auto bump = [&](PolarVoltage v, double d) {
						(c == 0 ? v.v : v.theta) += d;
						return v;
					};
					worstS = std::max(worstS, relErr(j.dyN(r, c),
						(fwd(h, x.vec(), bump(yN, e), yNp1)[r] - fwd(h, x.vec(), bump(yN, -e), yNp1)[r]) / (2 * e)));
					worstS = std::max(worstS, relErr(j.dyNp1(r, c),
						(fwd(h, x.vec(), yN, bump(yNp1, e))[r] - fwd(h, x.vec(), yN, bump(yNp1, -e))[r]) / (2 * e)));
				}
			}
		}
		return Outcome{worstF < tol && worstM < tol && worstS < tol,
			fmt::format("max rel. deviation: assembled {:.1e}, machine {:.1e}, surrogate {:.1e} (< 1e-6)", worstF,
				worstM, worstS)};
	});

	criterion("plug-in-exactness", [&] {
		// small-signal swing equation about a stable operating point
		const double H = 3.0, D = 2.0, K = 1.4, ws = 2 * kPi * 60.0;
		Eigen::Matrix2d A;
		A << 0.0, ws, -K / (2 * H), -D / (2 * H);
		const Eigen::Vector2d B(0.0, 1.0 / (2 * H));
		const double y0 = 0.05, slope = -0.08, h = 0.01;
		RampDae dae(A, B, y0, slope);
		SolverConfig cfg;
		cfg.h = h;
		cfg.epsilon = 1e-12;
		cfg.algebraizers = {
			std::make_shared<SurrogateAlgebraizer>(std::make_shared<ExactLinearSurrogate>(A, B, 1.0), "exact")};
		StepSolver solver(dae, cfg);
		const Eigen::Vector2d x0(0.02, -0.001);
		SystemState s{0.0, x0, Vector::Constant(1, y0)};
		double worst = 0.0;
		for (int n = 1; n <= 100; ++n) {
			s = solver.step(s, h).state;
			s.t = n * h;
			const auto exact = closedForm(A, B, x0, y0, slope, s.t);
			worst = std::max(worst, (s.x - exact).cwiseAbs().maxCoeff());
		}
		return Outcome{worst < 1e-9, fmt::format("max |x_n - x(t_n)| over 100 steps {:.2e} (< 1e-9)", worst)};
	});

	criterion("hard-constraint-round-trip", [&] {
		std::mt19937_64 rng(77);
		std::uniform_int_distribution<int> width(1, 24), depth(1, 4);
		const auto dir = fs::temp_directory_path() / "hdae_acceptance_nets";
		fs::create_directories(dir);
		int bad = 0, mismatched = 0;
		for (int n = 0; n < 1000; ++n) {
			std::vector<int> hidden(static_cast<std::size_t>(depth(rng)));
			for (auto& w : hidden)
				w = width(rng);
			const auto net = test::randomMachineNet(rng, hidden, n % 2 ? 4 : 2, 4.0);
			std::uniform_real_distribution<double> u(-2.0, 2.0);
			const MachineState x{u(rng), u(rng), 10 * u(rng), u(rng)};
			const PolarVoltage yN{1.0 + u(rng), u(rng)}, yNp1{1.0 + u(rng), 5 * u(rng)};
			if (forward(net, 0.0, x, yN, yNp1).vec() != x.vec())
				++bad;
			const auto path = dir / "net.json";
			saveWeights(net, path);
			const auto back = loadWeights(path);
			bool same = back.layers().size() == net.layers().size() && back.outputScale() == net.outputScale()
				&& back.hMax() == net.hMax();
			for (std::size_t k = 0; same && k < net.layers().size(); ++k)
				same = back.layers()[k].w == net.layers()[k].w && back.layers()[k].b == net.layers()[k].b;
			for (std::size_t i = 0; same && i < net.inputs().size(); ++i)
				same = back.inputs()[i].lo == net.inputs()[i].lo && back.inputs()[i].hi == net.inputs()[i].hi;
			if (!same)
				++mismatched;
		}
		fs::remove_all(dir);
		return Outcome{bad == 0 && mismatched == 0,
			fmt::format("1000 nets: {} h = 0 mismatches, {} round-trip mismatches", bad, mismatched)};
	});

	criterion("oracle-self-consistency", [&] {
		const auto sc = orderScenario();
		const auto ref = referenceTrajectory(sc.model, sc.initial, sc.tEnd, sc.disturbances, sc.reference);
		std::mt19937_64 rng(5);
		const auto domain = machineInputDomain();
		double worst = 0.0;
		for (const char* name : {"m1", "m2", "m3"}) {
			const auto m = machinePreset(name);
			for (int p = 0; p < 30; ++p) {
				std::array<double, kMachineInputs> in{};
				for (int i = 0; i < kMachineInputs; ++i)
					in[i] = std::uniform_real_distribution<double>(domain[i].lo, domain[i].hi)(rng);
				const MachineState x{m.eqp, m.edp, in[1], in[2]};
				const PolarVoltage yN{in[3], 0.0}, yNp1{in[4], in[5]};
				// default run: 1000 substeps checked against 2000
				componentTruth(m.params, m.frequencyHz, in[0], x, yN, yNp1);
				const auto a = componentTruth(m.params, m.frequencyHz, in[0], x, yN, yNp1, {500, 1.0});
				const auto b = componentTruth(m.params, m.frequencyHz, in[0], x, yN, yNp1, {1000, 1.0});
				worst = std::max(worst, (a.vec() - b.vec()).cwiseAbs().maxCoeff());
			}
		}
		return Outcome{ref.deviation < 1e-8 && worst < 1e-10,
			fmt::format("reference h vs h/2 {:.2e} (< 1e-8), RK4 halving {:.2e} (< 1e-10)", ref.deviation, worst)};
	});

	criterion("cli-determinism", [&] {
		const auto root = fs::temp_directory_path() / "hdae_acceptance_cli";
		fs::remove_all(root);
		fs::create_directories(root);
		const auto weights = root / "hand_net.json";
		writeHandNet(weights);
		const std::string common = " --network ieee9 --disturb pm:2:-0.2@0 --t-end 0.5 --weights " + weights.string()
			+ " --clamp --solver pure --solver hybrid --solver custom:2=be";
		const std::vector<std::string> studies{
			"global-error --h-ms 10" + common,
			"sweep --h-ms 5 --h-ms 10 --h-ms 20" + common,
			"local-error --h-ms 5 --h-ms 20 --n 8 --seed 3" + common,
			"fan --h-ms 10 --n 4 --seed 3" + common,
			"boost --h-ms 10 --network ieee9 --disturb pm:2:-0.2@0 --t-end 0.5 --clamp --weights " + weights.string(),
			"gen-dataset --n-x 20 --n-c 50 --seed 3",
		};
		int files = 0, differ = 0, errors = 0;
		for (std::size_t s = 0; s < studies.size(); ++s) {
			for (int pass = 0; pass < 2; ++pass) {
				const auto out = root / fmt::format("run{}", pass) / std::to_string(s);
				// the second pass uses several workers to exercise the reduction order
				if (run(cli, studies[s] + " --jobs " + (pass ? "3" : "1") + " --out " + out.string()) != 0)
					++errors;
			}
			for (const auto& entry : fs::directory_iterator(root / "run0" / std::to_string(s))) {
				++files;
				const auto twin = root / "run1" / std::to_string(s) / entry.path().filename();
				if (!fs::exists(twin) || slurp(entry.path()) != slurp(twin))
					++differ;
			}
		}
		fs::remove_all(root);
		return Outcome{errors == 0 && differ == 0 && files >= 8,
			fmt::format("{} report files, {} differ, {} failed runs", files, differ, errors)};
	});

	std::cout << (failures ? fmt::format("{} criteria failed", failures) : std::string("all criteria passed"))
			  << std::endl;
	return failures ? 1 : 0;
}
