#include <hdae/equilibrium.hpp>

#include <algorithm>
#include <cmath>

#include <hdae/dae.hpp>

namespace hdae {

namespace {

// Per-machine layout of the unknown vector.
struct Slot {
	int offset = 0;
	bool reference = false;
	bool slackPower = false;
	bool classical = false;
	int size() const { return (classical ? 3 : 5) - (reference ? 1 : 0) + (slackPower ? 1 : 0); }
};

struct Decoded {
	std::vector<MachineParams> params;
	std::vector<MachineState> states;
	Vector y;
};

class Problem {
public:
	explicit Problem(const NetworkModel& model) : mModel(model) {
		int off = 0;
		for (std::size_t k = 0; k < model.numMachines(); ++k) {
			const auto& m = model.machines()[k];
			Slot s;
			s.offset = off;
			s.reference = k == 0;
			s.slackPower = k == 0 && m.vSet.has_value();
			s.classical = m.params.classical;
			off += s.size();
			mSlots.push_back(s);
		}
		mYOffset = off;
		mSize = off + 2 * static_cast<int>(model.numBuses());
	}

	int size() const { return mSize; }

	Vector initialGuess() const {
		Vector z = Vector::Zero(mSize);
		for (std::size_t k = 0; k < mSlots.size(); ++k) {
			const auto& s = mSlots[k];
			const auto& p = mModel.machines()[k].params;
			int i = s.offset;
			z[i++] = 1.0; // E'_q
			if (!s.classical)
				z[i++] = 0.0; // E'_d
			if (!s.reference)
				z[i++] = 0.0; // delta
			z[i++] = 0.0;     // d_omega
			if (!s.classical)
				z[i++] = p.efd;
			if (s.slackPower)
				z[i++] = p.pm;
		}
		for (std::size_t b = 0; b < mModel.numBuses(); ++b)
			z[mYOffset + 2 * static_cast<int>(b)] = 1.0;
		return z;
	}

	Decoded decode(const Vector& z) const {
		Decoded d;
		for (std::size_t k = 0; k < mSlots.size(); ++k) {
			const auto& s = mSlots[k];
			MachineParams p = mModel.machines()[k].params;
			MachineState st;
			int i = s.offset;
			st.eqp = z[i++];
			if (!s.classical)
				st.edp = z[i++];
			if (!s.reference)
				st.delta = z[i++];
			st.dOmega = z[i++];
			if (!s.classical)
				p.efd = z[i++];
			if (s.slackPower)
				p.pm = z[i++];
			d.params.push_back(p);
			d.states.push_back(st);
		}
		d.y = z.tail(2 * static_cast<Eigen::Index>(mModel.numBuses()));
		return d;
	}

	Vector residual(const Vector& z) const {
		const auto d = decode(z);
		Vector r(mSize);
		ComplexVector currents(static_cast<Eigen::Index>(mSlots.size()));
		for (std::size_t k = 0; k < mSlots.size(); ++k) {
			const auto& s = mSlots[k];
			const auto& unit = mModel.machines()[k];
			const double vre = d.y[2 * unit.bus], vim = d.y[2 * unit.bus + 1];
			const auto f = machineFRect(d.params[k], d.states[k], vre, vim, mModel.frequencyHz());
			int i = s.offset;
			for (int row = s.classical ? MachineState::kDelta : 0; row < MachineState::kSize; ++row)
				r[i++] = f[row];
			if (unit.vSet)
				r[i++] = vre * vre + vim * vim - *unit.vSet * *unit.vSet;
			currents[static_cast<Eigen::Index>(k)] =
				injectedCurrent(machineCurrentsRect(d.params[k], d.states[k], vre, vim), d.states[k].delta);
		}
		r.tail(mSize - mYOffset) = networkResidual(mModel, currents, deinterleave(d.y));
		return r;
	}

	Matrix jacobian(const Vector& z) const {
		Matrix j(mSize, mSize);
		for (int c = 0; c < mSize; ++c) {
			const double step = 1e-7 * std::max(1.0, std::abs(z[c]));
			Vector zp = z, zm = z;
			zp[c] += step;
			zm[c] -= step;
			j.col(c) = (residual(zp) - residual(zm)) / (2.0 * step);
		}
		return j;
	}

private:
	const NetworkModel& mModel;
	std::vector<Slot> mSlots;
	int mYOffset = 0;
	int mSize = 0;
};

} // namespace

double equilibriumResidual(const NetworkModel& model, const SystemState& state) {
	const PowerSystemDae system(model);
	double norm = 0.0;
	for (std::size_t k = 0; k < model.numMachines(); ++k) {
		const auto& unit = model.machines()[k];
		const auto f = machineFRect(unit.params, MachineState::fromVec(state.x.segment<4>(4 * static_cast<int>(k))),
			state.y[2 * unit.bus], state.y[2 * unit.bus + 1], model.frequencyHz());
		norm = std::max(norm, f.cwiseAbs().maxCoeff());
	}
	const auto g = system.algebraic(state.x, state.y, state.t).g;
	return std::max(norm, g.cwiseAbs().maxCoeff());
}

Equilibrium initEquilibrium(const NetworkModel& model, const NewtonOptions& options) {
	if (model.numMachines() == 0)
		throw Error("equilibrium needs at least one machine");
	const Problem problem(model);
	Vector z = problem.initialGuess();
	// Converge well below the step tolerance; the FD Jacobian only affects the rate.
	NewtonOptions opts = options;
	opts.epsilon = std::min(options.epsilon, 1e-12);
	opts.kMax = std::max(options.kMax, 50);
	const auto report = newtonIterate(
		[&](const Vector& zk, Vector& f, Matrix& j) {
			f = problem.residual(zk);
			j = problem.jacobian(zk);
		},
		z, opts);

	const auto d = problem.decode(z);
	NetworkModel solved = model;
	for (std::size_t k = 0; k < d.params.size(); ++k)
		solved = solved.withMachineParams(k, d.params[k]);

	Equilibrium out{solved, {}, report.iterations, 0.0};
	out.state.t = 0.0;
	out.state.x.resize(4 * static_cast<Eigen::Index>(d.states.size()));
	for (std::size_t k = 0; k < d.states.size(); ++k)
		out.state.x.segment<4>(4 * static_cast<Eigen::Index>(k)) = d.states[k].vec();
	out.state.y = d.y;
	out.residualNorm = equilibriumResidual(solved, out.state);
	return out;
}

} // namespace hdae
