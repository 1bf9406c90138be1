#include <hdae/machine.hpp>

#include <cmath>

namespace hdae {

MachineParams MachineParams::classicalReduction() const {
	MachineParams out = *this;
	out.classical = true;
	out.xq = xdp;
	out.xqp = xdp;
	return out;
}

void MachineParams::validate() const {
	if (!(inertia > 0.0))
		throw Error("machine inertia H must be positive");
	if (!(xdp > 0.0))
		throw Error("machine X'_d must be positive");
	if (rs * rs + xdp * xqp <= 0.0)
		throw Error("machine stator matrix is singular (R_s^2 + X'_d X'_q = 0)");
	if (!classical && (!(tdop > 0.0) || !(tqop > 0.0)))
		throw Error("two-axis machine needs positive T'_do and T'_qo");
	if (classical && (xq != xdp || xqp != xdp))
		throw Error("classical machine requires X_q = X'_q = X'_d");
}

namespace {

struct StatorTerms {
	double det;
	Eigen::Matrix2d minv; // inverse of [R_s -X'_q; X'_d R_s]
};

StatorTerms statorInverse(const MachineParams& p) {
	const double det = p.rs * p.rs + p.xdp * p.xqp;
	if (det == 0.0)
		throw Error("singular stator matrix");
	Eigen::Matrix2d minv;
	minv << p.rs, p.xqp, -p.xdp, p.rs;
	return {det, minv / det};
}

} // namespace

DqCurrents machineCurrentsRect(const MachineParams& p, const MachineState& s, double vre, double vim) {
	const double sd = std::sin(s.delta), cd = std::cos(s.delta);
	// V sin(delta - theta), V cos(delta - theta)
	const double vd = vre * sd - vim * cd;
	const double vq = vre * cd + vim * sd;
	const auto st = statorInverse(p);
	const Eigen::Vector2d rhs(s.edp - vd, s.eqp - vq);
	const Eigen::Vector2d i = st.minv * rhs;
	return {i[0], i[1]};
}

DqCurrents machineCurrents(const MachineParams& p, const MachineState& s, double v, double theta) {
	return machineCurrentsRect(p, s, v * std::cos(theta), v * std::sin(theta));
}

Complex injectedCurrent(const DqCurrents& i, double delta) {
	const double sd = std::sin(delta), cd = std::cos(delta);
	return {i.id * sd + i.iq * cd, i.iq * sd - i.id * cd};
}

Eigen::Vector4d machineFRect(const MachineParams& p, const MachineState& s, double vre, double vim,
	double frequencyHz) {
	const auto i = machineCurrentsRect(p, s, vre, vim);
	Eigen::Vector4d f;
	if (p.classical) {
		f[0] = 0.0;
		f[1] = 0.0;
	} else {
		f[0] = (-s.eqp - (p.xd - p.xdp) * i.id + p.efd) / p.tdop;
		f[1] = (-s.edp + (p.xq - p.xqp) * i.iq) / p.tqop;
	}
	f[2] = 2.0 * kPi * frequencyHz * s.dOmega;
	f[3] = (p.pm - s.edp * i.id - s.eqp * i.iq - (p.xqp - p.xdp) * i.id * i.iq - p.damping * s.dOmega)
		/ (2.0 * p.inertia);
	return f;
}

Eigen::Vector4d machineF(const MachineParams& p, const MachineState& s, double v, double theta,
	double frequencyHz) {
	return machineFRect(p, s, v * std::cos(theta), v * std::sin(theta), frequencyHz);
}

MachinePartials machineJacobians(const MachineParams& p, const MachineState& s, double vre, double vim,
	double frequencyHz) {
	const double sd = std::sin(s.delta), cd = std::cos(s.delta);
	const double vd = vre * sd - vim * cd;
	const double vq = vre * cd + vim * sd;
	const auto st = statorInverse(p);
	const Eigen::Vector2d i = st.minv * Eigen::Vector2d(s.edp - vd, s.eqp - vq);
	const double id = i[0], iq = i[1];

	// d(vd, vq)/d(delta) and d(vd, vq)/d(vre, vim)
	const Eigen::Vector2d dvDelta(vq, -vd);
	Eigen::Matrix2d dvdv;
	dvdv << sd, -cd, cd, sd;

	// d(id, iq)/dx, columns (E'_q, E'_d, delta, d_omega)
	Eigen::Matrix<double, 2, 4> dIdqdx = Eigen::Matrix<double, 2, 4>::Zero();
	dIdqdx.col(0) = st.minv.col(1);
	dIdqdx.col(1) = st.minv.col(0);
	dIdqdx.col(2) = -st.minv * dvDelta;
	const Eigen::Matrix2d dIdqdv = -st.minv * dvdv;

	MachinePartials out;
	out.f = machineFRect(p, s, vre, vim, frequencyHz);
	out.dfdx.setZero();
	out.dfdv.setZero();

	if (!p.classical) {
		out.dfdx.row(0) = -(p.xd - p.xdp) * dIdqdx.row(0) / p.tdop;
		out.dfdx(0, 0) -= 1.0 / p.tdop;
		out.dfdv.row(0) = -(p.xd - p.xdp) * dIdqdv.row(0) / p.tdop;
		out.dfdx.row(1) = (p.xq - p.xqp) * dIdqdx.row(1) / p.tqop;
		out.dfdx(1, 1) -= 1.0 / p.tqop;
		out.dfdv.row(1) = (p.xq - p.xqp) * dIdqdv.row(1) / p.tqop;
	}
	out.dfdx(2, 3) = 2.0 * kPi * frequencyHz;

	const double twoH = 2.0 * p.inertia;
	const double cross = p.xqp - p.xdp;
	Eigen::Matrix<double, 1, 4> pe = s.edp * dIdqdx.row(0) + s.eqp * dIdqdx.row(1)
		+ cross * (iq * dIdqdx.row(0) + id * dIdqdx.row(1));
	pe(0) += iq;
	pe(1) += id;
	out.dfdx.row(3) = -pe / twoH;
	out.dfdx(3, 3) -= p.damping / twoH;
	const Eigen::Matrix<double, 1, 2> pev = s.edp * dIdqdv.row(0) + s.eqp * dIdqdv.row(1)
		+ cross * (iq * dIdqdv.row(0) + id * dIdqdv.row(1));
	out.dfdv.row(3) = -pev / twoH;

	out.current = Eigen::Vector2d(id * sd + iq * cd, iq * sd - id * cd);
	out.didx.row(0) = sd * dIdqdx.row(0) + cd * dIdqdx.row(1);
	out.didx.row(1) = sd * dIdqdx.row(1) - cd * dIdqdx.row(0);
	out.didx(0, 2) += id * cd - iq * sd;
	out.didx(1, 2) += iq * cd + id * sd;
	out.didv.row(0) = sd * dIdqdv.row(0) + cd * dIdqdv.row(1);
	out.didv.row(1) = sd * dIdqdv.row(1) - cd * dIdqdv.row(0);
	return out;
}

} // namespace hdae
