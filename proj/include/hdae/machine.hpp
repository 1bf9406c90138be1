#pragma once

#include <hdae/types.hpp>

namespace hdae {

/// Two-axis synchronous machine constants and setpoints, all per-unit on
/// the system base except the time constants (s).
struct MachineParams {
	double inertia = 1.0;  ///< H, s
	double damping = 0.0;  ///< D
	double xd = 1.0;
	double xdp = 0.2;      ///< X'_d
	double xq = 1.0;
	double xqp = 0.2;      ///< X'_q
	double rs = 0.0;
	double tdop = 1.0;     ///< T'_do, s
	double tqop = 1.0;     ///< T'_qo, s
	double pm = 0.0;
	double efd = 1.0;
	bool classical = false;

	/// Classical reduction: X_q = X'_q = X'_d.
	MachineParams classicalReduction() const;
	void validate() const;
};

/// Differential states in the order (E'_q, E'_d, delta, d_omega).
/// d_omega is the speed deviation in per-unit of nominal frequency.
struct MachineState {
	double eqp = 0.0;
	double edp = 0.0;
	double delta = 0.0;
	double dOmega = 0.0;

	static constexpr int kSize = 4;
	static constexpr int kEqp = 0;
	static constexpr int kEdp = 1;
	static constexpr int kDelta = 2;
	static constexpr int kDOmega = 3;

	Eigen::Vector4d vec() const { return {eqp, edp, delta, dOmega}; }
	static MachineState fromVec(const Eigen::Ref<const Eigen::VectorXd>& v) {
		return {v[0], v[1], v[2], v[3]};
	}
};

struct DqCurrents {
	double id = 0.0;
	double iq = 0.0;
};

/// Stator currents from the algebraic stator relation, terminal voltage in
/// polar form. Throws Error when R_s^2 + X'_d X'_q vanishes.
DqCurrents machineCurrents(const MachineParams& p, const MachineState& s, double v, double theta);

/// Same as machineCurrents with the terminal voltage in rectangular form.
DqCurrents machineCurrentsRect(const MachineParams& p, const MachineState& s, double vre, double vim);

/// Network-frame injection I = (I_d + j I_q) e^{j(delta - pi/2)}.
Complex injectedCurrent(const DqCurrents& i, double delta);

/// Time derivatives of the four states; rows for E'_q and E'_d are zero
/// for a classical machine.
Eigen::Vector4d machineF(const MachineParams& p, const MachineState& s, double v, double theta,
	double frequencyHz);
Eigen::Vector4d machineFRect(const MachineParams& p, const MachineState& s, double vre, double vim,
	double frequencyHz);

/// Analytic partial derivatives with the terminal voltage in rectangular
/// coordinates (V_re, V_im).
struct MachinePartials {
	Eigen::Vector4d f;
	Eigen::Matrix4d dfdx;
	Eigen::Matrix<double, 4, 2> dfdv;
	Eigen::Vector2d current;           ///< (I_re, I_im) injected into the bus
	Eigen::Matrix<double, 2, 4> didx;
	Eigen::Matrix2d didv;
};

MachinePartials machineJacobians(const MachineParams& p, const MachineState& s, double vre, double vim,
	double frequencyHz);

} // namespace hdae
