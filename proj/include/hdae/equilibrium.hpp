#pragma once

#include <hdae/netmodel.hpp>
#include <hdae/stepper.hpp>

namespace hdae {

struct Equilibrium {
	/// Input model with the solved setpoints written back: E_fd of two-axis
	/// machines and, when the reference machine holds a voltage, its P_m.
	NetworkModel model;
	SystemState state;
	int iterations = 0;
	double residualNorm = 0.0; ///< max |[f; g]| at the solution
};

/// Steady state from a flat start with the first machine's rotor angle as
/// the angle reference. Each machine contributes one excitation unknown
/// (frozen E'_q when classical, E_fd otherwise) matched by its terminal
/// voltage setpoint.
Equilibrium initEquilibrium(const NetworkModel& model, const NewtonOptions& options = {});

/// max |[f; g]| of the full system at a state.
double equilibriumResidual(const NetworkModel& model, const SystemState& state);

} // namespace hdae
