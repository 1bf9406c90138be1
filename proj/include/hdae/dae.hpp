#pragma once

#include <memory>
#include <vector>

#include <hdae/algebraizer.hpp>
#include <hdae/netmodel.hpp>
#include <hdae/types.hpp>

namespace hdae {

/// Semi-explicit index-1 DAE whose differential states belong to independent
/// components coupled only through algebraic variables:
///   dx_i/dt = f_i(x_i, y[boundary_i]),   0 = g(x, y, t).
class DaeSystem {
public:
	virtual ~DaeSystem() = default;

	struct AlgebraicEvaluation {
		Vector g;
		Matrix dgdx;
		Matrix dgdy;
	};

	virtual std::size_t numComponents() const = 0;
	virtual const Component& component(std::size_t i) const = 0;
	/// Positions in y of the i-th component's boundary values.
	virtual const std::vector<int>& boundaryIndices(std::size_t i) const = 0;
	virtual int numAlgebraic() const = 0;
	virtual AlgebraicEvaluation algebraic(const Vector& x, const Vector& y, double t) const = 0;

	int numStates() const;
	/// Offset of each component's states in the stacked x.
	std::vector<int> stateOffsets() const;
	Vector gatherBoundary(std::size_t i, const Vector& y) const;
};

/// A machine seen as a component; boundary values are (V_re, V_im) of its bus.
class MachineComponent final : public Component {
public:
	MachineComponent(MachineParams params, double frequencyHz) : mParams(params), mFrequencyHz(frequencyHz) {}
	int numStates() const override { return MachineState::kSize; }
	int numBoundary() const override { return 2; }
	Evaluation evaluate(const Vector& x, const Vector& y) const override;
	const MachineParams& params() const { return mParams; }

private:
	MachineParams mParams;
	double mFrequencyHz;
};

/// Machines plus current-balance network equations. y holds the bus voltages
/// interleaved as (V_re, V_im) per bus; g is networkResidual.
class PowerSystemDae final : public DaeSystem {
public:
	explicit PowerSystemDae(NetworkModel model);

	std::size_t numComponents() const override { return mMachines.size(); }
	const Component& component(std::size_t i) const override { return mMachines[i]; }
	const std::vector<int>& boundaryIndices(std::size_t i) const override { return mBoundary[i]; }
	int numAlgebraic() const override { return 2 * static_cast<int>(mModel.numBuses()); }
	AlgebraicEvaluation algebraic(const Vector& x, const Vector& y, double t) const override;

	const NetworkModel& model() const { return mModel; }

private:
	NetworkModel mModel;
	std::vector<MachineComponent> mMachines;
	std::vector<std::vector<int>> mBoundary;
	Matrix mNegYReal; ///< -Y as a real 2N x 2N matrix in the interleaved layout
};

/// Interleaved (V_re, V_im) vector from complex voltages and back.
Vector interleave(const ComplexVector& v);
ComplexVector deinterleave(const Vector& y);

} // namespace hdae
