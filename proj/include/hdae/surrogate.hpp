#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <hdae/algebraizer.hpp>
#include <hdae/machine.hpp>
#include <hdae/types.hpp>

namespace hdae {

inline constexpr int kWeightSchemaVersion = 1;

/// Named network input and the range mapped affinely onto [-1, 1].
struct InputSpec {
	std::string name;
	double lo = -1.0;
	double hi = 1.0;
};

struct DenseLayer {
	Matrix w; ///< rows = outputs, cols = inputs
	Vector b;
};

struct Provenance {
	std::string machineParamsHash;
	std::string trainedAt;
	std::int64_t epochs = 0;
	std::uint64_t seed = 0;
};

/// Dense tanh network with a hard-constrained output:
///   increment = s * tanh(W_K z_K + b_K),  z_{k+1} = tanh(W_k z_k + b_k),
/// z_0 being the normalized inputs. The caller forms x_n + h * increment.
class SurrogateNet {
public:
	SurrogateNet(std::vector<DenseLayer> layers, std::vector<InputSpec> inputs, Vector outputScale, double hMax,
		Provenance provenance = {});

	int numInputs() const { return static_cast<int>(mInputs.size()); }
	int numOutputs() const { return static_cast<int>(mOutputScale.size()); }
	const std::vector<DenseLayer>& layers() const { return mLayers; }
	const std::vector<InputSpec>& inputs() const { return mInputs; }
	const Vector& outputScale() const { return mOutputScale; }
	double hMax() const { return mHMax; }
	const Provenance& provenance() const { return mProvenance; }

	/// s * tanh(...) for raw (un-normalized) features.
	Vector increment(std::span<const double> features) const;
	/// increment and its derivative w.r.t. the raw features.
	std::pair<Vector, Matrix> incrementWithJacobian(std::span<const double> features) const;

private:
	Vector normalize(std::span<const double> features) const;

	std::vector<DenseLayer> mLayers;
	std::vector<InputSpec> mInputs;
	Vector mOutputScale;
	double mHMax;
	Provenance mProvenance;
};

/// Terminal voltage in polar form.
struct PolarVoltage {
	double v = 1.0;
	double theta = 0.0;
};

/// Machine input encoding, in order:
///   h, delta_n - theta_n, d_omega_n, V_n, V_{n+1}, wrap(theta_{n+1} - theta_n).
inline constexpr int kMachineInputs = 6;
std::vector<InputSpec> machineInputDomain(double hMin = 1e-3, double hMax = 40e-3);
std::array<double, kMachineInputs> machineFeatures(double h, const MachineState& xN, PolarVoltage yN,
	PolarVoltage yNp1);

/// x_{n+1} predicted by a machine surrogate. Two outputs drive (delta, d_omega)
/// with E' held; four outputs drive all states.
MachineState forward(const SurrogateNet& net, double h, const MachineState& xN, PolarVoltage yN,
	PolarVoltage yNp1);

/// Partials of forward() w.r.t. every input; voltages in polar (V, theta).
struct ForwardJacobian {
	Eigen::Vector4d dh;
	Eigen::Matrix4d dxN;
	Eigen::Matrix<double, 4, 2> dyN;
	Eigen::Matrix<double, 4, 2> dyNp1;
};
ForwardJacobian inputJacobian(const SurrogateNet& net, double h, const MachineState& xN, PolarVoltage yN,
	PolarVoltage yNp1);

/// Outside-domain behaviour of MachineSurrogateModel.
enum class DomainPolicy { Reject, Clamp };

/// Adapts a machine surrogate to the step residual: boundary values are the
/// terminal voltage in rectangular coordinates (V_re, V_im).
class MachineSurrogateModel final : public IncrementModel {
public:
	explicit MachineSurrogateModel(std::shared_ptr<const SurrogateNet> net,
		DomainPolicy policy = DomainPolicy::Reject);

	int numStates() const override { return MachineState::kSize; }
	int numBoundary() const override { return 2; }
	double hMax() const override { return mNet->hMax(); }
	Result evaluate(double h, const Vector& xN, const Vector& yN, const Vector& yNp1) const override;
	const SurrogateNet& net() const { return *mNet; }

private:
	std::shared_ptr<const SurrogateNet> mNet;
	DomainPolicy mPolicy;
};

/// Hex fingerprint of the machine the surrogate stands in for, including the
/// frozen internal voltages of a classical machine.
std::string machineFingerprint(const MachineParams& p, double eqp, double edp, double frequencyHz);

std::string serializeWeights(const SurrogateNet& net);
SurrogateNet parseWeights(std::string_view text);
void saveWeights(const SurrogateNet& net, const std::filesystem::path& path);
SurrogateNet loadWeights(const std::filesystem::path& path);

/// Forward/Jacobian/hard-constraint self-checks; returns a list of failures.
std::vector<std::string> selfCheck(const SurrogateNet& net, int points = 100, std::uint64_t seed = 1);

} // namespace hdae
