#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <hdae/netmodel.hpp>
#include <hdae/stepper.hpp>
#include <hdae/surrogate.hpp>

namespace hdae {

/// Raised when a self-check of the ground truth fails.
class OracleError : public Error {
public:
	OracleError(const std::string& what, double deviation) : Error(what), mDeviation(deviation) {}
	double deviation() const { return mDeviation; }

private:
	double mDeviation;
};

struct ReferenceOptions {
	double hRef = 5e-5;
	double tolerance = 1e-8;
	/// Extra halvings of hRef allowed when the self-check fails.
	int maxRefinements = 2;
	double recordEvery = 1e-3;
};

struct ReferenceResult {
	TrajectoryResult truth; ///< the finer of the two compared runs
	double deviation = 0.0; ///< max |x, y| difference between the runs on the recorded grid
	double hUsed = 0.0;     ///< step of the coarser compared run
	int refinements = 0;
};

/// Fine-step trapezoidal trajectory checked against a run at half the step.
ReferenceResult referenceTrajectory(const NetworkModel& model, const SystemState& initial, double tEnd,
	const std::vector<Disturbance>& disturbances, const ReferenceOptions& options = {});

struct TruthOptions {
	int substeps = 1000;
	double tolerance = 1e-10;
};

/// Single machine integrated over [0, h] with RK4 while its terminal voltage
/// follows the linear profile from yN to yNp1. Checked against twice the
/// substeps; returns the finer result.
MachineState componentTruth(const MachineParams& p, double frequencyHz, double h, const MachineState& xN,
	PolarVoltage yN, PolarVoltage yNp1, const TruthOptions& options = {});

/// Machine the surrogate is trained for: parameters plus the frozen internal
/// voltages of a classical machine.
struct MachineSetup {
	MachineParams params;
	double eqp = 1.0;
	double edp = 0.0;
	double frequencyHz = 60.0;
};

/// Machine k of the ieee9 equilibrium ("m1", "m2", "m3").
MachineSetup machinePreset(const std::string& name);

struct DatasetRecord {
	std::array<double, kMachineInputs> inputs{};
	std::vector<double> labels; ///< empty for collocation records
};

/// Inputs drawn uniformly from `domain`; record i depends only on (seed, i).
/// theta_n is fixed to 0 since the machine is invariant to a common rotation.
std::vector<DatasetRecord> generateDatasetC(const std::vector<InputSpec>& domain, std::size_t count,
	std::uint64_t seed, int jobs = 1);
/// Same sampling, labelled with componentTruth.
std::vector<DatasetRecord> generateDatasetX(const MachineSetup& machine, const std::vector<InputSpec>& domain,
	std::size_t count, std::uint64_t seed, int jobs = 1);

/// Label column names: x_np1_delta, x_np1_d_omega for a classical machine,
/// all four states otherwise.
std::vector<std::string> labelNames(const MachineSetup& machine);
void writeDatasetCsv(const std::vector<InputSpec>& domain, const std::vector<std::string>& labels,
	const std::vector<DatasetRecord>& records, std::ostream& out);
/// Machine description consumed alongside the datasets.
std::string machineSetupJson(const MachineSetup& machine);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallelFor(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

} // namespace hdae
