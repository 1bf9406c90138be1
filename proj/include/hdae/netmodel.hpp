#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include <hdae/machine.hpp>
#include <hdae/types.hpp>

namespace hdae {

enum class BusKind { GeneratorTerminal, Load, Connection };

struct Bus {
	int id = 0;
	BusKind kind = BusKind::Connection;
	double baseVoltage = 1.0;
	double shuntSusceptance = 0.0; ///< fixed bus shunt, p.u.
};

struct Branch {
	int from = 0;
	int to = 0;
	Complex impedance{0.0, 0.0};
	double shuntSusceptance = 0.0; ///< total line charging; half on each side
};

/// Constant-impedance load.
struct Load {
	int bus = 0;
	Complex admittance{0.0, 0.0};
};

struct MachineUnit {
	int bus = 0;
	MachineParams params;
	/// Terminal voltage magnitude held during equilibrium initialization.
	/// Required for every machine except the first (the angle reference);
	/// when the reference carries one, its P_m becomes the balancing unknown.
	std::optional<double> vSet;
};

/// Electrical network with its machines. Immutable once built; the
/// disturbance helpers return modified copies.
class NetworkModel {
public:
	/// Validates the topology and builds the admittance matrix.
	NetworkModel(std::vector<Bus> buses, std::vector<Branch> branches, std::vector<Load> loads,
		std::vector<MachineUnit> machines, double frequencyHz);

	const std::vector<Bus>& buses() const { return mBuses; }
	const std::vector<Branch>& branches() const { return mBranches; }
	const std::vector<Load>& loads() const { return mLoads; }
	const std::vector<MachineUnit>& machines() const { return mMachines; }
	const ComplexMatrix& ybus() const { return mYbus; }
	/// Accumulated load-admittance disturbances per bus (zero by default).
	const ComplexVector& loadDeltas() const { return mLoadDeltas; }
	double frequencyHz() const { return mFrequencyHz; }
	std::size_t numBuses() const { return mBuses.size(); }
	std::size_t numMachines() const { return mMachines.size(); }

	NetworkModel withMachineParams(std::size_t machine, const MachineParams& p) const;
	NetworkModel withLoadDelta(int bus, Complex delta) const;

private:
	std::vector<Bus> mBuses;
	std::vector<Branch> mBranches;
	std::vector<Load> mLoads;
	std::vector<MachineUnit> mMachines;
	ComplexMatrix mBaseYbus;
	ComplexVector mLoadDeltas;
	ComplexMatrix mYbus;
	double mFrequencyHz;
};

struct Disturbance {
	enum class Kind { MechanicalPowerStep, LoadAdmittanceStep };
	Kind kind = Kind::MechanicalPowerStep;
	/// Machine index or bus id, zero-based.
	int target = 0;
	/// P_m delta (real part only) or load admittance delta.
	Complex magnitude{0.0, 0.0};
	double time = 0.0;
};

ComplexMatrix buildYbus(const std::vector<Bus>& buses, const std::vector<Branch>& branches,
	const std::vector<Load>& loads);

/// Current-balance mismatch I_inj - Y V, stacked per bus as (Re, Im).
/// `machineCurrents[k]` is injected at `model.machines()[k].bus`.
Vector networkResidual(const NetworkModel& model, const ComplexVector& machineCurrents,
	const ComplexVector& voltages);

NetworkModel applyDisturbance(const NetworkModel& model, const Disturbance& d);

NetworkModel loadNetwork(const nlohmann::json& doc);
NetworkModel loadNetworkText(std::string_view text);
/// Resolves the bundled presets "ieee9" and "ieee57", otherwise reads a file.
NetworkModel loadNetworkSource(const std::string& presetOrPath);

/// Bundled preset documents.
std::string_view presetDocument(std::string_view name);

} // namespace hdae
