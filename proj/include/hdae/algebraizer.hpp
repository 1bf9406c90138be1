#pragma once

#include <memory>
#include <string>

#include <hdae/types.hpp>

namespace hdae {

/// A dynamic device dx/dt = f(x, y), where y are the algebraic variables at
/// its boundary (e.g. the terminal voltage of a machine).
class Component {
public:
	virtual ~Component() = default;

	struct Evaluation {
		Vector f;
		Matrix dfdx;
		Matrix dfdy;
	};

	virtual int numStates() const = 0;
	virtual int numBoundary() const = 0;
	virtual Evaluation evaluate(const Vector& x, const Vector& y) const = 0;
};

/// One step of one component: start values, and the current iterate of the
/// end values.
struct StepContext {
	double h;
	const Vector& xN;
	const Vector& yN;
	const Vector& xNp1;
	const Vector& yNp1;
};

/// Residual of the algebraized step and its derivatives w.r.t. the end-of-step
/// unknowns.
struct StepResidual {
	Vector r;
	Matrix drdx;
	Matrix drdy;
};

/// Converts the integral of a component over one step into algebraic
/// residual equations.
class Algebraizer {
public:
	virtual ~Algebraizer() = default;
	virtual std::string name() const = 0;
	virtual StepResidual residual(const Component& c, const StepContext& ctx) const = 0;
};

/// r = x_{n+1} - x_n - h/2 (f(x_n, y_n) + f(x_{n+1}, y_{n+1}))
class TrapezoidalRule final : public Algebraizer {
public:
	std::string name() const override { return "trapezoidal"; }
	StepResidual residual(const Component& c, const StepContext& ctx) const override;
};

/// r = x_{n+1} - x_n - h f(x_{n+1}, y_{n+1})
class BackwardEuler final : public Algebraizer {
public:
	std::string name() const override { return "backward-euler"; }
	StepResidual residual(const Component& c, const StepContext& ctx) const override;
};

/// An explicit step map x_{n+1} = x_n + h g(h, x_n, y_n, y_{n+1}), either
/// learned or exact. Only the derivative of g w.r.t. y_{n+1} enters Newton.
class IncrementModel {
public:
	virtual ~IncrementModel() = default;

	struct Result {
		Vector increment;
		Matrix dIncrementDyNp1;
	};

	virtual int numStates() const = 0;
	virtual int numBoundary() const = 0;
	virtual double hMax() const = 0;
	virtual Result evaluate(double h, const Vector& xN, const Vector& yN, const Vector& yNp1) const = 0;
};

/// r = x_{n+1} - x_n - h g(h, x_n, y_n, y_{n+1}); dr/dx_{n+1} = I.
class SurrogateAlgebraizer final : public Algebraizer {
public:
	explicit SurrogateAlgebraizer(std::shared_ptr<const IncrementModel> model, std::string name = "surrogate");
	std::string name() const override { return mName; }
	StepResidual residual(const Component& c, const StepContext& ctx) const override;
	const IncrementModel& model() const { return *mModel; }

private:
	std::shared_ptr<const IncrementModel> mModel;
	std::string mName;
};

/// Exact step map of dx/dt = A x + B y(t) with y(t) the linear profile
/// between y_n and y_{n+1}. Test double for the surrogate path.
class ExactLinearSurrogate final : public IncrementModel {
public:
	ExactLinearSurrogate(Matrix a, Matrix b, double hMax = 1.0);

	int numStates() const override { return static_cast<int>(mA.rows()); }
	int numBoundary() const override { return static_cast<int>(mB.cols()); }
	double hMax() const override { return mHMax; }
	Result evaluate(double h, const Vector& xN, const Vector& yN, const Vector& yNp1) const override;

	/// x(h) together with its partials w.r.t. y_n and y_{n+1}.
	struct Propagator {
		Matrix stateMap;   ///< e^{Ah}
		Matrix startMap;   ///< d x(h) / d y_n
		Matrix endMap;     ///< d x(h) / d y_{n+1}
	};
	Propagator propagator(double h) const;

private:
	Matrix mA;
	Matrix mB;
	double mHMax;
};

/// Linear component dx/dt = A x + B y, used with ExactLinearSurrogate.
class LinearComponent final : public Component {
public:
	LinearComponent(Matrix a, Matrix b) : mA(std::move(a)), mB(std::move(b)) {}
	int numStates() const override { return static_cast<int>(mA.rows()); }
	int numBoundary() const override { return static_cast<int>(mB.cols()); }
	Evaluation evaluate(const Vector& x, const Vector& y) const override {
		return {mA * x + mB * y, mA, mB};
	}

private:
	Matrix mA;
	Matrix mB;
};

/// y(t) = y_n + (y_{n+1} - y_n) t / h for t in [0, h].
double linearProfile(double yN, double yNp1, double t, double h);
/// Same on the wrapped (shortest-arc) difference; result wrapped to (-pi, pi].
double linearAngleProfile(double thetaN, double thetaNp1, double t, double h);

} // namespace hdae
