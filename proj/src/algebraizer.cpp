#include <hdae/algebraizer.hpp>

#include <unsupported/Eigen/MatrixFunctions>

namespace hdae {

namespace {

void checkContext(const Component& c, const StepContext& ctx) {
	if (!(ctx.h > 0.0))
		throw Error("step size must be positive");
	if (ctx.xN.size() != c.numStates() || ctx.xNp1.size() != c.numStates() || ctx.yN.size() != c.numBoundary()
		|| ctx.yNp1.size() != c.numBoundary())
		throw DimensionError("step context does not match the component dimensions");
}

} // namespace

StepResidual TrapezoidalRule::residual(const Component& c, const StepContext& ctx) const {
	checkContext(c, ctx);
	const auto start = c.evaluate(ctx.xN, ctx.yN);
	const auto end = c.evaluate(ctx.xNp1, ctx.yNp1);
	const double half = 0.5 * ctx.h;
	StepResidual out;
	out.r = ctx.xNp1 - ctx.xN - half * (start.f + end.f);
	out.drdx = Matrix::Identity(c.numStates(), c.numStates()) - half * end.dfdx;
	out.drdy = -half * end.dfdy;
	return out;
}

StepResidual BackwardEuler::residual(const Component& c, const StepContext& ctx) const {
	checkContext(c, ctx);
	const auto end = c.evaluate(ctx.xNp1, ctx.yNp1);
	StepResidual out;
	out.r = ctx.xNp1 - ctx.xN - ctx.h * end.f;
	out.drdx = Matrix::Identity(c.numStates(), c.numStates()) - ctx.h * end.dfdx;
	out.drdy = -ctx.h * end.dfdy;
	return out;
}

SurrogateAlgebraizer::SurrogateAlgebraizer(std::shared_ptr<const IncrementModel> model, std::string name)
	: mModel(std::move(model)), mName(std::move(name)) {
	if (!mModel)
		throw Error("surrogate algebraizer needs a model");
}

StepResidual SurrogateAlgebraizer::residual(const Component& c, const StepContext& ctx) const {
	checkContext(c, ctx);
	if (mModel->numStates() != c.numStates() || mModel->numBoundary() != c.numBoundary())
		throw DimensionError("surrogate does not match the component dimensions");
	if (ctx.h > mModel->hMax())
		throw DomainError("step size " + std::to_string(ctx.h) + " s exceeds surrogate h_max "
			+ std::to_string(mModel->hMax()) + " s");
	const auto g = mModel->evaluate(ctx.h, ctx.xN, ctx.yN, ctx.yNp1);
	StepResidual out;
	out.r = ctx.xNp1 - ctx.xN - ctx.h * g.increment;
	out.drdx = Matrix::Identity(c.numStates(), c.numStates());
	out.drdy = -ctx.h * g.dIncrementDyNp1;
	return out;
}

ExactLinearSurrogate::ExactLinearSurrogate(Matrix a, Matrix b, double hMax)
	: mA(std::move(a)), mB(std::move(b)), mHMax(hMax) {
	if (mA.rows() != mA.cols() || mB.rows() != mA.rows())
		throw DimensionError("exact linear surrogate: A must be square and B must match its rows");
}

ExactLinearSurrogate::Propagator ExactLinearSurrogate::propagator(double h) const {
	// Augmented system z = (x, y(t), slope): dz/dt = M z with y' = slope.
	const auto n = mA.rows();
	const auto m = mB.cols();
	Matrix aug = Matrix::Zero(n + 2 * m, n + 2 * m);
	aug.topLeftCorner(n, n) = mA;
	aug.block(0, n, n, m) = mB;
	aug.block(n, n + m, m, m) = Matrix::Identity(m, m);
	const Matrix e = (aug * h).exp();
	Propagator p;
	p.stateMap = e.topLeftCorner(n, n);
	const Matrix e12 = e.block(0, n, n, m);
	const Matrix e13 = e.block(0, n + m, n, m);
	// slope = (y_{n+1} - y_n) / h
	p.endMap = e13 / h;
	p.startMap = e12 - e13 / h;
	return p;
}

IncrementModel::Result ExactLinearSurrogate::evaluate(double h, const Vector& xN, const Vector& yN,
	const Vector& yNp1) const {
	if (xN.size() != mA.rows() || yN.size() != mB.cols() || yNp1.size() != mB.cols())
		throw DimensionError("exact linear surrogate: input dimension mismatch");
	if (!(h > 0.0))
		throw Error("exact linear surrogate: h must be positive");
	const auto p = propagator(h);
	const Vector xEnd = p.stateMap * xN + p.startMap * yN + p.endMap * yNp1;
	return {(xEnd - xN) / h, p.endMap / h};
}

double linearProfile(double yN, double yNp1, double t, double h) {
	if (!(h > 0.0) || t < 0.0 || t > h)
		throw Error("linear profile evaluated outside [0, h]");
	return yN + (yNp1 - yN) * (t / h);
}

double linearAngleProfile(double thetaN, double thetaNp1, double t, double h) {
	if (!(h > 0.0) || t < 0.0 || t > h)
		throw Error("linear profile evaluated outside [0, h]");
	return wrapAngle(thetaN + wrapAngle(thetaNp1 - thetaN) * (t / h));
}

} // namespace hdae
