#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hdae {

using Real = double;
using Complex = std::complex<double>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Malformed input document; `path()` names the offending field.
class SchemaError : public Error {
public:
	SchemaError(std::string path, const std::string& what)
		: Error(path + ": " + what), mPath(std::move(path)) {}
	const std::string& path() const { return mPath; }
private:
	std::string mPath;
};

class DimensionError : public Error {
public:
	using Error::Error;
};

/// Surrogate input outside its trained domain, or step above h_max.
class DomainError : public Error {
public:
	using Error::Error;
};

/// Newton or oracle failure; carries the last residual/update norm.
class ConvergenceError : public Error {
public:
	ConvergenceError(const std::string& what, double norm, int iterations)
		: Error(what), mNorm(norm), mIterations(iterations) {}
	double norm() const { return mNorm; }
	int iterations() const { return mIterations; }
private:
	double mNorm;
	int mIterations;
};

/// Wraps an angle into (-pi, pi].
inline double wrapAngle(double a) {
	double r = std::remainder(a, 2.0 * kPi);
	if (r <= -kPi)
		r += 2.0 * kPi;
	return r;
}

} // namespace hdae
