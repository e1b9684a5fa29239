#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace descobs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

// One relative tolerance drives every rank / nilpotency / cluster decision in
// the toolkit, so different modules can never disagree on a rank call.
inline constexpr double kDefaultTol = 1e-9;

// Condition-number ceiling for any matrix the toolkit inverts on behalf of a
// realized observer.
inline constexpr double kConditionCeiling = 1e10;

// ---------------------------------------------------------------------------
// Error taxonomy. PreconditionError means the input violates a mathematical
// assumption (CLI exit code 1); NumericalError means a computation could not
// meet its accuracy contract (CLI exit code 2).
// ---------------------------------------------------------------------------

class PreconditionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InvalidInputError : public PreconditionError {
  public:
    using PreconditionError::PreconditionError;
};

class IllConditionedSplitError : public NumericalError {
  public:
    IllConditionedSplitError(const std::string& what, double eigenvalue_magnitude)
        : NumericalError(what), eigenvalue_magnitude(eigenvalue_magnitude) {}
    double eigenvalue_magnitude;
};

class SingularEquationError : public PreconditionError {
  public:
    using PreconditionError::PreconditionError;
};

class NoStabilizingSolutionError : public PreconditionError {
  public:
    using PreconditionError::PreconditionError;
};

class DegeneratePencilError : public PreconditionError {
  public:
    using PreconditionError::PreconditionError;
};

class NotRegularError : public PreconditionError {
  public:
    using PreconditionError::PreconditionError;
};

class ImpulsivePlantError : public PreconditionError {
  public:
    using PreconditionError::PreconditionError;
};

class NotConnectedError : public PreconditionError {
  public:
    using PreconditionError::PreconditionError;
};

class JointObservabilityError : public PreconditionError {
  public:
    JointObservabilityError(const std::string& what, double mu) : PreconditionError(what), mu(mu) {}
    double mu;
};

class TheoremPreconditionError : public PreconditionError {
  public:
    using PreconditionError::PreconditionError;
};

class SynthesisFailureError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class NotRealizableError : public NumericalError {
  public:
    NotRealizableError(const std::string& what, int agent) : NumericalError(what), agent(agent) {}
    int agent;
};

class DivergenceError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

class StaleDesignError : public PreconditionError {
  public:
    using PreconditionError::PreconditionError;
};

class ParseError : public PreconditionError {
  public:
    using PreconditionError::PreconditionError;
};

// ---------------------------------------------------------------------------
// Small shared helpers
// ---------------------------------------------------------------------------

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_finite(const Matrix& m, const char* name) {
    if (!m.allFinite()) {
        throw InvalidInputError(std::string(name) + ": matrix contains NaN or Inf entries");
    }
}

// Largest singular value; zero for an empty matrix.
double spectral_norm(const Matrix& m);

// The paper-style symmetrizer sym{X} = X + X^T.
inline Matrix sym(const Matrix& m) { return m + m.transpose(); }

// Condition number sigma_max / sigma_min (infinity when rank deficient).
double condition_number(const Matrix& m);

Matrix block_diag(const std::vector<Matrix>& blocks);

Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace descobs
