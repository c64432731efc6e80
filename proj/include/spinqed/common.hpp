#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spinqed {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx ii{0.0, 1.0};

// Numerical tolerance for rate positivity checks, in units of Gamma.
inline constexpr double rate_eps = 1e-10;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define SPINQED_ERROR(Name)                    \
    struct Name : Error {                      \
        using Error::Error;                    \
    }

SPINQED_ERROR(NegativeRate);
SPINQED_ERROR(Divergence);
SPINQED_ERROR(DetuningZero);
SPINQED_ERROR(CflViolation);
SPINQED_ERROR(BlochLeak);
SPINQED_ERROR(NoConvergence);
SPINQED_ERROR(FitFailure);
SPINQED_ERROR(FitTolUnreachable);
SPINQED_ERROR(StepTooLarge);
SPINQED_ERROR(TraceDrift);
SPINQED_ERROR(TruncationOverflow);
SPINQED_ERROR(AmbiguousBranch);
SPINQED_ERROR(EdgeOfBranch);
SPINQED_ERROR(FlatObjective);
SPINQED_ERROR(GridMismatch);
SPINQED_ERROR(ConfigInvalid);
SPINQED_ERROR(BackendUnavailable);
SPINQED_ERROR(UnsupportedOrder);

#undef SPINQED_ERROR

// Reduce a phase to (-pi, pi].
inline double wrap_phase(double x) {
    while (x > pi) x -= 2.0 * pi;
    while (x <= -pi) x += 2.0 * pi;
    return x;
}

}  // namespace spinqed
