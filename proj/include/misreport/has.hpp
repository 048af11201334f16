#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "misreport/data.hpp"
#include "misreport/moments.hpp"

namespace misreport {

// Constant misreporting probabilities and coefficients of the mixture
// likelihood pi = alpha0 + (1 - alpha0 - alpha1) F(x'beta).
struct HasParams {
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  std::vector<double> beta;
};

inline constexpr double kHasConstraintEps = 1e-6;
inline constexpr double kHasProbFloor = 1e-12;

// Reported-outcome probability of the constant-misreporting mixture.
inline double has_probability(double alpha0, double alpha1, double index, const LinkFunction& f) {
  return alpha0 + (1.0 - alpha0 - alpha1) * f(index);
}

// Throws ConfigError unless alpha0, alpha1 >= 0 and alpha0 + alpha1 <= 1 - eps.
double has_loglik(const HasParams& params, const DesignMatrix& x,
                  std::span<const std::uint8_t> y, const LinkFunction& link);

struct HasOptions {
  std::size_t starts = 5;  // the no-misreporting start plus jittered ones
  std::uint64_t seed = 1;
  std::size_t max_iterations = 5000;
  double size_tolerance = 1e-7;
  double jitter = 0.5;
};

struct HasEstimate {
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  std::vector<double> beta;
  double loglik = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t best_start = 0;
  std::size_t converged_starts = 0;
};

// Maximizes the likelihood by Nelder-Mead from several starts. The misreporting
// probabilities are mapped onto the simplex alpha0 + alpha1 <= 1 - eps through
// a softmax, so every trial point satisfies the constraint. Throws
// DataError("no HAS start converged") when every start fails.
HasEstimate fit_has(const DesignMatrix& x, std::span<const std::uint8_t> y,
                    const LinkFunction& link, const HasOptions& options = {});
HasEstimate fit_has(const Sample& sample, const LinkFunction& link,
                    const HasOptions& options = {});

}  // namespace misreport
