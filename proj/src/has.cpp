#include "misreport/has.hpp"

#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "misreport/errors.hpp"

namespace misreport {

namespace {

double loglik_unchecked(double a0, double a1, const double* beta, const DesignMatrix& x,
                        std::span<const std::uint8_t> y, const LinkFunction& link) {
  double ll = 0.0;
  for (std::size_t i = 0; i < x.n; ++i) {
    double t = 0.0;
    for (std::size_t k = 0; k < x.p; ++k) t += x.at(i, k) * beta[k];
    const double pi = has_probability(a0, a1, t, link);
    ll += y[i] ? std::log(std::max(pi, kHasProbFloor)) : std::log(std::max(1.0 - pi, kHasProbFloor));
  }
  return ll;
}

// theta = (u0, u1, beta...); alpha_k = (1 - eps) e^{u_k} / (1 + e^{u0} + e^{u1})
void unpack(const double* theta, double& a0, double& a1) {
  const double m = std::max({0.0, theta[0], theta[1]});
  const double e0 = std::exp(theta[0] - m), e1 = std::exp(theta[1] - m), e2 = std::exp(-m);
  const double s = (1.0 - kHasConstraintEps) / (e0 + e1 + e2);
  a0 = e0 * s;
  a1 = e1 * s;
}

struct Problem {
  const DesignMatrix* x;
  std::span<const std::uint8_t> y;
  const LinkFunction* link;
  bool fixed_alpha;  // probit start: alpha held at zero, theta is beta only
};

double objective(const gsl_vector* v, void* params) {
  const auto* pr = static_cast<const Problem*>(params);
  const double* theta = gsl_vector_const_ptr(v, 0);
  double a0 = 0.0, a1 = 0.0;
  const double* beta = theta;
  if (!pr->fixed_alpha) {
    unpack(theta, a0, a1);
    beta = theta + 2;
  }
  const double ll = loglik_unchecked(a0, a1, beta, *pr->x, pr->y, *pr->link);
  return std::isfinite(ll) ? -ll / double(pr->x->n) : std::numeric_limits<double>::max();
}

struct Run {
  std::vector<double> theta;
  double value = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::size_t iterations = 0;
};

Run minimize(Problem& pr, std::vector<double> start, const HasOptions& o) {
  const std::size_t d = start.size();
  gsl_multimin_function f{&objective, d, &pr};
  gsl_vector* x = gsl_vector_alloc(d);
  gsl_vector* step = gsl_vector_alloc(d);
  for (std::size_t k = 0; k < d; ++k) gsl_vector_set(x, k, start[k]);
  gsl_vector_set_all(step, 0.5);
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, d);
  gsl_multimin_fminimizer_set(s, &f, x, step);
  Run r;
  int status = GSL_CONTINUE;
  while (status == GSL_CONTINUE && r.iterations < o.max_iterations) {
    ++r.iterations;
    if (gsl_multimin_fminimizer_iterate(s)) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), o.size_tolerance);
  }
  r.converged = status == GSL_SUCCESS;
  r.value = gsl_multimin_fminimizer_minimum(s);
  r.theta.resize(d);
  for (std::size_t k = 0; k < d; ++k) r.theta[k] = gsl_vector_get(s->x, k);
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(step);
  gsl_vector_free(x);
  return r;
}

}  // namespace

double has_loglik(const HasParams& p, const DesignMatrix& x, std::span<const std::uint8_t> y,
                  const LinkFunction& link) {
  if (!(p.alpha0 >= 0.0 && p.alpha1 >= 0.0 && p.alpha0 + p.alpha1 <= 1.0 - kHasConstraintEps))
    throw ConfigError("HAS misreporting probabilities outside alpha0 + alpha1 <= 1 - eps");
  if (p.beta.size() != x.p) throw ConfigError("coefficient dimension mismatch");
  if (y.size() != x.n) throw DataError("outcome and design lengths differ");
  return loglik_unchecked(p.alpha0, p.alpha1, p.beta.data(), x, y, link);
}

HasEstimate fit_has(const DesignMatrix& x, std::span<const std::uint8_t> y,
                    const LinkFunction& link, const HasOptions& o) {
  if (x.n == 0 || y.size() != x.n) throw DataError("HAS needs a nonempty sample");
  if (o.starts == 0) throw ConfigError("HAS needs at least one start");
  // no-misreporting fit from beta = 0
  Problem probit{&x, y, &link, true};
  auto base = minimize(probit, std::vector<double>(x.p, 0.0), o);

  std::vector<std::vector<double>> starts(o.starts);
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> jitter(0.0, o.jitter);
  std::uniform_real_distribution<double> logit(-4.0, -1.0);
  for (std::size_t s = 0; s < o.starts; ++s) {
    auto& t = starts[s];
    t.assign(2 + x.p, 0.0);
    t[0] = s == 0 ? -5.0 : logit(rng);
    t[1] = s == 0 ? -5.0 : logit(rng);
    for (std::size_t k = 0; k < x.p; ++k) t[2 + k] = base.theta[k] + (s == 0 ? 0.0 : jitter(rng));
  }
  std::vector<Run> runs(o.starts);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t s = 0; s < o.starts; ++s) {
    Problem pr{&x, y, &link, false};
    runs[s] = minimize(pr, starts[s], o);
  }
  HasEstimate e;
  std::size_t best = o.starts;
  for (std::size_t s = 0; s < o.starts; ++s) {
    if (!std::isfinite(runs[s].value)) continue;
    e.converged_starts += runs[s].converged;
    if (best == o.starts || runs[s].value < runs[best].value) best = s;
  }
  if (best == o.starts || e.converged_starts == 0) throw DataError("no HAS start converged");
  const auto& r = runs[best];
  unpack(r.theta.data(), e.alpha0, e.alpha1);
  e.beta.assign(r.theta.begin() + 2, r.theta.end());
  e.loglik = -r.value * double(x.n);
  e.converged = r.converged;
  e.iterations = r.iterations;
  e.best_start = best;
  return e;
}

HasEstimate fit_has(const Sample& sample, const LinkFunction& link, const HasOptions& o) {
  return fit_has(design_matrix(sample), sample.y(), link, o);
}

}  // namespace misreport
