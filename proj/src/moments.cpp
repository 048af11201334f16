#include "misreport/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "misreport/errors.hpp"

namespace misreport {

double LinkFunction::operator()(double t) const {
  switch (kind) {
    case LinkKind::normal:
      return 0.5 * std::erfc(-t / std::numbers::sqrt2);
    case LinkKind::logistic:
      return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
    case LinkKind::cauchy:
      return 0.5 + std::atan((t - location) / scale) / std::numbers::pi;
  }
  return 0.0;
}

double LinkFunction::density(double t) const {
  switch (kind) {
    case LinkKind::normal:
      return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
    case LinkKind::logistic: {
      double e = std::exp(-std::abs(t));
      return e / ((1.0 + e) * (1.0 + e));
    }
    case LinkKind::cauchy: {
      double u = (t - location) / scale;
      return 1.0 / (std::numbers::pi * scale * (1.0 + u * u));
    }
  }
  return 0.0;
}

std::string LinkFunction::name() const {
  switch (kind) {
    case LinkKind::normal:
      return "normal";
    case LinkKind::logistic:
      return "logistic";
    case LinkKind::cauchy: {
      std::ostringstream os;
      os << "cauchy(" << location << "," << scale << ")";
      return os.str();
    }
  }
  return "?";
}

LinkFunction LinkFunction::parse(const std::string& s) {
  if (s == "normal" || s == "probit") return normal();
  if (s == "logistic" || s == "logit") return logistic();
  if (s.rfind("cauchy", 0) == 0) {
    if (s == "cauchy") return cauchy(0.0, 1.0);
    double loc = 0, scale = 1;
    char open = 0, comma = 0, close = 0;
    std::istringstream is(s.substr(6));
    if (is >> open >> loc >> comma >> scale >> close && open == '(' && comma == ',' &&
        close == ')' && scale > 0)
      return cauchy(loc, scale);
  }
  throw ConfigError("unknown link function '" + s + "'");
}

void ModelSpec::validate(std::size_t dim) const {
  if (norm_index >= dim) throw ConfigError("normalization index outside coefficient vector");
  if (norm_value == 0.0) throw ConfigError("normalized coefficient must be nonzero");
}

std::vector<std::size_t> ModelSpec::free_coordinates(std::size_t dim) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < dim; ++k)
    if (k != norm_index) out.push_back(k);
  return out;
}

namespace {

double dot(std::span<const double> x, std::span<const double> b) {
  if (x.size() != b.size()) throw ConfigError("coefficient dimension mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s = s + x[k] * b[k];
  return s;
}

}  // namespace

std::array<double, 2> moment_parametric(const Observation& o, std::span<const double> beta,
                                        const LinkFunction& link) {
  const double f = link(dot(o.x, beta));
  return {o.y - f * o.upper, (f + o.lower * (1.0 - f)) - o.y};
}

std::array<double, 2> moment_semiparametric(const Observation& o, std::span<const double> beta) {
  const double v = dot(o.x, beta);
  return {v >= 0.0 ? v * (o.y - 0.5 * o.upper) : 0.0,
          v <= 0.0 ? v * ((o.y - 0.5 * o.lower) - 0.5) : 0.0};
}

DesignMatrix design_matrix(const Sample& s) {
  DesignMatrix d;
  d.n = s.size();
  d.p = 1 + s.dim() + (s.has_z() ? 1 : 0);
  d.values.assign(d.n * d.p, 0.0);
  std::fill(d.values.begin(), d.values.begin() + d.n, 1.0);
  d.names.push_back("const");
  for (std::size_t k = 0; k < s.dim(); ++k) {
    auto col = s.covariate(k);
    std::copy(col.begin(), col.end(), d.values.begin() + (k + 1) * d.n);
    d.names.push_back(s.covariate_names()[k]);
  }
  if (s.has_z()) {
    for (std::size_t i = 0; i < d.n; ++i) d.values[(d.p - 1) * d.n + i] = s.z_value(i);
    d.names.push_back("z");
  }
  return d;
}

ObservationEnvelopes observation_envelopes(const Sample& s, const Binning& binning,
                                           const CondProbTable& t, InstrumentMode mode) {
  ObservationEnvelopes out;
  const std::size_t n = s.size();
  out.upper.assign(n, 1.0);
  out.lower.assign(n, 0.0);
  out.defined.assign(n, 0);
  auto cells = binning.assign(s);
  if (mode == InstrumentMode::z_only) {
    if (!s.has_z()) throw DataError("Z-mode moments need a Z column");
    auto env = envelopes_z(t);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& e = env.cells[cells[i]];
      if (e.defined && t.marginal(cells[i], s.z_at(i)).included) {
        out.upper[i] = e.upper;
        out.lower[i] = e.lower;
        out.defined[i] = 1;
      }
    }
  } else if (mode == InstrumentMode::w_only) {
    if (!s.has_w()) throw DataError("W-mode moments need a W column");
    auto env = envelopes_w(t);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& e = env.at(cells[i], s.z_at(i), s.w_at(i));
      if (e.defined && t.at(cells[i], s.z_at(i), s.w_at(i)).included) {
        out.upper[i] = e.upper;
        out.lower[i] = e.lower;
        out.defined[i] = 1;
      }
    }
  } else {
    throw ConfigError("moment functions use one instrument at a time");
  }
  for (auto d : out.defined) out.undefined_count += d ? 0 : 1;
  return out;
}

InstrumentalFunctions build_hypercubes(const Sample& s, std::size_t count, InstrumentMode mode) {
  if (count == 0) throw ConfigError("hypercube count must be positive");
  std::size_t levels = 1;
  if (mode == InstrumentMode::z_only) {
    if (!s.has_z()) throw DataError("Z-mode hypercubes need a Z column");
    levels = s.z_level_count();
  } else if (mode == InstrumentMode::w_only) {
    if (!s.has_w()) throw DataError("W-mode hypercubes need a W column");
    levels = s.z_level_count() * s.w_level_count();
  } else {
    throw ConfigError("hypercubes are built for one instrument at a time");
  }
  if (count < levels) {
    std::ostringstream os;
    os << "hypercube count " << count << " is below the " << levels << " instrument categories";
    throw ConfigError(os.str());
  }
  std::vector<std::size_t> per(s.dim(), 1);
  std::vector<std::size_t> continuous;
  std::size_t discrete = levels;
  for (std::size_t k = 0; k < s.dim(); ++k) {
    auto col = s.covariate(k);
    std::vector<double> v(col.begin(), col.end());
    std::sort(v.begin(), v.end());
    std::size_t distinct = std::unique(v.begin(), v.end()) - v.begin();
    if (distinct <= kDiscreteCovariateLevels) {
      per[k] = distinct;
      discrete *= distinct;
    } else {
      continuous.push_back(k);
    }
  }
  if (!continuous.empty()) {
    const std::size_t room = std::max<std::size_t>(1, count / discrete);
    const std::size_t dc = continuous.size();
    auto ipow = [](std::size_t b, std::size_t e) {
      std::size_t r = 1;
      for (std::size_t i = 0; i < e; ++i) r *= b;
      return r;
    };
    std::size_t k = static_cast<std::size_t>(std::floor(std::pow(double(room), 1.0 / dc)));
    k = std::max<std::size_t>(k, 1);
    while (ipow(k + 1, dc) <= room) ++k;
    while (k > 1 && ipow(k, dc) > room) --k;
    for (auto d : continuous) per[d] = k;
  }
  InstrumentalFunctions f;
  f.covariate_bins = make_binning(s, per);
  f.discrete_levels = levels;
  f.requested = count;
  f.realized = f.covariate_bins.cell_count() * levels;
  auto cells = f.covariate_bins.assign(s);
  f.cube_of.resize(s.size());
  f.counts.assign(f.realized, 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::size_t lvl = mode == InstrumentMode::z_only ? s.z_at(i)
                                                     : s.z_at(i) * s.w_level_count() + s.w_at(i);
    f.cube_of[i] = cells[i] * levels + lvl;
    ++f.counts[f.cube_of[i]];
  }
  return f;
}

CriterionData prepare_criterion(std::span<const std::uint8_t> y, const DesignMatrix& d, const ObservationEnvelopes& env,
                                const InstrumentalFunctions& cubes) {
  if (env.defined.size() != d.n || cubes.cube_of.size() != d.n || y.size() != d.n)
    throw DataError("criterion inputs have different lengths");
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < d.n; ++i)
    if (env.defined[i]) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cubes.cube_of[a] < cubes.cube_of[b];
  });
  CriterionData c;
  c.n = order.size();
  c.p = d.p;
  c.excluded = d.n - c.n;
  if (c.n == 0) throw DataError("insufficient data: no observation has defined envelopes");
  c.x.resize(c.n * c.p);
  c.y.resize(c.n);
  c.upper.resize(c.n);
  c.lower.resize(c.n);
  for (std::size_t r = 0; r < c.n; ++r) {
    const std::size_t i = order[r];
    for (std::size_t k = 0; k < c.p; ++k) c.x[k * c.n + r] = d.at(i, k);
    c.y[r] = y[i];
    c.upper[r] = env.upper[i];
    c.lower[r] = env.lower[i];
  }
  c.offsets.assign(cubes.realized + 1, 0);
  for (std::size_t r = 0; r < c.n; ++r) ++c.offsets[cubes.cube_of[order[r]] + 1];
  for (std::size_t j = 0; j < cubes.realized; ++j) c.offsets[j + 1] += c.offsets[j];
  return c;
}

namespace {

double violation(double sum, double sumsq, double n) {
  const double m = sum / n;
  double var = n > 1.0 ? (sumsq - n * m * m) / (n - 1.0) : 0.0;
  const double sd = std::max(std::sqrt(std::max(var, 0.0)), kSdFloor);
  const double t = -m / sd;
  return t > 0.0 ? t * t : 0.0;
}

}  // namespace

CriterionValue criterion(std::span<const double> beta, const CriterionData& c,
                         const ModelSpec& model, CriterionWorkspace& ws,
                         const KernelTable& kt) {
  if (beta.size() != c.p) throw ConfigError("coefficient dimension mismatch");
  ws.idx.resize(c.n);
  ws.g1.resize(c.n);
  ws.g2.resize(c.n);
  kt.linear_index(c.x.data(), c.n, c.p, beta.data(), ws.idx.data());
  if (model.kind == ModelKind::semiparametric) {
    kt.semiparametric_moments(ws.idx.data(), c.y.data(), c.upper.data(), c.lower.data(), c.n,
                              ws.g1.data(), ws.g2.data());
  } else {
    ws.f.resize(c.n);
    for (std::size_t i = 0; i < c.n; ++i) ws.f[i] = model.link(ws.idx[i]);
    kt.parametric_moments(ws.f.data(), c.y.data(), c.upper.data(), c.lower.data(), c.n,
                          ws.g1.data(), ws.g2.data());
  }
  CriterionValue v;
  const double n = static_cast<double>(c.n);
  for (std::size_t j = 0; j + 1 < c.offsets.size(); ++j) {
    const std::size_t b = c.offsets[j], cnt = c.offsets[j + 1] - b;
    if (cnt == 0) {
      ++v.empty_cubes;
      continue;
    }
    for (const auto* g : {&ws.g1, &ws.g2}) {
      double s, q;
      kt.sum_and_square(g->data() + b, cnt, &s, &q);
      v.q += violation(s, q, n);
    }
  }
  return v;
}

double criterion_from_stats(std::span<const double> means, std::span<const double> sds) {
  if (means.size() != sds.size()) throw ConfigError("mean/sd length mismatch");
  double q = 0.0;
  for (std::size_t i = 0; i < means.size(); ++i) {
    const double t = -means[i] / std::max(sds[i], kSdFloor);
    if (t > 0.0) q += t * t;
  }
  return q;
}

}  // namespace misreport
