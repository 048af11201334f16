#include "misreport/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "misreport/errors.hpp"

namespace misreport {

namespace {

// Integer grid for (alpha0, alpha1, p*): value = index / N.
struct Grid {
  int N;
  double half;  // step / 2 plus rounding slack

  explicit Grid(double step) {
    double n = std::round(1.0 / step);
    if (std::abs(n * step - 1.0) > 1e-9) throw ConfigError("grid step must divide 1");
    N = static_cast<int>(n);
    half = 0.5 / n + 1e-12;
  }

  double reported(int i0, int i1, int k) const {
    const long n = N;
    return static_cast<double>(i0 * n + (n - i0 - i1) * k) / static_cast<double>(n * n);
  }

  bool matches(int i0, int i1, int k, double p) const {
    return std::abs(reported(i0, i1, k) - p) <= half;
  }

  // Range of p* indices reproducing p with the given misreporting pair.
  bool k_range(int i0, int i1, double p, int& lo, int& hi) const {
    const int s = N - i0 - i1;
    if (s == 0) {
      if (!matches(i0, i1, 0, p)) return false;
      lo = 0;
      hi = N;
      return true;
    }
    const double nn = static_cast<double>(N) * N;
    lo = std::max(0, static_cast<int>(std::ceil(((p - half) * nn - i0 * double(N)) / s - 1e-7)));
    hi = std::min(N, static_cast<int>(std::floor(((p + half) * nn - i0 * double(N)) / s + 1e-7)));
    while (lo <= hi && !matches(i0, i1, lo, p)) ++lo;
    while (hi >= lo && !matches(i0, i1, hi, p)) --hi;
    return lo <= hi;
  }
};

struct PairFilter {
  int N;
  const Restriction& r;

  bool operator()(int i0, int i1) const {
    if (i0 + i1 > N) return false;
    return std::visit(
        [&](const auto& v) -> bool {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Unrestricted>) {
            return true;
          } else if constexpr (std::is_same_v<T, OneSided>) {
            return v.side == OneSided::Side::no_false_positives ? i0 == 0 : i1 == 0;
          } else if constexpr (std::is_same_v<T, BoundedMisreporting>) {
            return i0 <= std::floor(v.a0_bar * N + 1e-9) && i1 <= std::floor(v.a1_bar * N + 1e-9);
          } else {
            return v.direction == MonotoneMisreporting::Direction::a0_le_a1 ? i0 <= i1
                                                                           : i1 <= i0;
          }
        },
        r);
  }
};

void charge(std::uint64_t& work, std::uint64_t amount, std::uint64_t budget) {
  work += amount;
  if (work > budget) {
    std::ostringstream os;
    os << "oracle enumeration budget of " << budget << " candidate checks exceeded";
    throw BudgetExceeded(os.str());
  }
}

void record(OracleInterval& iv, double lo, double hi) {
  iv.lower = iv.feasible ? std::min(iv.lower, lo) : lo;
  iv.upper = iv.feasible ? std::max(iv.upper, hi) : hi;
  iv.feasible = true;
}

std::vector<OracleInterval> oracle_z_only(const DiscreteInstance& inst, std::size_t c,
                                          const Grid& g, std::uint64_t& work,
                                          std::uint64_t budget) {
  PairFilter ok{g.N, inst.restriction};
  std::vector<OracleInterval> out(inst.n_z);
  std::vector<int> lo(inst.n_z), hi(inst.n_z);
  for (int i0 = 0; i0 <= g.N; ++i0)
    for (int i1 = 0; i0 + i1 <= g.N; ++i1) {
      if (!ok(i0, i1)) continue;
      charge(work, inst.n_z, budget);
      bool all = true;
      for (std::size_t z = 0; z < inst.n_z && all; ++z)
        all = g.k_range(i0, i1, inst.p(c, z, 0), lo[z], hi[z]);
      if (!all) continue;
      for (std::size_t z = 0; z < inst.n_z; ++z)
        record(out[z], double(lo[z]) / g.N, double(hi[z]) / g.N);
    }
  return out;
}

// Single p*, misreporting pairs weakly decreasing in w. For each candidate p*
// the chain condition is a dominance DP over the per-w feasible pair sets.
std::vector<OracleInterval> oracle_w_only(const DiscreteInstance& inst, std::size_t c,
                                          const Grid& g, std::uint64_t& work,
                                          std::uint64_t budget) {
  PairFilter ok{g.N, inst.restriction};
  const int M = g.N + 1;
  std::vector<OracleInterval> out(1);
  std::vector<std::uint8_t> reach(M * M), dom(M * M);
  for (int k = 0; k <= g.N; ++k) {
    charge(work, static_cast<std::uint64_t>(M) * M * inst.n_w, budget);
    bool alive = false;
    for (std::size_t w = 0; w < inst.n_w; ++w) {
      const double p = inst.p(c, 0, w);
      if (w > 0) {
        // dom[a][b] = some reachable pair (a', b') >= (a, b) componentwise
        for (int a = g.N; a >= 0; --a)
          for (int b = g.N; b >= 0; --b) {
            std::uint8_t v = reach[a * M + b];
            if (a < g.N) v |= dom[(a + 1) * M + b];
            if (b < g.N) v |= dom[a * M + b + 1];
            dom[a * M + b] = v;
          }
      }
      alive = false;
      for (int a = 0; a <= g.N; ++a)
        for (int b = 0; b <= g.N; ++b) {
          bool v = a + b <= g.N && ok(a, b) && g.matches(a, b, k, p) &&
                   (w == 0 || dom[a * M + b]);
          reach[a * M + b] = v;
          alive = alive || v;
        }
      if (!alive) break;
    }
    if (alive) record(out[0], double(k) / g.N, double(k) / g.N);
  }
  return out;
}

// Depth-first search over misreporting pairs from the top W level downward;
// p* per z is the intersection of per-w index ranges.
struct TwoInstrumentSearch {
  const DiscreteInstance& inst;
  std::size_t c;
  const Grid& g;
  std::uint64_t& work;
  std::uint64_t budget;
  std::vector<OracleInterval> out;
  std::vector<std::pair<int, int>> pairs;  // admissible pairs

  void run() {
    PairFilter ok{g.N, inst.restriction};
    for (int i0 = 0; i0 <= g.N; ++i0)
      for (int i1 = 0; i0 + i1 <= g.N; ++i1)
        if (ok(i0, i1)) pairs.emplace_back(i0, i1);
    out.assign(inst.n_z, {});
    std::vector<int> lo(inst.n_z, 0), hi(inst.n_z, g.N);
    descend(static_cast<int>(inst.n_w) - 1, -1, -1, lo, hi);
  }

  void descend(int w, int prev0, int prev1, const std::vector<int>& lo,
               const std::vector<int>& hi) {
    if (w < 0) {
      leaf(lo, hi);
      return;
    }
    std::vector<int> nlo(inst.n_z), nhi(inst.n_z);
    for (auto [i0, i1] : pairs) {
      if (prev0 >= 0) {
        // lower w: weakly larger in both, strictly in at least one
        if (i0 < prev0 || i1 < prev1 || (i0 == prev0 && i1 == prev1)) continue;
      }
      charge(work, inst.n_z, budget);
      bool all = true;
      for (std::size_t z = 0; z < inst.n_z && all; ++z) {
        int a, b;
        all = g.k_range(i0, i1, inst.p(c, z, w), a, b);
        if (!all) break;
        nlo[z] = std::max(lo[z], a);
        nhi[z] = std::min(hi[z], b);
        all = nlo[z] <= nhi[z];
      }
      if (all) descend(w - 1, i0, i1, nlo, nhi);
    }
  }

  void leaf(const std::vector<int>& lo, const std::vector<int>& hi) {
    const std::size_t nz = inst.n_z;
    // relevance: p* must not be constant across z
    auto others_allow = [&](std::size_t z, int v) {
      for (std::size_t o = 0; o < nz; ++o)
        if (o != z && !(lo[o] == v && hi[o] == v)) return true;
      return false;
    };
    for (std::size_t z = 0; z < nz; ++z) {
      int a = lo[z], b = hi[z];
      if (!others_allow(z, a)) ++a;
      if (!others_allow(z, b)) --b;
      if (a > b) continue;
      record(out[z], double(a) / g.N, double(b) / g.N);
    }
  }
};

double vmin(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }
double vmax(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

void DiscreteInstance::validate() const {
  if (!(step > 0.0 && step <= 0.1)) throw ConfigError("grid step must lie in (0, 0.1]");
  Grid g(step);
  (void)g;
  if (n_z == 0 || n_w == 0) throw ConfigError("instance supports must be nonempty");
  switch (mode) {
    case InstrumentMode::z_only:
      if (n_w != 1) throw ConfigError("Z-only instances have a single W level");
      break;
    case InstrumentMode::w_only:
      if (n_z != 1) throw ConfigError("W-only instances have a single Z level");
      break;
    case InstrumentMode::z_and_w:
      if (n_z < 2 || n_w < 2) throw ConfigError("two-instrument instances need |Z|,|W| >= 2");
      if (!std::holds_alternative<Unrestricted>(restriction))
        throw ConfigError("restrictions are not combined with two instruments");
      break;
  }
  if (cells.empty()) throw ConfigError("instance has no cells");
  for (const auto& t : cells) {
    if (t.size() != n_z * n_w) throw DataError("instance table shape mismatch");
    for (double v : t)
      if (!(v >= 0.0 && v <= 1.0)) throw DataError("instance probability outside [0,1]");
  }
}

CondProbTable DiscreteInstance::to_table() const {
  validate();
  const std::size_t C = cells.size();
  Binning b;
  if (C > 1) {
    std::vector<double> cuts;
    for (std::size_t i = 1; i < C; ++i) cuts.push_back(double(i));
    b = Binning({cuts}, {{0.0, double(C)}});
  }
  std::vector<double> zl(n_z), wl(n_w);
  for (std::size_t i = 0; i < n_z; ++i) zl[i] = double(i);
  for (std::size_t i = 0; i < n_w; ++i) wl[i] = double(i);
  std::vector<double> p, mass;
  for (const auto& t : cells)
    for (double v : t) {
      p.push_back(v);
      mass.push_back(1.0);
    }
  return CondProbTable::from_probabilities(std::move(b), zl, wl,
                                           mode != InstrumentMode::w_only,
                                           mode != InstrumentMode::z_only, p, mass);
}

OracleResult brute_force_prob_bounds(const DiscreteInstance& inst, std::uint64_t budget) {
  inst.validate();
  Grid g(inst.step);
  OracleResult res;
  for (std::size_t c = 0; c < inst.cells.size(); ++c) {
    switch (inst.mode) {
      case InstrumentMode::z_only:
        res.cells.push_back(oracle_z_only(inst, c, g, res.work, budget));
        break;
      case InstrumentMode::w_only:
        res.cells.push_back(oracle_w_only(inst, c, g, res.work, budget));
        break;
      case InstrumentMode::z_and_w: {
        TwoInstrumentSearch s{inst, c, g, res.work, budget, {}, {}};
        s.run();
        res.cells.push_back(std::move(s.out));
        break;
      }
    }
  }
  return res;
}

std::vector<double> reported_from_witness(const Witness& w) {
  std::vector<double> p(w.p_star.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    p[i] = (1.0 - w.alpha1[i]) * w.p_star[i] + w.alpha0[i] * (1.0 - w.p_star[i]);
  return p;
}

Witness construct_sharpness_witness(const DiscreteInstance& inst, std::size_t cell,
                                    WitnessMethod method, Endpoint which) {
  inst.validate();
  const auto& t = inst.cells.at(cell);
  const std::size_t nz = inst.n_z, nw = inst.n_w, n = nz * nw;
  Witness w{nz, nw, std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  const bool upper = which == Endpoint::upper;

  auto z_envelope_bound = [&](bool up) {
    const double lo = vmin(t), hi = vmax(t);
    for (std::size_t z = 0; z < nz; ++z) {
      if (up) {
        if (hi <= 0.0) throw DataError("upper construction needs a positive envelope");
        w.alpha1[z] = 1.0 - hi;
        w.alpha0[z] = 0.0;
        w.p_star[z] = t[z] / hi;
      } else {
        if (lo >= 1.0) throw DataError("lower construction needs an envelope below one");
        w.alpha1[z] = 0.0;
        w.alpha0[z] = lo;
        w.p_star[z] = (t[z] - lo) / (1.0 - lo);
      }
    }
  };

  switch (method) {
    case WitnessMethod::z_instrument:
      if (inst.mode != InstrumentMode::z_only) throw DataError("construction needs a Z-only instance");
      z_envelope_bound(upper);
      return w;

    case WitnessMethod::w_instrument_binary: {
      if (inst.mode != InstrumentMode::w_only || nw != 2)
        throw DataError("construction needs a W-only instance with binary W");
      const double p2 = t[0], p1 = t[1];  // index 1 is the larger w
      const double env_hi = std::max(p1, p2), env_lo = std::min(p1, p2);
      // the smaller w absorbs everything: alpha1 + alpha0 = 1 matches any p*
      w.alpha1[0] = 1.0 - p2;
      w.alpha0[0] = p2;
      if (upper) {
        if (env_hi <= 0.0) throw DataError("upper construction needs a positive envelope");
        w.alpha1[1] = 1.0 - env_hi;
        w.alpha0[1] = 0.0;
        w.p_star[0] = w.p_star[1] = p1 / env_hi;
      } else {
        if (env_lo >= 1.0) throw DataError("lower construction needs an envelope below one");
        w.alpha1[1] = 0.0;
        w.alpha0[1] = env_lo;
        w.p_star[0] = w.p_star[1] = (p1 - env_lo) / (1.0 - env_lo);
      }
      return w;
    }

    case WitnessMethod::one_sided: {
      auto side = std::get_if<OneSided>(&inst.restriction);
      if (!side) throw DataError("construction needs a one-sided restriction");
      const bool no_fp = side->side == OneSided::Side::no_false_positives;
      if (inst.mode == InstrumentMode::z_only) {
        if (no_fp == upper) {
          z_envelope_bound(upper);
        } else {
          // truth-telling attains the endpoint on the restricted side
          for (std::size_t z = 0; z < nz; ++z) w.p_star[z] = t[z];
        }
        return w;
      }
      if (inst.mode != InstrumentMode::w_only) throw DataError("construction needs one instrument");
      const double sup = vmax(t), inf = vmin(t);
      for (std::size_t k = 0; k < nw; ++k) {
        if (no_fp) {
          if (upper) {
            w.p_star[k] = 1.0;
            w.alpha1[k] = 1.0 - t[k];
          } else {
            if (sup <= 0.0) throw DataError("lower construction needs a positive probability");
            w.p_star[k] = sup;
            w.alpha1[k] = 1.0 - t[k] / sup;
          }
        } else {
          if (upper) {
            if (inf >= 1.0) throw DataError("upper construction needs a probability below one");
            w.p_star[k] = inf;
            w.alpha0[k] = (t[k] - inf) / (1.0 - inf);
          } else {
            w.p_star[k] = 0.0;
            w.alpha0[k] = t[k];
          }
        }
      }
      return w;
    }

    case WitnessMethod::two_instruments_binary_w: {
      if (inst.mode != InstrumentMode::z_and_w || nw != 2)
        throw DataError("construction needs a two-instrument instance with binary W");
      DiscreteInstance one = inst;
      one.cells = {t};
      auto diag = two_instrument_diagnostics(one.to_table(), 0.0);
      const auto& d = diag.cells[0];
      if (!d.defined || d.pairs.empty() || !d.pairs[0].relevant || d.pairs[0].q1_violated)
        throw DataError("two-instrument construction needs q1 > 1 and a relevant z-pair");
      const double q1 = d.pairs[0].q1, q0 = d.pairs[0].q0;
      const double ua1 = d.u_alpha1, ua0 = d.u_alpha0;
      for (std::size_t z = 0; z < nz; ++z) {
        const std::size_t i2 = z * nw + 0, i1 = z * nw + 1;
        double ps;
        if (upper) {
          w.alpha1[i1] = ua1;
          w.alpha0[i1] = 0.0;
          w.alpha1[i2] = 1.0 - (1.0 - ua1 + q0) / q1;
          w.alpha0[i2] = q0 / q1;
          ps = t[i1] / (1.0 - ua1);
        } else {
          w.alpha1[i1] = 0.0;
          w.alpha0[i1] = ua0;
          w.alpha1[i2] = 1.0 - (1.0 + q0) / q1;
          w.alpha0[i2] = (ua0 + q0) / q1;
          ps = (t[i1] - ua0) / (1.0 - ua0);
        }
        w.p_star[i1] = w.p_star[i2] = ps;
      }
      return w;
    }
  }
  throw DataError("unknown construction");
}

WitnessReport verify_witness(const Witness& w, const DiscreteInstance& inst, std::size_t cell) {
  WitnessReport rep;
  const std::size_t nz = inst.n_z, nw = inst.n_w, n = nz * nw;
  if (w.n_z != nz || w.n_w != nw || w.alpha0.size() != n || w.alpha1.size() != n ||
      w.p_star.size() != n) {
    rep.failures.push_back("shape");
    return rep;
  }
  const auto& t = inst.cells.at(cell);
  const double eps = kWitnessTol;
  auto fail = [&](const std::string& s) {
    if (std::find(rep.failures.begin(), rep.failures.end(), s) == rep.failures.end())
      rep.failures.push_back(s);
  };
  auto rp = reported_from_witness(w);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(std::abs(rp[i] - t[i]) <= eps)) fail("reporting identity");
    for (double v : {w.alpha0[i], w.alpha1[i], w.p_star[i]})
      if (!(v >= -eps && v <= 1.0 + eps)) fail("range");
    if (w.alpha0[i] + w.alpha1[i] > 1.0 + eps) fail("degree of misreporting");
  }
  // misreporting does not vary with z; p* does not vary with w
  for (std::size_t z = 1; z < nz; ++z)
    for (std::size_t k = 0; k < nw; ++k) {
      if (std::abs(w.alpha0[z * nw + k] - w.alpha0[k]) > eps ||
          std::abs(w.alpha1[z * nw + k] - w.alpha1[k]) > eps)
        fail("exclusion (misreporting constant across z)");
    }
  for (std::size_t z = 0; z < nz; ++z)
    for (std::size_t k = 1; k < nw; ++k)
      if (std::abs(w.p_star[z * nw + k] - w.p_star[z * nw]) > eps)
        fail("exclusion (p* constant across w)");
  if (nw > 1) {
    for (std::size_t k = 1; k < nw; ++k) {
      const double d0 = w.alpha0[k - 1] - w.alpha0[k], d1 = w.alpha1[k - 1] - w.alpha1[k];
      if (d0 < -eps || d1 < -eps) fail("monotonicity in w");
      if (inst.mode == InstrumentMode::z_and_w && d0 <= eps && d1 <= eps)
        fail("monotonicity in w (strict for some y)");
    }
  }
  if (inst.mode == InstrumentMode::z_and_w) {
    bool varies = false;
    for (std::size_t z = 1; z < nz; ++z)
      varies = varies || std::abs(w.p_star[z * nw] - w.p_star[0]) > eps;
    if (!varies) fail("relevance of z");
  }
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        for (std::size_t i = 0; i < n; ++i) {
          if constexpr (std::is_same_v<T, OneSided>) {
            double v = r.side == OneSided::Side::no_false_positives ? w.alpha0[i] : w.alpha1[i];
            if (std::abs(v) > eps) fail("one-sided misreporting");
          } else if constexpr (std::is_same_v<T, BoundedMisreporting>) {
            if (w.alpha0[i] > r.a0_bar + eps || w.alpha1[i] > r.a1_bar + eps)
              fail("bounded misreporting");
          } else if constexpr (std::is_same_v<T, MonotoneMisreporting>) {
            bool bad = r.direction == MonotoneMisreporting::Direction::a0_le_a1
                           ? w.alpha0[i] > w.alpha1[i] + eps
                           : w.alpha1[i] > w.alpha0[i] + eps;
            if (bad) fail("monotone misreporting");
          }
        }
      },
      inst.restriction);
  return rep;
}

namespace {

int draw(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Misreporting pair on the grid satisfying the restriction and a minimum
// signal 1 - alpha0 - alpha1 >= min_signal.
std::pair<int, int> draw_pair(std::mt19937_64& rng, const Grid& g, const Restriction& r,
                              int max_sum) {
  PairFilter ok{g.N, r};
  for (;;) {
    int i0 = draw(rng, 0, max_sum), i1 = draw(rng, 0, max_sum);
    if (auto s = std::get_if<OneSided>(&r))
      (s->side == OneSided::Side::no_false_positives ? i0 : i1) = 0;
    if (i0 + i1 <= max_sum && ok(i0, i1)) return {i0, i1};
  }
}

}  // namespace

double bound_sensitivity(const DiscreteInstance& inst) {
  const double h = 1e-7;
  auto eval = [&](const DiscreteInstance& d) { return apply_restriction(d.to_table(), d.assumptions()); };
  const auto base = eval(inst);
  std::vector<double> grad(base.rows.size() * 2, 0.0);
  DiscreteInstance probe = inst;
  for (std::size_t c = 0; c < inst.cells.size(); ++c)
    for (std::size_t i = 0; i < inst.cells[c].size(); ++i) {
      std::vector<double> worst(grad.size(), 0.0);
      for (double dir : {-1.0, 1.0}) {
        probe.cells = inst.cells;
        double& v = probe.cells[c][i];
        v = std::clamp(v + dir * h, 0.0, 1.0);
        const double step = std::abs(v - inst.cells[c][i]);
        if (step == 0.0) continue;
        const auto b = eval(probe);
        for (std::size_t r = 0; r < b.rows.size(); ++r) {
          worst[2 * r] = std::max(worst[2 * r], std::abs(b.rows[r].lower - base.rows[r].lower) / step);
          worst[2 * r + 1] =
              std::max(worst[2 * r + 1], std::abs(b.rows[r].upper - base.rows[r].upper) / step);
        }
      }
      for (std::size_t r = 0; r < grad.size(); ++r) grad[r] += worst[r];
    }
  for (std::size_t r = 0; r < base.rows.size(); ++r)
    if (!base.rows[r].defined) return std::numeric_limits<double>::infinity();
  return grad.empty() ? 0.0 : *std::max_element(grad.begin(), grad.end());
}

GeneratedInstance random_instance(InstrumentMode mode, const Restriction& r, std::size_t n_z,
                                  std::size_t n_w, std::mt19937_64& rng, double step,
                                  const Conditioning& cond) {
  Grid g(step);
  const int N = g.N;
  const int max_sum = N - static_cast<int>(std::ceil(cond.min_signal * N - 1e-9));
  GeneratedInstance out;
  auto& inst = out.instance;
  inst.mode = mode;
  inst.n_z = n_z;
  inst.n_w = n_w;
  inst.restriction = r;
  inst.step = step;
  for (int attempt = 0; attempt < 1'000'000; ++attempt) {
    Witness w{n_z, n_w, std::vector<double>(n_z * n_w), std::vector<double>(n_z * n_w),
              std::vector<double>(n_z * n_w)};
    std::vector<int> a0(n_w), a1(n_w);
    for (std::size_t k = 0; k < n_w; ++k) std::tie(a0[k], a1[k]) = draw_pair(rng, g, r, max_sum);
    // decreasing in w componentwise; order statistics keep pointwise restrictions
    std::sort(a0.rbegin(), a0.rend());
    std::sort(a1.rbegin(), a1.rend());
    if (a0[0] + a1[0] > max_sum) continue;
    if (mode == InstrumentMode::z_and_w) {
      bool strict = true;
      for (std::size_t k = 1; k < n_w; ++k) {
        double s_hi = N - a0[k] - a1[k], s_lo = N - a0[k - 1] - a1[k - 1];
        strict = strict && s_hi / s_lo - 1.0 >= cond.min_q1_gap;
      }
      if (!strict) continue;
    }
    std::vector<int> ps(n_z);
    for (auto& k : ps) k = draw(rng, 0, N);
    if (mode == InstrumentMode::z_and_w) {
      auto [mn, mx] = std::minmax_element(ps.begin(), ps.end());
      if (double(*mx - *mn) / N < cond.min_spread) continue;
    }
    for (std::size_t z = 0; z < n_z; ++z)
      for (std::size_t k = 0; k < n_w; ++k) {
        w.alpha0[z * n_w + k] = double(a0[k]) / N;
        w.alpha1[z * n_w + k] = double(a1[k]) / N;
        w.p_star[z * n_w + k] = double(ps[z]) / N;
      }
    auto p = reported_from_witness(w);
    // interior probabilities: the closed forms' boundary conditions
    if (vmin(p) <= 0.0 || vmax(p) >= 1.0) continue;
    inst.cells = {p};
    bool good = false;
    try {
      good = bound_sensitivity(inst) <= cond.max_sensitivity;
    } catch (const DataError&) {
      good = false;
    }
    if (!good) continue;
    out.truth = std::move(w);
    inst.validate();
    return out;
  }
  throw ConfigError("could not draw a well-conditioned instance");
}

}  // namespace misreport
