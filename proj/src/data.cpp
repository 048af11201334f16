#include "misreport/data.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "misreport/errors.hpp"

namespace misreport {

namespace {

std::vector<double> sorted_unique(const std::vector<double>& v) {
  std::vector<double> out(v);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::uint32_t level_index(const std::vector<double>& levels, double v) {
  auto it = std::lower_bound(levels.begin(), levels.end(), v);
  if (it == levels.end() || *it != v) return static_cast<std::uint32_t>(-1);
  return static_cast<std::uint32_t>(it - levels.begin());
}

}  // namespace

Sample build_sample(SampleColumns c) {
  const std::size_t n = c.y.size();
  if (n == 0) throw DataError("empty sample");
  Sample s;
  s.y_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (c.y[i] != 0 && c.y[i] != 1)
      throw DataError("non-binary outcome at row " + std::to_string(i));
    s.y_[i] = static_cast<std::uint8_t>(c.y[i]);
  }
  for (std::size_t k = 0; k < c.x.size(); ++k) {
    if (c.x[k].size() != n) throw DataError("ragged covariate rows");
    for (double v : c.x[k])
      if (!std::isfinite(v)) throw DataError("missing or non-finite covariate value");
  }
  s.x_ = std::move(c.x);
  s.names_ = std::move(c.covariate_names);
  if (s.names_.empty())
    for (std::size_t k = 0; k < s.x_.size(); ++k) s.names_.push_back("x" + std::to_string(k + 1));
  if (s.names_.size() != s.x_.size()) throw DataError("covariate name count mismatch");

  if (c.z) {
    if (c.z->size() != n) throw DataError("instrument z length mismatch");
    for (double v : *c.z)
      if (!std::isfinite(v)) throw DataError("missing instrument z value");
    s.z_levels_ = sorted_unique(*c.z);
    s.z_idx_.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.z_idx_[i] = level_index(s.z_levels_, (*c.z)[i]);
  }
  if (c.w) {
    if (c.w->size() != n) throw DataError("instrument w length mismatch");
    std::vector<double> order;
    if (c.w_order) {
      order = *c.w_order;
      std::set<double> seen;
      for (double v : order)
        if (!seen.insert(v).second) throw DataError("unordered duplicate W category labels");
    } else {
      // numeric labels carry their own order
      order = sorted_unique(*c.w);
    }
    s.w_levels_ = order;
    s.w_idx_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v = (*c.w)[i];
      auto it = std::find(order.begin(), order.end(), v);
      if (it == order.end()) {
        std::ostringstream os;
        os << "W category " << v << " is not in the declared order";
        throw DataError(os.str());
      }
      s.w_idx_[i] = static_cast<std::uint32_t>(it - order.begin());
    }
  }
  return s;
}

Sample build_sample(std::span<const Record> records, std::optional<std::vector<double>> w_order) {
  if (records.empty()) throw DataError("empty sample");
  SampleColumns c;
  const std::size_t d = records.front().x.size();
  const bool has_z = records.front().z.has_value();
  const bool has_w = records.front().w.has_value();
  c.x.assign(d, {});
  if (has_z) c.z.emplace();
  if (has_w) c.w.emplace();
  for (const auto& r : records) {
    if (r.x.size() != d) throw DataError("ragged covariate rows");
    if (r.z.has_value() != has_z || r.w.has_value() != has_w)
      throw DataError("instrument present in some rows only");
    c.y.push_back(r.y);
    for (std::size_t k = 0; k < d; ++k) c.x[k].push_back(r.x[k]);
    if (has_z) c.z->push_back(*r.z);
    if (has_w) c.w->push_back(*r.w);
  }
  c.w_order = std::move(w_order);
  return build_sample(std::move(c));
}

Sample with_latent(Sample s, LatentOutcomes latent) {
  const std::size_t n = s.size();
  if (latent.y_star.size() != n || latent.m0.size() != n || latent.m1.size() != n)
    throw DataError("latent length mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    int ys = latent.y_star[i], m0 = latent.m0[i], m1 = latent.m1[i];
    if (m1 * ys + (1 - m0) * (1 - ys) != s.y_[i])
      throw DataError("latent outcomes inconsistent with reported outcome at row " +
                      std::to_string(i));
  }
  s.latent_ = std::move(latent);
  return s;
}

// ---- Binning ----

Binning::Binning(std::vector<std::vector<double>> cuts,
                 std::vector<std::pair<double, double>> ranges, bool collapsed)
    : cuts_(std::move(cuts)), ranges_(std::move(ranges)), collapsed_(collapsed) {
  if (ranges_.size() != cuts_.size()) throw ConfigError("binning range count mismatch");
  for (const auto& c : cuts_)
    for (std::size_t i = 1; i < c.size(); ++i)
      if (!(c[i - 1] < c[i])) throw ConfigError("cut points must be strictly increasing");
  strides_.assign(cuts_.size(), 1);
  cell_count_ = 1;
  for (std::size_t k = cuts_.size(); k-- > 0;) {
    strides_[k] = cell_count_;
    cell_count_ *= bins(k);
  }
}

std::size_t Binning::bin_of(std::size_t k, double v) const {
  const auto& c = cuts_[k];
  return static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), v) - c.begin());
}

std::size_t Binning::cell_of(std::span<const double> x) const {
  std::size_t cell = 0;
  for (std::size_t k = 0; k < cuts_.size(); ++k) cell += bin_of(k, x[k]) * strides_[k];
  return cell;
}

std::vector<std::size_t> Binning::assign(const Sample& s) const {
  if (s.dim() != dim()) throw DataError("binning dimension does not match sample");
  std::vector<std::size_t> out(s.size(), 0);
  for (std::size_t k = 0; k < dim(); ++k) {
    auto col = s.covariate(k);
    for (std::size_t i = 0; i < s.size(); ++i) out[i] += bin_of(k, col[i]) * strides_[k];
  }
  return out;
}

std::vector<std::size_t> Binning::unflatten(std::size_t cell) const {
  std::vector<std::size_t> b(dim());
  for (std::size_t k = 0; k < dim(); ++k) {
    b[k] = cell / strides_[k];
    cell %= strides_[k];
  }
  return b;
}

std::pair<double, double> Binning::bin_range(std::size_t k, std::size_t b) const {
  const auto& c = cuts_[k];
  double lo = b == 0 ? ranges_[k].first : c[b - 1];
  double hi = b == c.size() ? ranges_[k].second : c[b];
  return {lo, hi};
}

std::string Binning::describe_cell(std::size_t cell) const {
  std::ostringstream os;
  auto b = unflatten(cell);
  for (std::size_t k = 0; k < dim(); ++k) {
    auto [lo, hi] = bin_range(k, b[k]);
    if (k) os << ';';
    os << '[' << lo << ',' << hi << (b[k] + 1 == bins(k) ? ']' : ')');
  }
  return os.str();
}

Binning make_binning(const Sample& s, std::size_t k) {
  std::vector<std::size_t> per(s.dim(), k);
  if (k == 0) throw ConfigError("cells_per_dim must be >= 1");
  return make_binning(s, per);
}

Binning make_binning(const Sample& s, std::span<const std::size_t> per) {
  if (per.size() != s.dim()) throw ConfigError("one cell count per covariate dimension");
  std::vector<std::vector<double>> cuts;
  std::vector<std::pair<double, double>> ranges;
  bool collapsed = false;
  for (std::size_t d = 0; d < s.dim(); ++d) {
    const std::size_t k = per[d];
    if (k == 0) throw ConfigError("cells_per_dim must be >= 1");
    auto col = s.covariate(d);
    std::vector<double> sorted(col.begin(), col.end());
    std::sort(sorted.begin(), sorted.end());
    ranges.emplace_back(sorted.front(), sorted.back());
    std::vector<double> distinct(sorted);
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<double> c;
    if (distinct.size() == 1) {
      if (k > 1) collapsed = true;
    } else if (distinct.size() <= k) {
      // one cell per value
      for (std::size_t i = 1; i < distinct.size(); ++i) c.push_back(distinct[i]);
    } else {
      const std::size_t n = sorted.size();
      for (std::size_t b = 1; b < k; ++b) {
        std::size_t pos = (b * n + k / 2) / k;
        double cut = sorted[std::min(pos, n - 1)];
        if (cut <= sorted.front()) continue;
        if (!c.empty() && cut <= c.back()) continue;
        c.push_back(cut);
      }
    }
    cuts.push_back(std::move(c));
  }
  return Binning(std::move(cuts), std::move(ranges), collapsed);
}

// ---- CondProbTable ----

std::size_t CondProbTable::w_index_of(double v) const {
  if (!has_w_) throw DataError("table has no W instrument");
  auto it = std::find(w_levels_.begin(), w_levels_.end(), v);
  if (it == w_levels_.end()) {
    std::ostringstream os;
    os << "unknown W category " << v;
    throw DataError(os.str());
  }
  return static_cast<std::size_t>(it - w_levels_.begin());
}

std::size_t CondProbTable::z_index_of(double v) const {
  if (!has_z_) throw DataError("table has no Z instrument");
  auto it = std::find(z_levels_.begin(), z_levels_.end(), v);
  if (it == z_levels_.end()) {
    std::ostringstream os;
    os << "unknown Z value " << v;
    throw DataError(os.str());
  }
  return static_cast<std::size_t>(it - z_levels_.begin());
}

double CondProbTable::total_count() const {
  double t = 0;
  for (const auto& c : full_) t += c.count;
  return t;
}

void CondProbTable::finalize_marginal() {
  marginal_.assign(cells_ * nz_, {});
  for (std::size_t c = 0; c < cells_; ++c)
    for (std::size_t z = 0; z < nz_; ++z) {
      ProbCell m;
      for (std::size_t w = 0; w < nw_; ++w) {
        const auto& f = at(c, z, w);
        m.count += f.count;
        m.ones += f.ones;
      }
      m.p = m.count > 0 ? m.ones / m.count : 0.0;
      m.included = m.count > 0 && m.count >= min_count_;
      marginal_[c * nz_ + z] = m;
    }
}

CondProbTable CondProbTable::from_probabilities(Binning binning, std::vector<double> z_levels,
                                                std::vector<double> w_levels, bool has_z,
                                                bool has_w, std::span<const double> p,
                                                std::span<const double> mass) {
  CondProbTable t;
  t.binning_ = std::move(binning);
  t.has_z_ = has_z;
  t.has_w_ = has_w;
  t.z_levels_ = has_z ? std::move(z_levels) : std::vector<double>{0.0};
  t.w_levels_ = has_w ? std::move(w_levels) : std::vector<double>{0.0};
  t.cells_ = t.binning_.cell_count();
  t.nz_ = t.z_levels_.size();
  t.nw_ = t.w_levels_.size();
  const std::size_t total = t.cells_ * t.nz_ * t.nw_;
  if (p.size() != total || mass.size() != total)
    throw DataError("probability table shape mismatch");
  t.full_.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    if (!(p[i] >= 0.0 && p[i] <= 1.0)) throw DataError("probability outside [0,1]");
    if (!(mass[i] >= 0.0)) throw DataError("negative cell mass");
    t.full_[i] = {mass[i], mass[i] * p[i], p[i], mass[i] > 0};
  }
  t.min_count_ = 0.0;
  t.finalize_marginal();
  // the count-weighted mean would round; keep the exact value for single-w tables
  if (t.nw_ == 1)
    for (std::size_t i = 0; i < t.marginal_.size(); ++i) t.marginal_[i].p = t.full_[i].p;
  return t;
}

CondProbTable estimate_cond_prob(const Sample& s, const Binning& binning,
                                 std::size_t min_cell_count) {
  if (min_cell_count == 0) throw ConfigError("min_cell_count must be >= 1");
  CondProbTable t;
  t.binning_ = binning;
  t.has_z_ = s.has_z();
  t.has_w_ = s.has_w();
  if (t.has_z_) t.z_levels_ = s.z_levels();
  if (t.has_w_) t.w_levels_ = s.w_levels();
  t.cells_ = binning.cell_count();
  t.nz_ = t.z_levels_.size();
  t.nw_ = t.w_levels_.size();
  t.min_count_ = static_cast<double>(min_cell_count);
  t.full_.assign(t.cells_ * t.nz_ * t.nw_, {});
  auto cells = binning.assign(s);
  auto y = s.y();
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto& c = t.full_[(cells[i] * t.nz_ + s.z_at(i)) * t.nw_ + s.w_at(i)];
    c.count += 1.0;
    c.ones += y[i];
  }
  bool any = false;
  for (auto& c : t.full_) {
    c.p = c.count > 0 ? c.ones / c.count : 0.0;
    c.included = c.count >= t.min_count_;
    any = any || c.included;
  }
  t.finalize_marginal();
  for (const auto& m : t.marginal_) any = any || m.included;
  if (!any) throw DataError("insufficient data: every cell has fewer than " +
                            std::to_string(min_cell_count) + " observations");
  return t;
}

EnvelopeZ envelopes_z(const CondProbTable& t) {
  EnvelopeZ env;
  env.cells.resize(t.cell_count());
  for (std::size_t c = 0; c < t.cell_count(); ++c) {
    auto& e = env.cells[c];
    for (std::size_t z = 0; z < t.z_count(); ++z) {
      const auto& m = t.marginal(c, z);
      if (!m.included) continue;
      if (!e.defined) {
        e = {m.p, m.p, z, z, true};
        continue;
      }
      if (m.p < e.lower) { e.lower = m.p; e.argmin = z; }
      if (m.p > e.upper) { e.upper = m.p; e.argmax = z; }
    }
  }
  return env;
}

const EnvelopeWEntry& EnvelopeW::at_value(std::size_t cell, std::size_t z, double w) const {
  auto it = std::find(w_levels_.begin(), w_levels_.end(), w);
  if (it == w_levels_.end()) {
    std::ostringstream os;
    os << "unknown W category " << w;
    throw DataError(os.str());
  }
  return at(cell, z, static_cast<std::size_t>(it - w_levels_.begin()));
}

EnvelopeW envelopes_w(const CondProbTable& t) {
  if (!t.has_w()) throw DataError("envelopes over W need a W instrument");
  EnvelopeW env(t.cell_count(), t.z_count(), t.w_count(), t.w_levels());
  for (std::size_t c = 0; c < t.cell_count(); ++c)
    for (std::size_t z = 0; z < t.z_count(); ++z) {
      EnvelopeWEntry run;
      for (std::size_t w = 0; w < t.w_count(); ++w) {
        const auto& f = t.at(c, z, w);
        if (f.included) {
          if (!run.defined) {
            run = {f.p, f.p, true};
          } else {
            run.lower = std::min(run.lower, f.p);
            run.upper = std::max(run.upper, f.p);
          }
        }
        env.at(c, z, w) = run;
      }
    }
  return env;
}

}  // namespace misreport
