#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace misreport {

// One observation as read from a file: reported outcome, covariates X~ and
// the optional discrete instruments.
struct Record {
  int y = 0;
  std::vector<double> x;
  std::optional<double> z;
  std::optional<double> w;
};

// Simulation-only truth. Y = M1*Y* + (1-M0)*(1-Y*) holds row-wise.
struct LatentOutcomes {
  std::vector<std::uint8_t> y_star;
  std::vector<std::uint8_t> m0;
  std::vector<std::uint8_t> m1;
};

// Column-oriented input for build_sample. `x` holds one vector per covariate
// dimension. `w_order` is the declared total order of the W categories
// (smallest first); it is required whenever `w` is present.
struct SampleColumns {
  std::vector<int> y;
  std::vector<std::vector<double>> x;
  std::optional<std::vector<double>> z;
  std::optional<std::vector<double>> w;
  std::optional<std::vector<double>> w_order;
  std::vector<std::string> covariate_names;
};

class Sample {
 public:
  std::size_t size() const { return y_.size(); }
  std::size_t dim() const { return x_.size(); }

  std::span<const std::uint8_t> y() const { return y_; }
  std::span<const double> covariate(std::size_t k) const { return x_[k]; }
  double covariate(std::size_t i, std::size_t k) const { return x_[k][i]; }
  const std::vector<std::string>& covariate_names() const { return names_; }

  bool has_z() const { return !z_levels_.empty(); }
  bool has_w() const { return !w_levels_.empty(); }
  // Level counts are 1 when the instrument is absent, so (z, w) indices can
  // always be used as table coordinates.
  std::size_t z_level_count() const { return has_z() ? z_levels_.size() : 1; }
  std::size_t w_level_count() const { return has_w() ? w_levels_.size() : 1; }
  const std::vector<double>& z_levels() const { return z_levels_; }
  const std::vector<double>& w_levels() const { return w_levels_; }
  std::uint32_t z_at(std::size_t i) const { return has_z() ? z_idx_[i] : 0; }
  std::uint32_t w_at(std::size_t i) const { return has_w() ? w_idx_[i] : 0; }
  double z_value(std::size_t i) const { return z_levels_[z_idx_[i]]; }

  const std::optional<LatentOutcomes>& latent() const { return latent_; }

 private:
  friend Sample build_sample(SampleColumns columns);
  friend Sample with_latent(Sample sample, LatentOutcomes latent);

  std::vector<std::uint8_t> y_;
  std::vector<std::vector<double>> x_;
  std::vector<std::string> names_;
  std::vector<double> z_levels_;
  std::vector<std::uint32_t> z_idx_;
  std::vector<double> w_levels_;
  std::vector<std::uint32_t> w_idx_;
  std::optional<LatentOutcomes> latent_;
};

Sample build_sample(SampleColumns columns);
Sample build_sample(std::span<const Record> records,
                    std::optional<std::vector<double>> w_order = std::nullopt);
// Attaches simulation truth after checking the reporting identity row-wise.
Sample with_latent(Sample sample, LatentOutcomes latent);

// Axis-aligned cells over X~. Within a dimension a value v falls into bin b
// when cuts[b-1] <= v < cuts[b].
class Binning {
 public:
  Binning() = default;
  Binning(std::vector<std::vector<double>> cuts,
          std::vector<std::pair<double, double>> ranges,
          bool collapsed = false);

  std::size_t dim() const { return cuts_.size(); }
  std::size_t bins(std::size_t k) const { return cuts_[k].size() + 1; }
  std::size_t cell_count() const { return cell_count_; }
  const std::vector<double>& cuts(std::size_t k) const { return cuts_[k]; }
  // Observed covariate range of dimension k.
  std::pair<double, double> range(std::size_t k) const { return ranges_[k]; }
  bool collapsed_warning() const { return collapsed_; }

  std::size_t bin_of(std::size_t k, double v) const;
  std::size_t cell_of(std::span<const double> x) const;
  std::vector<std::size_t> assign(const Sample& sample) const;
  // Per-dimension bin indices of a flat cell id.
  std::vector<std::size_t> unflatten(std::size_t cell) const;
  std::pair<double, double> bin_range(std::size_t k, std::size_t b) const;
  std::string describe_cell(std::size_t cell) const;

 private:
  std::vector<std::vector<double>> cuts_;
  std::vector<std::pair<double, double>> ranges_;
  std::vector<std::size_t> strides_;
  std::size_t cell_count_ = 1;
  bool collapsed_ = false;
};

// Equal-mass cells per dimension. A dimension with at most `cells_per_dim`
// distinct values gets one cell per value; a constant dimension collapses to
// one cell and sets the warning flag.
Binning make_binning(const Sample& sample, std::size_t cells_per_dim);
Binning make_binning(const Sample& sample, std::span<const std::size_t> cells_per_dim);

struct ProbCell {
  double count = 0.0;  // observations (probability mass for population tables)
  double ones = 0.0;
  double p = 0.0;
  bool included = false;
};

// Reported-choice frequencies per (x~-cell, z, w) plus the view marginalised
// over w, i.e. p(x) with x = (x~-cell, z).
class CondProbTable {
 public:
  std::size_t cell_count() const { return cells_; }
  std::size_t z_count() const { return nz_; }
  std::size_t w_count() const { return nw_; }
  bool has_z() const { return has_z_; }
  bool has_w() const { return has_w_; }
  const std::vector<double>& z_levels() const { return z_levels_; }
  const std::vector<double>& w_levels() const { return w_levels_; }
  const Binning& binning() const { return binning_; }
  double min_cell_count() const { return min_count_; }

  const ProbCell& at(std::size_t cell, std::size_t z, std::size_t w) const {
    return full_[(cell * nz_ + z) * nw_ + w];
  }
  const ProbCell& marginal(std::size_t cell, std::size_t z) const {
    return marginal_[cell * nz_ + z];
  }
  std::size_t w_index_of(double w_value) const;
  std::size_t z_index_of(double z_value) const;
  double total_count() const;

  // Table of exact probabilities; `mass` weights the marginal view.
  static CondProbTable from_probabilities(Binning binning,
                                          std::vector<double> z_levels,
                                          std::vector<double> w_levels,
                                          bool has_z, bool has_w,
                                          std::span<const double> p,
                                          std::span<const double> mass);

 private:
  friend CondProbTable estimate_cond_prob(const Sample&, const Binning&,
                                          std::size_t);
  void finalize_marginal();

  Binning binning_;
  std::vector<double> z_levels_{0.0};
  std::vector<double> w_levels_{0.0};
  bool has_z_ = false;
  bool has_w_ = false;
  std::size_t cells_ = 0, nz_ = 1, nw_ = 1;
  double min_count_ = 0.0;
  std::vector<ProbCell> full_;
  std::vector<ProbCell> marginal_;
};

inline constexpr std::size_t kDefaultMinCellCount = 10;

CondProbTable estimate_cond_prob(const Sample& sample, const Binning& binning,
                                 std::size_t min_cell_count = kDefaultMinCellCount);

struct EnvelopeZCell {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t argmin = 0;
  std::size_t argmax = 0;
  bool defined = false;
};

// Inf and sup of p(x~, z) over the included z values of each x~-cell.
struct EnvelopeZ {
  std::vector<EnvelopeZCell> cells;
};

EnvelopeZ envelopes_z(const CondProbTable& table);

struct EnvelopeWEntry {
  double lower = 0.0;
  double upper = 0.0;
  bool defined = false;
};

// Running inf/sup of p_W(x, w~) over w~ <= w in the declared order.
class EnvelopeW {
 public:
  EnvelopeW(std::size_t cells, std::size_t nz, std::size_t nw,
            std::vector<double> w_levels)
      : cells_(cells), nz_(nz), nw_(nw), w_levels_(std::move(w_levels)),
        entries_(cells * nz * nw) {}

  const EnvelopeWEntry& at(std::size_t cell, std::size_t z, std::size_t w) const {
    return entries_[(cell * nz_ + z) * nw_ + w];
  }
  EnvelopeWEntry& at(std::size_t cell, std::size_t z, std::size_t w) {
    return entries_[(cell * nz_ + z) * nw_ + w];
  }
  // Lookup by W category value; throws DataError for unknown categories.
  const EnvelopeWEntry& at_value(std::size_t cell, std::size_t z, double w_value) const;
  std::size_t w_count() const { return nw_; }

 private:
  std::size_t cells_, nz_, nw_;
  std::vector<double> w_levels_;
  std::vector<EnvelopeWEntry> entries_;
};

EnvelopeW envelopes_w(const CondProbTable& table);

}  // namespace misreport
