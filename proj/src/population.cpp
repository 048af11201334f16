#include <gsl/gsl_integration.h>

#include <algorithm>
#include <limits>
#include <memory>
#include <sstream>

#include "misreport/errors.hpp"
#include "misreport/sim.hpp"

namespace misreport {

namespace {

struct GlTable {
  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> t;
  explicit GlTable(std::size_t n)
      : t(gsl_integration_glfixed_table_alloc(n), &gsl_integration_glfixed_table_free) {
    if (!t) throw ConfigError("quadrature table allocation failed");
  }
  // Nodes and weights on [a, b]; the weights sum to b - a.
  void node(double a, double b, std::size_t i, double& x, double& w) const {
    gsl_integration_glfixed_point(a, b, i, &x, &w, t.get());
  }
};

Binning equal_width(std::size_t cells) {
  std::vector<double> cuts;
  for (std::size_t k = 1; k < cells; ++k) cuts.push_back(-1.0 + 2.0 * double(k) / double(cells));
  return Binning({cuts}, {{-1.0, 1.0}});
}

double index_at(Design d, double xt, double z) {
  const auto b = true_beta(d);
  return d == Design::w_design ? b[0] + b[1] * xt : b[0] + b[1] * xt + b[2] * z;
}

}  // namespace

PopulationTable population_table(Design d, ErrorLaw e, std::size_t cells, std::size_t nodes) {
  if (cells == 0 || nodes == 0) throw ConfigError("population table needs cells and nodes");
  const bool has_z = d != Design::w_design, has_w = d != Design::z_design;
  const std::vector<double> zs = has_z ? z_support() : std::vector<double>{0.0};
  const std::vector<double> ws = has_w ? w_support(d) : std::vector<double>{0.0};
  const auto link = error_link(e);
  GlTable gl(nodes);
  PopulationTable out;
  out.design = d;
  out.error = e;
  std::vector<double> p(cells * zs.size() * ws.size()), mass(p.size(), 1.0);
  out.p_star.assign(cells, std::vector<double>(zs.size(), 0.0));
  for (std::size_t c = 0; c < cells; ++c) {
    const double a = -1.0 + 2.0 * double(c) / double(cells);
    const double b = -1.0 + 2.0 * double(c + 1) / double(cells);
    out.cell_lower.push_back(a);
    out.cell_upper.push_back(b);
    for (std::size_t z = 0; z < zs.size(); ++z)
      for (std::size_t i = 0; i < nodes; ++i) {
        double xt, wt;
        gl.node(a, b, i, xt, wt);
        const double ps = link(index_at(d, xt, zs[z]));
        out.p_star[c][z] += wt * ps / (b - a);
        for (std::size_t w = 0; w < ws.size(); ++w) {
          const auto r = design_rates(d, xt, ws[w]);
          p[(c * zs.size() + z) * ws.size() + w] +=
              wt * ((1.0 - r.alpha1) * ps + r.alpha0 * (1.0 - ps)) / (b - a);
        }
      }
  }
  out.table = CondProbTable::from_probabilities(equal_width(cells), has_z ? zs : std::vector<double>{},
                                                has_w ? ws : std::vector<double>{}, has_z, has_w, p,
                                                mass);
  return out;
}

double PopulationMoments::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : expectations) m = std::min({m, e[0], e[1]});
  return m;
}

PopulationMoments population_moments(Design d, ErrorLaw e, const ModelSpec& model,
                                     std::span<const double> beta, std::size_t cells,
                                     std::size_t nodes) {
  if (d == Design::two_instruments)
    throw ConfigError("population moments cover the Z and W designs");
  const bool z_mode = d == Design::z_design;
  const std::vector<double>& levels = z_mode ? z_support() : w_support(d);
  if (beta.size() != (z_mode ? 3u : 2u)) throw ConfigError("coefficient dimension mismatch");
  const auto truth = error_link(e);
  GlTable gl(nodes);
  PopulationMoments out;
  out.model = model.kind == ModelKind::parametric ? "parametric" : "semiparametric";
  std::vector<double> p(levels.size()), lo(levels.size()), hi(levels.size());
  for (std::size_t c = 0; c < cells; ++c) {
    const double a = -1.0 + 2.0 * double(c) / double(cells);
    const double b = -1.0 + 2.0 * double(c + 1) / double(cells);
    std::vector<std::array<double, 2>> acc(levels.size(), {0.0, 0.0});
    for (std::size_t i = 0; i < nodes; ++i) {
      double xt, wt;
      gl.node(a, b, i, xt, wt);
      // reported probabilities at this x~ across the instrument levels
      for (std::size_t l = 0; l < levels.size(); ++l) {
        const double ps = truth(index_at(d, xt, z_mode ? levels[l] : 0.0));
        const auto r = design_rates(d, xt, z_mode ? 0.0 : levels[l]);
        p[l] = (1.0 - r.alpha1) * ps + r.alpha0 * (1.0 - ps);
      }
      if (z_mode) {
        const auto [mn, mx] = std::minmax_element(p.begin(), p.end());
        std::fill(lo.begin(), lo.end(), *mn);
        std::fill(hi.begin(), hi.end(), *mx);
      } else {
        for (std::size_t l = 0; l < levels.size(); ++l) {
          lo[l] = l ? std::min(lo[l - 1], p[l]) : p[l];
          hi[l] = l ? std::max(hi[l - 1], p[l]) : p[l];
        }
      }
      for (std::size_t l = 0; l < levels.size(); ++l) {
        Observation o{p[l], {1.0, xt}, hi[l], lo[l]};
        if (z_mode) o.x.push_back(levels[l]);
        // the moments are linear in y, so E[g | x] is g evaluated at y = p(x)
        const auto g = model.kind == ModelKind::parametric
                           ? moment_parametric(o, beta, model.link)
                           : moment_semiparametric(o, beta);
        acc[l][0] += wt * g[0] / (b - a);
        acc[l][1] += wt * g[1] / (b - a);
      }
    }
    for (std::size_t l = 0; l < levels.size(); ++l) {
      out.expectations.push_back(acc[l]);
      std::ostringstream os;
      os << "x~ in [" << a << ", " << b << ") " << (z_mode ? "z=" : "w=") << levels[l];
      out.cell_labels.push_back(os.str());
    }
  }
  return out;
}

}  // namespace misreport
