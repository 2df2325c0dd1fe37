#include "lyapflow/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lyapflow/error.hpp"
#include "lyapflow/gauss_legendre.hpp"

namespace lyapflow {

double log_sum_exp(const std::vector<double>& v)
{
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v)
    mx = std::max(mx, x);
  if (!std::isfinite(mx))
    return mx;
  double acc = 0.0;
  for (double x : v)
    acc += std::exp(x - mx);
  return mx + std::log(acc);
}

QuadratureRule quadrature_nodes(const CurveManifold& m, int per_arc, int panel_order)
{
  if (per_arc < 2)
    throw ParameterError("quadrature needs at least 2 nodes per arc");
  if (panel_order < 1)
    throw ParameterError("panel order must be positive");

  QuadratureRule rule;
  const int D = m.ambient_dim();

  if (m.is_point()) {
    // two coincident nodes carrying half the mass each
    rule.panel_order = 2;
    rule.nodes = {{0, 0.0}, {0, 1.0}};
    rule.points.resize(D, 2);
    rule.points.col(0) = m.point(0, 0.0);
    rule.points.col(1) = m.point(0, 1.0);
    rule.tangents = Mat::Zero(D, 2);
    rule.log_weights = {std::log(0.5), std::log(0.5)};
    QuadraturePanel p;
    p.begin = 0;
    p.end = 2;
    p.center = rule.points.col(0);
    p.radius = 0.0;
    p.max_log_weight = std::log(0.5);
    rule.panels.push_back(p);
    return rule;
  }

  const int order = std::min(panel_order, per_arc);
  const int panels_per_arc = (per_arc + order - 1) / order;
  const auto gl = gauss_legendre(order);
  const std::size_t total = m.arc_count() * static_cast<std::size_t>(panels_per_arc) * order;

  rule.panel_order = order;
  rule.nodes.reserve(total);
  rule.points.resize(D, static_cast<Eigen::Index>(total));
  rule.tangents.resize(D, static_cast<Eigen::Index>(total));
  rule.log_weights.reserve(total);

  const double h = 1.0 / panels_per_arc;
  std::vector<double> panel_lengths;
  for (std::size_t j = 0; j < m.arc_count(); ++j) {
    for (int p = 0; p < panels_per_arc; ++p) {
      double plen = 0.0;
      for (int g = 0; g < order; ++g) {
        const double s = h * (p + 0.5 * (gl.nodes[g] + 1.0));
        const auto col = static_cast<Eigen::Index>(rule.nodes.size());
        rule.nodes.push_back({j, s});
        rule.points.col(col) = m.point(j, s);
        rule.tangents.col(col) = m.derivative(j, s);
        const double sp = m.speed(j, s);
        const double w = 0.5 * h * gl.weights[g] * sp * m.density(j, s);
        plen += 0.5 * h * gl.weights[g] * sp;
        rule.log_weights.push_back(w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity());
      }
      panel_lengths.push_back(plen);
    }
  }

  const double lse = log_sum_exp(rule.log_weights);
  for (double& lw : rule.log_weights)
    lw -= lse;

  const std::size_t n_panels = total / order;
  rule.panels.resize(n_panels);
  for (std::size_t p = 0; p < n_panels; ++p) {
    QuadraturePanel& panel = rule.panels[p];
    panel.begin = p * order;
    panel.end = panel.begin + order;
    const auto b = static_cast<Eigen::Index>(panel.begin);
    panel.center = rule.points.middleCols(b, order).rowwise().mean();
    panel.radius = 0.0;
    panel.max_log_weight = -std::numeric_limits<double>::infinity();
    for (std::size_t i = panel.begin; i < panel.end; ++i) {
      panel.radius = std::max(panel.radius, (rule.points.col(static_cast<Eigen::Index>(i)) - panel.center).norm());
      panel.max_log_weight = std::max(panel.max_log_weight, rule.log_weights[i]);
    }
    rule.max_panel_length = std::max(rule.max_panel_length, panel_lengths[p]);
  }
  return rule;
}

} // namespace lyapflow
