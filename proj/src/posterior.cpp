#include "lyapflow/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lyapflow/error.hpp"

namespace lyapflow {

namespace {

constexpr double kPruneNats = 46.0;

struct Scratch
{
  std::vector<std::size_t> active;
  std::vector<double> terms;
};

Scratch& scratch()
{
  thread_local Scratch s;
  return s;
}

} // namespace

PosteriorMoments posterior_moments(const Vec& x, double scale, double sigma, const QuadratureRule& rule,
                                   bool third)
{
  if (rule.size() == 0)
    throw ParameterError("empty quadrature rule");
  if (!(sigma > 0.0))
    throw SingularTimeError("posterior kernel width must be positive");
  const int D = rule.dim();
  if (x.size() != D)
    throw DimensionError("point dimension does not match the manifold");

  const double inv2s2 = 0.5 / (sigma * sigma);
  const double* px = x.data();
  const double* pts = rule.points.data();

  auto node_term = [&](std::size_t i) {
    const double* g = pts + i * D;
    double d2 = 0.0;
    for (int k = 0; k < D; ++k) {
      const double r = px[k] - scale * g[k];
      d2 += r * r;
    }
    return rule.log_weights[i] - d2 * inv2s2;
  };

  // Panel upper bounds on the log term.
  const std::size_t n_panels = rule.panels.size();
  Scratch& sc = scratch();
  sc.terms.resize(n_panels);
  std::size_t best_panel = 0;
  for (std::size_t p = 0; p < n_panels; ++p) {
    const QuadraturePanel& panel = rule.panels[p];
    double dc2 = 0.0;
    const double* c = panel.center.data();
    for (int k = 0; k < D; ++k) {
      const double r = px[k] - scale * c[k];
      dc2 += r * r;
    }
    const double lb = std::max(0.0, std::sqrt(dc2) - std::abs(scale) * panel.radius);
    sc.terms[p] = panel.max_log_weight - lb * lb * inv2s2;
    if (sc.terms[p] > sc.terms[best_panel])
      best_panel = p;
  }
  double ref = -std::numeric_limits<double>::infinity();
  for (std::size_t i = rule.panels[best_panel].begin; i < rule.panels[best_panel].end; ++i)
    ref = std::max(ref, node_term(i));

  sc.active.clear();
  for (std::size_t p = 0; p < n_panels; ++p)
    if (sc.terms[p] >= ref - kPruneNats)
      for (std::size_t i = rule.panels[p].begin; i < rule.panels[p].end; ++i)
        sc.active.push_back(i);

  sc.terms.resize(sc.active.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < sc.active.size(); ++a) {
    sc.terms[a] = node_term(sc.active[a]);
    mx = std::max(mx, sc.terms[a]);
  }

  PosteriorMoments out;
  out.mean = Vec::Zero(D);
  out.cov = Mat::Zero(D, D);
  double sumw = 0.0;
  for (std::size_t a = 0; a < sc.active.size(); ++a) {
    const double w = std::exp(sc.terms[a] - mx);
    sc.terms[a] = w;
    sumw += w;
    const double* g = pts + sc.active[a] * D;
    for (int k = 0; k < D; ++k)
      out.mean(k) += w * g[k];
  }
  out.mean /= sumw;
  out.log_Z = mx + std::log(sumw) - 0.5 * D * std::log(2.0 * std::numbers::pi * sigma * sigma);

  Vec delta(D);
  if (third)
    out.third = Tensor3(D);
  for (std::size_t a = 0; a < sc.active.size(); ++a) {
    const double w = sc.terms[a] / sumw;
    const double* g = pts + sc.active[a] * D;
    for (int k = 0; k < D; ++k)
      delta(k) = g[k] - out.mean(k);
    for (int i = 0; i < D; ++i)
      for (int j = 0; j <= i; ++j)
        out.cov(i, j) += w * delta(i) * delta(j);
    if (third)
      for (int i = 0; i < D; ++i)
        for (int j = 0; j < D; ++j)
          for (int k = 0; k < D; ++k)
            out.third(i, j, k) += w * delta(i) * delta(j) * delta(k);
  }
  for (int i = 0; i < D; ++i)
    for (int j = i + 1; j < D; ++j)
      out.cov(i, j) = out.cov(j, i);
  out.has_third = third;
  return out;
}

PosteriorMoments posterior_moments(const Vec& x, double t, const QuadratureRule& rule,
                                   const NoiseSchedule& schedule, bool third)
{
  if (!(t > 0.0))
    throw SingularTimeError("posterior moments need t > 0");
  return posterior_moments(x, schedule.mean_scale(t), schedule.sigma(t), rule, third);
}

QuadratureLadder::QuadratureLadder(const CurveManifold& m, const QuadratureOptions& options)
  : options_(options)
{
  if (options.min_nodes_per_arc < 2 || options.max_nodes_per_arc < options.min_nodes_per_arc)
    throw ParameterError("invalid quadrature node bounds");
  if (!(options.resolution > 0.0))
    throw ParameterError("quadrature resolution must be positive");
  if (m.is_point()) {
    rules_.push_back(quadrature_nodes(m, 2, 2));
    return;
  }
  for (int n = options.min_nodes_per_arc;; n *= 2) {
    rules_.push_back(quadrature_nodes(m, std::min(n, options.max_nodes_per_arc), options.panel_order));
    if (n >= options.max_nodes_per_arc)
      break;
  }
}

const QuadratureRule& QuadratureLadder::select(double scale, double sigma) const
{
  for (const auto& rule : rules_)
    if (rule.max_panel_length * std::abs(scale) <= options_.resolution * sigma)
      return rule;
  return rules_.back();
}

} // namespace lyapflow
