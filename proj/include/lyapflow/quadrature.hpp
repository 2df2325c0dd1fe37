#pragma once

#include <vector>

#include "lyapflow/manifold.hpp"

namespace lyapflow {

struct QuadratureNode
{
  std::size_t arc;
  double s;
};

/// Contiguous block of nodes sharing one Gauss-Legendre panel, with a
/// bounding ball used to skip negligible panels in posterior sums.
struct QuadraturePanel
{
  std::size_t begin = 0;
  std::size_t end = 0;
  Vec center;
  double radius = 0.0;
  double max_log_weight = 0.0;
};

/// Composite Gauss-Legendre rule over arc length, weights include
/// |Gamma'(s)| q(s) and are normalized in the log domain.
struct QuadratureRule
{
  std::vector<QuadratureNode> nodes;
  Mat points;   ///< D x N
  Mat tangents; ///< D x N, Gamma'(s)
  std::vector<double> log_weights;
  std::vector<QuadraturePanel> panels;
  int panel_order = 8;
  /// Largest panel extent in ambient units; drives resolution selection.
  double max_panel_length = 0.0;

  std::size_t size() const { return nodes.size(); }
  int dim() const { return static_cast<int>(points.rows()); }
};

/// At least per_arc nodes on each arc (rounded up to whole panels).
QuadratureRule quadrature_nodes(const CurveManifold& m, int per_arc, int panel_order = 8);

double log_sum_exp(const std::vector<double>& v);

} // namespace lyapflow
