#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lyapflow/types.hpp"

namespace lyapflow {

enum class CurveKind
{
  circle,
  two_moons,
  segment,
  s_curve,
  point ///< degenerate point-mass target (zero-length support)
};

enum class DensityKind
{
  uniform,
  table
};

std::string to_string(CurveKind kind);
CurveKind curve_kind_from_string(const std::string& name);

/// Shape parameters; each kind reads only the fields it needs.
struct ShapeParams
{
  double radius = 1.0;                      // circle, two_moons
  Eigen::Vector2d center{0.0, 0.0};         // circle, s_curve, point
  Eigen::Vector2d start{0.0, 0.0};          // segment
  Eigen::Vector2d end{1.0, 0.0};            // segment
  Eigen::Vector2d moon_offset{1.0, 0.5};    // center of the second (reflected) moon
  double scale = 1.0;                       // s_curve
};

/// Density along each arc as a function of the curve parameter s in [0, 1].
/// A table is sampled at equispaced s and interpolated linearly; it is
/// normalized against arc length when the manifold is built.
struct DensitySpec
{
  DensityKind kind = DensityKind::uniform;
  std::vector<double> table;
};

/// Planar parametrized arc s in [0, 1] -> R^2.
struct PlanarArc
{
  enum class Shape
  {
    line,
    circular,
    s_curve,
    point
  };

  Shape shape = Shape::line;
  Eigen::Vector2d a{0.0, 0.0}; // line start / circle center / s-curve center / point
  Eigen::Vector2d b{0.0, 0.0}; // line end
  double radius = 1.0;         // circle radius or s-curve scale
  double theta0 = 0.0;
  double theta1 = 0.0;

  Eigen::Vector2d eval(double s) const;
  Eigen::Vector2d deriv(double s) const;
};

/// A union of parametrized arcs embedded isometrically in R^D, carrying the
/// target measure q dgamma (q per unit arc length, total mass one).
/// Immutable after construction.
class CurveManifold
{
public:
  static CurveManifold build(CurveKind kind, const ShapeParams& params, int ambient_dim,
                             const DensitySpec& density = {});

  CurveKind kind() const { return kind_; }
  const ShapeParams& params() const { return params_; }
  const DensitySpec& density_spec() const { return density_; }
  int ambient_dim() const { return ambient_dim_; }
  int intrinsic_dim() const { return 1; }
  bool is_point() const { return kind_ == CurveKind::point; }
  std::size_t arc_count() const { return arcs_.size(); }
  const PlanarArc& arc(std::size_t j) const { return arcs_[j]; }

  /// Isometric lift R^2 -> R^D: x = lift * p. Orthonormal columns.
  const Mat& lift() const { return lift_; }
  Vec embed(const Eigen::Vector2d& p) const { return lift_ * p; }

  Vec point(std::size_t arc, double s) const;
  /// dGamma/ds in ambient coordinates.
  Vec derivative(std::size_t arc, double s) const;
  double speed(std::size_t arc, double s) const;
  /// Normalized density q at parameter s (per unit arc length).
  double density(std::size_t arc, double s) const;

  double arc_length(std::size_t arc) const { return lengths_[arc]; }
  double total_length() const;
  /// Probability mass carried by one arc.
  double arc_mass(std::size_t arc) const { return masses_[arc]; }
  /// Arc length from the start of the first arc to (arc, s), used as a
  /// global tangential coordinate.
  double arc_length_coordinate(std::size_t arc, double s) const;

  // Scan tables for projection (4096 samples per arc, endpoints included).
  static constexpr int kScanSamples = 4096;
  const Mat& scan_points(std::size_t arc) const { return scan_[arc]; }

  // Per-arc cumulative mass on a uniform parameter grid, used by sampling.
  const std::vector<double>& cdf_table(std::size_t arc) const { return cdf_[arc]; }

private:
  CurveManifold() = default;
  double raw_density(double s) const;

  CurveKind kind_ = CurveKind::circle;
  ShapeParams params_;
  DensitySpec density_;
  int ambient_dim_ = 2;
  std::vector<PlanarArc> arcs_;
  Mat lift_;
  double density_norm_ = 1.0;
  std::vector<double> lengths_;
  std::vector<double> masses_;
  std::vector<Mat> scan_;
  std::vector<std::vector<double>> cdf_;
};

struct Projection
{
  double dist = 0.0;
  std::size_t arc = 0;
  double s = 0.0;
  Vec foot;
  Vec tangent;              ///< unit tangent; zero when degenerate
  bool degenerate = false;  ///< no tangent exists (point target)
};

/// Nearest point on the manifold: coarse scan then golden-section refinement.
Projection project_to_manifold(const CurveManifold& m, const Vec& x);

/// n i.i.d. draws from q dgamma, as columns of a D x n matrix.
Mat sample_target(const CurveManifold& m, std::size_t n, std::uint64_t seed);

/// Fixed orthogonal D x 2 embedding used for lifted curves (identity for D = 2).
Mat isometric_lift(int ambient_dim);

} // namespace lyapflow
