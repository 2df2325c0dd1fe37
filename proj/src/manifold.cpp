#include "lyapflow/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lyapflow/error.hpp"
#include "lyapflow/gauss_legendre.hpp"
#include "lyapflow/rng.hpp"

namespace lyapflow {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kLengthPanels = 256;
constexpr int kCdfIntervals = 4096;

} // namespace

std::string to_string(CurveKind kind)
{
  switch (kind) {
  case CurveKind::circle: return "circle";
  case CurveKind::two_moons: return "two_moons";
  case CurveKind::segment: return "segment";
  case CurveKind::s_curve: return "s_curve";
  case CurveKind::point: return "point";
  }
  return "unknown";
}

CurveKind curve_kind_from_string(const std::string& name)
{
  if (name == "circle") return CurveKind::circle;
  if (name == "two_moons") return CurveKind::two_moons;
  if (name == "segment") return CurveKind::segment;
  if (name == "s_curve") return CurveKind::s_curve;
  if (name == "point") return CurveKind::point;
  throw ParameterError("unknown curve kind '" + name + "'");
}

Eigen::Vector2d PlanarArc::eval(double s) const
{
  switch (shape) {
  case Shape::line: return a + s * (b - a);
  case Shape::circular: {
    const double th = theta0 + s * (theta1 - theta0);
    return a + radius * Eigen::Vector2d(std::cos(th), std::sin(th));
  }
  case Shape::s_curve: {
    const double t = 3.0 * kPi * (s - 0.5);
    const double sg = (t > 0.0) - (t < 0.0);
    return a + radius * Eigen::Vector2d(std::sin(t), sg * (std::cos(t) - 1.0));
  }
  case Shape::point: return a;
  }
  return a;
}

Eigen::Vector2d PlanarArc::deriv(double s) const
{
  switch (shape) {
  case Shape::line: return b - a;
  case Shape::circular: {
    const double dth = theta1 - theta0;
    const double th = theta0 + s * dth;
    return radius * dth * Eigen::Vector2d(-std::sin(th), std::cos(th));
  }
  case Shape::s_curve: {
    const double t = 3.0 * kPi * (s - 0.5);
    const double sg = (t > 0.0) - (t < 0.0);
    return radius * 3.0 * kPi * Eigen::Vector2d(std::cos(t), -sg * std::sin(t));
  }
  case Shape::point: return Eigen::Vector2d::Zero();
  }
  return Eigen::Vector2d::Zero();
}

Mat isometric_lift(int ambient_dim)
{
  if (ambient_dim == 2)
    return Mat::Identity(2, 2);
  // Fixed draw: the embedding is part of the target definition, not of a run.
  CounterRng rng(0x6c69667400000001ull, 0);
  Mat g(ambient_dim, ambient_dim);
  for (int j = 0; j < ambient_dim; ++j)
    for (int i = 0; i < ambient_dim; ++i)
      g(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(ambient_dim, 2);
  return q;
}

CurveManifold CurveManifold::build(CurveKind kind, const ShapeParams& params, int ambient_dim,
                                   const DensitySpec& density)
{
  if (ambient_dim < 2)
    throw DimensionError("ambient dimension must be at least 2, got " + std::to_string(ambient_dim));

  CurveManifold m;
  m.kind_ = kind;
  m.params_ = params;
  m.density_ = density;
  m.ambient_dim_ = ambient_dim;
  m.lift_ = isometric_lift(ambient_dim);

  auto circ = [](Eigen::Vector2d c, double r, double t0, double t1) {
    PlanarArc arc;
    arc.shape = PlanarArc::Shape::circular;
    arc.a = c;
    arc.radius = r;
    arc.theta0 = t0;
    arc.theta1 = t1;
    return arc;
  };

  switch (kind) {
  case CurveKind::circle:
    if (!(params.radius > 0.0))
      throw ParameterError("circle radius must be positive");
    m.arcs_.push_back(circ(params.center, params.radius, 0.0, 2.0 * kPi));
    break;
  case CurveKind::two_moons:
    if (!(params.radius > 0.0))
      throw ParameterError("moon radius must be positive");
    m.arcs_.push_back(circ(Eigen::Vector2d(0.0, 0.0), params.radius, 0.0, kPi));
    m.arcs_.push_back(circ(params.moon_offset, params.radius, kPi, 2.0 * kPi));
    break;
  case CurveKind::segment: {
    if (!((params.end - params.start).norm() > 0.0))
      throw ParameterError("segment endpoints must differ");
    PlanarArc arc;
    arc.shape = PlanarArc::Shape::line;
    arc.a = params.start;
    arc.b = params.end;
    m.arcs_.push_back(arc);
    break;
  }
  case CurveKind::s_curve: {
    if (!(params.scale > 0.0))
      throw ParameterError("s-curve scale must be positive");
    PlanarArc arc;
    arc.shape = PlanarArc::Shape::s_curve;
    arc.a = params.center;
    arc.radius = params.scale;
    m.arcs_.push_back(arc);
    break;
  }
  case CurveKind::point: {
    PlanarArc arc;
    arc.shape = PlanarArc::Shape::point;
    arc.a = params.center;
    m.arcs_.push_back(arc);
    break;
  }
  }

  if (density.kind == DensityKind::table) {
    if (density.table.size() < 2)
      throw ParameterError("density table needs at least two entries");
    for (double v : density.table)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ParameterError("density table entries must be finite and nonnegative");
  }

  const auto gl = gauss_legendre(8);
  const std::size_t n_arcs = m.arcs_.size();
  m.lengths_.assign(n_arcs, 0.0);
  m.masses_.assign(n_arcs, 0.0);
  m.scan_.resize(n_arcs);
  m.cdf_.resize(n_arcs);

  if (m.is_point()) {
    m.masses_[0] = 1.0;
    m.scan_[0] = m.embed(m.arcs_[0].a);
    m.cdf_[0] = {0.0, 1.0};
    return m;
  }

  // Arc lengths and raw mass; check the parametrization is regular at the nodes.
  double raw_total = 0.0;
  std::vector<double> raw_mass(n_arcs, 0.0);
  for (std::size_t j = 0; j < n_arcs; ++j) {
    double len = 0.0, mass = 0.0;
    const double h = 1.0 / kLengthPanels;
    for (int p = 0; p < kLengthPanels; ++p) {
      for (std::size_t g = 0; g < gl.nodes.size(); ++g) {
        const double s = h * (p + 0.5 * (gl.nodes[g] + 1.0));
        const double sp = m.arcs_[j].deriv(s).norm();
        if (!(sp > 0.0))
          throw ParameterError("curve derivative vanishes at s = " + std::to_string(s));
        len += 0.5 * h * gl.weights[g] * sp;
        mass += 0.5 * h * gl.weights[g] * sp * m.raw_density(s);
      }
    }
    m.lengths_[j] = len;
    raw_mass[j] = mass;
    raw_total += mass;
  }
  if (!(raw_total > 0.0))
    throw ParameterError("density has zero total mass");
  m.density_norm_ = raw_total;
  for (std::size_t j = 0; j < n_arcs; ++j)
    m.masses_[j] = raw_mass[j] / raw_total;

  // Projection scan tables and sampling CDFs.
  const auto gl4 = gauss_legendre(4);
  for (std::size_t j = 0; j < n_arcs; ++j) {
    Mat& scan = m.scan_[j];
    scan.resize(ambient_dim, kScanSamples);
    for (int i = 0; i < kScanSamples; ++i)
      scan.col(i) = m.point(j, static_cast<double>(i) / (kScanSamples - 1));

    auto& cdf = m.cdf_[j];
    cdf.assign(kCdfIntervals + 1, 0.0);
    const double h = 1.0 / kCdfIntervals;
    for (int i = 0; i < kCdfIntervals; ++i) {
      double seg = 0.0;
      for (std::size_t g = 0; g < gl4.nodes.size(); ++g) {
        const double s = h * (i + 0.5 * (gl4.nodes[g] + 1.0));
        seg += 0.5 * h * gl4.weights[g] * m.speed(j, s) * m.density(j, s);
      }
      cdf[i + 1] = cdf[i] + seg;
    }
  }
  return m;
}

double CurveManifold::raw_density(double s) const
{
  if (density_.kind == DensityKind::uniform)
    return 1.0;
  const auto& t = density_.table;
  const double pos = std::clamp(s, 0.0, 1.0) * static_cast<double>(t.size() - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(pos), t.size() - 2);
  const double f = pos - static_cast<double>(i);
  return (1.0 - f) * t[i] + f * t[i + 1];
}

Vec CurveManifold::point(std::size_t arc, double s) const
{
  return lift_ * arcs_[arc].eval(s);
}

Vec CurveManifold::derivative(std::size_t arc, double s) const
{
  return lift_ * arcs_[arc].deriv(s);
}

double CurveManifold::speed(std::size_t arc, double s) const
{
  // the lift is isometric, so the planar speed is exact
  return arcs_[arc].deriv(s).norm();
}

double CurveManifold::density(std::size_t /*arc*/, double s) const
{
  if (is_point())
    return 1.0;
  return raw_density(s) / density_norm_;
}

double CurveManifold::total_length() const
{
  double l = 0.0;
  for (double v : lengths_)
    l += v;
  return l;
}

double CurveManifold::arc_length_coordinate(std::size_t arc, double s) const
{
  double offset = 0.0;
  for (std::size_t j = 0; j < arc; ++j)
    offset += lengths_[j];
  if (is_point())
    return 0.0;
  const PlanarArc& a = arcs_[arc];
  if (a.shape == PlanarArc::Shape::line || a.shape == PlanarArc::Shape::circular ||
      a.shape == PlanarArc::Shape::s_curve)
    return offset + s * lengths_[arc]; // constant-speed parametrizations
  return offset;
}

Projection project_to_manifold(const CurveManifold& m, const Vec& x)
{
  Projection best;
  best.dist = std::numeric_limits<double>::infinity();

  if (m.is_point()) {
    best.foot = m.point(0, 0.0);
    best.dist = (x - best.foot).norm();
    best.tangent = Vec::Zero(m.ambient_dim());
    best.degenerate = true;
    return best;
  }

  constexpr int n = CurveManifold::kScanSamples;
  for (std::size_t j = 0; j < m.arc_count(); ++j) {
    const Mat& scan = m.scan_points(j);
    int imin = 0;
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const double d = (scan.col(i) - x).squaredNorm();
      // near-ties within rounding keep the earlier node
      if (d < dmin * (1.0 - 1e-12)) {
        dmin = d;
        imin = i;
      }
    }

    // golden-section refinement in the bracket around the coarse minimum
    double lo = static_cast<double>(std::max(imin - 1, 0)) / (n - 1);
    double hi = static_cast<double>(std::min(imin + 1, n - 1)) / (n - 1);
    auto f = [&](double s) { return (m.point(j, s) - x).squaredNorm(); };
    constexpr double g = 0.6180339887498949;
    double c = hi - g * (hi - lo);
    double d = lo + g * (hi - lo);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 40; ++it) {
      if (fc < fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - g * (hi - lo);
        fc = f(c);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + g * (hi - lo);
        fd = f(d);
      }
    }
    double s_best = static_cast<double>(imin) / (n - 1);
    double d_best = dmin;
    const double s_ref = 0.5 * (lo + hi);
    const double d_ref = f(s_ref);
    // keep the scan node unless refinement strictly improves on it
    if (d_ref < d_best * (1.0 - 1e-12)) {
      s_best = s_ref;
      d_best = d_ref;
    }
    const double dist = std::sqrt(d_best);
    if (dist < best.dist * (1.0 - 1e-12)) {
      best.dist = dist;
      best.arc = j;
      best.s = s_best;
    }
  }
  best.foot = m.point(best.arc, best.s);
  best.dist = (x - best.foot).norm();
  Vec t = m.derivative(best.arc, best.s);
  best.tangent = t / t.norm();
  return best;
}

Mat sample_target(const CurveManifold& m, std::size_t n, std::uint64_t seed)
{
  Mat out(m.ambient_dim(), static_cast<Eigen::Index>(n));
  double total = 0.0;
  for (std::size_t j = 0; j < m.arc_count(); ++j)
    total += m.cdf_table(j).back();

  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(seed, i, Stream::target_sample);
    if (m.is_point()) {
      out.col(static_cast<Eigen::Index>(i)) = m.point(0, 0.0);
      continue;
    }
    double u = rng.uniform() * total;
    std::size_t arc = 0;
    while (arc + 1 < m.arc_count() && u >= m.cdf_table(arc).back()) {
      u -= m.cdf_table(arc).back();
      ++arc;
    }
    const auto& cdf = m.cdf_table(arc);
    const double target = std::min(u, cdf.back());
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cdf.begin() - 1, 0));
    k = std::min(k, cdf.size() - 2);
    const double width = cdf[k + 1] - cdf[k];
    const double frac = width > 0.0 ? (target - cdf[k]) / width : 0.0;
    const double s = (static_cast<double>(k) + frac) / static_cast<double>(cdf.size() - 1);
    out.col(static_cast<Eigen::Index>(i)) = m.point(arc, std::clamp(s, 0.0, 1.0));
  }
  return out;
}

} // namespace lyapflow
