#include "doctest.h"

#include <cmath>
#include <numbers>

#include "lyapflow/error.hpp"
#include "lyapflow/gauss_legendre.hpp"
#include "lyapflow/quadrature.hpp"
#include "support.hpp"

using namespace lyapflow;
using testing_support::make_manifold;

namespace {

double polyline_length(const CurveManifold& m, std::size_t arc, int n)
{
  double L = 0.0;
  Vec prev = m.point(arc, 0.0);
  for (int i = 1; i <= n; ++i) {
    const Vec p = m.point(arc, static_cast<double>(i) / n);
    L += (p - prev).norm();
    prev = p;
  }
  return L;
}

} // namespace

TEST_SUITE("manifold")
{
  TEST_CASE("gauss-legendre integrates polynomials of degree 2n-1 exactly")
  {
    for (int n : {1, 2, 5, 8, 16}) {
      const GaussLegendre gl = gauss_legendre(n);
      for (int p = 0; p <= 2 * n - 1; ++p) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
          s += gl.weights[i] * std::pow(gl.nodes[i], p);
        const double exact = (p % 2 == 1) ? 0.0 : 2.0 / (p + 1);
        CHECK(s == doctest::Approx(exact).epsilon(1e-13));
      }
    }
  }

  TEST_CASE("arc lengths")
  {
    ShapeParams p;
    p.radius = 1.5;
    CHECK(make_manifold(CurveKind::circle, 2, p)->total_length() ==
          doctest::Approx(2 * std::numbers::pi * 1.5).epsilon(1e-12));
    CHECK(make_manifold(CurveKind::two_moons)->total_length() == doctest::Approx(2 * std::numbers::pi).epsilon(1e-12));
    ShapeParams seg;
    seg.start = {-1, 2};
    seg.end = {2, -2};
    CHECK(make_manifold(CurveKind::segment, 3, seg)->total_length() == doctest::Approx(5.0).epsilon(1e-12));
    auto s = make_manifold(CurveKind::s_curve);
    CHECK(s->total_length() == doctest::Approx(polyline_length(*s, 0, 200000)).epsilon(1e-8));
  }

  TEST_CASE("lift has orthonormal columns and is the identity in the plane")
  {
    CHECK((isometric_lift(2) - Mat::Identity(2, 2)).norm() == 0.0);
    for (int D : {3, 10}) {
      const Mat L = isometric_lift(D);
      CHECK((L.transpose() * L - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
    }
  }

  TEST_CASE("lifting preserves lengths and distances")
  {
    auto m2 = make_manifold(CurveKind::two_moons, 2);
    auto m10 = make_manifold(CurveKind::two_moons, 10);
    CHECK(m10->total_length() == doctest::Approx(m2->total_length()).epsilon(1e-12));
    const Eigen::Vector2d q(0.3, -0.7);
    CHECK(project_to_manifold(*m10, m10->embed(q)).dist ==
          doctest::Approx(project_to_manifold(*m2, m2->embed(q)).dist).epsilon(1e-10));
  }

  TEST_CASE("two moons geometry")
  {
    auto m = make_manifold(CurveKind::two_moons);
    REQUIRE(m->arc_count() == 2);
    CHECK((m->point(0, 0.0) - Vec(Eigen::Vector2d(1, 0))).norm() < 1e-15);
    CHECK((m->point(0, 1.0) - Vec(Eigen::Vector2d(-1, 0))).norm() < 1e-15);
    CHECK((m->point(1, 0.5) - Vec(Eigen::Vector2d(1, -0.5))).norm() < 1e-15);
    CHECK(m->arc_mass(0) == doctest::Approx(0.5));
  }

  TEST_CASE("uniform density integrates to one")
  {
    for (CurveKind k : {CurveKind::circle, CurveKind::two_moons, CurveKind::segment, CurveKind::s_curve}) {
      auto m = make_manifold(k);
      const QuadratureRule r = quadrature_nodes(*m, 256);
      double total = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i)
        total += std::exp(r.log_weights[i]);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(m->density(0, 0.3) * m->total_length() == doctest::Approx(1.0).epsilon(1e-10));
    }
  }

  TEST_CASE("tabulated density is normalized against arc length")
  {
    DensitySpec d;
    d.kind = DensityKind::table;
    d.table = {1.0, 3.0};
    auto m = std::make_shared<const CurveManifold>(CurveManifold::build(CurveKind::segment, ShapeParams{}, 2, d));
    // q(s) proportional to 1 + 2 s on a unit segment: normalized q = (1 + 2 s) / 2
    CHECK(m->density(0, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m->density(0, 1.0) == doctest::Approx(1.5).epsilon(1e-12));
    const Mat x = sample_target(*m, 200000, 5);
    CHECK(x.row(0).mean() == doctest::Approx(7.0 / 12.0).epsilon(5e-3));
  }

  TEST_CASE("projection onto a circle")
  {
    ShapeParams p;
    p.radius = 2.0;
    auto m = make_manifold(CurveKind::circle, 2, p);
    for (double ang : {0.1, 1.3, 2.9, -2.0}) {
      for (double r : {0.5, 1.9, 3.7}) {
        const Vec x = Eigen::Vector2d(r * std::cos(ang), r * std::sin(ang));
        const Projection pr = project_to_manifold(*m, x);
        CHECK(pr.dist == doctest::Approx(std::abs(2.0 - r)).epsilon(1e-10));
        CHECK(std::abs(pr.tangent.dot(x)) < 1e-6 * r);
        CHECK(pr.tangent.norm() == doctest::Approx(1.0));
      }
    }
  }

  TEST_CASE("projection onto a segment and the degenerate point target")
  {
    auto seg = make_manifold(CurveKind::segment);
    const Projection a = project_to_manifold(*seg, Vec(Eigen::Vector2d(0.25, 0.4)));
    CHECK(a.dist == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(std::abs(a.s - 0.25) < 1e-7);
    const Projection b = project_to_manifold(*seg, Vec(Eigen::Vector2d(-3, 4)));
    CHECK(b.dist == doctest::Approx(5.0).epsilon(1e-12));

    ShapeParams p;
    p.center = {0.5, -1.0};
    auto pt = make_manifold(CurveKind::point, 2, p);
    const Projection c = project_to_manifold(*pt, Vec(Eigen::Vector2d(0.5, 1.0)));
    CHECK(c.degenerate);
    CHECK(c.dist == doctest::Approx(2.0));
    CHECK(c.tangent.norm() == 0.0);
  }

  TEST_CASE("equidistant points resolve to the first scanned foot")
  {
    auto m = make_manifold(CurveKind::circle);
    const Projection pr = project_to_manifold(*m, Vec::Zero(2));
    CHECK(pr.dist == doctest::Approx(1.0));
    CHECK(pr.arc == 0);
    CHECK(pr.s == 0.0);
  }

  TEST_CASE("target samples lie on the curve and split by arc mass")
  {
    auto m = make_manifold(CurveKind::two_moons, 4);
    const Mat x = sample_target(*m, 4000, 11);
    int upper = 0;
    const Mat L = m->lift();
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      CHECK(project_to_manifold(*m, x.col(i)).dist < 1e-9);
      const Eigen::Vector2d p = L.transpose() * x.col(i);
      // the upper moon is centered at the origin
      upper += std::abs(p.norm() - 1.0) < 1e-9 && p.y() >= -1e-12;
    }
    CHECK(upper / 4000.0 == doctest::Approx(0.5).epsilon(0.06));
    CHECK((sample_target(*m, 10, 11) - x.leftCols(10)).norm() == 0.0);
  }

  TEST_CASE("invalid constructions")
  {
    CHECK_THROWS_AS(CurveManifold::build(CurveKind::circle, ShapeParams{}, 1), DimensionError);
    ShapeParams p;
    p.radius = -1.0;
    CHECK_THROWS_AS(CurveManifold::build(CurveKind::circle, p, 2), ParameterError);
    ShapeParams seg;
    seg.end = seg.start;
    CHECK_THROWS_AS(CurveManifold::build(CurveKind::segment, seg, 2), ParameterError);
    CHECK_THROWS_AS(curve_kind_from_string("torus"), ParameterError);
    CHECK_THROWS_AS(quadrature_nodes(*make_manifold(CurveKind::circle), 1), ParameterError);
  }
}
