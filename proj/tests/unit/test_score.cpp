#include "doctest.h"

#include <cmath>
#include <numbers>

#include "lyapflow/error.hpp"
#include "lyapflow/fields.hpp"
#include "support.hpp"

using namespace lyapflow;
using testing_support::make_manifold;

namespace {

double max_rel(const Mat& a, const Mat& b)
{
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

Mat fd_jacobian(const ScoreField& f, const Vec& x, double t)
{
  const int D = f.dim();
  const double h = 1e-5 * (1.0 + x.norm());
  Mat J(D, D);
  for (int k = 0; k < D; ++k) {
    Vec xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    J.col(k) = (f.score(xp, t) - f.score(xm, t)) / (2 * h);
  }
  return J;
}

} // namespace

TEST_SUITE("schedule")
{
  TEST_CASE("mean scale matches the closed cosine ratio")
  {
    NoiseSchedule s;
    const double d = 0.008;
    auto f = [&](double t) {
      const double c = std::cos(0.5 * std::numbers::pi * (t + d) / (1 + d));
      return c * c;
    };
    CHECK(std::abs(s.mean_scale(0.0) - 1.0) < 1e-12);
    for (double t : {1e-6, 0.000225, 0.01, 0.3, 0.5, 0.9})
      CHECK(std::abs(s.mean_scale(t) - f(t) / f(0)) < 1e-10);
  }

  TEST_CASE("beta is minus the derivative of log m")
  {
    NoiseSchedule s;
    for (double t : {0.1, 0.5, 0.85}) {
      const double h = 1e-5;
      const double fd = -(s.log_mean_scale(t + h) - s.log_mean_scale(t - h)) / (2 * h);
      CHECK(std::abs(fd - cosine_beta(t, 0.008)) < 1e-8 * cosine_beta(t, 0.008) + 1e-9);
    }
  }

  TEST_CASE("closed-form value at t = 0")
  {
    const double u = 0.5 * std::numbers::pi * 0.008 / 1.008;
    CHECK(cosine_beta(0.0, 0.008) == doctest::Approx(std::numbers::pi / 1.008 * std::tan(u)).epsilon(1e-14));
    CHECK(cosine_beta(0.0, 0.008) > 0.0);
  }

  TEST_CASE("monotonicity and positivity on the window")
  {
    NoiseSchedule s;
    double pm = 2.0, ps = -1.0;
    for (int i = 0; i <= 900; ++i) {
      const double t = i * 1e-3;
      REQUIRE(s.mean_scale(t) < pm);
      REQUIRE(s.sigma(t) > ps);
      if (t > 0)
        REQUIRE(s.beta(t) > 0.0);
      pm = s.mean_scale(t);
      ps = s.sigma(t);
    }
    CHECK(s.beta(0.9) > s.beta(0.1));
  }

  TEST_CASE("small-time variance is accurate")
  {
    NoiseSchedule s;
    // 1 - m^2 ~ 2 int_0^t beta ~ 2 beta(0) t for tiny t
    const double t = 1e-9;
    CHECK(s.variance(t) == doctest::Approx(2 * cosine_beta(0, 0.008) * t).epsilon(1e-6));
  }

  TEST_CASE("singular and invalid parameters")
  {
    CHECK_THROWS_AS(cosine_beta(1.0, 0.008), SingularTimeError);
    ScheduleParams p;
    p.early_stop = 0.95;
    CHECK_THROWS_AS(NoiseSchedule{p}, ParameterError);
    p = {};
    p.horizon = 1.0;
    CHECK_THROWS_AS(NoiseSchedule{p}, ParameterError);
    p = {};
    p.n_steps = 0;
    CHECK_THROWS_AS(NoiseSchedule{p}, ParameterError);
  }

  TEST_CASE("default grid")
  {
    NoiseSchedule s;
    CHECK(s.dt() == doctest::Approx((0.9 - 0.000225) / 4000));
    CHECK(s.reverse_time(4000) == doctest::Approx(0.000225).epsilon(1e-9));
  }
}

TEST_SUITE("score")
{
  TEST_CASE("circle center has zero score and in-plane isotropic covariance")
  {
    NoiseSchedule s;
    ShapeParams p;
    p.radius = 1.3;
    for (int D : {2, 5}) {
      ScoreField f(make_manifold(CurveKind::circle, D, p), s);
      for (double t : {0.05, 0.5, 0.9}) {
        const PosteriorMoments pm = f.moments(Vec::Zero(D), t);
        CHECK(pm.mean.norm() < 1e-12);
        CHECK(f.score(Vec::Zero(D), t).norm() < 1e-10);
        const Mat L = f.manifold().lift();
        const Mat plane = L.transpose() * pm.cov * L;
        CHECK(std::abs(plane(0, 0) - 1.3 * 1.3 / 2) < 1e-10);
        CHECK(std::abs(plane(1, 1) - 1.3 * 1.3 / 2) < 1e-10);
        CHECK(std::abs(plane(0, 1)) < 1e-10);
        if (D > 2) {
          Eigen::SelfAdjointEigenSolver<Mat> es(f.score_jacobian(Vec::Zero(D), t));
          const double normal = -1.0 / s.variance(t);
          int n_normal = 0;
          for (int i = 0; i < D; ++i)
            n_normal += std::abs(es.eigenvalues()(i) - normal) < 1e-8 * std::abs(normal);
          CHECK(n_normal == D - 2);
        }
      }
    }
  }

  TEST_CASE("point mass: score, Jacobian and Hessian in closed form")
  {
    NoiseSchedule s;
    auto m = make_manifold(CurveKind::point, 3);
    for (HessianMethod hm : {HessianMethod::finite_difference, HessianMethod::analytic}) {
      ScoreField f(m, s, {}, hm);
      const Vec x = Eigen::Vector3d(0.3, -1.2, 2.0);
      for (double t : {0.000225, 0.2, 0.9}) {
        const double var = s.variance(t);
        const FieldEval e = f.evaluate(x, t, 2);
        CHECK((e.value + x / var).norm() < 1e-12 * x.norm() / var);
        CHECK((e.jacobian + Mat::Identity(3, 3) / var).cwiseAbs().maxCoeff() < 1e-12 / var);
        CHECK(e.hessian.max_abs() < 1e-6 / var);
        CHECK(f.moments(x, t).cov.norm() == 0.0);
      }
    }
  }

  TEST_CASE("score identity and jacobian symmetry")
  {
    NoiseSchedule s;
    ScoreField f(make_manifold(CurveKind::two_moons, 3), s);
    for (double t : {0.01, 0.3, 0.8}) {
      const Vec x = Eigen::Vector3d(0.4, 0.1, -0.2);
      const PosteriorMoments pm = f.moments(x, t);
      const Vec sc = f.score(x, t);
      CHECK((s.variance(t) * sc + x - s.mean_scale(t) * pm.mean).norm() < 1e-12 * (1 + x.norm()));
      const Mat J = f.score_jacobian(x, t);
      CHECK((J - J.transpose()).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, J.cwiseAbs().maxCoeff()));
      Eigen::SelfAdjointEigenSolver<Mat> es(pm.cov);
      CHECK(es.eigenvalues().minCoeff() > -1e-10);
    }
  }

  TEST_CASE("gradient of log density is the score")
  {
    NoiseSchedule s;
    ScoreField f(make_manifold(CurveKind::two_moons), s);
    for (double t : {0.05, 0.5, 0.85}) {
      for (const Eigen::Vector2d& p : {Eigen::Vector2d(0.2, 0.9), Eigen::Vector2d(1.5, -0.2),
                                       Eigen::Vector2d(-1.7, 1.1)}) {
        const Vec x = p;
        const double h = 1e-5;
        Vec g(2);
        for (int k = 0; k < 2; ++k) {
          Vec xp = x, xm = x;
          xp(k) += h;
          xm(k) -= h;
          g(k) = (f.log_density(xp, t) - f.log_density(xm, t)) / (2 * h);
        }
        CHECK((g - f.score(x, t)).norm() < 1e-6 * f.score(x, t).norm() + 1e-8);
      }
    }
  }

  TEST_CASE("score jacobian matches central differences")
  {
    NoiseSchedule s;
    for (CurveKind k : {CurveKind::two_moons, CurveKind::s_curve}) {
      ScoreField f(make_manifold(k), s);
      for (double t : {0.1, 0.5, 0.85})
        for (double a = -2; a <= 2; a += 1)
          for (double b = -2; b <= 2; b += 1) {
            const Vec x = Eigen::Vector2d(a, b);
            CHECK(max_rel(f.score_jacobian(x, t), fd_jacobian(f, x, t)) < 1e-5);
          }
    }
  }

  TEST_CASE("hessian: analytic third moments agree with finite differences")
  {
    NoiseSchedule s;
    ShapeParams seg;
    seg.start = {-1, 0};
    seg.end = {1, 0};
    auto m = make_manifold(CurveKind::segment, 2, seg);
    ScoreField fd(m, s), an(m, s, {}, HessianMethod::analytic);
    for (double t : {0.1, 0.4}) {
      for (const Eigen::Vector2d& p : {Eigen::Vector2d(0.3, 0.4), Eigen::Vector2d(0.9, -0.3)}) {
        const Tensor3 a = an.score_hessian(p, t), b = fd.score_hessian(p, t);
        double diff = 0.0;
        for (std::size_t i = 0; i < a.data().size(); ++i)
          diff = std::max(diff, std::abs(a.data()[i] - b.data()[i]));
        CHECK(diff < 1e-4 * a.max_abs());
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
              CHECK(std::abs(b(i, j, k) - b(i, k, j)) < 1e-6 * std::max(1.0, b.max_abs()));
      }
    }
  }

  TEST_CASE("circle: doubling the nodes changes the score by less than 1e-8")
  {
    NoiseSchedule s;
    auto m = make_manifold(CurveKind::circle);
    const QuadratureRule r1 = quadrature_nodes(*m, 256), r2 = quadrature_nodes(*m, 512);
    const double t = 0.5, mt = s.mean_scale(t), sg = s.sigma(t);
    for (const Eigen::Vector2d& p : {Eigen::Vector2d(0.2, 0.1), Eigen::Vector2d(1.5, -1.0)}) {
      const Vec a = posterior_moments(p, mt, sg, r1).mean, b = posterior_moments(p, mt, sg, r2).mean;
      CHECK((mt * (a - b) / (sg * sg)).norm() < 1e-8);
    }
  }

  TEST_CASE("ladder resolves the early-stop kernel")
  {
    NoiseSchedule s;
    auto m = make_manifold(CurveKind::two_moons);
    ScoreField f(m, s);
    const double t = s.early_stop();
    // brute-force rule at twice the selected resolution
    const QuadratureRule& sel = f.ladder().select(s.mean_scale(t), s.sigma(t));
    const int per_arc = static_cast<int>(sel.size() / 2);
    const QuadratureRule dense = quadrature_nodes(*m, 2 * per_arc);
    for (const Eigen::Vector2d& p : {Eigen::Vector2d(0.0, 1.003), Eigen::Vector2d(0.7071, 0.7071),
                                     Eigen::Vector2d(1.5, -0.5)}) {
      const Vec a = f.moments(p, t).mean;
      const Vec b = posterior_moments(p, s.mean_scale(t), s.sigma(t), dense).mean;
      CHECK((a - b).norm() < 1e-9);
    }
  }

  TEST_CASE("posterior mean near the curve at small time sits at the projection foot")
  {
    NoiseSchedule s;
    auto m = make_manifold(CurveKind::two_moons);
    ScoreField f(m, s);
    const double t = s.early_stop();
    const double tol = 3 * s.sigma(t) / s.mean_scale(t);
    for (double th : {0.3, 1.2, 2.5}) {
      const Vec x = Eigen::Vector2d(std::cos(th), std::sin(th));
      const Vec foot = project_to_manifold(*m, x / s.mean_scale(t)).foot;
      CHECK((f.moments(x, t).mean - foot).norm() < tol);
    }
  }

  TEST_CASE("radial symmetry of the circle score")
  {
    NoiseSchedule s;
    ScoreField f(make_manifold(CurveKind::circle), s);
    for (double r : {0.3, 1.0, 2.5}) {
      const Vec x = Eigen::Vector2d(r, 0.0);
      CHECK(std::abs(f.score(x, 0.4)(1)) < 1e-10);
    }
  }

  TEST_CASE("singular time")
  {
    NoiseSchedule s;
    ScoreField f(make_manifold(CurveKind::circle), s);
    CHECK_THROWS_AS(f.score(Vec::Zero(2), 0.0), SingularTimeError);
  }
}

TEST_SUITE("cfm")
{
  TEST_CASE("point mass with sigma_min = 0 points straight at the mass")
  {
    ShapeParams p;
    p.center = {0.5, -0.25};
    CfmField f(make_manifold(CurveKind::point, 2, p), 0.0);
    const Vec x = Eigen::Vector2d(-1.0, 2.0);
    for (double t : {0.0, 0.3, 0.9}) {
      const Vec expect = (Vec(Eigen::Vector2d(0.5, -0.25)) - x) / (1 - t);
      CHECK((f.evaluate(x, t, 0).value - expect).norm() < 1e-12 * expect.norm());
    }
    CHECK_THROWS_AS(f.evaluate(x, 1.0, 0), SingularTimeError);
  }

  TEST_CASE("closed and conditional forms agree")
  {
    CfmField f(make_manifold(CurveKind::two_moons), 0.1);
    for (double t : {0.0, 0.2, 0.7, 0.999})
      for (const Eigen::Vector2d& p : {Eigen::Vector2d(0.3, 0.4), Eigen::Vector2d(-1.5, 1.0)}) {
        const Vec a = f.evaluate(p, t, 0).value, b = f.field_conditional_form(p, t);
        CHECK((a - b).norm() < 1e-10 * (1 + a.norm()));
      }
  }

  TEST_CASE("t = 0 reduces to the prior mean")
  {
    CfmField f(make_manifold(CurveKind::two_moons), 0.1);
    const Vec x = Eigen::Vector2d(0.7, -0.4);
    const Vec mean = Eigen::Vector2d(0.5, 0.25); // centroid of the two moons
    const Vec expect = mean - 0.9 * x;
    // the moons' centroid: upper arc mean (0, 2/pi), lower arc mean (1, 0.5 - 2/pi)
    CHECK((f.evaluate(x, 0.0, 0).value - expect).norm() < 1e-10);
  }

  TEST_CASE("jacobian and hessian against finite differences")
  {
    CfmField f(make_manifold(CurveKind::two_moons), 0.1, {}, HessianMethod::analytic);
    const Vec x = Eigen::Vector2d(0.2, 0.6);
    const double t = 0.6, h = 1e-5;
    const FieldEval e = f.evaluate(x, t, 2);
    for (int k = 0; k < 2; ++k) {
      Vec xp = x, xm = x;
      xp(k) += h;
      xm(k) -= h;
      const Vec col = (f.evaluate(xp, t, 0).value - f.evaluate(xm, t, 0).value) / (2 * h);
      CHECK((col - e.jacobian.col(k)).norm() < 1e-6 * e.jacobian.norm());
      const Mat hk = (f.evaluate(xp, t, 1).jacobian - f.evaluate(xm, t, 1).jacobian) / (2 * h);
      CHECK((hk - e.hessian.slice(k)).norm() < 1e-4 * std::max(1.0, e.hessian.max_abs()));
    }
  }

  TEST_CASE("score and flow fields agree in direction for a point mass")
  {
    NoiseSchedule s;
    auto m = make_manifold(CurveKind::point);
    ScoreField sf(m, s);
    CfmField cf(m, 0.1);
    const Vec x = Eigen::Vector2d(1.0, -2.0);
    const Vec a = sf.score(x, 0.5), b = cf.evaluate(x, 0.5, 0).value;
    CHECK(a.dot(b) / (a.norm() * b.norm()) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("sigma_min outside [0, 1)")
  {
    CHECK_THROWS_AS(CfmField(make_manifold(CurveKind::circle), 1.0), ParameterError);
  }
}
