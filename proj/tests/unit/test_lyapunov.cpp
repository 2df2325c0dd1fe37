#include "doctest.h"

#include <cmath>
#include <numbers>

#include "lyapflow/error.hpp"
#include "lyapflow/lyapunov.hpp"
#include "support.hpp"

using namespace lyapflow;
using namespace testing_support;

namespace {

Mat orthonormality_defect(const Mat& E)
{
  return E.transpose() * E - Mat::Identity(E.cols(), E.cols());
}

TrajectoryBundle tracked(const DriftModel& model, int k, std::uint64_t seed, bool jacobians = false,
                         bool states = false)
{
  SimulateOptions opt;
  opt.integrator = integrator_for(model.kind());
  opt.seed = seed;
  opt.frame_dim = k;
  opt.record.jacobians = jacobians;
  opt.record.states = states;
  return simulate_path(model, opt, 0);
}

Mat explicit_product(const TrajectoryBundle& b, int first = 0)
{
  const int D = static_cast<int>(b.jacobians.front().rows());
  Mat P = Mat::Identity(D, D);
  for (std::size_t n = static_cast<std::size_t>(first); n < b.jacobians.size(); ++n)
    P = b.jacobians[n] * P;
  return P;
}

} // namespace

TEST_SUITE("lyapunov")
{
  TEST_CASE("initial frames")
  {
    const Mat E = init_frame(2, 2, 5);
    CHECK(orthonormality_defect(E).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(std::abs(std::abs(E.determinant()) - 1.0) < 1e-12);
    CHECK(init_frame(2, 2, 5) == E);
    CHECK(orthonormality_defect(init_frame(7, 3, 1)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_THROWS_AS(init_frame(3, 4, 1), DimensionError);
  }

  TEST_CASE("qr_push on simple maps")
  {
    const Mat E = init_frame(3, 2, 2);
    QrStep q = qr_push(E, Mat::Identity(3, 3));
    CHECK((q.frame - E).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((q.r - Vec::Ones(2)).cwiseAbs().maxCoeff() < 1e-14);

    const Mat I2 = Mat::Identity(2, 2);
    q = qr_push(I2, 2.0 * I2);
    CHECK((q.r - Vec::Constant(2, 2.0)).norm() < 1e-15);
    CHECK((q.frame - I2).norm() < 1e-15);

    Mat J = Mat::Zero(2, 2);
    J(0, 0) = 3;
    J(1, 1) = 1;
    q = qr_push(I2, J);
    CHECK((q.r - Vec(Eigen::Vector2d(3, 1))).norm() < 1e-15);
    CHECK((q.frame - I2).norm() < 1e-15);
    Mat swapped(2, 2);
    swapped << 0, 1, 1, 0;
    q = qr_push(swapped, J);
    CHECK((q.r - Vec(Eigen::Vector2d(1, 3))).norm() < 1e-15);

    // J E = E' R
    Mat A = Mat::Random(4, 4);
    const Mat F = init_frame(4, 3, 9);
    q = qr_push(F, A);
    CHECK((A * F - q.frame * q.R).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((q.r.array() > 0).all());
    CHECK_THROWS_AS(qr_push(I2, Mat::Zero(2, 2)), DegenerateTangentError);
  }

  TEST_CASE("point mass exponents equal the mean log contraction")
  {
    for (ModelKind kind : {ModelKind::sgm_reverse, ModelKind::prob_flow_reverse}) {
      const DriftModel model = score_model(make_manifold(CurveKind::point, 3), kind, 4000);
      const LinearOracle o = linear_oracle(*model.schedule(), kind == ModelKind::sgm_reverse ? 2.0 : 1.0);
      double sum = 0.0;
      for (double a : o.a)
        sum += std::log(std::abs(a));
      const double tau = 4000 * o.dt;
      const LyapunovReport r = ftle(tracked(model, 3, 4), 3);
      CHECK(r.tau_eff == doctest::Approx(tau));
      for (int i = 0; i < 3; ++i)
        CHECK(relative(r.exponents(i), sum / tau) < 1e-10);
    }
  }

  TEST_CASE("short horizon: exponents match log singular values of the product")
  {
    auto m = make_manifold(CurveKind::two_moons);
    const DriftModel model = score_model(m, ModelKind::sgm_reverse, 50);
    const TrajectoryBundle b = tracked(model, 2, 7, true);
    const LyapunovReport r = ftle_refined(b, 2);
    Eigen::JacobiSVD<Mat> svd(explicit_product(b));
    for (int i = 0; i < 2; ++i)
      CHECK(std::abs(r.exponents(i) - std::log(svd.singularValues()(i)) / r.tau_eff) < 1e-6);
    // a random frame only reaches the singular values asymptotically
    const LyapunovReport plain = ftle(b, 2);
    CHECK(std::abs(plain.exponents.sum() - r.exponents.sum()) < 1e-8);
    // volume identity
    CHECK(std::abs(r.log_r_sum.sum() - std::log(std::abs(explicit_product(b).determinant()))) < 1e-8);
    double logdets = 0.0;
    for (const Mat& J : b.jacobians)
      logdets += std::log(std::abs(J.determinant()));
    CHECK(std::abs(r.exponents.sum() * r.tau_eff - logdets) < 1e-8);
  }

  TEST_CASE("report invariants")
  {
    auto m = make_manifold(CurveKind::two_moons, 3);
    const DriftModel model = score_model(m, ModelKind::sgm_reverse, 400);
    const TrajectoryBundle b = tracked(model, 3, 2);
    const LyapunovReport r = ftle(b, 3);
    for (int i = 0; i + 1 < 3; ++i)
      CHECK(r.exponents(i) >= r.exponents(i + 1));
    Vec sum = Vec::Zero(3);
    for (const Vec& lr : r.log_r_history) {
      REQUIRE((lr.array() > -1e300).all());
      sum += lr;
    }
    CHECK((sum / r.tau_eff - r.column_exponents).norm() == 0.0);
    CHECK(orthonormality_defect(r.final_frame).cwiseAbs().maxCoeff() < 1e-10);
    for (const Vec& lr : b.log_r)
      for (Eigen::Index i = 0; i < lr.size(); ++i)
        REQUIRE(std::isfinite(lr(i)));

    // column nesting: one tracked direction equals the first of two
    const LyapunovReport r1 = ftle(tracked(model, 1, 2), 1);
    const LyapunovReport r2 = ftle(tracked(model, 2, 2), 2);
    CHECK(std::abs(r1.column_exponents(0) - r2.column_exponents(0)) < 1e-10);
    CHECK_THROWS_AS(ftle(b, 4), MissingHistoryError);
  }

  TEST_CASE("leading exponent forgets the initial frame")
  {
    auto m = make_manifold(CurveKind::two_moons);
    const DriftModel model = score_model(m, ModelKind::sgm_reverse, 1000);
    SimulateOptions opt;
    opt.seed = 31;
    opt.frame_dim = 1;
    opt.record.jacobians = true;
    const TrajectoryBundle a = simulate_path(model, opt, 0);
    opt.frame_seed = 99;
    TrajectoryBundle b = simulate_path(model, opt, 0);
    CHECK(a.final_state == b.final_state);
    b.seed = 99; // refined sweeps start from a different random frame
    CHECK(std::abs(ftle_refined(a, 1).exponents(0) - ftle_refined(b, 1).exponents(0)) < 1e-3);
    // the leading refined exponent bounds the plain one from above
    CHECK(ftle(a, 1).exponents(0) <= ftle_refined(a, 1).exponents(0) + 1e-9);
  }

  TEST_CASE("cauchy-green spectra")
  {
    TrajectoryBundle one;
    one.n_steps = 1;
    one.dt = 0.1;
    one.jacobians = {2.0 * Mat::Identity(2, 2)};
    const CauchyGreen cg = cauchy_green_top(one, 2);
    CHECK((cg.values - Vec::Constant(2, 4.0)).norm() < 1e-14);

    const DriftModel pm = score_model(make_manifold(CurveKind::point), ModelKind::sgm_reverse, 50);
    const TrajectoryBundle b = tracked(pm, 2, 3, true);
    const CauchyGreen c = cauchy_green_top(b, 2);
    const LyapunovReport r = ftle(b, 2);
    for (int i = 0; i < 2; ++i)
      CHECK(std::abs(std::log(c.values(i)) / (2 * r.tau_eff) - r.exponents(i)) < 1e-8);

    auto m = make_manifold(CurveKind::two_moons);
    const DriftModel model = score_model(m, ModelKind::sgm_reverse, 1000);
    const TrajectoryBundle tb = tracked(model, 2, 5, true);
    const CauchyGreen tail = cauchy_green_top(tb, 1, 950);
    const double cosang = std::abs(tail.vectors.col(0).dot(tb.final_frame.col(0)));
    CHECK(std::acos(std::min(1.0, cosang)) * 180 / std::numbers::pi < 5.0);

    TrajectoryBundle none;
    none.n_steps = 4;
    CHECK_THROWS_AS(cauchy_green_top(none, 1), MissingHistoryError);
    TrajectoryBundle big;
    big.n_steps = 200;
    big.dt = 1;
    big.jacobians.assign(200, 1e3 * Mat::Identity(2, 2));
    CHECK_THROWS_AS(cauchy_green_top(big, 1), OverflowError);
  }

  TEST_CASE("response recursion")
  {
    auto pm = make_manifold(CurveKind::point);
    const DriftModel model = score_model(pm, ModelKind::sgm_reverse, 4000);
    const TrajectoryBundle b = tracked(model, 0, 8, true, true);

    const ResponseHistory z0 = inhomogeneous_response(b, model, PerturbationField::zero(2));
    for (const Vec& z : z0.zeta)
      REQUIRE(z.norm() == 0.0);

    PerturbationParams p;
    p.kind = PerturbationKind::constant_vector;
    const PerturbationField e1(p, *pm);
    const LinearOracle o = linear_oracle(*model.schedule(), 2.0);
    double expect = 0.0;
    for (int n = 0; n < 4000; ++n) {
      double prod = 1.0;
      for (int k = n + 1; k < 4000; ++k)
        prod *= o.a[k];
      expect += prod * o.dt * o.beta[n];
    }
    const Vec zf = inhomogeneous_response(b, model, e1).final;
    CHECK(relative(zf(0), expect) < 1e-10);
    CHECK(std::abs(zf(1)) == 0.0);

    TrajectoryBundle bare = b;
    bare.jacobians.clear();
    CHECK_THROWS_AS(inhomogeneous_response(bare, model, e1), MissingHistoryError);
  }

  TEST_CASE("response predicts the perturbed path")
  {
    auto m = make_manifold(CurveKind::two_moons);
    const DriftModel base = score_model(m, ModelKind::sgm_reverse, 1000);
    PerturbationParams p;
    auto chi = std::make_shared<const PerturbationField>(p, *m);

    SimulateOptions opt;
    opt.seed = 17;
    opt.record.states = true;
    opt.record.jacobians = true;
    opt.record.noise = true;
    opt.response_field = chi;
    const TrajectoryBundle b = simulate_path(base, opt, 0);
    const ResponseHistory z = inhomogeneous_response(b, base, *chi);
    REQUIRE(b.response.has_value());
    CHECK((*b.response - z.final).norm() == 0.0);

    std::vector<double> err;
    for (double eps : {1e-3, 5e-4, 2.5e-4, 1e-4}) {
      const TrajectoryBundle pb = replay(base.with_perturbation(chi, eps), b);
      err.push_back((pb.final_state - b.final_state - eps * z.final).norm() / eps);
      if (eps == 1e-4)
        CHECK(err.back() < 0.1 * z.final.norm());
    }
    for (std::size_t i = 1; i + 1 < err.size(); ++i)
      CHECK(std::log2(err[i - 1] / err[i]) >= 0.8);
  }
}
