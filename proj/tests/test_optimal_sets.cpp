#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "motionopt/optimal_sets.hpp"
#include "motionopt/priors.hpp"
#include "motionopt/streams.hpp"

using namespace motionopt;
using Catch::Approx;

namespace {

double rand_in(KeyedStream& st, double lo, double hi) {
  return lo + (hi - lo) * st.next_unit();
}

UncertaintyWeights random_weights(KeyedStream& st) {
  return {rand_in(st, 0.1, 10.0), rand_in(st, 0.1, 10.0), rand_in(st, 0.1, 10.0),
          rand_in(st, 0.1, 10.0)};
}

std::vector<double> log_samples(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
  return out;
}

// Oracle: bisection on the local identity s_loc*S - s_freq/S + b = 0,
// which is strictly increasing in S.
double bisect_local(const UncertaintyWeights& w, double t) {
  const double b = w.time_loc * t - w.time_freq / t;
  auto f = [&](double s) { return w.space_loc * s - w.space_freq / s + b; };
  double lo = 1e-12, hi = 1e12;
  for (int it = 0; it < 500 && (hi - lo) > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Oracle: bisection on the integral identity
// v*s_freq/S^2 + t_freq/T^2 = v*s_loc + t_loc (LHS decreasing in S).
double bisect_integral(const UncertaintyWeights& w, double v, double t) {
  const double rhs = v * w.space_loc + w.time_loc;
  auto f = [&](double s) {
    return v * w.space_freq / (s * s) + w.time_freq / (t * t) - rhs;
  };
  double lo = 1e-12, hi = 1e12;
  for (int it = 0; it < 500 && (hi - lo) > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("expected_speed: delta, histogram, log-normal vs closed form") {
  REQUIRE(expected_speed(SpeedPrior::delta(2.0)) == 2.0);
  REQUIRE(expected_speed(SpeedPrior::histogram({{1.0, 0.5}, {3.0, 0.5}})) == Approx(2.0));
  // Quadrature must match exp(mu + sigma^2/2) to 1e-6 relative.
  const double closed = std::exp(0.125);
  REQUIRE(expected_speed(SpeedPrior::log_normal(0.0, 0.5)) ==
          Approx(closed).epsilon(1e-6));
  REQUIRE(closed == Approx(1.133148).epsilon(1e-6));
  for (double mu : {-1.0, 0.3, 2.0})
    for (double sig : {0.1, 0.5, 1.0, 2.0})
      REQUIRE(expected_speed(SpeedPrior::log_normal(mu, sig)) ==
              Approx(std::exp(mu + 0.5 * sig * sig)).epsilon(1e-6));

  // Histogram weights normalize; degenerate weights are rejected.
  REQUIRE(expected_speed(SpeedPrior::histogram({{1.0, 2.0}, {3.0, 2.0}})) == Approx(2.0));
  REQUIRE_THROWS_AS(SpeedPrior::histogram({{1.0, 0.0}, {3.0, 0.0}}), std::domain_error);
  REQUIRE_THROWS_AS(SpeedPrior::histogram({{-1.0, 1.0}}), std::domain_error);
  REQUIRE_THROWS_AS(SpeedPrior::delta(0.0), std::domain_error);
}

TEST_CASE("orthogonality residual: sign structure") {
  UncertaintyWeights ones;
  // Gradient vanishes at the global minimum, so the product is 0 for any v.
  for (double v : {0.1, 1.0, 7.3}) REQUIRE(orthogonality_residual(1.0, 1.0, v, ones) == 0.0);
  // 0.5 - 2 + 2 - 0.5 = 0 with v = S/T.
  REQUIRE(orthogonality_residual(2.0, 0.5, 0.25, ones) == Approx(0.0).margin(1e-15));
  // Both gradient components positive at (2,2).
  REQUIRE(orthogonality_residual(2.0, 2.0, 1.0, ones) > 0.0);
  REQUIRE_THROWS_AS(orthogonality_residual(-1.0, 1.0, 1.0, ones), std::domain_error);
  REQUIRE_THROWS_AS(orthogonality_residual(1.0, 1.0, 0.0, ones), std::domain_error);
}

TEST_CASE("local optimal set: examples and residuals") {
  UncertaintyWeights ones;
  const std::vector<double> ts{0.5, 1.0, 2.0};
  auto curve = local_optimal_set(ones, ts);
  REQUIRE(curve.points.size() == 3);
  REQUIRE(curve.points[0][1] == Approx(2.0).epsilon(1e-14));
  REQUIRE(curve.points[1][1] == Approx(1.0).epsilon(1e-14));
  REQUIRE(curve.points[2][1] == Approx(0.5).epsilon(1e-14));
  REQUIRE(curve.meta.residual_max < 1e-10);

  REQUIRE_THROWS_AS(local_optimal_set(ones, std::vector<double>{2.0, 1.0}),
                    std::domain_error);
  REQUIRE_THROWS_AS(local_optimal_set(ones, std::vector<double>{-1.0, 1.0}),
                    std::domain_error);
}

TEST_CASE("integral optimal set: examples, omission, conserved quantity") {
  UncertaintyWeights ones;
  {
    auto curve = integral_optimal_set(ones, 1.0, std::vector<double>{1.0});
    REQUIRE(curve.points.size() == 1);
    REQUIRE(curve.points[0][1] == Approx(1.0).epsilon(1e-14));
  }
  {
    auto curve = integral_optimal_set(ones, 1.0, std::vector<double>{std::sqrt(2.0)});
    REQUIRE(curve.points[0][1] == Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-14));
  }
  {
    // Horizontal asymptote sqrt(v*s_freq/(v*s_loc + t_loc)).
    auto curve = integral_optimal_set(ones, 1.0, std::vector<double>{1e6});
    REQUIRE(curve.points[0][1] == Approx(std::sqrt(0.5)).epsilon(1e-10));
  }
  {
    // Samples at or below T_min = sqrt(1/2) are omitted and counted.
    const std::vector<double> ts{0.1, 0.5, 0.7, 1.0, 2.0};
    auto curve = integral_optimal_set(ones, 1.0, ts);
    REQUIRE(curve.meta.omitted == 3);
    REQUIRE(curve.points.size() == 2);
  }
  REQUIRE_THROWS_AS(integral_optimal_set(ones, 0.0, std::vector<double>{1.0}),
                    std::domain_error);
  REQUIRE_THROWS_AS(integral_optimal_set(ones, -2.0, std::vector<double>{1.0}),
                    std::domain_error);
}

TEST_CASE("asymptotes: examples and limits") {
  UncertaintyWeights ones;
  {
    auto a = asymptotes(ones, 1.0);
    REQUIRE(a.t_min == Approx(std::sqrt(0.5)).epsilon(1e-15));
    REQUIRE(a.s_infinity == Approx(std::sqrt(0.5)).epsilon(1e-15));
  }
  {
    auto a = asymptotes(ones, 3.0);
    REQUIRE(a.t_min == Approx(0.5).epsilon(1e-15));
    REQUIRE(a.s_infinity == Approx(std::sqrt(3.0) / 2.0).epsilon(1e-15));
  }
  {
    // v_e -> 0 limit: T_min -> sqrt(t_freq/t_loc) = 1, S_inf -> 0.
    auto a = asymptotes(ones, 1e-12);
    REQUIRE(a.t_min == Approx(1.0).epsilon(1e-9));
    REQUIRE(a.s_infinity < 1e-5);
  }
  // The emitted curve approaches both asymptotes at the grid extremes.
  auto a = asymptotes(ones, 2.0);
  auto curve = integral_optimal_set(
      ones, 2.0, std::vector<double>{a.t_min * (1.0 + 1e-9), 1e8});
  REQUIRE(curve.points.front()[1] > 1e3);
  REQUIRE(curve.points.back()[1] == Approx(a.s_infinity).epsilon(1e-9));
}

TEST_CASE("property: residuals below 1e-10 along both curves") {
  KeyedStream st(101, 0, 0);
  const auto ts = log_samples(0.01, 100.0, 128);
  for (int rep = 0; rep < 50; ++rep) {
    const auto w = random_weights(st);
    const double v_e = std::exp(rand_in(st, std::log(0.1), std::log(10.0)));
    auto local = local_optimal_set(w, ts);
    auto integral = integral_optimal_set(w, v_e, ts);
    REQUIRE(local.meta.residual_max < 1e-10);
    REQUIRE(integral.meta.residual_max < 1e-10);
    for (auto [t, s] : local.points)
      REQUIRE(std::abs(orthogonality_residual(t, s, s / t, w)) < 1e-10);
    for (auto [t, s] : integral.points)
      REQUIRE(std::abs(orthogonality_residual(t, s, v_e, w)) < 1e-10);
  }
}

TEST_CASE("property: minimum membership of both curves") {
  KeyedStream st(103, 0, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const auto w = random_weights(st);
    const double v_e = std::exp(rand_in(st, std::log(0.1), std::log(10.0)));
    const auto gm = global_minimum(w);
    const auto g = uncertainty_gradient(gm.t_star, gm.s_star, w);
    // Raw scalar product <g, v>: zero gradient means membership in both sets.
    const double raw_local = g.du_ds * (gm.s_star / gm.t_star) + g.du_dt;
    const double raw_integral = g.du_ds * v_e + g.du_dt;
    REQUIRE(std::abs(raw_local) < 1e-12);
    REQUIRE(std::abs(raw_integral) < 1e-12);
  }
}

TEST_CASE("property: conserved quantity along the integral set") {
  KeyedStream st(107, 0, 0);
  const auto ts = log_samples(0.01, 100.0, 256);
  for (int rep = 0; rep < 50; ++rep) {
    const auto w = random_weights(st);
    const double v_e = std::exp(rand_in(st, std::log(0.1), std::log(10.0)));
    auto curve = integral_optimal_set(w, v_e, ts);
    const double expected = v_e * w.space_loc + w.time_loc;
    double lo = 1e308, hi = -1e308;
    for (auto [t, s] : curve.points) {
      const double q = v_e * w.space_freq / (s * s) + w.time_freq / (t * t);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    REQUIRE(curve.points.size() >= 2);
    REQUIRE((hi - lo) / expected < 1e-10);
    REQUIRE(hi == Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("property: prior shift moves both asymptotes monotonically") {
  KeyedStream st(109, 0, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const auto w = random_weights(st);
    const double v1 = std::exp(rand_in(st, std::log(0.05), std::log(20.0)));
    const double v2 = v1 * (1.0 + rand_in(st, 0.01, 3.0));
    const auto a1 = asymptotes(w, v1);
    const auto a2 = asymptotes(w, v2);
    REQUIRE(a2.t_min < a1.t_min);
    REQUIRE(a2.s_infinity > a1.s_infinity);
  }
}

TEST_CASE("property: closed forms match independent bisection") {
  KeyedStream st(113, 0, 0);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto w = random_weights(st);
    const double t = std::exp(rand_in(st, std::log(0.05), std::log(50.0)));
    auto local = local_optimal_set(w, std::vector<double>{t});
    REQUIRE(local.points[0][1] == Approx(bisect_local(w, t)).epsilon(1e-9));

    const double v_e = std::exp(rand_in(st, std::log(0.1), std::log(10.0)));
    const double t_min = asymptotes(w, v_e).t_min;
    const double t_ok = t_min * (1.02 + st.next_unit() * 50.0);
    auto integral = integral_optimal_set(w, v_e, std::vector<double>{t_ok});
    REQUIRE(integral.points.size() == 1);
    REQUIRE(integral.points[0][1] ==
            Approx(bisect_integral(w, v_e, t_ok)).epsilon(1e-9));
  }
}

TEST_CASE("property: local and integral sets are distinct curves") {
  KeyedStream st(127, 0, 0);
  const auto ts = log_samples(0.01, 100.0, 128);
  for (int rep = 0; rep < 50; ++rep) {
    const auto w = random_weights(st);
    const double v_e = std::exp(rand_in(st, std::log(0.2), std::log(5.0)));
    auto local = local_optimal_set(w, ts);
    auto integral = integral_optimal_set(w, v_e, ts);
    double max_rel = 0.0;
    std::size_t offset = ts.size() - integral.points.size();
    for (std::size_t k = 0; k < integral.points.size(); ++k) {
      const double s_local = local.points[offset + k][1];
      const double s_int = integral.points[k][1];
      max_rel = std::max(max_rel, std::abs(s_local - s_int) / s_int);
    }
    REQUIRE(max_rel > 1e-3);
  }
}

TEST_CASE("blended set: recovers the extremes and keeps small residuals") {
  UncertaintyWeights w{0.8, 1.9, 1.3, 0.6};
  const auto ts = log_samples(0.05, 50.0, 64);
  const double v_e = 1.7;

  auto local = local_optimal_set(w, ts);
  auto blend0 = blended_optimal_set(w, v_e, 0.0, ts);
  REQUIRE(blend0.points.size() == local.points.size());
  for (std::size_t k = 0; k < local.points.size(); ++k)
    REQUIRE(blend0.points[k][1] == local.points[k][1]);

  auto integral = integral_optimal_set(w, v_e, ts);
  auto blend1 = blended_optimal_set(w, v_e, 1.0, ts);
  REQUIRE(blend1.points.size() == integral.points.size());
  REQUIRE(blend1.meta.omitted == integral.meta.omitted);
  for (std::size_t k = 0; k < integral.points.size(); ++k)
    REQUIRE(blend1.points[k][1] == integral.points[k][1]);

  auto blend_half = blended_optimal_set(w, v_e, 0.5, ts);
  REQUIRE(blend_half.points.size() == ts.size());
  REQUIRE(blend_half.meta.residual_max < 1e-10);
  // The half blend lies strictly between the extremes wherever they differ
  // by more than solver tolerance.
  const std::size_t offset = ts.size() - integral.points.size();
  for (std::size_t k = 0; k < integral.points.size(); ++k) {
    const double s_lo = std::min(local.points[offset + k][1], integral.points[k][1]);
    const double s_hi = std::max(local.points[offset + k][1], integral.points[k][1]);
    if (s_hi / s_lo > 1.0 + 1e-6) {
      REQUIRE(blend_half.points[offset + k][1] >= s_lo * (1.0 - 1e-9));
      REQUIRE(blend_half.points[offset + k][1] <= s_hi * (1.0 + 1e-9));
    }
  }

  REQUIRE_THROWS_AS(blended_optimal_set(w, v_e, 1.5, ts), std::domain_error);
  REQUIRE_THROWS_AS(blended_optimal_set(w, v_e, -0.1, ts), std::domain_error);
}

TEST_CASE("curves keep T strictly increasing") {
  KeyedStream st(131, 0, 0);
  const auto ts = log_samples(0.02, 80.0, 200);
  for (int rep = 0; rep < 20; ++rep) {
    const auto w = random_weights(st);
    for (const Curve& c :
         {local_optimal_set(w, ts), integral_optimal_set(w, 1.3, ts),
          blended_optimal_set(w, 1.3, 0.4, ts)}) {
      for (std::size_t k = 1; k < c.points.size(); ++k)
        REQUIRE(c.points[k][0] > c.points[k - 1][0]);
    }
  }
}
