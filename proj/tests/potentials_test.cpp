#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "semikernel/error.hpp"
#include "semikernel/numerics.hpp"
#include "semikernel/potentials.hpp"

using namespace semikernel;

namespace {

std::vector<PotentialModel> builtins() {
  return {free_potential(), stark_potential(1.0), stark_potential(-2.5), harmonic_potential(),
          abscubed_potential(), breathing_potential()};
}

std::vector<double> uniform(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

}  // namespace

TEST(Potentials, EvalExamples) {
  const PotentialSample h = eval(harmonic_potential(), 0.0, 2.0);
  EXPECT_DOUBLE_EQ(h.v, 2.0);
  EXPECT_DOUBLE_EQ(h.grad, 2.0);
  EXPECT_DOUBLE_EQ(h.hess, 1.0);

  const PotentialSample f = eval(free_potential(), 0.7, 5.0);
  EXPECT_EQ(f.v, 0.0);
  EXPECT_EQ(f.grad, 0.0);
  EXPECT_EQ(f.hess, 0.0);

  const PotentialSample a = eval(abscubed_potential(), 0.0, 0.5);
  EXPECT_NEAR(a.v, 0.125 / 6.0, 1e-15);
  EXPECT_NEAR(a.grad, 0.125, 1e-15);
  EXPECT_NEAR(a.hess, 0.5, 1e-15);
}

TEST(Potentials, AbsCubedContinuation) {
  const PotentialModel p = abscubed_potential();
  for (double x : {-3.0, -1.5, 1.5, 3.0}) {
    const double u = std::abs(x) - 1.0;
    const PotentialSample s = p(0.0, x);
    EXPECT_NEAR(s.v, 1.0 / 6.0 + u / 2.0 + u * u / 2.0, 1e-14);
    EXPECT_NEAR(s.grad, std::copysign(0.5 + u, x), 1e-14);
    EXPECT_EQ(s.hess, 1.0);
  }
  // V'' = min(|x|, 1) is continuous across |x| = 1.
  for (double x : {-1.0, 1.0}) {
    EXPECT_NEAR(p(0.0, x - 1e-9).hess, p(0.0, x + 1e-9).hess, 1e-8);
    EXPECT_NEAR(p(0.0, x - 1e-9).v, p(0.0, x + 1e-9).v, 2e-9);
  }
  EXPECT_EQ(p.hess_bound(), 1.0);
}

TEST(Potentials, Breathing) {
  const PotentialModel p = breathing_potential();
  EXPECT_TRUE(p.time_dependent());
  EXPECT_DOUBLE_EQ(p.hess_bound(), 1.5);
  const double t = kPi / 2.0;
  EXPECT_DOUBLE_EQ(p(t, 2.0).v, 1.5 * 2.0);
  EXPECT_DOUBLE_EQ(p(t, 2.0).grad, 3.0);
}

TEST(Potentials, SafeHorizon) {
  EXPECT_NEAR(safe_horizon(harmonic_potential()), kPi, 1e-15);
  EXPECT_EQ(safe_horizon(free_potential()), std::numeric_limits<double>::infinity());
  EXPECT_EQ(safe_horizon(stark_potential(1.0)), std::numeric_limits<double>::infinity());
  EXPECT_NEAR(safe_horizon(abscubed_potential()), kPi, 1e-15);
  EXPECT_NEAR(safe_horizon(breathing_potential()), kPi / std::sqrt(1.5), 1e-15);
}

TEST(Potentials, ParseNames) {
  EXPECT_EQ(parse_potential("free").id(), "free");
  EXPECT_EQ(parse_potential("harmonic").id(), "harmonic");
  EXPECT_EQ(parse_potential("abscubed").id(), "abscubed");
  EXPECT_EQ(parse_potential("breathing").id(), "breathing");
  const PotentialModel s = parse_potential("stark:E=2.5");
  EXPECT_DOUBLE_EQ(stark_field(s), 2.5);
  EXPECT_DOUBLE_EQ(s(0.0, 2.0).v, 5.0);
  EXPECT_DOUBLE_EQ(stark_field(harmonic_potential()), 0.0);
  for (const char* bad : {"quartic", "stark", "stark:E=", "stark:E=1x", ""}) {
    try {
      parse_potential(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::unknown_potential) << bad;
    }
  }
}

TEST(Potentials, CheckAssumptionExamples) {
  const auto ts = uniform(-5.0, 5.0, 41);
  const auto xs = uniform(-5.0, 5.0, 201);
  const AssumptionReport h = check_assumption(harmonic_potential(), ts, xs);
  EXPECT_TRUE(h.pass());
  EXPECT_DOUBLE_EQ(h.max_abs_hess, 1.0);

  const AssumptionReport b =
      check_assumption(breathing_potential(), uniform(0.0, 2.0 * kPi, 65), xs);
  EXPECT_TRUE(b.pass());
  EXPECT_NEAR(b.max_abs_hess, 1.5, 1e-12);

  const PotentialModel quartic(
      "quartic",
      [](double, double x) {
        return PotentialSample{x * x * x * x, 4.0 * x * x * x, 12.0 * x * x};
      },
      1.0, false);
  const AssumptionReport q = check_assumption(quartic, ts, xs);
  EXPECT_FALSE(q.pass());
  EXPECT_FALSE(q.growth_ok);
  EXPECT_TRUE(q.consistency_ok);
}

TEST(Potentials, DefaultSamplesPassForBuiltins) {
  for (const PotentialModel& p : builtins()) {
    const AssumptionReport r =
        check_assumption(p, default_time_samples(), default_position_samples());
    EXPECT_TRUE(r.pass()) << p.id();
    EXPECT_EQ(r.samples, 64u * 512u);
  }
  EXPECT_EQ(default_time_samples().front(), 0.0);
  EXPECT_NEAR(default_time_samples().back(), 2.0 * kPi, 1e-15);
  EXPECT_EQ(default_position_samples().front(), -8.0);
  EXPECT_EQ(default_position_samples().back(), 8.0);
}

TEST(Potentials, InconsistentGradientFails) {
  const PotentialModel wrong(
      "wrong", [](double, double x) { return PotentialSample{x * x / 2.0, 1.1 * x, 1.0}; },
      1.0, false);
  EXPECT_FALSE(check_assumption(wrong, default_time_samples(), default_position_samples())
                   .consistency_ok);
}

TEST(Potentials, RandomSamplesRespectBoundAndGradient) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> tdist(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> xdist(-10.0, 10.0);
  const double h = 1e-5;
  for (const PotentialModel& p : builtins()) {
    for (int i = 0; i < 10000; ++i) {
      const double t = tdist(rng);
      const double x = xdist(rng);
      const PotentialSample s = p(t, x);
      ASSERT_LE(std::abs(s.hess), p.hess_bound()) << p.id();
      const double fd = (p(t, x + h).v - p(t, x - h).v) / (2.0 * h);
      ASSERT_LE(std::abs(fd - s.grad), 1e-6 * (1.0 + std::abs(s.grad))) << p.id() << " " << x;
    }
  }
  const PotentialModel a = abscubed_potential();
  for (double x : {-1.0, 0.0, 1.0}) {
    const double fd = (a(0.0, x + h).v - a(0.0, x - h).v) / (2.0 * h);
    EXPECT_LE(std::abs(fd - a(0.0, x).grad), 1e-4 * (1.0 + std::abs(a(0.0, x).grad)));
  }
}
