#include <doctest.h>

#include <random>

#include "mcina/solvers.hpp"
#include "oracles.hpp"

using namespace mcina;

TEST_CASE("forward Euler step") {
  std::mt19937_64 rng(3);
  const StateOccupancy u = testutil::random_occupancy(rng);

  SUBCASE("zero generator is the identity") {
    const StateOccupancy v = step_fe(u, Mat9{}, 0.05);
    CHECK(v == u);
  }

  SUBCASE("conserves total probability") {
    const RateSet r = eval_rates(-30.0);
    CHECK(std::fabs(sum(step_fe(u, assemble_full(r), 0.01)) - sum(u)) <= 1e-14);
    CHECK(std::fabs(sum(step_fe(u, r, 0.01)) - sum(u)) <= 1e-14);
  }

  SUBCASE("sparse and dense forms agree") {
    const RateSet r = eval_rates(12.5);
    const StateOccupancy a = step_fe(u, assemble_full(r), 0.02);
    const StateOccupancy b = step_fe(u, r, 0.02);
    CHECK(testutil::max_abs_diff(a, b) <= 1e-15);
  }

  SUBCASE("local error shrinks at second order") {
    const Mat9 a = assemble_full(eval_rates(0.0));
    auto defect = [&](double dt) {
      const StateOccupancy exact = exp_reference(a, dt) * u;
      return testutil::max_abs_diff(step_fe(u, a, dt), exact);
    };
    const double ratio = defect(0.002) / defect(0.001);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.15));
  }
}

TEST_CASE("analytic fast-high substep") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uv(-100.0, 70.0), ud(0.0, 0.1);

  SUBCASE("dt = 0 is the exact identity") {
    const RateSet r = eval_rates(-12.0);
    const StateOccupancy u = testutil::random_occupancy(rng);
    CHECK(hos_fast_high(u, r, 0.0) == u);
  }

  SUBCASE("matches the matrix exponential of the fast-high part") {
    for (int i = 0; i < 100; ++i) {
      const RateSet r = eval_rates(uv(rng));
      const double dt = ud(rng);
      const StateOccupancy u = testutil::random_occupancy(rng);
      const StateOccupancy got = hos_fast_high(u, r, dt);
      const StateOccupancy want = exp_reference(assemble_split(r).fast_high, dt) * u;
      REQUIRE(testutil::max_abs_diff(got, want) <= 1e-9);
      REQUIRE(std::fabs(sum(got) - sum(u)) <= 1e-12);
    }
  }
}

TEST_CASE("analytic fast-low substep") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uv(-100.0, 70.0), ud(0.0, 0.1);

  SUBCASE("dt = 0 is the exact identity") {
    const RateSet r = eval_rates(33.0);
    const StateOccupancy u = testutil::random_occupancy(rng);
    CHECK(hos_fast_low(u, r, 0.0) == u);
  }

  SUBCASE("leaves V and W untouched") {
    const RateSet r = eval_rates(-55.0);
    const StateOccupancy u = testutil::random_occupancy(rng);
    const StateOccupancy v = hos_fast_low(u, r, 0.08);
    CHECK(v[V] == u[V]);
    CHECK(v[W] == u[W]);
  }

  SUBCASE("matches the matrix exponential of the fast-low part") {
    for (int i = 0; i < 100; ++i) {
      const RateSet r = eval_rates(uv(rng));
      const double dt = ud(rng);
      const StateOccupancy u = testutil::random_occupancy(rng);
      const StateOccupancy got = hos_fast_low(u, r, dt);
      const StateOccupancy want = exp_reference(assemble_split(r).fast_low, dt) * u;
      REQUIRE(testutil::max_abs_diff(got, want) <= 1e-9);
    }
  }
}

TEST_CASE("slow substep") {
  std::mt19937_64 rng(29);

  SUBCASE("the slow part stays Euler-stable at millisecond steps") {
    // the largest slow entry is the U->V rate, a2/100, which peaks at 0.97
    // ms^-1 at the +70 mV grid edge; midrange the part sits below ~0.11
    double biggest = 0.0, biggest_mid = 0.0;
    for (int j = 0; j <= 1700; ++j) {
      const double vm = -100.0 + 0.1 * j;
      const double entry = max_abs(assemble_split(eval_rates(vm)).slow);
      biggest = std::max(biggest, entry);
      if (vm >= -85.0 && vm <= 0.0) biggest_mid = std::max(biggest_mid, entry);
    }
    CHECK(biggest <= 1.0);
    CHECK(biggest_mid <= 0.11);
    // an explicit step on the slow part alone tolerates dt up to O(1) ms
    CHECK(2.0 / (2.0 * biggest) > 1.0);
  }

  SUBCASE("conserves probability") {
    const RateSet r = eval_rates(-80.0);
    const StateOccupancy u = testutil::random_occupancy(rng);
    CHECK(std::fabs(sum(hos_slow(u, r, 0.1)) - sum(u)) <= 1e-14);
  }

  SUBCASE("first-order accurate against the exponential") {
    const RateSet r = eval_rates(-95.0);
    const Mat9 slow = assemble_split(r).slow;
    const StateOccupancy u = testutil::random_occupancy(rng);
    auto defect = [&](double dt) {
      return testutil::max_abs_diff(hos_slow(u, r, dt), exp_reference(slow, dt) * u);
    };
    CHECK(defect(0.4) / defect(0.2) == doctest::Approx(4.0).epsilon(0.2));
  }
}

TEST_CASE("full hybrid step") {
  std::mt19937_64 rng(41);
  const RateSet r = eval_rates(0.0);
  const StateOccupancy u = testutil::random_occupancy(rng);

  SUBCASE("dt = 0 is the identity") { CHECK(step_hos(u, r, 0.0) == u); }

  SUBCASE("conserves probability") {
    CHECK(std::fabs(sum(step_hos(u, r, 0.1)) - sum(u)) <= 1e-12);
  }

  SUBCASE("defect against exp(A dt) is the splitting error") {
    const SplitGenerators g = assemble_split(r);
    const double os_coeff =
        0.5 * frobenius_norm(commutator(g.fast_low, g.fast_high) +
                             commutator(g.slow, g.fast_high) + commutator(g.slow, g.fast_low));
    const double slow_sq = frobenius_norm(g.slow) * frobenius_norm(g.slow);
    auto defect = [&](double dt) {
      return testutil::max_abs_diff(step_hos(u, r, dt), exp_reference(g.full, dt) * u);
    };
    const double dt = 0.005;
    CHECK(defect(dt) <= 3.0 * (os_coeff + 0.5 * slow_sq) * dt * dt);
    CHECK(defect(2 * dt) / defect(dt) == doctest::Approx(4.0).epsilon(0.25));
  }
}

TEST_CASE("collided rates fall back to a matrix exponential") {
  RateSet r = eval_rates(-19.0);
  r.a2 = r.a13;  // exact collision of the O->U and P->O rates
  r.b2 = r.a13 * r.a2 * r.a3 / (r.b13 * r.b3);

  CHECK_THROWS_AS(fast_high_coeffs(r, 0.05), DegenerateRates);

  std::mt19937_64 rng(43);
  const StateOccupancy u = testutil::random_occupancy(rng);
  // step_hos must still deliver the exponential through the fallback, even
  // though the collided fast-high part is defective
  const StateOccupancy got = step_hos(u, r, 0.05);
  const SplitGenerators g = assemble_split(r);
  const StateOccupancy want =
      hos_slow(exp_reference(g.fast_low, 0.05) * (exp_reference(g.fast_high, 0.05) * u), r, 0.05);
  CHECK(testutil::max_abs_diff(got, want) <= 1e-9);
}

TEST_CASE("matrix Rush-Larsen stepping") {
  const VoltageGrid g = VoltageGrid::from_range(-30.0, -10.0, 0.1);
  const EigenTable table = build_eigen_table(g);
  const StepperTable stepper = build_stepper(table, 0.1);

  SUBCASE("converges to the steady state at frozen potential") {
    // the slowest chain mode at -20 mV relaxes over ~20 s, so cover the
    // approach with long exponential steps, which MRL takes in stride
    const double vm = -20.0;
    const StepperTable big = build_stepper(table, 50.0);
    StateOccupancy u{};
    u[R] = 1.0;
    for (int n = 0; n < 16000; ++n) u = step_mrl(u, big, vm);
    const Vec9 want = testutil::steady_state(assemble_full(eval_rates(vm)));
    CHECK(testutil::max_abs_diff(u, want) <= 1e-8);
    CHECK(std::fabs(sum(u) - 1.0) <= 1e-8);
  }

  SUBCASE("single step conserves probability to table accuracy") {
    std::mt19937_64 rng(47);
    const StateOccupancy u = testutil::random_occupancy(rng);
    CHECK(std::fabs(sum(step_mrl(u, stepper, -17.3)) - 1.0) <= 1e-10);
  }
}

TEST_CASE("MRL is stable at timesteps where Euler diverges") {
  // at +40 mV the stiffest rate pair gives |lambda| dt ~ 3.5 at dt = 100 us
  const VoltageGrid g = VoltageGrid::from_range(35.0, 45.0, 0.1);
  const StepperTable stepper = build_stepper(build_eigen_table(g), 0.1);
  const RateSet r = eval_rates(40.0);

  StateOccupancy u_mrl{};
  u_mrl[R] = 1.0;
  StateOccupancy u_fe = u_mrl;
  bool fe_diverged = false;
  for (int n = 0; n < 2000; ++n) {
    u_mrl = step_mrl(u_mrl, stepper, 40.0);
    u_fe = step_fe(u_fe, r, 0.1);
    if (max_abs(u_fe) > 10.0) fe_diverged = true;
    REQUIRE(max_abs(u_mrl) <= 1.0 + 1e-9);
  }
  CHECK(fe_diverged);
}

TEST_CASE("gate Rush-Larsen update") {
  const double y = 0.2, yss = 0.9, tau = 3.0;
  CHECK(step_gate_rl(y, yss, tau, 0.0) == doctest::Approx(y).epsilon(1e-14));
  CHECK(step_gate_rl(y, yss, tau, 1e9) == doctest::Approx(yss).epsilon(1e-15));

  // agrees with Euler to second order for dt << tau
  auto fe = [&](double dt) { return y + dt * (yss - y) / tau; };
  const double d1 = std::fabs(step_gate_rl(y, yss, tau, 0.02) - fe(0.02));
  const double d2 = std::fabs(step_gate_rl(y, yss, tau, 0.01) - fe(0.01));
  CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("tabulated hybrid coefficients reproduce the direct step") {
  const VoltageGrid g = VoltageGrid::from_range(-100.0, 70.0, 1.0);
  const HosCoeffTable table = build_hos_coeff_table(g, 0.04);
  std::mt19937_64 rng(53);
  const StateOccupancy u = testutil::random_occupancy(rng);
  for (std::uint32_t j = 0; j < g.count; j += 13) {
    const double vm = g.voltage(j);
    const StateOccupancy a = step_hos(u, table, vm);
    const StateOccupancy b = step_hos(u, eval_rates(vm), 0.04);
    REQUIRE(a == b);  // identical arithmetic on identical rates
  }
  CHECK(table.fallbacks.empty());  // no grid point collides on this model
}
