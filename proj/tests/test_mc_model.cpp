#include <doctest.h>

#include <random>

#include "mcina/mc_model.hpp"
#include "oracles.hpp"

using namespace mcina;

TEST_CASE("transition rates at 0 mV match the closed forms") {
  const RateSet r = eval_rates(0.0);
  // 3.802/(0.1027 + 0.20), both exponentials equal to one
  CHECK(r.a11 == doctest::Approx(12.5603).epsilon(1e-5));
  CHECK(r.b3 == 8.4e-3);               // linear term vanishes
  CHECK(r.a2 == 9.178);                // exp(0) = 1
  CHECK(r.b11 == 0.1917);
}

TEST_CASE("derived-rate identities hold for all potentials") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uv(-100.0, 70.0);
  for (int i = 0; i < 200; ++i) {
    const RateSet r = eval_rates(uv(rng));
    CHECK(std::fabs(r.b2 * r.b13 * r.b3 - r.a13 * r.a2 * r.a3) <=
          1e-15 * std::fabs(r.a13 * r.a2 * r.a3));
    CHECK(r.a4 == r.a2 / 100.0);
    CHECK(r.b4 == r.a3);
    CHECK(r.a5 == r.a2 / 9.5e4);
    CHECK(r.b5 == r.a3 / 50.0);
  }
}

TEST_CASE("rates are positive across the physiological range") {
  for (int j = 0; j <= 1700; ++j) {
    const RateSet r = eval_rates(-100.0 + 0.1 * j);
    for (double v : {r.a11, r.a12, r.a13, r.b11, r.b12, r.b13, r.a2, r.b2, r.a3, r.b3, r.a4, r.b4,
                     r.a5, r.b5})
      REQUIRE(v > 0.0);
  }
}

TEST_CASE("non-finite potential is rejected") {
  CHECK_THROWS_AS(eval_rates(std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(eval_rates(1.0 / 0.0), std::invalid_argument);
}

TEST_CASE("full generator encodes the chain") {
  const RateSet r = eval_rates(-20.0);
  const Mat9 a = assemble_full(r);
  CHECK(a(O, P) == r.a13);  // P -> O
  CHECK(a(U, O) == r.a2);   // O -> U
  CHECK(a(W, V) == r.a5);   // V -> W
  CHECK(a(O, U) == r.b2);   // U -> O

  // exactly 22 off-diagonal nonzeros, the 11 bidirectional edges
  int nonzeros = 0;
  for (int i = 0; i < kStates; ++i)
    for (int j = 0; j < kStates; ++j)
      if (i != j && a(i, j) != 0.0) ++nonzeros;
  CHECK(nonzeros == 22);
}

TEST_CASE("columns of the generator sum to zero") {
  for (double vm : {-80.0, 0.0, 40.0}) {
    const Mat9 a = assemble_full(eval_rates(vm));
    const double scale = max_abs(a);
    for (int c = 0; c < kStates; ++c) {
      double s = 0.0;
      for (int rw = 0; rw < kStates; ++rw) s += a(rw, c);
      CHECK(std::fabs(s) <= 1e-13 * scale);
    }
  }
}

TEST_CASE("generator annihilates its steady state") {
  for (double vm : {-60.0, -20.0, 10.0}) {
    const Mat9 a = assemble_full(eval_rates(vm));
    const Vec9 ss = testutil::steady_state(a);  // brute-force linear solve
    const Vec9 res = a * ss;
    double nrm = 0.0;
    for (double x : res) nrm += x * x;
    CHECK(std::sqrt(nrm) <= 1e-12 * frobenius_norm(a));
  }
}

TEST_CASE("conservation of the column-sum identity under the dynamics") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> uv(-100.0, 70.0);
  for (int i = 0; i < 100; ++i) {
    const Mat9 a = assemble_full(eval_rates(uv(rng)));
    const StateOccupancy u = testutil::random_occupancy(rng);
    CHECK(std::fabs(sum(a * u)) <= 1e-13 * frobenius_norm(a));
  }
}

TEST_CASE("split places every rate in its speed class") {
  const RateSet r0 = eval_rates(0.0);
  const SplitGenerators g = assemble_split(r0);

  CHECK(g.fast_high(U, O) == 9.178);   // rate(O->U) at 0 mV, exp(0) = 1
  CHECK(g.fast_high(O, O) == -9.178);  // diagonal closes the column

  // rows V and W of both fast parts are identically zero
  for (int c = 0; c < kStates; ++c) {
    CHECK(g.fast_high(V, c) == 0.0);
    CHECK(g.fast_high(W, c) == 0.0);
    CHECK(g.fast_low(V, c) == 0.0);
    CHECK(g.fast_low(W, c) == 0.0);
  }

  // each fast part has zero column sums on its own
  for (const Mat9* part : {&g.fast_high, &g.fast_low, &g.slow}) {
    for (int c = 0; c < kStates; ++c) {
      double s = 0.0;
      for (int rw = 0; rw < kStates; ++rw) s += (*part)(rw, c);
      CHECK(std::fabs(s) <= 1e-13 * std::max(1.0, max_abs(*part)));
    }
  }
}

TEST_CASE("split parts add up to the full generator bitwise") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uv(-100.0, 70.0);
  for (int i = 0; i < 100; ++i) {
    const RateSet r = eval_rates(uv(rng));
    const SplitGenerators g = assemble_split(r);
    const Mat9 total = g.fast_high + g.fast_low + g.slow;
    for (int k = 0; k < kStates * kStates; ++k) REQUIRE(total.m[k] == g.full.m[k]);
    const Mat9 full = assemble_full(r);
    for (int k = 0; k < kStates * kStates; ++k) REQUIRE(full.m[k] == g.full.m[k]);
  }
}

TEST_CASE("voltage derivative of the generator") {
  const GeneratorDerivative d = generator_derivative(-30.0);

  // the P->U, Q->T, R->S rate is 8.4e-3 + 2e-5*vm; its slope appears exactly
  // on the slow part's diagonal
  CHECK(d.slow(P, P) == doctest::Approx(-2e-5).epsilon(1e-9));
  CHECK(d.slow(U, P) == doctest::Approx(2e-5).epsilon(1e-9));

  // linearity: parts sum to the full derivative
  const Mat9 total = d.fast_high + d.fast_low + d.slow;
  CHECK(testutil::max_abs_diff(total, d.full) <= 1e-12 * std::max(1.0, max_abs(d.full)));
}

TEST_CASE("central difference converges at second order") {
  // Richardson: err(h) ~ c h^2, so D(2h)-D(h) vs D(h)-D(h/2) gives ~4
  const double h = 2e-3;
  const Mat9 d2h = generator_derivative(0.0, 2 * h).full;
  const Mat9 dh = generator_derivative(0.0, h).full;
  const Mat9 dh2 = generator_derivative(0.0, h / 2).full;
  const double delta1 = testutil::max_abs_diff(d2h, dh);
  const double delta2 = testutil::max_abs_diff(dh, dh2);
  CHECK(delta1 / delta2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("rate monotonicity across the grid") {
  double prev_a2 = 0.0, prev_b11 = 1e300;
  for (int j = 0; j <= 1700; ++j) {
    const RateSet r = eval_rates(-100.0 + 0.1 * j);
    REQUIRE(r.a2 > prev_a2);
    REQUIRE(r.b11 < prev_b11);
    prev_a2 = r.a2;
    prev_b11 = r.b11;
  }
}

TEST_CASE("column sums stay zero over a dense grid") {
  for (int j = 0; j < 2000; ++j) {
    const double vm = -100.0 + j * (170.0 / 1999.0);
    const Mat9 a = assemble_full(eval_rates(vm));
    const double scale = max_abs(a);
    for (int c = 0; c < kStates; ++c) {
      double s = 0.0;
      for (int rw = 0; rw < kStates; ++rw) s += a(rw, c);
      REQUIRE(std::fabs(s) <= 1e-13 * scale);
    }
  }
}
