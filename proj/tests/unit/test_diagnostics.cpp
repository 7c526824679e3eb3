#include <doctest.h>

#include <cmath>

#include "timsrf/data_io.hpp"
#include "timsrf/diagnostics.hpp"
#include "timsrf/errors.hpp"
#include "timsrf/solvers.hpp"

#include "oracles.hpp"

using namespace timsrf;
using doctest::Approx;

TEST_CASE("alpha_delta matches a bisection root") {
  CHECK(alpha_delta(QraProfile(0.1), 4) == Approx(oracle::bisect_alpha(0.1, 4)).epsilon(1e-10));
  CHECK(alpha_delta(QraProfile(0.1), 4) == Approx(0.16651).epsilon(1e-4));
  CHECK(alpha_delta(QraProfile(1), 2) == Approx(oracle::bisect_alpha(1, 2)).epsilon(1e-10));
  CHECK(alpha_delta(QraProfile(1), 2) == Approx(1.17741).epsilon(1e-5));
  for (Index n : {3, 10, 200})
    for (double d : {0.01, 0.7, 30.0})
      CHECK(alpha_delta(QraProfile(d), n) == Approx(oracle::bisect_alpha(d, double(n))).epsilon(1e-9));
}

TEST_CASE("alpha_delta edge cases and scaling") {
  CHECK(alpha_delta(QraProfile(1e-12), 50) < 1e-10);
  CHECK(alpha_delta(QraProfile(3), 1) == 0.0);
  CHECK_THROWS_AS(alpha_delta(QraProfile(1), 0), InvalidArgument);
  const double a1 = alpha_delta(QraProfile(1), 17);
  CHECK(alpha_delta(QraProfile(2.5), 17) == Approx(2.5 * a1).epsilon(1e-14));
}

TEST_CASE("recovery bound arithmetic") {
  const auto b = recovery_bound(QraProfile(0.1), 4, 2.0);
  CHECK(b.bound == Approx(4 * 0.166511 / (std::sqrt(2.0) - 1)).epsilon(1e-5));
  CHECK(b.bound == Approx(1.6079).epsilon(1e-4));
  CHECK(b.alpha_delta == Approx(alpha_delta(QraProfile(0.1), 4)).epsilon(1e-15));
  CHECK(b.n == 4);
  const auto one = recovery_bound(QraProfile(0.5), 9, 1.0);
  CHECK(one.bound == Approx(9 * one.alpha_delta).epsilon(1e-14));
  double previous = INFINITY;
  for (double d : {1.0, 0.1, 0.01, 1e-8}) {
    const double v = recovery_bound(QraProfile(d), 10, 2.5).bound;
    CHECK(v < previous);
    previous = v;
  }
  CHECK(previous < 1e-4);
}

TEST_CASE("recovery bound undefined when the denominator vanishes") {
  CHECK_THROWS_AS(recovery_bound(QraProfile(1), 4, 0.0), BoundUndefined);
  CHECK_THROWS_AS(recovery_bound(QraProfile(1), 4, -1.0), BoundUndefined);
}

TEST_CASE("rank condition is advisory arithmetic") {
  CHECK(rank_condition_holds(1, 2.5));
  CHECK_FALSE(rank_condition_holds(2, 4.0));
}

TEST_CASE("spherical section estimate") {
  SUBCASE("nothing kept: a rank-1 sample attains the minimum 1") {
    const AffineObservationOperator op(4, 5, {});
    CHECK(spherical_section_estimate(op, 3, 1) == Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("everything kept has no null space") {
    IndexSet all;
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j) all.push_back({i, j});
    CHECK_THROWS_AS(spherical_section_estimate(AffineObservationOperator(3, 3, all), 10, 0),
                    NoNullSpace);
  }
  SUBCASE("half kept: estimate at least 1 and bounded by min(n1, n2)") {
    std::mt19937_64 rng(2);
    IndexSet half;
    for (Index i = 0; i < 5; ++i)
      for (Index j = 0; j < 5; ++j)
        if (rng() % 2) half.push_back({i, j});
    const AffineObservationOperator op(5, 5, half);
    const double e = spherical_section_estimate(op, 10000, 42);
    CHECK(e >= 1.0);
    CHECK(e <= 5.0);
    CHECK(spherical_section_estimate(op, 10000, 42) == e);
  }
  SUBCASE("more samples never raise the estimate") {
    const AffineObservationOperator op(6, 4, {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {5, 0}});
    double previous = INFINITY;
    for (int m : {1, 2, 5, 20, 100, 1000}) {
      const double e = spherical_section_estimate(op, m, 9);
      CHECK(e <= previous);
      CHECK(e >= 1.0);
      previous = e;
    }
  }
}

TEST_CASE("operator keeps the fixed coordinates in column-major order") {
  const AffineObservationOperator op(2, 2, {{1, 0}, {0, 1}});
  Matrix z(2, 2);
  z << 1, 2, 3, 4;
  // vec(T(Z)): free coordinates read as zero
  const Vector v = op.apply(z);
  REQUIRE(v.size() == 4);
  CHECK(v(0) == 0);
  CHECK(v(1) == 3);
  CHECK(v(2) == 2);
  CHECK(v(3) == 0);
  CHECK(op.free_count() == 2);
  CHECK_THROWS(AffineObservationOperator(2, 2, {{2, 0}}));
}

TEST_CASE("operator from an instance fixes observed features and the ones column") {
  Matrix f = Matrix::Zero(3, 2);
  const ProblemInstance p(f, LabelMatrix::Zero(3, 1), {{0, 0}, {2, 1}}, {});
  const auto op = AffineObservationOperator::from_instance(p);
  CHECK(op.rows() == 3);
  CHECK(op.cols() == 4);
  CHECK(op.fixed_coords().size() == 2 + 3);
}

TEST_CASE("QRA checks on the Gaussian") {
  for (double delta : {0.3, 1.0, 4.0}) {
    const QraProfile p(delta);
    std::vector<double> grid;
    for (int k = -50; k <= 50; ++k) grid.push_back(k * delta / 10);
    const auto r = qra_check(p, grid);
    CHECK(r.symmetric);
    CHECK(r.unique_peak);
    CHECK(r.concave_near_zero);
    CHECK(r.tail_decay);
    CHECK(r.all());
    CHECK(qra_value(p, -2 * delta) == qra_value(p, 2 * delta));
  }
}

TEST_CASE("second difference changes sign at the inflection x = delta") {
  const QraProfile p(1.5);
  const double h = 1e-3;
  CHECK(second_difference(p, 0.9 * 1.5, h) < 0);
  CHECK(second_difference(p, 1.1 * 1.5, h) > 0);
}

TEST_CASE("a narrow grid fails the tail check") {
  const QraProfile p(1);
  std::vector<double> grid;
  for (int k = -10; k <= 10; ++k) grid.push_back(k * 0.1);
  CHECK_FALSE(qra_check(p, grid).tail_decay);
}

TEST_CASE("stage error to the ground truth shrinks late in the schedule") {
  struct Stages : SolverObserver {
    std::vector<Matrix> z;
    void on_stage_end(int, double, const Matrix& m) override { z.push_back(m); }
  };
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto data = synthesize(30, 12, 4, 2, 0.0, seed);
    const auto masks = mcar_mask(30, 12, 4, MaskSpec{0.7, 0.0, seed + 7});
    const auto p = ProblemInstance::masked(data.dataset.features, data.dataset.labels,
                                           masks.features, masks.labels);
    SolverConfig c;
    c.label_margin = 0;
    Stages st;
    anneal(p, c, Method::pg, &st);
    REQUIRE(st.z.size() >= 4);
    auto err = [&](const Matrix& z) { return (z.middleCols(4, 12) - data.model.pre_features).norm(); };
    ok += err(st.z.back()) <= err(st.z[st.z.size() - 4]);
  }
  CHECK(ok >= 4);
}
