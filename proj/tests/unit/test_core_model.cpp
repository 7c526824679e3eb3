#include <doctest.h>

#include "timsrf/core_model.hpp"
#include "timsrf/errors.hpp"

#include "oracles.hpp"

using namespace timsrf;

namespace {

ProblemInstance single(int label, bool label_seen, double x, bool x_seen) {
  Matrix f(1, 1);
  f << x;
  LabelMatrix y(1, 1);
  y << (label_seen ? label : 0);
  IndexSet ox, oy;
  if (x_seen) ox.push_back({0, 0});
  if (label_seen) oy.push_back({0, 0});
  return ProblemInstance(f, y, ox, oy);
}

} // namespace

TEST_CASE("stack concatenates labels, features and a ones column") {
  const auto z = stack(single(+1, true, 3.0, true));
  REQUIRE(z.cols() == 3);
  CHECK(z.entries()(0, 0) == 1.0);
  CHECK(z.entries()(0, 1) == 3.0);
  CHECK(z.entries()(0, 2) == 1.0);
}

TEST_CASE("stack carries unobserved entries as zero") {
  const auto z = stack(single(0, false, 7.5, false));
  CHECK(z.entries()(0, 0) == 0.0);
  CHECK(z.entries()(0, 1) == 0.0);
  CHECK(z.entries()(0, 2) == 1.0);
}

TEST_CASE("empty label zone is legal") {
  Matrix f(2, 1);
  f << 5, -2;
  const ProblemInstance p(f, LabelMatrix(2, 0), {{0, 0}, {1, 0}}, {});
  const auto z = stack(p);
  Matrix want(2, 2);
  want << 5, 1, -2, 1;
  CHECK(z.entries() == want);
  CHECK(z.label_width() == 0);
}

TEST_CASE("an instance with no rows is rejected") {
  CHECK_THROWS_AS(ProblemInstance(Matrix(0, 2), LabelMatrix(0, 1), {}, {}), InvalidInstance);
}

TEST_CASE("unstack splits the zones") {
  Matrix e(1, 3);
  e << 0.7, 3.0, 1.0;
  const auto parts = unstack(StackedMatrix(e, 1, 1));
  CHECK(parts.soft_labels(0, 0) == 0.7);
  CHECK(parts.features(0, 0) == 3.0);

  Matrix e2(2, 3);
  e2 << 1, 2, 1, 3, 4, 1;
  const auto p2 = unstack(StackedMatrix(e2, 0, 2));
  CHECK(p2.soft_labels.cols() == 0);
  CHECK(p2.features == e2.leftCols(2));
}

TEST_CASE("StackedMatrix checks its width") {
  CHECK_THROWS_AS(StackedMatrix(Matrix::Zero(2, 3), 1, 2), InputError);
}

TEST_CASE("instance invariants are enforced") {
  Matrix f = Matrix::Zero(2, 2);
  LabelMatrix y = LabelMatrix::Zero(2, 1);
  SUBCASE("observed label must be +-1") {
    CHECK_THROWS_AS(ProblemInstance(f, y, {}, {{0, 0}}), InvalidInstance);
  }
  SUBCASE("unobserved label must be 0") {
    y(1, 0) = 1;
    CHECK_THROWS_AS(ProblemInstance(f, y, {}, {}), InvalidInstance);
  }
  SUBCASE("observed feature must be finite") {
    f(0, 1) = std::nan("");
    CHECK_THROWS_AS(ProblemInstance(f, y, {{0, 1}}, {}), InvalidInstance);
  }
  SUBCASE("indices in range") {
    CHECK_THROWS_AS(ProblemInstance(f, y, {{2, 0}}, {}), InvalidInstance);
    CHECK_THROWS_AS(ProblemInstance(f, y, {}, {{0, 1}}), InvalidInstance);
  }
}

TEST_CASE("masked() zeroes labels outside the observed set") {
  LabelMatrix y(2, 2);
  y << 1, -1, -1, 1;
  const auto p = ProblemInstance::masked(Matrix::Ones(2, 1), y, {{0, 0}}, {{1, 1}});
  CHECK(p.labels()(0, 0) == 0);
  CHECK(p.labels()(1, 1) == 1);
  CHECK(p.label_mask()(1, 1));
  CHECK_FALSE(p.label_mask()(0, 0));
}

TEST_CASE("stack/unstack round-trip on observed entries") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const Index n = 1 + rng() % 8, d = 1 + rng() % 5, t = rng() % 4;
    Matrix f = oracle::gaussian(n, d, rng);
    LabelMatrix y(n, t);
    IndexSet ox, oy;
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < d; ++j)
        if (rng() % 2) ox.push_back({i, j});
      for (Index j = 0; j < t; ++j) y(i, j) = rng() % 2 ? 1 : -1;
      for (Index j = 0; j < t; ++j)
        if (rng() % 2) oy.push_back({i, j});
    }
    const auto p = ProblemInstance::masked(f, y, ox, oy);
    const auto z = stack(p);
    CHECK(z.entries().col(z.ones_column()).isOnes());
    const auto parts = unstack(z);
    for (const auto& e : p.observed_features())
      CHECK(parts.features(e.row, e.col) == p.features()(e.row, e.col));
    for (const auto& e : p.observed_labels())
      CHECK(parts.soft_labels(e.row, e.col) == p.labels()(e.row, e.col));
  }
}

TEST_CASE("index sets and masks convert both ways") {
  IndexSet s{{1, 0}, {0, 1}, {1, 0}};
  const auto c = canonical(s);
  REQUIRE(c.size() == 2);
  CHECK(c[0] == Entry{0, 1});
  const auto m = to_mask(c, 2, 2);
  CHECK(m.count() == 2);
  CHECK(from_mask(m) == c);
}

TEST_CASE("solver config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.step_size == 3.0);
  CHECK(c.delta_decay == 0.7);
  CHECK(c.alpha_min == 0.1);
  CHECK(c.alpha_max == 3.0);
  CHECK(c.memory_size == 5);
  CHECK(c.sufficient_decrease == 0.1);
  CHECK(c.backtrack_factor == 0.35);
  CHECK(c.delta_init_factor == 25.0);

  auto bad = c;
  bad.delta_decay = 1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.alpha_max = 0.05;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.memory_size = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.label_margin = -1;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}
