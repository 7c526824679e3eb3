#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "timsrf/data_io.hpp"
#include "timsrf/errors.hpp"

#include "oracles.hpp"

using namespace timsrf;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "timsrf_unit";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write(const std::string& name, const std::string& text) {
  const auto p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

} // namespace

TEST_CASE("load_csv minimal schema") {
  const auto ds = load_csv(write("min.csv", "a,label:y\n0.5,1\n-2,-1\n"));
  CHECK(ds.features.rows() == 2);
  CHECK(ds.features.cols() == 1);
  CHECK(ds.labels.cols() == 1);
  CHECK(ds.labels(0, 0) == 1);
  CHECK(ds.labels(1, 0) == -1);
  CHECK(ds.features(1, 0) == -2.0);
  CHECK(ds.label_names[0] == "y");
}

TEST_CASE("load_csv maps 0/1 labels to -1/+1") {
  const auto ds = load_csv(write("01.csv", "x,label:a,label:b\n1,0,1\n2,1,0\n"));
  CHECK(ds.labels(0, 0) == -1);
  CHECK(ds.labels(0, 1) == 1);
  CHECK(ds.labels(1, 1) == -1);
}

TEST_CASE("load_csv errors") {
  CHECK_THROWS_AS(load_csv(write("empty.csv", "")), SchemaError);
  CHECK_THROWS_AS(load_csv(write("nolabel.csv", "a,b\n1,2\n")), SchemaError);
  CHECK_THROWS_AS(load_csv(write("noheader.csv", "1,1\n2,-1\n")), SchemaError);
  CHECK_THROWS_AS(load_csv(write("bad.csv", "a,label:y\n1,1\nfoo,-1\n")), ParseError);
  CHECK_THROWS_AS(load_csv(write("badlabel.csv", "a,label:y\n1,2\n")), ParseError);
  CHECK_THROWS_AS(load_csv(write("ragged.csv", "a,label:y\n1\n")), ParseError);
  CHECK_THROWS_AS(load_csv(scratch("does_not_exist.csv")), InputError);
}

TEST_CASE("csv save/load round trip") {
  const auto s = synthesize(7, 4, 3, 2, 0.1, 5);
  const auto p = scratch("rt.csv");
  save_csv(s.dataset, p);
  const auto back = load_csv(p);
  CHECK(back.features == s.dataset.features);
  CHECK(back.labels == s.dataset.labels);
}

TEST_CASE("load_arff") {
  const std::string text =
      "% comment\n@relation 'toy: -C -2'\n"
      "@attribute f1 numeric\n@attribute f2 real\n"
      "@attribute l1 {0,1}\n@attribute l2 {0,1}\n"
      "@data\n0.1,2,1,0\n-3,4.5,0,1\n";
  const auto ds = load_arff(write("toy.arff", text));
  CHECK(ds.features.rows() == 2);
  CHECK(ds.features.cols() == 2);
  CHECK(ds.labels.cols() == 2);
  CHECK(ds.labels(0, 0) == 1);
  CHECK(ds.labels(0, 1) == -1);
  CHECK(ds.features(1, 1) == 4.5);

  SUBCASE("explicit label count takes trailing attributes") {
    const auto two = load_arff(write("toy.arff", text), 2);
    CHECK(two.labels == ds.labels);
    CHECK_THROWS_AS(load_arff(write("toy.arff", text), 3), ParseError);
    CHECK_THROWS_AS(load_arff(write("toy.arff", text), 5), SchemaError);
  }
  SUBCASE("leading labels via the relation option") {
    const auto lead = load_arff(write("lead.arff",
                                      "@relation 'x: -C 1'\n@attribute l {0,1}\n"
                                      "@attribute f numeric\n@data\n1,0.5\n0,2\n"));
    CHECK(lead.labels(0, 0) == 1);
    CHECK(lead.labels(1, 0) == -1);
    CHECK(lead.features(1, 0) == 2.0);
  }
  SUBCASE("without a count, {0,1} nominals are labels") {
    const auto plain = load_arff(write("plain.arff",
                                       "@relation p\n@attribute f numeric\n@attribute l {0,1}\n"
                                       "@data\n1,1\n2,0\n"));
    CHECK(plain.labels.cols() == 1);
    CHECK(plain.name == "p");
  }
}

TEST_CASE("load_arff rejects string and relational attributes") {
  CHECK_THROWS_AS(load_arff(write("s.arff", "@relation r\n@attribute s string\n@attribute l {0,1}\n@data\n'a',1\n")),
                  UnsupportedAttribute);
  CHECK_THROWS_AS(load_arff(write("d.arff", "@relation r\n@attribute s date\n@attribute l {0,1}\n@data\n1,1\n")),
                  UnsupportedAttribute);
  CHECK_THROWS_AS(load_arff(write("r.arff", "@relation r\n@attribute s relational\n@end s\n@attribute l {0,1}\n@data\n")),
                  UnsupportedAttribute);
  CHECK_THROWS_AS(load_arff(write("sp.arff", "@relation r\n@attribute a numeric\n@attribute l {0,1}\n@data\n{0 1, 1 1}\n")),
                  UnsupportedAttribute);
}

TEST_CASE("standardize") {
  Matrix f(3, 2);
  f << 2, 5, 4, 5, 100, 5;
  const IndexSet obs{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  const auto s = standardize(f, obs);
  CHECK(s.mean(0) == 3.0);
  CHECK(s.scale(0) == Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(s.features(0, 0) == Approx(-0.70710678).epsilon(1e-8));
  CHECK(s.features(1, 0) == Approx(0.70710678).epsilon(1e-8));
  CHECK(s.mean(1) == 5.0);
  CHECK(s.scale(1) == 1.0);
  CHECK(s.features(0, 1) == 0.0);

  const Matrix back = destandardize(s.features, s.mean, s.scale);
  for (const auto& e : obs) CHECK(std::abs(back(e.row, e.col) - f(e.row, e.col)) <= 1e-10);
}

TEST_CASE("standardize is idempotent on standardized columns") {
  std::mt19937_64 rng(1);
  const Matrix f = oracle::gaussian(20, 3, rng);
  IndexSet all = from_mask(Mask::Constant(20, 3, true));
  const auto once = standardize(f, all);
  const auto twice = standardize(once.features, all);
  CHECK((twice.features - once.features).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("standardize needs two observed entries per column") {
  CHECK_THROWS_AS(standardize(Matrix::Ones(3, 2), {{0, 0}, {1, 0}, {2, 1}}), DegenerateColumn);
}

TEST_CASE("mcar mask") {
  const auto all = mcar_mask(4, 3, 2, MaskSpec{1.0, 0.0, 3});
  CHECK(all.features.size() == 12);
  CHECK(all.labels.size() == 8);

  // n (d + t) = 10000
  const auto m = mcar_mask(100, 60, 40, MaskSpec{0.8, 0.0, 11});
  const double count = double(m.features.size() + m.labels.size());
  CHECK(std::abs(count - 8000) <= 3 * 40);

  const auto again = mcar_mask(100, 60, 40, MaskSpec{0.8, 0.0, 11});
  CHECK(again.features == m.features);
  CHECK(again.labels == m.labels);
  const auto other = mcar_mask(100, 60, 40, MaskSpec{0.8, 0.0, 12});
  CHECK(other.features != m.features);

  CHECK_THROWS_AS(mcar_mask(2, 2, 2, MaskSpec{0.0, 0.0, 0}), InvalidArgument);
  CHECK_THROWS_AS(mcar_mask(2, 2, 2, MaskSpec{1.5, 0.0, 0}), InvalidArgument);
}

TEST_CASE("block loss") {
  IndexSet full;
  for (Index i = 0; i < 10; ++i)
    for (Index j = 0; j < 3; ++j) full.push_back({i, j});
  const auto b = block_loss(full, 10, 3, 0.1, 4);
  REQUIRE(b.test_rows.size() == 1);
  for (const auto& e : b.observed_labels) CHECK(e.row != b.test_rows[0]);
  CHECK(b.observed_labels.size() == 27);

  IndexSet emo;
  for (Index i = 0; i < 593; ++i) emo.push_back({i, 0});
  const auto e = block_loss(emo, 593, 6, 0.1, 1);
  CHECK(e.test_rows.size() == 60);
  CHECK(std::is_sorted(e.test_rows.begin(), e.test_rows.end()));
  CHECK(block_loss(emo, 593, 6, 0.1, 1).test_rows == e.test_rows);

  CHECK_THROWS_AS(block_loss(full, 10, 3, 0.0, 1), InvalidArgument);
  CHECK_THROWS_AS(block_loss(full, 1, 3, 0.5, 1), EmptyTraining);
}

TEST_CASE("synthesize") {
  SUBCASE("full rank factor product") {
    const auto s = synthesize(12, 5, 3, 5, 0.0, 1);
    CHECK(oracle::numerical_rank(s.model.pre_features, 1e-10) == 5);
  }
  SUBCASE("stacked soft labels do not raise the rank") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto s = synthesize(40, 15, 6, 3, 0.0, seed);
      Matrix xo(40, 16), yxo(40, 22);
      xo << s.model.pre_features, Matrix::Ones(40, 1);
      yxo << s.model.soft_labels, s.model.pre_features, Matrix::Ones(40, 1);
      const Index r = oracle::numerical_rank(yxo, 1e-8);
      CHECK(r == oracle::numerical_rank(xo, 1e-8));
      CHECK(r <= 4);
      CHECK((s.dataset.labels.array() != 0).all());
      CHECK((s.model.soft_labels.array() != 0).all());
      CHECK(s.dataset.features == s.model.pre_features);
    }
  }
  SUBCASE("noise is added to features only") {
    const auto s = synthesize(10, 4, 2, 2, 0.5, 3);
    CHECK(s.dataset.features != s.model.pre_features);
    CHECK((s.dataset.labels.cast<double>().array() * s.model.soft_labels.array() > 0).all());
  }
  CHECK_THROWS_AS(synthesize(3, 2, 1, 3, 0.0, 0), InvalidArgument);
}

TEST_CASE("mask file round trip") {
  const auto m = mcar_mask(6, 4, 3, MaskSpec{0.5, 0.0, 8});
  const auto p = scratch("masks.txt");
  write_masks(m, p);
  const auto back = read_masks(p);
  CHECK(back.features == m.features);
  CHECK(back.labels == m.labels);
  CHECK_THROWS_AS(read_masks(write("bad_mask.txt", "Z 1 2\n")), ParseError);
}
