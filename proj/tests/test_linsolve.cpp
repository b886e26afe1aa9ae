#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <random>
#include <vector>

#include "vvp/linsolve.hpp"

using namespace vvp;

namespace {

struct Trip {
  int r, c;
  double v;
};

std::vector<Trip> random_system(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<Trip> t;
  for (int i = 0; i < n; ++i) t.push_back({i, i, 4.0 + uni(rng)});  // dominant diagonal
  std::uniform_int_distribution<int> idx(0, n - 1);
  for (int k = 0; k < 5 * n; ++k) t.push_back({idx(rng), idx(rng), uni(rng)});
  return t;
}

}  // namespace

TEST_CASE("sparse solve agrees with a dense LU oracle") {
  const int n = 12;
  const auto trips = random_system(n, 2024);
  SparseSystem sys(n);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (const auto& t : trips) {
    sys.add(t.r, t.c, t.v);
    dense(t.r, t.c) += t.v;
  }
  std::vector<double> b(n);
  for (int i = 0; i < n; ++i) b[i] = std::sin(1.0 + i);
  const auto x = sys.solve(b);
  const Eigen::VectorXd bx = Eigen::Map<const Eigen::VectorXd>(b.data(), n);
  const Eigen::VectorXd want = Eigen::PartialPivLU<Eigen::MatrixXd>(dense).solve(bx);
  for (int i = 0; i < n; ++i) CHECK(x[i] == Catch::Approx(want(i)).margin(1e-12));
}

TEST_CASE("duplicate triplets accumulate") {
  SparseSystem sys(2);
  sys.add(0, 0, 1.0);
  sys.add(0, 0, 1.0);
  sys.add(0, 0, 1.0);
  sys.add(1, 1, 2.0);
  const auto x = sys.solve({6.0, 4.0});
  CHECK(x[0] == Catch::Approx(2.0));
  CHECK(x[1] == Catch::Approx(2.0));
}

TEST_CASE("solution is bitwise independent of insertion order") {
  const int n = 30;
  auto trips = random_system(n, 99);
  std::vector<double> b(n);
  for (int i = 0; i < n; ++i) b[i] = std::cos(0.5 * i);

  SparseSystem a(n);
  for (const auto& t : trips) a.add(t.r, t.c, t.v);
  const auto xa = a.solve(b);

  std::mt19937_64 rng(7);
  for (int round = 0; round < 3; ++round) {
    std::shuffle(trips.begin(), trips.end(), rng);
    SparseSystem s(n);
    for (const auto& t : trips) s.add(t.r, t.c, t.v);
    const auto xs = s.solve(b);
    for (int i = 0; i < n; ++i) CHECK(xs[i] == xa[i]);  // exact equality
  }
}

TEST_CASE("structural singularity names the empty row or column") {
  SparseSystem sys(3);
  sys.add(0, 0, 1.0);
  sys.add(2, 2, 1.0);
  sys.add(2, 1, 1.0);  // row 1 stays empty
  try {
    sys.solve({1.0, 1.0, 1.0});
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }

  SparseSystem cols(2);
  cols.add(0, 0, 1.0);
  cols.add(1, 0, 1.0);  // column 1 stays empty
  try {
    cols.solve({1.0, 1.0});
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("column 1") != std::string::npos);
  }
}

TEST_CASE("numerically singular matrices are rejected") {
  SparseSystem sys(2);
  sys.add(0, 0, 1.0);
  sys.add(0, 1, 1.0);
  sys.add(1, 0, 1.0);
  sys.add(1, 1, 1.0);
  CHECK_THROWS(sys.solve({1.0, 2.0}));
}

TEST_CASE("saddle point systems with zero diagonal blocks solve exactly") {
  SparseSystem sys(3);
  sys.add(0, 0, 1.0);
  sys.add(1, 1, 1.0);
  sys.add(0, 2, 1.0);
  sys.add(1, 2, 1.0);
  sys.add(2, 0, 1.0);
  sys.add(2, 1, 1.0);
  const auto x = sys.solve({2.0, 3.0, 1.0});
  CHECK(x[0] == Catch::Approx(0.0).margin(1e-13));
  CHECK(x[1] == Catch::Approx(1.0).margin(1e-13));
  CHECK(x[2] == Catch::Approx(2.0).margin(1e-13));
}

TEST_CASE("refinement meets the residual contract on an ill-conditioned system") {
  const int n = 8;
  SparseSystem sys(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sys.add(i, j, 1.0 / (i + j + 1));  // Hilbert block
  std::vector<double> b(n, 1.0);
  const auto x = sys.solve(b);
  const auto ax = sys.apply(x);
  double rinf = 0.0;
  for (int i = 0; i < n; ++i) rinf = std::max(rinf, std::abs(ax[i] - b[i]));
  CHECK(rinf <= 1e-10);
}

TEST_CASE("out-of-range indices and size mismatches are rejected") {
  SparseSystem sys(2);
  CHECK_THROWS_AS(sys.add(2, 0, 1.0), std::out_of_range);
  CHECK_THROWS_AS(sys.add(0, -1, 1.0), std::out_of_range);
  sys.add(0, 0, 1.0);
  sys.add(1, 1, 1.0);
  CHECK_THROWS_AS(sys.solve({1.0}), std::invalid_argument);
}
