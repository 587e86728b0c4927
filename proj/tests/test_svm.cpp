#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "venuestab/svm.hpp"

using namespace venuestab;

namespace {

struct Blobs {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
};

// Two 2D blobs centered at (+-2, 0) with coordinates clipped to +-0.95 of the
// center, so the class margin along x is at least 2.1.
Blobs make_blobs(std::size_t n, uint64_t seed) {
  Blobs b;
  std::mt19937_64 rng(seed);
  auto u = [&]() { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; };
  for (std::size_t i = 0; i < n; ++i) {
    int label = i % 2 == 0 ? 1 : -1;
    double cx = label * 2.0;
    b.rows.push_back({cx + 0.95 * u(), 0.95 * u()});
    b.labels.push_back(label);
  }
  return b;
}

Blobs make_xor() {
  Blobs b;
  b.rows = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  b.labels = {1, 1, -1, -1};
  return b;
}

bool models_identical(const SvmModel& a, const SvmModel& b) {
  return a.bias == b.bias && a.support_vectors == b.support_vectors &&
         a.dual_coefs == b.dual_coefs && a.scaler.means == b.scaler.means &&
         a.scaler.stds == b.scaler.stds;
}

}  // namespace

TEST_CASE("rbf kernel basics") {
  std::vector<double> x{1.0, 2.0}, z{2.0, 2.0};
  CHECK(rbf_kernel(x, x, 0.7) == 1.0);
  // ||x-z||^2 = 1, gamma = ln 2.
  CHECK(rbf_kernel(x, z, std::log(2.0)) == Catch::Approx(0.5).margin(1e-12));
  CHECK(rbf_kernel(x, z, 1e-12) == Catch::Approx(1.0).margin(1e-9));
  CHECK(rbf_kernel(x, z, 3.0) == rbf_kernel(z, x, 3.0));
  CHECK_THROWS_AS(rbf_kernel(x, std::vector<double>{1.0}, 1.0), ValidationError);
  CHECK_THROWS_AS(rbf_kernel(x, z, 0.0), ConfigError);
}

TEST_CASE("smo separates two blobs") {
  Blobs b = make_blobs(200, 123);
  TrainResult r = train_smo(b.rows, b.labels, 0.5, 10.0);
  double correct = 0;
  for (std::size_t i = 0; i < b.rows.size(); ++i)
    if (r.model.predict(b.rows[i]) == b.labels[i]) ++correct;
  CHECK(correct / static_cast<double>(b.rows.size()) >= 0.99);

  // Support vectors themselves are classified correctly on separable data.
  SmoOptions no_std;
  no_std.standardize = false;
  TrainResult raw = train_smo(b.rows, b.labels, 0.5, 10.0, no_std);
  for (std::size_t i = 0; i < b.rows.size(); ++i) {
    if (raw.alpha[i] > 0.0 && raw.alpha[i] < 10.0)
      CHECK(raw.model.predict(b.rows[i]) == b.labels[i]);
  }
}

TEST_CASE("smo shatters xor with an rbf kernel") {
  Blobs b = make_xor();
  for (bool standardize : {true, false}) {
    SmoOptions opts;
    opts.standardize = standardize;
    TrainResult r = train_smo(b.rows, b.labels, 1.0, 1e6, opts);
    for (std::size_t i = 0; i < b.rows.size(); ++i)
      CHECK(r.model.predict(b.rows[i]) == b.labels[i]);
  }
}

TEST_CASE("smo is deterministic") {
  Blobs b = make_blobs(80, 7);
  TrainResult r1 = train_smo(b.rows, b.labels, 0.7, 5.0);
  TrainResult r2 = train_smo(b.rows, b.labels, 0.7, 5.0);
  CHECK(models_identical(r1.model, r2.model));
  CHECK(r1.alpha == r2.alpha);
}

TEST_CASE("smo rejects degenerate input") {
  CHECK_THROWS_AS(train_smo({{1.0}, {2.0}}, {1, 1}, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(train_smo({{1.0}}, {1}, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(train_smo({{1.0}, {2.0}}, {1, 0}, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(train_smo({{1.0}, {2.0}}, {1, -1}, 1.0, -1.0), ConfigError);
}

TEST_CASE("trained models satisfy dual feasibility") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 12; ++trial) {
    Blobs b = make_blobs(20 + rng() % 60, rng());
    double gamma = 0.1 + static_cast<double>(rng() % 20) / 10.0;
    double c = std::pow(10.0, static_cast<double>(rng() % 5) - 1.0);
    TrainResult r = train_smo(b.rows, b.labels, gamma, c);
    long double sum = 0.0L;
    for (std::size_t i = 0; i < r.alpha.size(); ++i) {
      CHECK(r.alpha[i] >= 0.0);  // box constraints hold exactly
      CHECK(r.alpha[i] <= c);
      sum += static_cast<long double>(r.alpha[i]) * b.labels[i];
    }
    CHECK(std::fabs(static_cast<double>(sum)) < 1e-6);
    // Support vectors are exactly the rows with positive alpha.
    std::size_t positive = 0;
    for (double a : r.alpha)
      if (a > 0.0) ++positive;
    CHECK(r.model.support_vectors.size() == positive);
    CHECK(r.model.dual_coefs.size() == positive);
  }
}

TEST_CASE("smo objective matches active-set brute force on tiny problems") {
  std::mt19937_64 rng(2024);
  auto uniform = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    int n = 2 + static_cast<int>(rng() % 7);  // up to 8 points
    int dim = 1 + static_cast<int>(rng() % 3);
    std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
    std::vector<int> y(n);
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < dim; ++d) rows[i][d] = 4.0 * uniform() - 2.0;
      y[i] = uniform() < 0.5 ? 1 : -1;
      (y[i] == 1 ? has_pos : has_neg) = true;
    }
    if (!has_pos) y[0] = 1;
    if (!has_neg) y[n - 1] = -1;
    double gamma = 0.3 + 1.5 * uniform();
    double c = std::vector<double>{0.5, 1.0, 10.0, 100.0}[rng() % 4];

    std::vector<std::vector<double>> kernel(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) kernel[i][j] = rbf_kernel(rows[i], rows[j], gamma);
    oracles::DualSolution exact = oracles::brute_force_dual(kernel, y, c);
    REQUIRE(exact.found);

    SmoOptions opts;
    opts.standardize = false;
    opts.tol = 1e-5;
    TrainResult r = train_smo(rows, y, gamma, c, opts);
    CHECK(std::fabs(r.objective - exact.objective) <=
          1e-3 * std::max(1.0, std::fabs(exact.objective)));
    ++checked;
  }
  CHECK(checked == 60);
}

TEST_CASE("decision values are antisymmetric under label flip") {
  Blobs b = make_blobs(40, 99);
  SmoOptions opts;
  opts.standardize = false;
  TrainResult r = train_smo(b.rows, b.labels, 0.8, 5.0, opts);
  std::vector<int> flipped;
  for (int label : b.labels) flipped.push_back(-label);
  TrainResult rf = train_smo(b.rows, flipped, 0.8, 5.0, opts);
  CHECK(rf.model.bias == Catch::Approx(-r.model.bias).margin(1e-12));
  for (const auto& probe :
       std::vector<std::vector<double>>{{0.0, 0.0}, {1.5, -0.4}, {-2.2, 0.3}})
    CHECK(rf.model.decision(probe) == Catch::Approx(-r.model.decision(probe)).margin(1e-12));
}

TEST_CASE("decision far from all support vectors approaches the bias") {
  Blobs b = make_blobs(60, 5);
  TrainResult r = train_smo(b.rows, b.labels, 1.0, 10.0);
  CHECK(r.model.decision({5000.0, -4800.0}) == Catch::Approx(r.model.bias).margin(1e-9));
}

TEST_CASE("standardized pipeline is self-consistent") {
  Blobs b = make_blobs(50, 17);
  // Shift and scale one coordinate wildly; standardization should absorb it.
  for (auto& row : b.rows) row[1] = row[1] * 1000.0 + 777.0;
  TrainResult r = train_smo(b.rows, b.labels, 0.5, 10.0);
  CHECK(r.model.standardize);
  double correct = 0;
  for (std::size_t i = 0; i < b.rows.size(); ++i)
    if (r.model.predict(b.rows[i]) == b.labels[i]) ++correct;
  CHECK(correct / static_cast<double>(b.rows.size()) >= 0.99);
  // Transform parameters came from the training rows.
  CHECK(r.model.scaler.means[1] == Catch::Approx(777.0).margin(1000.0 * 0.6));
  // Prediction path applies the stored transform: re-running is identical.
  TrainResult r2 = train_smo(b.rows, b.labels, 0.5, 10.0);
  for (const auto& row : b.rows) CHECK(r.model.decision(row) == r2.model.decision(row));
}

TEST_CASE("standardizer handles constant features") {
  Standardizer s;
  s.fit({{1.0, 5.0}, {2.0, 5.0}, {3.0, 5.0}});
  CHECK(s.stds[1] == 1.0);
  auto t = s.transform({2.0, 5.0});
  CHECK(t[0] == Catch::Approx(0.0).margin(1e-12));
  CHECK(t[1] == Catch::Approx(0.0).margin(1e-12));
  CHECK_THROWS_AS(s.transform({1.0}), ValidationError);
}
