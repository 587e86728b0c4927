#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "venuestab/corpus.hpp"
#include "venuestab/stats.hpp"

using namespace venuestab;

TEST_CASE("t-test: identical samples give t=0, p=1") {
  std::vector<double> a{1.0, 2.0, 3.0};
  TTestResult r = t_test_two_sample(a, a);
  CHECK(r.t == 0.0);
  CHECK(r.p == 1.0);
}

TEST_CASE("t-test hand case {1..5} vs {3..7}") {
  std::vector<double> a{1, 2, 3, 4, 5}, b{3, 4, 5, 6, 7};
  TTestResult r = t_test_two_sample(a, b);
  CHECK(r.t == Catch::Approx(-2.0).margin(1e-12));
  CHECK(r.df == 8.0);
  // Quadrature oracle agrees to 1e-6; the commonly quoted value is 0.0805.
  CHECK(r.p == Catch::Approx(oracles::t_two_tailed_p_by_quadrature(-2.0, 8.0)).margin(1e-6));
  CHECK(r.p == Catch::Approx(0.0805).margin(1e-3));
  CHECK(r.p == Catch::Approx(0.08051623795726267).margin(1e-9));
}

TEST_CASE("t statistic is antisymmetric under swapping samples") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a, b;
    for (std::size_t i = 0; i < 2 + rng() % 10; ++i)
      a.push_back(static_cast<double>(rng() % 1000) / 100.0);
    for (std::size_t i = 0; i < 2 + rng() % 10; ++i)
      b.push_back(static_cast<double>(rng() % 1000) / 100.0);
    TTestResult ab = t_test_two_sample(a, b);
    TTestResult ba = t_test_two_sample(b, a);
    CHECK(ab.t == Catch::Approx(-ba.t).margin(1e-12));
    CHECK(ab.p == Catch::Approx(ba.p).margin(1e-12));
  }
}

TEST_CASE("t-test degenerate variance cases") {
  std::vector<double> c1{2.0, 2.0}, c2{2.0, 2.0, 2.0}, c3{5.0, 5.0};
  TTestResult same = t_test_two_sample(c1, c2);
  CHECK(same.t == 0.0);
  CHECK(same.p == 1.0);
  TTestResult diff = t_test_two_sample(c1, c3);
  CHECK(std::isinf(diff.t));
  CHECK(diff.t < 0.0);
  CHECK(diff.p == 0.0);
  CHECK_THROWS_AS(t_test_two_sample(std::vector<double>{1.0}, c1), ValidationError);
}

TEST_CASE("t tail probability matches quadrature across df and t") {
  for (double df : {1.0, 2.0, 5.0, 8.0, 20.0, 100.0}) {
    for (double t : {0.0, 0.3, 1.0, 2.0, 3.5, 6.0}) {
      double expected = oracles::t_two_tailed_p_by_quadrature(t, df);
      CHECK(students_t_two_tailed_p(t, df) == Catch::Approx(expected).margin(1e-6));
      CHECK(students_t_two_tailed_p(-t, df) == Catch::Approx(expected).margin(1e-6));
    }
  }
}

TEST_CASE("pearson hand cases") {
  std::vector<double> x{1, 2, 3};
  CHECK(pearson(x, x) == Catch::Approx(1.0).margin(1e-12));
  std::vector<double> neg{-1, -2, -3};
  CHECK(pearson(x, neg) == Catch::Approx(-1.0).margin(1e-12));
  std::vector<double> y{2, 4, 6.1};
  // Direct formula: Sxy / sqrt(Sxx*Syy) = 4.1 / sqrt(2 * 8.40666...).
  CHECK(pearson(x, y) == Catch::Approx(0.9999008674099175).margin(1e-12));
}

TEST_CASE("pearson matrix: shape, constant columns, affine invariance") {
  std::mt19937_64 rng(6);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 12; ++i) {
    std::vector<double> row;
    for (int j = 0; j < 5; ++j) row.push_back(static_cast<double>(rng() % 1000) / 100.0);
    row.push_back(7.0);  // constant column
    rows.push_back(row);
  }
  CorrelationMatrix m = pearson_matrix(rows);
  REQUIRE(m.size() == 6);
  REQUIRE(m.constant_columns == std::vector<std::size_t>{5});
  for (std::size_t a = 0; a < m.size(); ++a) {
    CHECK(m.r[a][a] == 1.0);
    for (std::size_t b = 0; b < m.size(); ++b) {
      CHECK(m.r[a][b] == m.r[b][a]);
      CHECK(m.r[a][b] >= -1.0);
      CHECK(m.r[a][b] <= 1.0);
      if ((a == 5 || b == 5) && a != b) CHECK(m.r[a][b] == 0.0);
    }
  }

  // Positive-scale affine transforms leave correlations unchanged.
  std::vector<std::vector<double>> scaled = rows;
  for (auto& row : scaled)
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = row[j] * (2.0 + 3.0 * j) + 11.0 * j;
  CorrelationMatrix ms = pearson_matrix(scaled);
  for (std::size_t a = 0; a < m.size(); ++a)
    for (std::size_t b = 0; b < m.size(); ++b)
      CHECK(ms.r[a][b] == Catch::Approx(m.r[a][b]).margin(1e-9));

  CHECK_THROWS_AS(pearson_matrix({rows[0]}), ValidationError);
}

TEST_CASE("pca: perfectly correlated pair has eigenvalues {2, 0}") {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 10; ++i) {
    double v = 0.3 * i - 1.0;
    rows.push_back({v, 2.0 * v + 5.0});
  }
  PcaReport report = pca_factors(rows);
  REQUIRE(report.eigenvalues.size() == 2);
  CHECK(report.eigenvalues[0] == Catch::Approx(2.0).margin(1e-9));
  CHECK(report.eigenvalues[1] == Catch::Approx(0.0).margin(1e-9));
  double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(std::fabs(report.loadings[0][0]) == Catch::Approx(inv_sqrt2).margin(1e-9));
  CHECK(std::fabs(report.loadings[0][1]) == Catch::Approx(inv_sqrt2).margin(1e-9));
  CHECK(report.retained == 1);
}

TEST_CASE("pca flags a degenerate identity correlation matrix") {
  // Orthogonal design: pairwise correlations are exactly zero.
  std::vector<std::vector<double>> rows = {
      {1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  PcaReport report = pca_factors(rows);
  for (double v : report.eigenvalues) CHECK(v == Catch::Approx(1.0).margin(1e-9));
  bool flagged = false;
  for (const std::string& w : report.warnings)
    if (w.find("degenerate") != std::string::npos) flagged = true;
  CHECK(flagged);
}

TEST_CASE("pca invariants: orthonormal loadings, trace, reconstruction") {
  std::mt19937_64 rng(8);
  std::vector<std::vector<double>> rows;
  const std::size_t dim = 9;
  for (int i = 0; i < 40; ++i) {
    std::vector<double> row(dim);
    double shared = static_cast<double>(rng() % 100) / 10.0;
    for (std::size_t j = 0; j < dim; ++j)
      row[j] = shared * (j % 3) + static_cast<double>(rng() % 1000) / 100.0;
    rows.push_back(row);
  }
  PcaReport report = pca_factors(rows);
  REQUIRE(report.eigenvalues.size() == dim);
  CHECK(std::is_sorted(report.eigenvalues.rbegin(), report.eigenvalues.rend()));

  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b) {
      double dot = 0.0;
      for (std::size_t f = 0; f < dim; ++f) dot += report.loadings[a][f] * report.loadings[b][f];
      CHECK(dot == Catch::Approx(a == b ? 1.0 : 0.0).margin(1e-8));
    }

  double trace = 0.0;
  for (double v : report.eigenvalues) trace += v;
  CHECK(trace == Catch::Approx(static_cast<double>(dim)).margin(1e-8));

  CorrelationMatrix corr = pearson_matrix(rows);
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b) {
      double rebuilt = 0.0;
      for (std::size_t k = 0; k < dim; ++k)
        rebuilt += report.eigenvalues[k] * report.loadings[k][a] * report.loadings[k][b];
      CHECK(rebuilt == Catch::Approx(corr.r[a][b]).margin(1e-6));
    }
}

TEST_CASE("cohens kappa hand cases") {
  std::vector<std::string> same{"T", "T", "N", "N"};
  CHECK(cohens_kappa(same, same) == 1.0);

  std::vector<std::string> a{"T", "T", "N", "N"}, b{"T", "N", "T", "N"};
  CHECK(cohens_kappa(a, b) == Catch::Approx(0.0).margin(1e-12));

  // Relabeling categories consistently leaves kappa unchanged.
  std::vector<std::string> a2{"x", "x", "y", "y"}, b2{"x", "y", "x", "y"};
  CHECK(cohens_kappa(a2, b2) == Catch::Approx(cohens_kappa(a, b)).margin(1e-12));

  std::vector<std::string> c{"T", "N", "N", "N"}, d{"T", "T", "N", "N"};
  std::vector<std::string> c2{"B", "A", "A", "A"}, d2{"B", "B", "A", "A"};
  CHECK(cohens_kappa(c, d) == Catch::Approx(cohens_kappa(c2, d2)).margin(1e-12));

  CHECK_THROWS_AS(cohens_kappa(std::vector<std::string>{"T"}, same), ValidationError);
  CHECK(mean_pairwise_kappa(std::vector<std::vector<std::string>>{a, a, a}) == 1.0);
}

TEST_CASE("impact factor on a toy corpus") {
  std::vector<PaperRecord> records;
  records.push_back({"j1", "J", 2008, {"a"}, {}, {}, {}});
  records.push_back({"j2", "J", 2009, {"b"}, {}, {}, {}});
  records.push_back({"c1", "W", 2010, {"x"}, {}, {}, {"j1"}});
  records.push_back({"c2", "W", 2010, {"y"}, {}, {}, {"j2"}});
  records.push_back({"c3", "W", 2010, {"z"}, {}, {}, {"j1", "j2"}});
  records.push_back({"c4", "W", 2010, {"w"}, {}, {}, {}});
  Corpus corpus(records, std::nullopt, std::nullopt);
  // 4 citations in 2010 to the venue's 2 papers of 2008-09.
  CHECK(impact_factor(corpus, "J", 2010) == Catch::Approx(2.0).margin(1e-12));

  // No citing papers: 0.
  CHECK(impact_factor(corpus, "J", 2009) == 0.0);

  // No articles in the two prior years: undefined.
  CHECK_THROWS_AS(impact_factor(corpus, "J", 2008), ValidationError);
  CHECK_THROWS_AS(impact_factor(corpus, "NOPE", 2010), ValidationError);

  // Dangling references never count as citations.
  std::vector<PaperRecord> with_dangling = records;
  with_dangling.push_back({"c5", "W", 2010, {"v"}, {}, {}, {"missing_id"}});
  Corpus corpus2(with_dangling, std::nullopt, std::nullopt);
  CHECK(impact_factor(corpus2, "J", 2010) == Catch::Approx(2.0).margin(1e-12));
}
