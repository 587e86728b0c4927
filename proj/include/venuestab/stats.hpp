#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "venuestab/corpus.hpp"
#include "venuestab/errors.hpp"

namespace venuestab {

namespace detail {

// Continued-fraction evaluation of the regularized incomplete beta function
// I_x(a,b) (modified Lentz), good to ~1e-14 for the degrees of freedom used
// here.
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw ConvergenceError("incomplete beta continued fraction did not converge");
}

inline double incomplete_beta(double a, double b, double x) {
  if (x < 0.0 || x > 1.0) throw ValidationError("incomplete beta x outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                    b * std::log(1.0 - x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// Two-tailed tail probability of Student's t with `df` degrees of freedom:
// P(|T| > |t|) = I_{df/(df+t^2)}(df/2, 1/2).
inline double students_t_two_tailed_p(double t, double df) {
  if (df <= 0.0) throw ValidationError("degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  return detail::incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
};

// Pooled-variance two-sample Student t-test, two-tailed. Degenerate samples
// with zero pooled variance give p = 1 for equal means, p = 0 otherwise.
inline TTestResult t_test_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw ValidationError("t-test needs at least 2 values per sample");
  auto mean = [](std::span<const double> s) {
    double m = 0.0;
    for (double v : s) m += v;
    return m / static_cast<double>(s.size());
  };
  double ma = mean(a), mb = mean(b);
  double ssa = 0.0, ssb = 0.0;
  for (double v : a) ssa += (v - ma) * (v - ma);
  for (double v : b) ssb += (v - mb) * (v - mb);
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  TTestResult r;
  r.df = na + nb - 2.0;
  double pooled_var = (ssa + ssb) / r.df;
  if (pooled_var <= 0.0) {
    if (ma == mb) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = ma > mb ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
    return r;
  }
  r.t = (ma - mb) / (std::sqrt(pooled_var) * std::sqrt(1.0 / na + 1.0 / nb));
  r.p = students_t_two_tailed_p(r.t, r.df);
  return r;
}

inline TTestResult t_test_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
  return t_test_two_sample(std::span<const double>(a), std::span<const double>(b));
}

// --- correlation ---------------------------------------------------------------

struct CorrelationMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> r;          // signed Pearson, unit diagonal
  std::vector<std::size_t> constant_columns;   // flagged: r fixed to 0 with everything

  std::size_t size() const { return r.size(); }
};

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("pearson needs two equal samples of >=2");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;  // constant input: correlation undefined, reported 0
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Pairwise Pearson correlation over columns of a row-major matrix. Constant
// columns correlate 0 with everything (diagonal stays 1) and are flagged.
inline CorrelationMatrix pearson_matrix(const std::vector<std::vector<double>>& rows,
                                        std::vector<std::string> labels = {}) {
  if (rows.size() < 2) throw ValidationError("pearson matrix needs at least 2 rows");
  const std::size_t dim = rows[0].size();
  for (const auto& r : rows)
    if (r.size() != dim) throw ValidationError("pearson matrix rows have mixed dimensionality");
  CorrelationMatrix m;
  m.labels = std::move(labels);
  m.r.assign(dim, std::vector<double>(dim, 0.0));
  std::vector<std::vector<double>> cols(dim, std::vector<double>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < dim; ++j) cols[j][i] = rows[i][j];
  std::vector<bool> constant(dim, false);
  for (std::size_t j = 0; j < dim; ++j) {
    constant[j] = std::all_of(cols[j].begin(), cols[j].end(),
                              [&](double v) { return v == cols[j][0]; });
    if (constant[j]) m.constant_columns.push_back(j);
  }
  for (std::size_t a = 0; a < dim; ++a) {
    m.r[a][a] = 1.0;
    for (std::size_t b = a + 1; b < dim; ++b) {
      double r = (constant[a] || constant[b]) ? 0.0 : pearson(cols[a], cols[b]);
      m.r[a][b] = m.r[b][a] = r;
    }
  }
  return m;
}

// --- principal component analysis ----------------------------------------------

struct PcaReport {
  std::vector<double> eigenvalues;                  // non-increasing
  std::vector<std::vector<double>> loadings;        // loadings[k] = k-th eigenvector
  std::vector<std::string> feature_labels;
  std::size_t retained = 0;                         // factors up to the cumulative-variance cut
  double retention_threshold = 0.95;
  std::vector<std::string> warnings;

  struct Loading {
    std::size_t feature;
    double coefficient;
  };

  // Top-k loadings of factor `k` by absolute coefficient.
  std::vector<Loading> top_loadings(std::size_t factor, std::size_t top_k) const {
    std::vector<Loading> all;
    for (std::size_t f = 0; f < loadings[factor].size(); ++f)
      all.push_back({f, loadings[factor][f]});
    std::stable_sort(all.begin(), all.end(), [](const Loading& a, const Loading& b) {
      return std::fabs(a.coefficient) > std::fabs(b.coefficient);
    });
    if (all.size() > top_k) all.resize(top_k);
    return all;
  }
};

namespace detail {

// Cyclic Jacobi eigendecomposition for symmetric matrices; sweeps until the
// off-diagonal Frobenius norm drops below 1e-10.
inline void jacobi_eigen(std::vector<std::vector<double>> a, std::vector<double>& eigenvalues,
                         std::vector<std::vector<double>>& eigenvectors) {
  const std::size_t n = a.size();
  eigenvectors.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) eigenvectors[i][i] = 1.0;

  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a[i][j] * a[i][j];
    return std::sqrt(s);
  };

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && off_norm() >= 1e-10; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double vkp = eigenvectors[k][p], vkq = eigenvectors[k][q];
          eigenvectors[k][p] = c * vkp - s * vkq;
          eigenvectors[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  eigenvalues.resize(n);
  for (std::size_t i = 0; i < n; ++i) eigenvalues[i] = a[i][i];
}

}  // namespace detail

// PCA of the feature correlation matrix. Factors are eigenvectors sorted by
// eigenvalue (descending); `retained` marks the cumulative-variance cut.
inline PcaReport pca_factors(const std::vector<std::vector<double>>& rows,
                             std::vector<std::string> labels = {},
                             double retention_threshold = 0.95) {
  CorrelationMatrix corr = pearson_matrix(rows, std::move(labels));
  PcaReport report;
  report.feature_labels = corr.labels;
  report.retention_threshold = retention_threshold;
  for (std::size_t j : corr.constant_columns)
    report.warnings.push_back("feature " + std::to_string(j) +
                              " is constant; correlations with it are 0");

  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
  detail::jacobi_eigen(corr.r, values, vectors);

  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

  double trace = 0.0;
  for (double v : values) trace += v;
  double cumulative = 0.0;
  report.retained = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    std::size_t col = order[rank];
    report.eigenvalues.push_back(values[col]);
    std::vector<double> loading(values.size());
    for (std::size_t f = 0; f < values.size(); ++f) loading[f] = vectors[f][col];
    // Sign convention: largest-|coefficient| entry is positive.
    std::size_t arg = 0;
    for (std::size_t f = 1; f < loading.size(); ++f)
      if (std::fabs(loading[f]) > std::fabs(loading[arg])) arg = f;
    if (loading[arg] < 0.0)
      for (double& v : loading) v = -v;
    report.loadings.push_back(std::move(loading));
    if (report.retained == 0) {
      cumulative += values[col];
      if (trace > 0.0 && cumulative / trace >= retention_threshold)
        report.retained = rank + 1;
    }
  }
  if (report.retained == 0) report.retained = report.eigenvalues.size();

  double top = report.eigenvalues.empty() ? 0.0 : report.eigenvalues.front();
  double bottom = report.eigenvalues.empty() ? 0.0 : report.eigenvalues.back();
  if (top - bottom < 1e-12)
    report.warnings.push_back("degenerate spectrum: all eigenvalues equal; factor order arbitrary");
  return report;
}

// --- agreement ------------------------------------------------------------------

// Cohen's kappa over two equal-length label sequences.
template <typename Label>
double cohens_kappa(const std::vector<Label>& rater_a, const std::vector<Label>& rater_b) {
  if (rater_a.size() != rater_b.size()) throw ValidationError("kappa: label lists differ in length");
  if (rater_a.empty()) throw ValidationError("kappa: no items");
  const double n = static_cast<double>(rater_a.size());
  std::map<Label, double> marg_a, marg_b;
  double observed = 0.0;
  for (std::size_t i = 0; i < rater_a.size(); ++i) {
    marg_a[rater_a[i]] += 1.0;
    marg_b[rater_b[i]] += 1.0;
    if (rater_a[i] == rater_b[i]) observed += 1.0;
  }
  double po = observed / n;
  double pe = 0.0;
  for (const auto& [label, count_a] : marg_a) {
    auto it = marg_b.find(label);
    if (it != marg_b.end()) pe += (count_a / n) * (it->second / n);
  }
  if (pe >= 1.0) return 1.0;  // both raters constant and identical
  return (po - pe) / (1.0 - pe);
}

// Mean pairwise kappa across many raters (items x raters matrix).
template <typename Label>
double mean_pairwise_kappa(const std::vector<std::vector<Label>>& raters) {
  if (raters.size() < 2) throw ValidationError("mean pairwise kappa needs >=2 raters");
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < raters.size(); ++i)
    for (std::size_t j = i + 1; j < raters.size(); ++j) {
      sum += cohens_kappa(raters[i], raters[j]);
      ++pairs;
    }
  return sum / static_cast<double>(pairs);
}

// --- impact factor ----------------------------------------------------------------

// Citations in `year` (from anywhere in the corpus) to the venue's papers of
// the two previous years, divided by the venue's paper count in those years.
// Dangling references never count.
inline double impact_factor(const Corpus& corpus, const std::string& venue, int year) {
  if (!corpus.has_venue(venue)) throw ValidationError("unknown venue '" + venue + "'");
  std::size_t articles = 0;
  std::vector<char> is_target(corpus.papers().size(), 0);
  for (int y : {year - 1, year - 2}) {
    if (const auto* papers = corpus.venue_year_papers(venue, y)) {
      articles += papers->size();
      for (std::size_t idx : *papers) is_target[idx] = 1;
    }
  }
  if (articles == 0)
    throw ValidationError("impact factor undefined: venue '" + venue + "' has no papers in " +
                          std::to_string(year - 2) + "-" + std::to_string(year - 1));
  std::size_t citations = 0;
  for (std::size_t i = 0; i < corpus.papers().size(); ++i) {
    if (corpus.paper(i).year != year) continue;
    for (std::size_t ref : corpus.resolved_refs(i))
      if (is_target[ref]) ++citations;
  }
  return static_cast<double>(citations) / static_cast<double>(articles);
}

}  // namespace venuestab
