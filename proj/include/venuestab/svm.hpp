#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "venuestab/errors.hpp"

namespace venuestab {

inline double squared_distance(const std::vector<double>& x, const std::vector<double>& z) {
  if (x.size() != z.size())
    throw ValidationError("dimension mismatch: " + std::to_string(x.size()) + " vs " +
                          std::to_string(z.size()));
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d = x[i] - z[i];
    d2 += d * d;
  }
  return d2;
}

// k(x,z) = exp(-gamma * ||x-z||^2); symmetric, k(x,x) = 1.
inline double rbf_kernel(const std::vector<double>& x, const std::vector<double>& z, double gamma) {
  if (gamma <= 0.0) throw ConfigError("rbf gamma must be positive");
  return std::exp(-gamma * squared_distance(x, z));
}

// Per-feature zero-mean unit-variance transform. Constant features keep
// scale 1 so they map to exactly 0 instead of dividing by zero.
struct Standardizer {
  std::vector<double> means;
  std::vector<double> stds;

  void fit(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw ValidationError("cannot fit standardizer on no rows");
    const std::size_t dim = rows[0].size();
    means.assign(dim, 0.0);
    stds.assign(dim, 1.0);
    for (const auto& r : rows) {
      if (r.size() != dim) throw ValidationError("standardizer rows have mixed dimensionality");
      for (std::size_t j = 0; j < dim; ++j) means[j] += r[j];
    }
    for (double& m : means) m /= static_cast<double>(rows.size());
    for (std::size_t j = 0; j < dim; ++j) {
      double ss = 0.0;
      for (const auto& r : rows) ss += (r[j] - means[j]) * (r[j] - means[j]);
      double sd = std::sqrt(ss / static_cast<double>(rows.size()));
      stds[j] = sd > 0.0 ? sd : 1.0;
    }
  }

  std::vector<double> transform(const std::vector<double>& row) const {
    if (row.size() != means.size()) throw ValidationError("standardizer dimension mismatch");
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - means[j]) / stds[j];
    return out;
  }
};

struct SmoOptions {
  double tol = 1e-3;  // KKT tolerance
  // Minimal relative alpha step. This only rejects numerically meaningless
  // moves; anywhere near tol it would block the final approach to the KKT
  // conditions.
  double eps = 1e-12;
  // Sweep budget as a multiple of the training-set size (at least 100).
  std::size_t max_sweep_factor = 10;
  bool standardize = true;
};

// RBF-kernel SVM in dual form: f(x) = sum_i coef_i k(sv_i, x) + bias with
// coef_i = alpha_i * y_i. Support vectors are stored in the standardized
// space; `decision` applies the stored transform to raw rows.
struct SvmModel {
  double gamma = 1.0;
  double C = 1.0;
  double bias = 0.0;
  bool standardize = true;
  Standardizer scaler;
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> dual_coefs;

  double decision(const std::vector<double>& raw_row) const {
    std::vector<double> row = standardize ? scaler.transform(raw_row) : raw_row;
    double f = bias;
    for (std::size_t i = 0; i < support_vectors.size(); ++i)
      f += dual_coefs[i] * rbf_kernel(support_vectors[i], row, gamma);
    return f;
  }

  // +1 / -1; a decision value of exactly 0 goes to +1.
  int predict(const std::vector<double>& raw_row) const { return decision(raw_row) >= 0.0 ? 1 : -1; }
};

// Dual objective W(alpha) = sum alpha - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
inline double dual_objective(const std::vector<double>& alpha, const std::vector<int>& y,
                             const std::vector<std::vector<double>>& kernel) {
  const std::size_t n = alpha.size();
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lin += alpha[i];
    for (std::size_t j = 0; j < n; ++j)
      quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel[i][j];
  }
  return lin - 0.5 * quad;
}

namespace detail {

// Sequential pairwise optimization of the SVM dual (Platt's working-set
// heuristics, made fully deterministic: no random starts, ties resolved by
// lowest index).
class SmoSolver {
 public:
  SmoSolver(const std::vector<std::vector<double>>& rows, const std::vector<int>& y, double gamma,
            double C, const SmoOptions& opts)
      : rows_(rows), y_(y), gamma_(gamma), C_(C), opts_(opts), n_(rows.size()) {
    kernel_.assign(n_, std::vector<double>(n_));
    for (std::size_t i = 0; i < n_; ++i) {
      kernel_[i][i] = 1.0;
      for (std::size_t j = i + 1; j < n_; ++j)
        kernel_[i][j] = kernel_[j][i] = rbf_kernel(rows_[i], rows_[j], gamma_);
    }
    alpha_.assign(n_, 0.0);
    // f(x_i) = 0 everywhere at alpha = 0, so E_i = -y_i.
    errors_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) errors_[i] = -static_cast<double>(y_[i]);
  }

  void solve() {
    const std::size_t max_sweeps = std::max<std::size_t>(opts_.max_sweep_factor * n_, 100);
    std::size_t sweeps = 0;
    bool examine_all = true;
    std::size_t num_changed = 0;
    while (num_changed > 0 || examine_all) {
      if (++sweeps > max_sweeps) {
        throw ConvergenceError("smo did not converge within " + std::to_string(max_sweeps) +
                               " sweeps (worst KKT violation " +
                               std::to_string(worst_kkt_violation()) + ", tol " +
                               std::to_string(opts_.tol) + ")");
      }
      num_changed = 0;
      for (std::size_t i = 0; i < n_; ++i) {
        if (!examine_all && !is_free(i)) continue;
        num_changed += examine(i) ? 1 : 0;
      }
      if (examine_all) examine_all = false;
      else if (num_changed == 0) examine_all = true;
    }
    project_equality_constraint();
    finalize_bias();
    double worst = worst_kkt_violation();
    if (worst > opts_.tol + 1e-12) {
      throw ConvergenceError("smo stalled with KKT violation " + std::to_string(worst) +
                             " above tol " + std::to_string(opts_.tol));
    }
  }

  const std::vector<double>& alpha() const { return alpha_; }
  double bias() const { return bias_; }
  const std::vector<std::vector<double>>& kernel() const { return kernel_; }

 private:
  bool is_free(std::size_t i) const { return alpha_[i] > 0.0 && alpha_[i] < C_; }

  double decision(std::size_t i) const { return errors_[i] + y_[i]; }

  double worst_kkt_violation() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      double margin = y_[i] * decision(i);
      if (alpha_[i] <= 0.0) worst = std::max(worst, 1.0 - margin);
      else if (alpha_[i] >= C_) worst = std::max(worst, margin - 1.0);
      else worst = std::max(worst, std::fabs(margin - 1.0));
    }
    return worst;
  }

  bool examine(std::size_t i2) {
    double e2 = errors_[i2];
    double r2 = e2 * y_[i2];
    bool violates = (r2 < -opts_.tol && alpha_[i2] < C_) || (r2 > opts_.tol && alpha_[i2] > 0.0);
    if (!violates) return false;

    // First choice: the free point with the largest |E1 - E2|.
    std::ptrdiff_t best = -1;
    double best_gap = -1.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!is_free(i)) continue;
      double gap = std::fabs(errors_[i] - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = static_cast<std::ptrdiff_t>(i);
      }
    }
    if (best >= 0 && take_step(static_cast<std::size_t>(best), i2)) return true;

    // Fallbacks: all free points, then everything, from a fixed start.
    for (std::size_t k = 1; k <= n_; ++k) {
      std::size_t i1 = (i2 + k) % n_;
      if (is_free(i1) && take_step(i1, i2)) return true;
    }
    for (std::size_t k = 1; k <= n_; ++k) {
      std::size_t i1 = (i2 + k) % n_;
      if (take_step(i1, i2)) return true;
    }
    return false;
  }

  bool take_step(std::size_t i1, std::size_t i2) {
    if (i1 == i2) return false;
    double a1_old = alpha_[i1], a2_old = alpha_[i2];
    int y1 = y_[i1], y2 = y_[i2];
    double e1 = errors_[i1], e2 = errors_[i2];
    double s = y1 * y2;
    double low, high;
    if (y1 != y2) {
      low = std::max(0.0, a2_old - a1_old);
      high = std::min(C_, C_ + a2_old - a1_old);
    } else {
      low = std::max(0.0, a1_old + a2_old - C_);
      high = std::min(C_, a1_old + a2_old);
    }
    if (low >= high) return false;

    double k11 = kernel_[i1][i1], k12 = kernel_[i1][i2], k22 = kernel_[i2][i2];
    double eta = k11 + k22 - 2.0 * k12;
    double a2;
    if (eta > 0.0) {
      a2 = a2_old + y2 * (e1 - e2) / eta;
      a2 = std::clamp(a2, low, high);
    } else {
      // Flat direction: evaluate the dual objective at both segment ends and
      // take the better one. v_i is the kernel expansion at x_i without the
      // i1/i2 terms and without the threshold.
      double v1 = (e1 + y1 - bias_) - a1_old * y1 * k11 - a2_old * y2 * k12;
      double v2 = (e2 + y2 - bias_) - a1_old * y1 * k12 - a2_old * y2 * k22;
      auto objective_at = [&](double a2c) {
        double a1c = a1_old + s * (a2_old - a2c);
        return a1c + a2c - 0.5 * k11 * a1c * a1c - 0.5 * k22 * a2c * a2c -
               s * k12 * a1c * a2c - y1 * v1 * a1c - y2 * v2 * a2c;
      };
      double obj_low = objective_at(low);
      double obj_high = objective_at(high);
      if (obj_low > obj_high + opts_.eps) a2 = low;
      else if (obj_high > obj_low + opts_.eps) a2 = high;
      else return false;
    }
    if (std::fabs(a2 - a2_old) < opts_.eps * (a2 + a2_old + opts_.eps)) return false;

    double a1 = a1_old + s * (a2_old - a2);
    // Rounding can push a1 a hair outside the box; move the excess into a2
    // so the pair keeps y1*a1 + y2*a2 unchanged.
    if (a1 < 0.0) {
      a2 += s * a1;
      a1 = 0.0;
    } else if (a1 > C_) {
      a2 += s * (a1 - C_);
      a1 = C_;
    }
    a2 = std::clamp(a2, 0.0, C_);
    // Snap near-bound values onto the bound exactly. A rounding remnant like
    // 1e-16 would otherwise count as a free alpha and demand margin == 1.
    const double snap = C_ * 1e-12;
    if (a1 < snap) a1 = 0.0;
    else if (a1 > C_ - snap) a1 = C_;
    if (a2 < snap) a2 = 0.0;
    else if (a2 > C_ - snap) a2 = C_;
    if (a1 == a1_old && a2 == a2_old) return false;

    double d1 = y1 * (a1 - a1_old), d2 = y2 * (a2 - a2_old);
    double b1 = bias_ - e1 - d1 * k11 - d2 * k12;
    double b2 = bias_ - e2 - d1 * k12 - d2 * k22;
    double new_bias;
    if (a1 > 0.0 && a1 < C_) new_bias = b1;
    else if (a2 > 0.0 && a2 < C_) new_bias = b2;
    else new_bias = 0.5 * (b1 + b2);

    double bias_delta = new_bias - bias_;
    alpha_[i1] = a1;
    alpha_[i2] = a2;
    bias_ = new_bias;
    for (std::size_t k = 0; k < n_; ++k)
      errors_[k] += d1 * kernel_[i1][k] + d2 * kernel_[i2][k] + bias_delta;
    return true;
  }

  // The threshold is a free variable of the primal. With t_i = y_i - g_i
  // (g_i = kernel expansion without threshold), each row constrains it to
  //   b >= t_i - v   for free rows and the lower-bound groups,
  //   b <= t_i + v   for free rows and the upper-bound groups,
  // so the minimax threshold is the midpoint of [max lower, min upper]. The
  // per-step (b1+b2)/2 heuristic can end outside the feasible interval when
  // no alpha is free; this recomputation makes the final KKT check reflect
  // the alphas alone.
  void finalize_bias() {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_; ++i) {
      double target = y_[i] - (decision(i) - bias_);
      bool lower_side = is_free(i) || (alpha_[i] <= 0.0 && y_[i] > 0) || (alpha_[i] >= C_ && y_[i] < 0);
      bool upper_side = is_free(i) || (alpha_[i] >= C_ && y_[i] > 0) || (alpha_[i] <= 0.0 && y_[i] < 0);
      if (lower_side) lower = std::max(lower, target);
      if (upper_side) upper = std::min(upper, target);
    }
    double new_bias = bias_;
    if (std::isfinite(lower) && std::isfinite(upper)) new_bias = 0.5 * (lower + upper);
    else if (std::isfinite(lower)) new_bias = lower;
    else if (std::isfinite(upper)) new_bias = upper;
    double delta = new_bias - bias_;
    bias_ = new_bias;
    for (std::size_t k = 0; k < n_; ++k) errors_[k] += delta;
  }

  // Pairwise steps preserve sum(alpha_i y_i) = 0 up to rounding; cancel the
  // accumulated drift against free alphas so the constraint holds of the
  // stored values. Bounded alphas are left alone: moving one off its bound
  // would change its KKT classification.
  void project_equality_constraint() {
    const double snap = C_ * 1e-12;
    long double drift = 0.0L;
    for (std::size_t i = 0; i < n_; ++i) drift += static_cast<long double>(alpha_[i]) * y_[i];
    for (std::size_t i = 0; i < n_ && drift != 0.0L; ++i) {
      if (alpha_[i] <= snap || alpha_[i] >= C_ - snap) continue;
      long double adjusted = static_cast<long double>(alpha_[i]) - drift * y_[i];
      long double lo = snap, hi = static_cast<long double>(C_) - snap;
      long double clamped = std::clamp(adjusted, lo, hi);
      drift = (clamped - adjusted) * y_[i];
      alpha_[i] = static_cast<double>(clamped);
    }
  }

  const std::vector<std::vector<double>>& rows_;
  const std::vector<int>& y_;
  double gamma_;
  double C_;
  SmoOptions opts_;
  std::size_t n_;
  std::vector<std::vector<double>> kernel_;
  std::vector<double> alpha_;
  std::vector<double> errors_;
  double bias_ = 0.0;
};

}  // namespace detail

struct TrainResult {
  SvmModel model;
  std::vector<double> alpha;  // per training row, support vectors included
  double objective = 0.0;
};

// Trains on raw rows with labels  +1/-1. Standardization (when enabled) is
// fitted on exactly these rows.
inline TrainResult train_smo(const std::vector<std::vector<double>>& raw_rows,
                             const std::vector<int>& y, double gamma, double C,
                             const SmoOptions& opts = {}) {
  if (raw_rows.size() < 2) throw ValidationError("need at least 2 training rows");
  if (raw_rows.size() != y.size()) throw ValidationError("rows/labels size mismatch");
  if (C <= 0.0) throw ConfigError("C must be positive");
  bool has_pos = false, has_neg = false;
  for (int label : y) {
    if (label == 1) has_pos = true;
    else if (label == -1) has_neg = true;
    else throw ValidationError("labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) throw ValidationError("training data has a single class");

  SvmModel model;
  model.gamma = gamma;
  model.C = C;
  model.standardize = opts.standardize;
  std::vector<std::vector<double>> rows;
  if (opts.standardize) {
    model.scaler.fit(raw_rows);
    rows.reserve(raw_rows.size());
    for (const auto& r : raw_rows) rows.push_back(model.scaler.transform(r));
  } else {
    model.scaler.means.assign(raw_rows[0].size(), 0.0);
    model.scaler.stds.assign(raw_rows[0].size(), 1.0);
    rows = raw_rows;
  }

  detail::SmoSolver solver(rows, y, gamma, C, opts);
  solver.solve();

  TrainResult result;
  result.alpha = solver.alpha();
  result.objective = dual_objective(solver.alpha(), y, solver.kernel());
  model.bias = solver.bias();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (solver.alpha()[i] > 0.0) {
      model.support_vectors.push_back(rows[i]);
      model.dual_coefs.push_back(solver.alpha()[i] * y[i]);
    }
  }
  result.model = std::move(model);
  return result;
}

}  // namespace venuestab
