#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "venuestab/errors.hpp"
#include "venuestab/io.hpp"
#include "venuestab/svm.hpp"

namespace venuestab {

inline constexpr int kLabelTopTier = 1;
inline constexpr int kLabelNonTopTier = -1;

inline int label_from_string(const std::string& s) {
  if (s == "TT") return kLabelTopTier;
  if (s == "NTT") return kLabelNonTopTier;
  throw ParseError("label must be TT or NTT, got '" + s + "'");
}

inline const char* label_to_string(int label) { return label == kLabelTopTier ? "TT" : "NTT"; }

// Feature rows with class labels. Rows hold the full feature set; training
// on a subset of columns goes through `columns`.
struct LabeledDataset {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;

  std::size_t size() const { return rows.size(); }

  LabeledDataset subset(const std::vector<std::size_t>& row_indices) const {
    LabeledDataset out;
    for (std::size_t i : row_indices) {
      out.ids.push_back(ids[i]);
      out.rows.push_back(rows[i]);
      out.labels.push_back(labels[i]);
    }
    return out;
  }

  std::vector<std::vector<double>> columns(const std::vector<std::size_t>& feature_indices) const {
    std::vector<std::vector<double>> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
      std::vector<double> sub;
      sub.reserve(feature_indices.size());
      for (std::size_t f : feature_indices) sub.push_back(r.at(f));
      out.push_back(std::move(sub));
    }
    return out;
  }
};

// Fold id per row. Each class is shuffled separately and dealt round-robin,
// which keeps the class ratio within one member across folds.
inline std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, uint64_t seed) {
  if (folds < 2) throw ConfigError("need at least 2 folds");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& [cls, members] : by_class) {
    if (members.size() < static_cast<std::size_t>(folds))
      throw ValidationError("class " + std::string(label_to_string(cls)) + " has " +
                            std::to_string(members.size()) + " members, fewer than " +
                            std::to_string(folds) + " folds");
  }
  std::vector<int> assignment(labels.size(), 0);
  std::mt19937_64 rng(seed);
  for (auto& [cls, members] : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t k = 0; k < members.size(); ++k)
      assignment[members[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
  }
  return assignment;
}

// Seeded stratified train/validation split; every class keeps at least one
// row on each side.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    const std::vector<int>& labels, double train_fraction, uint64_t seed) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw ConfigError("train fraction must be in (0,1)");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> train, validate;
  for (auto& [cls, members] : by_class) {
    if (members.size() < 2)
      throw ValidationError("class " + std::string(label_to_string(cls)) +
                            " has fewer than 2 members; cannot split");
    std::shuffle(members.begin(), members.end(), rng);
    auto n_train = static_cast<std::size_t>(std::lround(train_fraction * members.size()));
    n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
    for (std::size_t k = 0; k < members.size(); ++k)
      (k < n_train ? train : validate).push_back(members[k]);
  }
  std::sort(train.begin(), train.end());
  std::sort(validate.begin(), validate.end());
  return {train, validate};
}

inline double accuracy(const SvmModel& model, const std::vector<std::vector<double>>& rows,
                       const std::vector<int>& labels) {
  if (rows.empty()) throw ValidationError("accuracy on empty set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (model.predict(rows[i]) == labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(rows.size());
}

// gamma decades 1e-9..1e1 plus the 9.99e-8 operating point, ascending.
inline std::vector<double> default_gamma_grid() {
  std::vector<double> g;
  for (int e = -9; e <= 1; ++e) g.push_back(std::pow(10.0, e));
  g.push_back(9.99e-8);
  std::sort(g.begin(), g.end());
  return g;
}

inline std::vector<double> default_c_grid() {
  std::vector<double> c;
  for (int e = -2; e <= 8; ++e) c.push_back(std::pow(10.0, e));
  return c;
}

struct GridSearchReport {
  struct Cell {
    double gamma = 0.0;
    double c = 0.0;
    double mean_accuracy = 0.0;
    bool converged = true;
  };
  std::vector<Cell> cells;
  double best_gamma = 0.0;
  double best_c = 0.0;
  double best_accuracy = 0.0;
  std::vector<int> fold_assignment;
  uint64_t seed = 0;
  std::vector<std::string> warnings;
};

// Stratified k-fold CV accuracy over the (gamma, C) grid. Ties go to the
// smallest C, then the smallest gamma. Cells whose solver stalls are kept in
// the report with accuracy -1 so they can never win.
inline GridSearchReport grid_search(const LabeledDataset& data, int folds,
                                    const std::vector<double>& gamma_grid,
                                    const std::vector<double>& c_grid, uint64_t seed,
                                    const SmoOptions& opts = {}) {
  if (gamma_grid.empty() || c_grid.empty()) throw ConfigError("empty parameter grid");
  if (data.size() < static_cast<std::size_t>(folds))
    throw ValidationError("fewer rows than folds");
  GridSearchReport report;
  report.seed = seed;
  report.fold_assignment = stratified_folds(data.labels, folds, seed);

  for (double gamma : gamma_grid) {
    for (double c : c_grid) {
      GridSearchReport::Cell cell;
      cell.gamma = gamma;
      cell.c = c;
      double sum = 0.0;
      bool ok = true;
      for (int fold = 0; fold < folds && ok; ++fold) {
        std::vector<std::size_t> train_idx, val_idx;
        for (std::size_t i = 0; i < data.size(); ++i)
          (report.fold_assignment[i] == fold ? val_idx : train_idx).push_back(i);
        LabeledDataset train = data.subset(train_idx);
        LabeledDataset val = data.subset(val_idx);
        try {
          TrainResult r = train_smo(train.rows, train.labels, gamma, c, opts);
          sum += accuracy(r.model, val.rows, val.labels);
        } catch (const ConvergenceError& e) {
          ok = false;
          report.warnings.push_back("gamma=" + format_double(gamma) + " C=" + format_double(c) +
                                    ": " + e.what());
        }
      }
      cell.converged = ok;
      cell.mean_accuracy = ok ? sum / folds : -1.0;
      report.cells.push_back(cell);
    }
  }

  const GridSearchReport::Cell* best = nullptr;
  for (const auto& cell : report.cells) {
    if (!cell.converged) continue;
    if (!best || cell.mean_accuracy > best->mean_accuracy ||
        (cell.mean_accuracy == best->mean_accuracy &&
         (cell.c < best->c || (cell.c == best->c && cell.gamma < best->gamma))))
      best = &cell;
  }
  if (!best) throw ConvergenceError("no grid cell converged");
  report.best_gamma = best->gamma;
  report.best_c = best->c;
  report.best_accuracy = best->mean_accuracy;
  return report;
}

struct RankedFeature {
  std::size_t feature;
  double accuracy;
};

// Per-feature ranking: train a single-feature model per feature at the given
// operating point, score on the validation set, sort by accuracy descending
// with ties in feature order.
inline std::vector<RankedFeature> rank_features(const LabeledDataset& train,
                                                const LabeledDataset& validate, double gamma,
                                                double c, const SmoOptions& opts = {}) {
  if (train.size() == 0 || validate.size() == 0)
    throw ValidationError("rank_features needs nonempty train and validation sets");
  const std::size_t dim = train.rows[0].size();
  std::vector<RankedFeature> ranking;
  for (std::size_t f = 0; f < dim; ++f) {
    std::vector<std::size_t> one{f};
    TrainResult r = train_smo(train.columns(one), train.labels, gamma, c, opts);
    ranking.push_back({f, accuracy(r.model, validate.columns(one), validate.labels)});
  }
  std::stable_sort(ranking.begin(), ranking.end(), [](const RankedFeature& a, const RankedFeature& b) {
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    return a.feature < b.feature;
  });
  return ranking;
}

struct ForwardCombineResult {
  struct Point {
    std::size_t n_features;
    std::size_t feature_added;
    double accuracy;
  };
  std::vector<Point> curve;
  std::size_t best_prefix = 0;
  double best_accuracy = 0.0;
  std::vector<std::size_t> selected;  // best prefix minus redundant features
  std::vector<std::size_t> pruned;    // features removed by the correlation rule
  double selected_accuracy = 0.0;
};

// Adds features one at a time in ranking order and scores each prefix; the
// final subset is the best prefix minus any feature whose |correlation| with
// an earlier-ranked kept feature exceeds the threshold.
inline ForwardCombineResult forward_combine(const std::vector<RankedFeature>& ranking,
                                            const LabeledDataset& train,
                                            const LabeledDataset& validate,
                                            const std::vector<std::vector<double>>& correlation,
                                            double corr_threshold, double gamma, double c,
                                            const SmoOptions& opts = {}) {
  if (ranking.empty()) throw ConfigError("empty ranking");
  ForwardCombineResult result;
  std::vector<std::size_t> prefix;
  for (const RankedFeature& rf : ranking) {
    prefix.push_back(rf.feature);
    TrainResult r = train_smo(train.columns(prefix), train.labels, gamma, c, opts);
    double acc = accuracy(r.model, validate.columns(prefix), validate.labels);
    result.curve.push_back({prefix.size(), rf.feature, acc});
    if (acc > result.best_accuracy) {
      result.best_accuracy = acc;
      result.best_prefix = prefix.size();
    }
  }

  for (std::size_t k = 0; k < result.best_prefix; ++k) {
    std::size_t f = ranking[k].feature;
    bool redundant = false;
    for (std::size_t kept : result.selected) {
      if (std::fabs(correlation.at(kept).at(f)) > corr_threshold) {
        redundant = true;
        break;
      }
    }
    if (redundant) result.pruned.push_back(f);
    else result.selected.push_back(f);
  }
  TrainResult r = train_smo(train.columns(result.selected), train.labels, gamma, c, opts);
  result.selected_accuracy = accuracy(r.model, validate.columns(result.selected), validate.labels);
  return result;
}

// --- serialized classifier ----------------------------------------------------

// A trained model plus everything needed to apply and explain it: the feature
// subset it uses and the labeled training exemplars for nearest-neighbor
// context in classification reports.
struct ClassifierBundle {
  SvmModel model;
  std::vector<std::size_t> feature_subset;
  std::vector<std::string> exemplar_ids;
  std::vector<int> exemplar_labels;
  std::vector<std::vector<double>> exemplar_rows;  // full feature rows, raw

  std::vector<double> project(const std::vector<double>& full_row) const {
    std::vector<double> sub;
    sub.reserve(feature_subset.size());
    for (std::size_t f : feature_subset) sub.push_back(full_row.at(f));
    return sub;
  }

  double decision(const std::vector<double>& full_row) const { return model.decision(project(full_row)); }
  int predict(const std::vector<double>& full_row) const { return model.predict(project(full_row)); }
};

struct Exemplar {
  std::string id;
  int label;
  double distance;
};

// Nearest labeled exemplars by Euclidean distance in the model's
// (standardized, subset) feature space; ties break on id.
inline std::vector<Exemplar> nearest_exemplars(const ClassifierBundle& bundle,
                                               const std::vector<double>& full_row, std::size_t k) {
  std::vector<double> q = bundle.model.scaler.transform(bundle.project(full_row));
  std::vector<Exemplar> all;
  for (std::size_t i = 0; i < bundle.exemplar_rows.size(); ++i) {
    std::vector<double> e = bundle.model.scaler.transform(bundle.project(bundle.exemplar_rows[i]));
    all.push_back({bundle.exemplar_ids[i], bundle.exemplar_labels[i],
                   std::sqrt(squared_distance(q, e))});
  }
  std::sort(all.begin(), all.end(), [](const Exemplar& a, const Exemplar& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.id < b.id;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json bundle_to_json(const ClassifierBundle& bundle,
                                     const std::string& config_hash) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["tool_version"] = kVersion;
  j["config_hash"] = config_hash;
  j["gamma"] = bundle.model.gamma;
  j["c"] = bundle.model.C;
  j["bias"] = bundle.model.bias;
  j["standardize"] = bundle.model.standardize;
  j["feature_subset"] = bundle.feature_subset;
  j["means"] = bundle.model.scaler.means;
  j["stds"] = bundle.model.scaler.stds;
  j["support_vectors"] = bundle.model.support_vectors;
  j["dual_coefs"] = bundle.model.dual_coefs;
  nlohmann::json exemplars = nlohmann::json::array();
  for (std::size_t i = 0; i < bundle.exemplar_ids.size(); ++i) {
    exemplars.push_back({{"id", bundle.exemplar_ids[i]},
                         {"label", label_to_string(bundle.exemplar_labels[i])},
                         {"features", bundle.exemplar_rows[i]}});
  }
  j["exemplars"] = exemplars;
  return j;
}

inline void save_model(const ClassifierBundle& bundle, const std::filesystem::path& path,
                       const std::string& config_hash) {
  atomic_write_file(path, bundle_to_json(bundle, config_hash).dump(2) + "\n");
}

inline ClassifierBundle load_model(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model file " + path.string() + ": " + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion)
      throw ParseError("model file " + path.string() + ": unsupported format_version");
    ClassifierBundle b;
    b.model.gamma = j.at("gamma").get<double>();
    b.model.C = j.at("c").get<double>();
    b.model.bias = j.at("bias").get<double>();
    b.model.standardize = j.at("standardize").get<bool>();
    b.feature_subset = j.at("feature_subset").get<std::vector<std::size_t>>();
    b.model.scaler.means = j.at("means").get<std::vector<double>>();
    b.model.scaler.stds = j.at("stds").get<std::vector<double>>();
    b.model.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
    b.model.dual_coefs = j.at("dual_coefs").get<std::vector<double>>();
    for (const auto& e : j.at("exemplars")) {
      b.exemplar_ids.push_back(e.at("id").get<std::string>());
      b.exemplar_labels.push_back(label_from_string(e.at("label").get<std::string>()));
      b.exemplar_rows.push_back(e.at("features").get<std::vector<double>>());
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model file " + path.string() + ": " + e.what());
  }
}

}  // namespace venuestab
