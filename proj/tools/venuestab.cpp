// Command-line front end: ingest / features / train / classify / analyze /
// synth / report. Every run validates its flags, writes outputs atomically,
// echoes its configuration next to the primary output, and stamps each file
// with the tool version and a config hash.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "venuestab/corpus.hpp"
#include "venuestab/errors.hpp"
#include "venuestab/features.hpp"
#include "venuestab/graph.hpp"
#include "venuestab/io.hpp"
#include "venuestab/model_select.hpp"
#include "venuestab/stats.hpp"
#include "venuestab/svm.hpp"
#include "venuestab/synth.hpp"
#include "venuestab/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace venuestab;

namespace {

struct GlobalOpts {
  uint64_t seed = 42;
  bool seed_set = false;
  bool strict = true;
  bool standardize = true;
  std::string pna_denominator = "papers";
  std::string ddi_norm = "mass";
  int min_years = 5;
  bool isolation_filter = false;
  std::optional<int> min_year;
  std::optional<int> max_year;

  FeatureOptions feature_options() const {
    FeatureOptions opts;
    opts.pna_denominator =
        pna_denominator == "authors" ? PnaDenominator::Authors : PnaDenominator::Papers;
    if (ddi_norm == "mass") opts.degree_norm = DegreeNorm::Mass;
    else if (ddi_norm == "count") opts.degree_norm = DegreeNorm::Count;
    else opts.degree_norm = DegreeNorm::Literal;
    opts.min_consecutive_years = min_years;
    return opts;
  }

  json to_json() const {
    json j;
    j["seed"] = seed;
    j["strict"] = strict;
    j["standardize"] = standardize;
    j["pna_denominator"] = pna_denominator;
    j["ddi_norm"] = ddi_norm;
    j["min_years"] = min_years;
    j["isolation_filter"] = isolation_filter;
    if (min_year) j["min_year"] = *min_year;
    if (max_year) j["max_year"] = *max_year;
    return j;
  }
};

// Config echo: one JSON per run, written next to the primary output. Its
// hash is the config stamp on every file the run produces.
struct RunEcho {
  json config;

  RunEcho(const std::string& subcommand, const GlobalOpts& g) {
    config["subcommand"] = subcommand;
    config["tool_version"] = kVersion;
    config["global"] = g.to_json();
  }

  void set(const std::string& key, const json& value) { config[key] = value; }

  std::string hash() const { return fnv1a64_hex(config.dump()); }

  void write(const fs::path& path) const {
    json out = config;
    out["config_hash"] = hash();
    atomic_write_file(path, out.dump(2) + "\n");
  }
};

LoadOptions load_options(const GlobalOpts& g) {
  LoadOptions opts;
  opts.strict = g.strict;
  opts.isolation_filter = g.isolation_filter;
  opts.min_year = g.min_year;
  opts.max_year = g.max_year;
  return opts;
}

std::vector<double> parse_grid(const std::string& csv, const char* what) {
  std::vector<double> out;
  for (const std::string& cell : split(csv, ',')) {
    if (cell.empty()) continue;
    char* end = nullptr;
    double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0' || v <= 0.0)
      throw ConfigError(std::string(what) + " grid: bad value '" + cell + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(std::string(what) + " grid is empty");
  return out;
}

std::pair<int, int> parse_year_range(const std::string& s) {
  auto pos = s.find(':');
  if (pos == std::string::npos) throw ConfigError("year range must look like 1999:2010");
  try {
    int lo = std::stoi(s.substr(0, pos));
    int hi = std::stoi(s.substr(pos + 1));
    return {lo, hi};
  } catch (const std::exception&) {
    throw ConfigError("year range must look like 1999:2010");
  }
}

struct LabeledJoin {
  LabeledDataset data;             // rows sorted by venue id
  std::vector<std::string> unlabeled;
};

LabeledJoin join_features_labels(const FeatureMatrix& features,
                                 const std::map<std::string, std::string>& labels) {
  LabeledJoin join;
  for (std::size_t i = 0; i < features.venue_ids.size(); ++i) {
    auto it = labels.find(features.venue_ids[i]);
    if (it == labels.end()) {
      join.unlabeled.push_back(features.venue_ids[i]);
      continue;
    }
    join.data.ids.push_back(features.venue_ids[i]);
    join.data.rows.push_back(
        std::vector<double>(features.rows[i].begin(), features.rows[i].end()));
    join.data.labels.push_back(label_from_string(it->second));
  }
  if (join.data.size() == 0) throw ValidationError("no venue appears in both features and labels");
  return join;
}

// ---------------------------------------------------------------------------

int cmd_ingest(const GlobalOpts& g, const std::string& corpus_path, const std::string& out_path) {
  RunEcho echo("ingest", g);
  echo.set("corpus", corpus_path);

  LoadReport report;
  Corpus corpus = load_corpus(corpus_path, load_options(g), &report);
  AuthorIndex index(corpus);

  std::set<std::string> authors;
  for (const PaperRecord& p : corpus.papers())
    authors.insert(p.author_ids.begin(), p.author_ids.end());

  json j;
  j["tool_version"] = kVersion;
  j["config_hash"] = echo.hash();
  j["papers"] = corpus.papers().size();
  j["venues"] = corpus.venues().size();
  j["authors"] = authors.size();
  j["year_range"] = {corpus.min_year(), corpus.max_year()};
  j["fields"] = corpus.field_universe().size();
  j["keywords"] = corpus.keyword_universe().size();
  j["dangling_references"] = report.dangling_references;
  j["skipped_malformed"] = report.skipped_malformed;
  j["skipped_out_of_range"] = report.skipped_out_of_range;
  j["skipped_duplicate_id"] = report.skipped_duplicate_id;
  j["dropped_isolated"] = report.dropped_isolated;
  j["warnings"] = report.warnings;
  std::cout << j.dump(2) << "\n";
  if (!out_path.empty()) {
    atomic_write_file(out_path, j.dump(2) + "\n");
    echo.write(out_path + ".run.json");
  }
  return 0;
}

int cmd_features(const GlobalOpts& g, const std::string& corpus_path, const std::string& out_path,
                 const std::string& deltas_path, const std::string& venues_arg,
                 const std::string& years_arg) {
  RunEcho echo("features", g);
  echo.set("corpus", corpus_path);
  echo.set("out", out_path);
  echo.set("venues", venues_arg);
  echo.set("years", years_arg);

  Corpus corpus = load_corpus(corpus_path, load_options(g));
  AuthorIndex index(corpus);

  int first_year = corpus.min_year(), last_year = corpus.max_year();
  if (!years_arg.empty()) std::tie(first_year, last_year) = parse_year_range(years_arg);

  std::vector<std::string> venues;
  if (venues_arg.empty() || venues_arg == "all") {
    venues = corpus.venues();
  } else {
    venues = split(venues_arg, ',');
  }

  FeatureExtractor extractor(corpus, index, first_year, last_year, g.feature_options());
  FeatureExtractor::MatrixResult result = extractor.feature_matrix(venues);
  for (const auto& [venue, reason] : result.skipped)
    std::cerr << "WARN eligibility: " << reason << "\n";
  if (result.rows.empty()) throw EligibilityError("no eligible venue in " + corpus_path);

  const std::string hash = echo.hash();
  atomic_write_file(out_path, feature_matrix_to_csv(result.rows, hash));

  std::string deltas_out = deltas_path;
  if (deltas_out.empty())
    deltas_out = (fs::path(out_path).parent_path() / "deltas.csv").string();
  std::ostringstream ds;
  ds << file_header(hash) << "venue,quantity,year_from,year_to,delta\n";
  for (const auto& [venue, quantity, year, delta] : result.deltas)
    ds << venue << ',' << quantity_name(quantity) << ',' << year << ',' << year + 1 << ','
       << format_double(delta) << '\n';
  atomic_write_file(deltas_out, ds.str());

  json skipped = json::array();
  for (const auto& [venue, reason] : result.skipped)
    skipped.push_back({{"venue", venue}, {"reason", reason}});
  echo.set("skipped", skipped);
  echo.write(out_path + ".run.json");
  std::cout << "wrote " << out_path << " (" << result.rows.size() << " venues, "
            << result.skipped.size() << " skipped)\n";
  return 0;
}

std::string grid_report_json(const GridSearchReport& report, const std::string& hash) {
  json j;
  j["tool_version"] = kVersion;
  j["config_hash"] = hash;
  j["seed"] = report.seed;
  j["best"] = {{"gamma", report.best_gamma}, {"c", report.best_c},
               {"mean_accuracy", report.best_accuracy}};
  json cells = json::array();
  for (const auto& cell : report.cells)
    cells.push_back({{"gamma", cell.gamma},
                     {"c", cell.c},
                     {"mean_accuracy", cell.mean_accuracy},
                     {"converged", cell.converged}});
  j["cells"] = cells;
  j["fold_assignment"] = report.fold_assignment;
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

int cmd_train(const GlobalOpts& g, const std::string& features_path, const std::string& labels_path,
              const std::string& model_path, std::string grid_path, std::string ranking_path,
              std::string curve_path, double train_fraction, int folds,
              const std::string& gamma_grid_arg, const std::string& c_grid_arg,
              double corr_threshold, const std::string& cv_on, const std::string& final_fit) {
  RunEcho echo("train", g);
  echo.set("features", features_path);
  echo.set("labels", labels_path);
  echo.set("model", model_path);
  echo.set("train_fraction", train_fraction);
  echo.set("folds", folds);
  echo.set("gamma_grid", gamma_grid_arg);
  echo.set("c_grid", c_grid_arg);
  echo.set("corr_threshold", corr_threshold);
  echo.set("cv_on", cv_on);
  echo.set("final_fit", final_fit);
  const std::string hash = echo.hash();

  fs::path model_dir = fs::path(model_path).parent_path();
  if (grid_path.empty()) grid_path = (model_dir / "grid_report.json").string();
  if (ranking_path.empty()) ranking_path = (model_dir / "ranking.csv").string();
  if (curve_path.empty()) curve_path = (model_dir / "curve.csv").string();

  FeatureMatrix features = read_feature_csv(features_path);
  std::map<std::string, std::string> labels = read_labels_csv(labels_path);
  LabeledJoin join = join_features_labels(features, labels);
  for (const std::string& v : join.unlabeled)
    std::cerr << "WARN validation: venue '" << v << "' has features but no label; ignored\n";

  auto [train_idx, val_idx] = stratified_split(join.data.labels, train_fraction, g.seed);
  LabeledDataset train = join.data.subset(train_idx);
  LabeledDataset validate = join.data.subset(val_idx);

  SmoOptions smo;
  smo.standardize = g.standardize;

  std::vector<double> gamma_grid =
      gamma_grid_arg.empty() ? default_gamma_grid() : parse_grid(gamma_grid_arg, "gamma");
  std::vector<double> c_grid = c_grid_arg.empty() ? default_c_grid() : parse_grid(c_grid_arg, "C");

  const LabeledDataset& cv_data =
      cv_on == "train" ? train : (cv_on == "all" ? join.data : validate);
  GridSearchReport grid = grid_search(cv_data, folds, gamma_grid, c_grid, g.seed, smo);
  atomic_write_file(grid_path, grid_report_json(grid, hash));

  std::vector<RankedFeature> ranking =
      rank_features(train, validate, grid.best_gamma, grid.best_c, smo);
  const std::vector<std::string> names = feature_names();
  {
    std::ostringstream out;
    out << file_header(hash) << "rank,feature_index,feature,accuracy\n";
    for (std::size_t r = 0; r < ranking.size(); ++r)
      out << r + 1 << ',' << ranking[r].feature << ',' << names[ranking[r].feature] << ','
          << format_double(ranking[r].accuracy) << '\n';
    atomic_write_file(ranking_path, out.str());
  }

  CorrelationMatrix corr = pearson_matrix(join.data.rows, names);
  ForwardCombineResult forward = forward_combine(ranking, train, validate, corr.r, corr_threshold,
                                                 grid.best_gamma, grid.best_c, smo);
  {
    std::ostringstream out;
    out << file_header(hash) << "n_features,feature_added,accuracy\n";
    for (const auto& point : forward.curve)
      out << point.n_features << ',' << names[point.feature_added] << ','
          << format_double(point.accuracy) << '\n';
    atomic_write_file(curve_path, out.str());
  }

  const LabeledDataset& fit_data = final_fit == "train" ? train : join.data;
  TrainResult final_model = train_smo(fit_data.columns(forward.selected), fit_data.labels,
                                      grid.best_gamma, grid.best_c, smo);

  ClassifierBundle bundle;
  bundle.model = final_model.model;
  bundle.feature_subset = forward.selected;
  bundle.exemplar_ids = fit_data.ids;
  bundle.exemplar_labels = fit_data.labels;
  bundle.exemplar_rows = fit_data.rows;
  save_model(bundle, model_path, hash);
  echo.write(model_path + ".run.json");

  std::ostringstream selected_names;
  for (std::size_t i = 0; i < forward.selected.size(); ++i)
    selected_names << (i ? " " : "") << names[forward.selected[i]];
  std::cout << "best gamma=" << format_double(grid.best_gamma)
            << " C=" << format_double(grid.best_c)
            << " cv_accuracy=" << format_double(grid.best_accuracy) << "\n"
            << "forward selection: best prefix " << forward.best_prefix << " features ("
            << format_double(forward.best_accuracy) << " validation accuracy), kept "
            << forward.selected.size() << ": " << selected_names.str() << "\n"
            << "final subset validation accuracy: " << format_double(forward.selected_accuracy)
            << "\nwrote " << model_path << "\n";
  return 0;
}

int cmd_classify(const GlobalOpts& g, const std::string& model_path,
                 const std::string& features_path, const std::string& out_path, int n_exemplars) {
  RunEcho echo("classify", g);
  echo.set("model", model_path);
  echo.set("features", features_path);
  echo.set("out", out_path);
  echo.set("exemplars", n_exemplars);

  ClassifierBundle bundle = load_model(model_path);
  FeatureMatrix features = read_feature_csv(features_path);

  std::ostringstream out;
  out << file_header(echo.hash()) << "venue,label,decision";
  for (int k = 1; k <= n_exemplars; ++k)
    out << ",nearest_" << k << ",nearest_" << k << "_label,nearest_" << k << "_distance";
  out << '\n';
  for (std::size_t i = 0; i < features.venue_ids.size(); ++i) {
    std::vector<double> row(features.rows[i].begin(), features.rows[i].end());
    double decision = bundle.decision(row);
    out << features.venue_ids[i] << ',' << label_to_string(decision >= 0.0 ? 1 : -1) << ','
        << format_double(decision);
    for (const Exemplar& e : nearest_exemplars(bundle, row, n_exemplars))
      out << ',' << e.id << ',' << label_to_string(e.label) << ',' << format_double(e.distance);
    out << '\n';
  }
  atomic_write_file(out_path, out.str());
  echo.write(out_path + ".run.json");
  std::cout << "wrote " << out_path << " (" << features.venue_ids.size() << " venues)\n";
  return 0;
}

int cmd_analyze(const GlobalOpts& g, const std::string& features_path,
                const std::string& labels_path, const std::string& outdir, int pca_top_k,
                double pca_threshold, double alpha) {
  RunEcho echo("analyze", g);
  echo.set("features", features_path);
  echo.set("labels", labels_path);
  echo.set("outdir", outdir);
  echo.set("pca_top_k", pca_top_k);
  echo.set("pca_threshold", pca_threshold);
  echo.set("alpha", alpha);
  const std::string hash = echo.hash();

  FeatureMatrix features = read_feature_csv(features_path);
  std::map<std::string, std::string> labels = read_labels_csv(labels_path);
  LabeledJoin join = join_features_labels(features, labels);
  fs::create_directories(outdir);
  const std::vector<std::string> names = feature_names();

  // Per-feature two-sample t-test between the groups.
  {
    std::ostringstream out;
    out << file_header(hash) << "feature,t_statistic,p_value,significant\n";
    for (std::size_t f = 0; f < names.size(); ++f) {
      std::vector<double> tt, ntt;
      for (std::size_t i = 0; i < join.data.size(); ++i)
        (join.data.labels[i] == kLabelTopTier ? tt : ntt).push_back(join.data.rows[i][f]);
      TTestResult r = t_test_two_sample(tt, ntt);
      out << names[f] << ',' << format_double(r.t) << ',' << format_double(r.p) << ','
          << (r.p < alpha ? 1 : 0) << '\n';
    }
    atomic_write_file(fs::path(outdir) / "ttest.csv", out.str());
  }

  CorrelationMatrix corr = pearson_matrix(join.data.rows, names);
  auto write_corr = [&](const fs::path& path, bool absolute) {
    std::ostringstream out;
    out << file_header(hash) << "feature";
    for (const std::string& n : names) out << ',' << n;
    out << '\n';
    for (std::size_t a = 0; a < names.size(); ++a) {
      out << names[a];
      for (std::size_t b = 0; b < names.size(); ++b)
        out << ',' << format_double(absolute ? std::fabs(corr.r[a][b]) : corr.r[a][b]);
      out << '\n';
    }
    atomic_write_file(path, out.str());
  };
  write_corr(fs::path(outdir) / "correlation.csv", false);
  // Heatmap export on the [0,1] scale.
  write_corr(fs::path(outdir) / "correlation_abs.csv", true);

  PcaReport pca = pca_factors(join.data.rows, names, pca_threshold);
  {
    std::ostringstream out;
    out << file_header(hash);
    for (const std::string& w : pca.warnings) out << "# warning: " << w << '\n';
    out << "# retained_factors=" << pca.retained << " (cumulative variance >= "
        << format_double(pca.retention_threshold) << ")\n";
    out << "rank,eigenvalue,explained_fraction";
    for (int k = 1; k <= pca_top_k; ++k) out << ",top" << k;
    out << '\n';
    double trace = 0.0;
    for (double v : pca.eigenvalues) trace += v;
    for (std::size_t rank = 0; rank < pca.eigenvalues.size(); ++rank) {
      out << rank + 1 << ',' << format_double(pca.eigenvalues[rank]) << ','
          << format_double(trace > 0.0 ? pca.eigenvalues[rank] / trace : 0.0);
      auto top = pca.top_loadings(rank, pca_top_k);
      for (int k = 0; k < pca_top_k; ++k) {
        out << ',';
        if (k < static_cast<int>(top.size())) {
          char buf[64];
          std::snprintf(buf, sizeof(buf), "%.3f", top[k].coefficient);
          out << buf << ':' << names[top[k].feature];
        }
      }
      out << '\n';
    }
    atomic_write_file(fs::path(outdir) / "pca.csv", out.str());
  }

  echo.write(fs::path(outdir) / "analyze_run.json");
  std::cout << "wrote " << outdir << "/{ttest,correlation,correlation_abs,pca}.csv\n";
  return 0;
}

int cmd_synth(const GlobalOpts& g, const std::string& config_path, const std::string& corpus_out,
              const std::string& labels_out) {
  SynthConfig cfg;
  if (!config_path.empty()) {
    try {
      cfg = synth_config_from_json(json::parse(read_file(config_path)));
    } catch (const json::exception& e) {
      throw ParseError("synth config " + config_path + ": " + e.what());
    }
  }
  if (g.seed_set) cfg.seed = g.seed;

  RunEcho echo("synth", g);
  echo.set("config_file", config_path);
  json cj;
  cj["n_venues_stable"] = cfg.n_venues_stable;
  cj["n_venues_unstable"] = cfg.n_venues_unstable;
  cj["year_start"] = cfg.year_start;
  cj["year_end"] = cfg.year_end;
  cj["papers_per_year"] = cfg.papers_per_year;
  cj["n_subfields"] = cfg.n_subfields;
  cj["n_keywords"] = cfg.n_keywords;
  cj["author_pool_size"] = cfg.author_pool_size;
  cj["community_size"] = cfg.community_size;
  cj["cluster_size"] = cfg.cluster_size;
  cj["sigma_stable"] = cfg.sigma_stable;
  cj["sigma_unstable"] = cfg.sigma_unstable;
  cj["churn_stable"] = cfg.churn_stable;
  cj["churn_unstable"] = cfg.churn_unstable;
  cj["seed"] = cfg.seed;
  echo.set("synth_config", cj);
  echo.set("out_corpus", corpus_out);
  echo.set("out_labels", labels_out);
  const std::string hash = echo.hash();

  SynthResult result = generate_corpus(cfg);
  atomic_write_file(corpus_out, file_header(hash) + result.corpus_text());
  atomic_write_file(labels_out, result.labels_csv(hash));
  echo.write(corpus_out + ".run.json");
  std::cout << "wrote " << corpus_out << " (" << result.records.size() << " papers, "
            << result.labels.size() << " venues)\n";
  return 0;
}

struct DeltaRow {
  std::string venue;
  std::string quantity;
  int year_from;
  double delta;
};

std::vector<DeltaRow> read_deltas_csv(const fs::path& path) {
  std::vector<DeltaRow> rows;
  bool saw_header = false;
  for (const std::string& line : read_data_lines(path)) {
    if (!saw_header) {
      if (line != "venue,quantity,year_from,year_to,delta")
        throw ParseError("deltas file " + path.string() + ": unexpected header");
      saw_header = true;
      continue;
    }
    std::vector<std::string> cells = split(line, ',');
    if (cells.size() != 5) throw ParseError("deltas file " + path.string() + ": bad row: " + line);
    rows.push_back({cells[0], cells[1], std::stoi(cells[2]), std::strtod(cells[4].c_str(), nullptr)});
  }
  if (rows.empty()) throw ParseError("deltas file " + path.string() + ": no rows");
  return rows;
}

int cmd_report(const GlobalOpts& g, const std::string& run_dir, std::string outdir) {
  if (outdir.empty()) outdir = run_dir;
  RunEcho echo("report", g);
  echo.set("run_dir", run_dir);
  echo.set("outdir", outdir);
  const std::string hash = echo.hash();

  fs::path dir(run_dir);
  FeatureMatrix features = read_feature_csv(dir / "features.csv");
  std::map<std::string, std::string> labels = read_labels_csv(dir / "labels.csv");
  std::vector<DeltaRow> deltas = read_deltas_csv(dir / "deltas.csv");
  fs::create_directories(outdir);

  // Group delta profile per year pair: mean and stddev across venues, one
  // row per (quantity, consecutive-year pair).
  {
    int min_from = deltas.front().year_from, max_from = deltas.front().year_from;
    for (const DeltaRow& d : deltas) {
      min_from = std::min(min_from, d.year_from);
      max_from = std::max(max_from, d.year_from);
    }
    std::map<std::string, std::map<int, std::pair<std::vector<double>, std::vector<double>>>> table;
    for (const DeltaRow& d : deltas) {
      auto it = labels.find(d.venue);
      if (it == labels.end()) continue;
      auto& cell = table[d.quantity][d.year_from];
      (it->second == "TT" ? cell.first : cell.second).push_back(d.delta);
    }
    auto stats_of = [](const std::vector<double>& v) -> std::string {
      if (v.empty()) return ",,";
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      std::string out = "," + format_double(mean) + ",";
      if (v.size() >= 2) {
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        out += format_double(std::sqrt(ss / static_cast<double>(v.size() - 1)));
      }
      return out;
    };
    std::ostringstream out;
    out << file_header(hash)
        << "quantity,year_from,year_to,tt_n,tt_mean,tt_stddev,ntt_n,ntt_mean,ntt_stddev\n";
    for (Quantity q : kAllQuantities) {
      const std::string qn = quantity_name(q);
      for (int y = min_from; y <= max_from; ++y) {
        const auto* cell = table.count(qn) && table[qn].count(y) ? &table[qn][y] : nullptr;
        const std::vector<double> empty;
        const std::vector<double>& tt = cell ? cell->first : empty;
        const std::vector<double>& ntt = cell ? cell->second : empty;
        out << qn << ',' << y << ',' << y + 1 << ',' << tt.size() << stats_of(tt) << ','
            << ntt.size() << stats_of(ntt) << '\n';
      }
    }
    atomic_write_file(fs::path(outdir) / "fig3_deltas.csv", out.str());
  }

  // Bucket averages per venue (mean of the 9 features in each bucket).
  {
    std::ostringstream out;
    out << file_header(hash) << "venue,label,bucket1,bucket2,bucket3\n";
    for (std::size_t i = 0; i < features.venue_ids.size(); ++i) {
      auto it = labels.find(features.venue_ids[i]);
      out << features.venue_ids[i] << ',' << (it == labels.end() ? "" : it->second);
      for (int bucket = 0; bucket < 3; ++bucket) {
        double sum = 0.0;
        for (int k = 0; k < 9; ++k) sum += features.rows[i][bucket * 9 + k];
        out << ',' << format_double(sum / 9.0);
      }
      out << '\n';
    }
    atomic_write_file(fs::path(outdir) / "bucket_averages.csv", out.str());
  }

  // Per-feature accuracy and the forward-combination curve, when a train run
  // left them in the run directory.
  if (fs::exists(dir / "ranking.csv")) {
    std::ostringstream out;
    out << file_header(hash) << "rank,feature,accuracy\n";
    bool saw_header = false;
    for (const std::string& line : read_data_lines(dir / "ranking.csv")) {
      if (!saw_header) {
        saw_header = true;
        continue;
      }
      std::vector<std::string> cells = split(line, ',');
      if (cells.size() != 4) throw ParseError("ranking.csv: bad row: " + line);
      out << cells[0] << ',' << cells[2] << ',' << cells[3] << '\n';
    }
    atomic_write_file(fs::path(outdir) / "fig8_feature_accuracy.csv", out.str());
  } else {
    std::cerr << "WARN io: " << (dir / "ranking.csv").string()
              << " not found; skipping fig8_feature_accuracy.csv\n";
  }
  if (fs::exists(dir / "curve.csv")) {
    std::ostringstream out;
    out << file_header(hash) << "n_features,feature_added,accuracy\n";
    bool saw_header = false;
    for (const std::string& line : read_data_lines(dir / "curve.csv")) {
      if (!saw_header) {
        saw_header = true;
        continue;
      }
      out << line << '\n';
    }
    atomic_write_file(fs::path(outdir) / "fig9_forward_curve.csv", out.str());
  } else {
    std::cerr << "WARN io: " << (dir / "curve.csv").string()
              << " not found; skipping fig9_forward_curve.csv\n";
  }

  echo.write(fs::path(outdir) / "report_run.json");
  std::cout << "wrote report CSVs to " << outdir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"venue stability features and top-tier classification"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--seed", g.seed, "random seed for splits, folds, and synthesis")
      ->each([&](const std::string&) { g.seed_set = true; });
  app.add_flag("--strict,!--lenient", g.strict, "fail on malformed corpus records (default strict)");
  app.add_flag("--standardize,!--no-standardize", g.standardize,
               "standardize features before SVM training (default on)");
  app.add_option("--pna-denominator", g.pna_denominator, "papers|authors (default papers)")
      ->check(CLI::IsMember({"papers", "authors"}));
  app.add_option("--ddi-norm", g.ddi_norm, "mass|count|literal (default mass)")
      ->check(CLI::IsMember({"mass", "count", "literal"}));
  app.add_option("--min-years", g.min_years, "consecutive years required for eligibility")
      ->check(CLI::PositiveNumber);
  app.add_flag("--isolation-filter", g.isolation_filter,
               "drop papers with no resolved citation in either direction");
  int min_year_opt = 0, max_year_opt = 0;
  app.add_option("--min-year", min_year_opt, "discard papers before this year")
      ->each([&](const std::string&) { g.min_year = min_year_opt; });
  app.add_option("--max-year", max_year_opt, "discard papers after this year")
      ->each([&](const std::string&) { g.max_year = max_year_opt; });

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate a corpus file and print a report");
  std::string in_corpus, in_out;
  ingest->add_option("--corpus", in_corpus, "corpus file (one JSON record per line)")->required();
  ingest->add_option("--out", in_out, "also write the report to this file");

  // features
  auto* features = app.add_subcommand("features", "compute the 27 stability features per venue");
  std::string ft_corpus, ft_out, ft_deltas, ft_venues = "all", ft_years;
  features->add_option("--corpus", ft_corpus, "corpus file")->required();
  features->add_option("--out", ft_out, "output feature CSV")->required();
  features->add_option("--deltas", ft_deltas, "output delta CSV (default: deltas.csv next to --out)");
  features->add_option("--venues", ft_venues, "comma-separated venue ids, or 'all'");
  features->add_option("--years", ft_years, "analysis window, e.g. 1999:2010 (default: corpus range)");

  // train
  auto* train = app.add_subcommand("train", "grid search, feature selection, and final model");
  std::string tr_features, tr_labels, tr_model, tr_grid, tr_ranking, tr_curve;
  double tr_fraction = 33.0 / 53.0, tr_corr = 0.9;
  int tr_folds = 10;
  std::string tr_gamma_grid, tr_c_grid, tr_cv_on = "validation", tr_final_fit = "all";
  train->add_option("--features", tr_features, "feature CSV")->required();
  train->add_option("--labels", tr_labels, "labels CSV (venue_id,label)")->required();
  train->add_option("--out", tr_model, "output model file")->required();
  train->add_option("--grid-report", tr_grid, "grid search report (default: grid_report.json)");
  train->add_option("--ranking", tr_ranking, "per-feature ranking CSV (default: ranking.csv)");
  train->add_option("--curve", tr_curve, "forward-combination curve CSV (default: curve.csv)");
  train->add_option("--train-fraction", tr_fraction, "train share of the labeled set");
  train->add_option("--folds", tr_folds, "cross-validation folds")->check(CLI::Range(2, 1000));
  train->add_option("--gamma-grid", tr_gamma_grid, "comma-separated gamma values");
  train->add_option("--c-grid", tr_c_grid, "comma-separated C values");
  train->add_option("--corr-threshold", tr_corr, "redundancy pruning threshold on |r|");
  train->add_option("--cv-on", tr_cv_on, "validation|train|all: rows used for grid-search CV")
      ->check(CLI::IsMember({"validation", "train", "all"}));
  train->add_option("--final-fit", tr_final_fit, "all|train: rows used for the final model")
      ->check(CLI::IsMember({"all", "train"}));

  // classify
  auto* classify = app.add_subcommand("classify", "apply a model; report nearest labeled venues");
  std::string cl_model, cl_features, cl_out;
  int cl_exemplars = 3;
  classify->add_option("--model", cl_model, "model file from train")->required();
  classify->add_option("--features", cl_features, "feature CSV")->required();
  classify->add_option("--out", cl_out, "output predictions CSV")->required();
  classify->add_option("--exemplars", cl_exemplars, "nearest labeled venues to report")
      ->check(CLI::Range(0, 100));

  // analyze
  auto* analyze = app.add_subcommand("analyze", "t-tests, correlations, and PCA factors");
  std::string an_features, an_labels, an_outdir;
  int an_top_k = 5;
  double an_threshold = 0.95, an_alpha = 0.05;
  analyze->add_option("--features", an_features, "feature CSV")->required();
  analyze->add_option("--labels", an_labels, "labels CSV")->required();
  analyze->add_option("--outdir", an_outdir, "output directory")->required();
  analyze->add_option("--pca-top-k", an_top_k, "loadings listed per factor")->check(CLI::Range(1, 27));
  analyze->add_option("--pca-threshold", an_threshold, "cumulative variance retention cut");
  analyze->add_option("--alpha", an_alpha, "significance level for the t-test table");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a seeded synthetic corpus with labels");
  std::string sy_config, sy_corpus, sy_labels;
  synth->add_option("--config", sy_config, "synth config JSON (defaults used when omitted)");
  synth->add_option("--out-corpus", sy_corpus, "output corpus file")->required();
  synth->add_option("--out-labels", sy_labels, "output labels CSV")->required();

  // report
  auto* report = app.add_subcommand("report", "plot-ready CSVs from a run directory");
  std::string rp_dir, rp_outdir;
  report->add_option("--run-dir", rp_dir, "directory with features.csv, deltas.csv, labels.csv")
      ->required();
  report->add_option("--outdir", rp_outdir, "output directory (default: run dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg;
    std::cerr << "ERROR config: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*ingest) return cmd_ingest(g, in_corpus, in_out);
    if (*features) return cmd_features(g, ft_corpus, ft_out, ft_deltas, ft_venues, ft_years);
    if (*train)
      return cmd_train(g, tr_features, tr_labels, tr_model, tr_grid, tr_ranking, tr_curve,
                       tr_fraction, tr_folds, tr_gamma_grid, tr_c_grid, tr_corr, tr_cv_on,
                       tr_final_fit);
    if (*classify) return cmd_classify(g, cl_model, cl_features, cl_out, cl_exemplars);
    if (*analyze)
      return cmd_analyze(g, an_features, an_labels, an_outdir, an_top_k, an_threshold, an_alpha);
    if (*synth) return cmd_synth(g, sy_config, sy_corpus, sy_labels);
    if (*report) return cmd_report(g, rp_dir, rp_outdir);
  } catch (const venuestab::Error& e) {
    std::cerr << "ERROR " << e.code() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ERROR internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
