#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "venuestab/corpus.hpp"
#include "venuestab/errors.hpp"
#include "venuestab/io.hpp"

namespace venuestab {

namespace detail {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Self-contained generator: all draws are derived from raw 64-bit outputs,
// so streams are reproducible independent of the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(splitmix64(seed)) {}

  uint64_t next() {
    state_ = splitmix64(state_ + 0x2545f4914f6cdd1dull);
    return state_;
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Inclusive range.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform() * static_cast<double>(hi - lo + 1));
  }

  double normal() {
    // Polar Box-Muller; the spare value is kept for the next call.
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  int poisson(double lambda) {
    double limit = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  std::size_t categorical(const std::vector<double>& weights) {
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    double x = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (x < acc) return i;
    }
    return weights.size() - 1;
  }

 private:
  uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline void renormalize(std::vector<double>& w) {
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= total;
}

// A mixture that fluctuates around a fixed base profile: per-bin log-offsets
// follow an AR(1) process and the realized weights are base * exp(sigma * z),
// renormalized. Fluctuation amplitude scales with sigma while the mixture
// keeps returning to its base, so it never absorbs into a corner. The normal
// draws happen even at sigma = 0 so that runs with different sigmas consume
// identical stream positions.
struct DriftingMixture {
  std::vector<double> base;
  std::vector<double> offsets;
  std::vector<double> weights;
  static constexpr double kReversion = 0.6;

  explicit DriftingMixture(std::vector<double> base_weights)
      : base(std::move(base_weights)), offsets(base.size(), 0.0), weights(base) {
    renormalize(base);
    weights = base;
  }

  void step(double sigma, Rng& rng) {
    for (std::size_t i = 0; i < base.size(); ++i)
      offsets[i] = kReversion * offsets[i] + rng.normal();
    for (std::size_t i = 0; i < base.size(); ++i)
      weights[i] = base[i] * std::exp(sigma * offsets[i]);
    renormalize(weights);
  }
};

}  // namespace detail

// Configuration for the seeded corpus generator. Stable venues get small
// drift/churn amplitudes, unstable venues get large ones; the hypothesis
// under test is that the delta features separate the two groups.
struct SynthConfig {
  int n_venues_stable = 30;
  int n_venues_unstable = 30;
  int year_start = 1999;
  int year_end = 2010;
  int papers_per_year = 100;  // mean; actual counts jitter +-10%
  int n_subfields = 22;
  int n_keywords = 40;
  int author_pool_size = 50000;
  int community_size = 0;  // 0 = auto
  int cluster_size = 6;
  double sigma_stable = 0.05;
  double sigma_unstable = 0.5;
  double churn_stable = 0.05;
  double churn_unstable = 0.15;
  uint64_t seed = 42;
};

inline SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig cfg;
  static const std::vector<std::string> known = {
      "n_venues_stable", "n_venues_unstable", "year_start",    "year_end",
      "papers_per_year", "n_subfields",       "n_keywords",    "author_pool_size",
      "community_size",  "cluster_size",      "sigma_stable",  "sigma_unstable",
      "churn_stable",    "churn_unstable",    "seed"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown synth config key '" + key + "'");
  }
  auto get_int = [&](const char* key, int dflt) { return j.value(key, dflt); };
  cfg.n_venues_stable = get_int("n_venues_stable", cfg.n_venues_stable);
  cfg.n_venues_unstable = get_int("n_venues_unstable", cfg.n_venues_unstable);
  cfg.year_start = get_int("year_start", cfg.year_start);
  cfg.year_end = get_int("year_end", cfg.year_end);
  cfg.papers_per_year = get_int("papers_per_year", cfg.papers_per_year);
  cfg.n_subfields = get_int("n_subfields", cfg.n_subfields);
  cfg.n_keywords = get_int("n_keywords", cfg.n_keywords);
  cfg.author_pool_size = get_int("author_pool_size", cfg.author_pool_size);
  cfg.community_size = get_int("community_size", cfg.community_size);
  cfg.cluster_size = get_int("cluster_size", cfg.cluster_size);
  cfg.sigma_stable = j.value("sigma_stable", cfg.sigma_stable);
  cfg.sigma_unstable = j.value("sigma_unstable", cfg.sigma_unstable);
  cfg.churn_stable = j.value("churn_stable", cfg.churn_stable);
  cfg.churn_unstable = j.value("churn_unstable", cfg.churn_unstable);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

struct SynthResult {
  std::vector<PaperRecord> records;
  std::map<std::string, std::string> labels;  // venue id -> TT / NTT

  Corpus to_corpus() const { return Corpus(records, std::nullopt, std::nullopt); }

  std::string corpus_text() const {
    std::string out;
    for (const PaperRecord& r : records) out += record_to_json_line(r) + "\n";
    return out;
  }

  std::string labels_csv(const std::string& config_hash) const {
    std::string out = file_header(config_hash) + "venue_id,label\n";
    for (const auto& [venue, label] : labels) out += venue + "," + label + "\n";
    return out;
  }
};

namespace detail {

inline void validate_synth_config(const SynthConfig& cfg, int community_size) {
  if (cfg.n_venues_stable < 0 || cfg.n_venues_unstable < 0 ||
      cfg.n_venues_stable + cfg.n_venues_unstable == 0)
    throw ConfigError("need at least one venue");
  if (cfg.year_start > cfg.year_end) throw ConfigError("year range is inverted");
  if (cfg.year_start < 1000 || cfg.year_end > 9999) throw ConfigError("years must be 4-digit");
  if (cfg.papers_per_year <= 0) throw ConfigError("papers_per_year must be positive");
  if (cfg.n_subfields <= 0 || cfg.n_keywords <= 0)
    throw ConfigError("n_subfields and n_keywords must be positive");
  if (cfg.cluster_size < 2) throw ConfigError("cluster_size must be >= 2");
  if (community_size < cfg.cluster_size)
    throw ConfigError("community smaller than one cluster");
  if (cfg.author_pool_size < 2 * community_size)
    throw ConfigError("author pool too small: need at least 2x the community size (" +
                      std::to_string(2 * community_size) + ")");
  if (cfg.sigma_stable < 0.0 || cfg.sigma_unstable < 0.0)
    throw ConfigError("sigma must be nonnegative");
  if (cfg.n_venues_stable > 0 && cfg.n_venues_unstable > 0 &&
      !(cfg.sigma_stable < cfg.sigma_unstable))
    throw ConfigError("sigma_stable must be smaller than sigma_unstable");
  if (cfg.churn_stable < 0.0 || cfg.churn_stable > 1.0 || cfg.churn_unstable < 0.0 ||
      cfg.churn_unstable > 1.0)
    throw ConfigError("churn rates must lie in [0,1]");
}

}  // namespace detail

// Generates one venue's papers per year from drifting mixtures: a subfield
// mixture, a keyword mixture, and an author community partitioned into
// clusters whose activity weights drift. Team co-authorship stays within a
// cluster except for cross-cluster mixing proportional to sigma, so network
// structure fluctuates with the same knob as the topical mixtures. Author
// churn is driven by a separate rate whose year-to-year jitter also scales
// with sigma.
inline SynthResult generate_corpus(const SynthConfig& cfg) {
  const int community_auto = std::max(4 * cfg.cluster_size, cfg.papers_per_year + 20);
  int community_size = cfg.community_size > 0 ? cfg.community_size : community_auto;
  // Round up to whole clusters.
  const int n_clusters = (community_size + cfg.cluster_size - 1) / cfg.cluster_size;
  community_size = n_clusters * cfg.cluster_size;
  detail::validate_synth_config(cfg, community_size);

  // Team-size distribution, mean ~2.4 authors per paper.
  const std::vector<double> team_dist = {0.18, 0.38, 0.27, 0.12, 0.05};
  if (static_cast<int>(team_dist.size()) > cfg.cluster_size)
    throw ConfigError("cluster_size must be >= the maximum team size (" +
                      std::to_string(team_dist.size()) + ")");

  SynthResult result;
  const int n_venues = cfg.n_venues_stable + cfg.n_venues_unstable;
  for (int vi = 0; vi < n_venues; ++vi) {
    const bool stable = vi < cfg.n_venues_stable;
    const double sigma = stable ? cfg.sigma_stable : cfg.sigma_unstable;
    const double churn_base = stable ? cfg.churn_stable : cfg.churn_unstable;
    char venue_id[16];
    std::snprintf(venue_id, sizeof(venue_id), "%s%03d", stable ? "S" : "U",
                  stable ? vi : vi - cfg.n_venues_stable);
    result.labels[venue_id] = stable ? "TT" : "NTT";

    uint64_t venue_seed = detail::splitmix64(cfg.seed ^ (0x5deece66dull * (vi + 1)));
    detail::Rng init_rng(venue_seed + 1);
    detail::Rng drift_rng(venue_seed + 2);
    detail::Rng churn_rng(venue_seed + 3);
    detail::Rng sample_rng(venue_seed + 4);

    // Topical profile: a few home subfields dominate.
    std::vector<double> field_base(cfg.n_subfields, 0.03);
    int n_home = std::min(cfg.n_subfields, init_rng.uniform_int(2, 4));
    for (int h = 0; h < n_home; ++h)
      field_base[init_rng.uniform_int(0, cfg.n_subfields - 1)] += 0.8 + init_rng.uniform();
    detail::DriftingMixture field_w(std::move(field_base));

    std::vector<double> keyword_base(cfg.n_keywords);
    for (int k = 0; k < cfg.n_keywords; ++k)
      keyword_base[k] = std::exp(0.8 * init_rng.normal()) / std::pow(k + 1.0, 0.8);
    detail::DriftingMixture keyword_w(std::move(keyword_base));

    std::vector<double> cluster_base(n_clusters);
    for (int k = 0; k < n_clusters; ++k) cluster_base[k] = std::exp(0.5 * init_rng.normal());
    detail::DriftingMixture cluster_w(std::move(cluster_base));

    // Community membership: pool author index per slot, clusters are
    // contiguous slot ranges.
    std::vector<int> member(community_size);
    std::vector<char> in_community(cfg.author_pool_size, 0);
    for (int s = 0; s < community_size; ++s) {
      int a;
      do {
        a = init_rng.uniform_int(0, cfg.author_pool_size - 1);
      } while (in_community[a]);
      in_community[a] = 1;
      member[s] = a;
    }

    std::vector<std::string> prior_paper_ids;   // same-venue reference targets
    std::vector<std::string> current_year_ids;

    for (int year = cfg.year_start; year <= cfg.year_end; ++year) {
      if (year > cfg.year_start) {
        field_w.step(sigma, drift_rng);
        keyword_w.step(sigma, drift_rng);
        cluster_w.step(sigma, drift_rng);
        double churn_t = std::clamp(churn_base * (1.0 + 2.0 * sigma * churn_rng.normal()), 0.0, 0.9);
        for (int s = 0; s < community_size; ++s) {
          if (churn_rng.uniform() >= churn_t) continue;
          int a;
          do {
            a = churn_rng.uniform_int(0, cfg.author_pool_size - 1);
          } while (in_community[a]);
          in_community[member[s]] = 0;
          in_community[a] = 1;
          member[s] = a;
        }
      }

      prior_paper_ids.insert(prior_paper_ids.end(), current_year_ids.begin(),
                             current_year_ids.end());
      current_year_ids.clear();

      int jitter = static_cast<int>(std::lround((sample_rng.uniform() - 0.5) * 0.2 *
                                                cfg.papers_per_year));
      int n_papers = std::max(1, cfg.papers_per_year + jitter);
      for (int p = 0; p < n_papers; ++p) {
        PaperRecord rec;
        rec.venue_id = venue_id;
        rec.year = year;
        rec.paper_id = std::string(venue_id) + "_" + std::to_string(year) + "_" + std::to_string(p);

        // Team from one cluster, occasionally mixed across clusters.
        int cluster = static_cast<int>(sample_rng.categorical(cluster_w.weights));
        int team_size = static_cast<int>(sample_rng.categorical(team_dist)) + 1;
        std::vector<int> slots;
        while (static_cast<int>(slots.size()) < team_size) {
          int slot = cluster * cfg.cluster_size + sample_rng.uniform_int(0, cfg.cluster_size - 1);
          if (std::find(slots.begin(), slots.end(), slot) == slots.end()) slots.push_back(slot);
        }
        double cross_u = sample_rng.uniform();
        int cross_cluster = sample_rng.uniform_int(0, n_clusters - 1);
        int cross_slot =
            cross_cluster * cfg.cluster_size + sample_rng.uniform_int(0, cfg.cluster_size - 1);
        if (team_size > 1 && cross_u < std::min(0.6, 0.4 * sigma) &&
            std::find(slots.begin(), slots.end(), cross_slot) == slots.end())
          slots.back() = cross_slot;
        for (int slot : slots) {
          char author_id[16];
          std::snprintf(author_id, sizeof(author_id), "A%07d", member[slot]);
          rec.author_ids.push_back(author_id);
        }

        int n_fields = 1 + (sample_rng.uniform() < 0.35 ? 1 : 0);
        while (static_cast<int>(rec.subfields.size()) < n_fields) {
          std::string f = "F" + std::to_string(sample_rng.categorical(field_w.weights));
          if (std::find(rec.subfields.begin(), rec.subfields.end(), f) == rec.subfields.end())
            rec.subfields.push_back(f);
        }
        int n_kw = sample_rng.uniform_int(3, 6);
        n_kw = std::min(n_kw, cfg.n_keywords);
        while (static_cast<int>(rec.keywords.size()) < n_kw) {
          std::string k = "K" + std::to_string(sample_rng.categorical(keyword_w.weights));
          if (std::find(rec.keywords.begin(), rec.keywords.end(), k) == rec.keywords.end())
            rec.keywords.push_back(k);
        }
        if (!prior_paper_ids.empty()) {
          int n_refs = std::min<int>(sample_rng.poisson(1.5),
                                     static_cast<int>(prior_paper_ids.size()));
          while (static_cast<int>(rec.reference_ids.size()) < n_refs) {
            const std::string& ref =
                prior_paper_ids[sample_rng.uniform_int(0, static_cast<int>(prior_paper_ids.size()) - 1)];
            if (std::find(rec.reference_ids.begin(), rec.reference_ids.end(), ref) ==
                rec.reference_ids.end())
              rec.reference_ids.push_back(ref);
          }
        }
        current_year_ids.push_back(rec.paper_id);
        result.records.push_back(std::move(rec));
      }
    }
  }
  return result;
}

}  // namespace venuestab
