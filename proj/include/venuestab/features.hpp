#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "venuestab/corpus.hpp"
#include "venuestab/entropy.hpp"
#include "venuestab/errors.hpp"
#include "venuestab/graph.hpp"
#include "venuestab/io.hpp"

namespace venuestab {

// The nine per-venue-per-year quantities, in bucket order.
enum class Quantity { CRDI, CKDI, CADI, PNA, CAAI, DDI, EDI, ACC, ABC };

inline constexpr std::array<Quantity, 9> kAllQuantities = {
    Quantity::CRDI, Quantity::CKDI, Quantity::CADI, Quantity::PNA, Quantity::CAAI,
    Quantity::DDI,  Quantity::EDI,  Quantity::ACC,  Quantity::ABC};

inline const char* quantity_name(Quantity q) {
  switch (q) {
    case Quantity::CRDI: return "crdi";
    case Quantity::CKDI: return "ckdi";
    case Quantity::CADI: return "cadi";
    case Quantity::PNA: return "pna";
    case Quantity::CAAI: return "caai";
    case Quantity::DDI: return "ddi";
    case Quantity::EDI: return "edi";
    case Quantity::ACC: return "acc";
    case Quantity::ABC: return "abc";
  }
  return "?";
}

enum class PnaDenominator { Papers, Authors };
// How the degree/edge-weight distributions are normalized before entropy:
// Mass weighs each bin by value*count (sums to 1), Count uses bin counts,
// Literal divides counts by the weight total without renormalizing.
enum class DegreeNorm { Mass, Count, Literal };

struct FeatureOptions {
  PnaDenominator pna_denominator = PnaDenominator::Papers;
  DegreeNorm degree_norm = DegreeNorm::Mass;
  int min_consecutive_years = 5;
};

// One venue's yearly values for one quantity; absent optionals mark years
// with no measurable value (empty slice, edgeless subgraph, ...).
struct YearSeries {
  std::string venue_id;
  Quantity quantity;
  int first_year = 0;
  std::vector<std::optional<double>> values;  // index i -> year first_year + i
};

struct DeltaSeries {
  std::string venue_id;
  Quantity quantity;
  // (year of the earlier member, |value(y) - value(y+1)|), consecutive years
  // only; pairs spanning a missing year are skipped, never interpolated.
  std::vector<std::pair<int, double>> deltas;
};

// --- per-slice diversity quantities -----------------------------------------

// Reference-field diversity: entropy of subfield tag counts over the slice's
// papers. A paper tagged with k subfields contributes 1 to each of k bins.
inline std::optional<double> crdi(const Corpus& corpus, const VenueYearSlice& s) {
  if (s.empty()) return std::nullopt;
  std::map<std::string, long long> counts;
  for (std::size_t i : s.paper_indices)
    for (const std::string& f : corpus.paper(i).subfields) ++counts[f];
  if (counts.empty()) return std::nullopt;
  return shannon_entropy(counts);
}

// Keyword diversity: entropy of keyword occurrence counts across the slice.
inline std::optional<double> ckdi(const Corpus& corpus, const VenueYearSlice& s) {
  if (s.empty()) return std::nullopt;
  std::map<std::string, long long> counts;
  for (std::size_t i : s.paper_indices)
    for (const std::string& k : corpus.paper(i).keywords) ++counts[k];
  if (counts.empty()) return std::nullopt;
  return shannon_entropy(counts);
}

// Entropy of one author's subfield counts over papers in [year-4, year],
// all venues; 0 when the window holds no tagged papers.
inline double author_diversity_index(const AuthorIndex& index, const std::string& author, int year) {
  std::map<std::string, long long> counts;
  for (std::size_t i : index.history(author, year - 4, year))
    for (const std::string& f : index.corpus().paper(i).subfields) ++counts[f];
  if (counts.empty()) return 0.0;
  return shannon_entropy(counts);
}

// Mean author diversity over the slice's author set.
inline std::optional<double> cadi(const AuthorIndex& index, const VenueYearSlice& s) {
  if (s.empty()) return std::nullopt;
  double sum = 0.0;
  for (const std::string& a : s.author_set) sum += author_diversity_index(index, a, s.year);
  return sum / static_cast<double>(s.author_set.size());
}

// Proportion of papers whose every author has no paper in this venue during
// the five strictly prior years. The denominator is the slice's paper count
// by default; the authors variant divides by the author-set size instead.
inline std::optional<double> pna(const AuthorIndex& index, const VenueYearSlice& s,
                                 PnaDenominator denom = PnaDenominator::Papers) {
  if (s.empty()) return std::nullopt;
  const Corpus& corpus = index.corpus();
  long long all_new_papers = 0;
  for (std::size_t i : s.paper_indices) {
    bool all_new = true;
    for (const std::string& a : corpus.paper(i).author_ids) {
      if (!index.history(a, s.year - 5, s.year - 1, &s.venue_id).empty()) {
        all_new = false;
        break;
      }
    }
    if (all_new) ++all_new_papers;
  }
  double d = denom == PnaDenominator::Papers ? static_cast<double>(s.paper_count)
                                             : static_cast<double>(s.author_set.size());
  return static_cast<double>(all_new_papers) / d;
}

// Publication age of one author in `year`: years since the first corpus
// publication, 0 when the first publication is not strictly earlier.
inline int author_age(const AuthorIndex& index, const std::string& author, int year) {
  std::optional<int> first = index.first_pub_year(author);
  if (!first || *first >= year) return 0;
  return year - *first;
}

// Publication-age diversity: entropy of the author count per distinct age.
inline std::optional<double> caai(const AuthorIndex& index, const VenueYearSlice& s) {
  if (s.empty()) return std::nullopt;
  std::map<int, long long> counts;
  for (const std::string& a : s.author_set) ++counts[author_age(index, a, s.year)];
  return shannon_entropy(counts);
}

// --- co-authorship network quantities ---------------------------------------

namespace detail {

inline std::optional<double> bin_entropy(const std::map<long long, long long>& bins,
                                         DegreeNorm norm) {
  if (bins.empty()) return std::nullopt;
  double total = 0.0;
  for (const auto& [value, count] : bins)
    total += norm == DegreeNorm::Mass ? static_cast<double>(value) * static_cast<double>(count)
                                      : static_cast<double>(count);
  if (norm != DegreeNorm::Literal) {
    std::vector<double> masses;
    masses.reserve(bins.size());
    for (const auto& [value, count] : bins)
      masses.push_back(norm == DegreeNorm::Mass
                           ? static_cast<double>(value) * static_cast<double>(count)
                           : static_cast<double>(count));
    return shannon_entropy(masses);
  }
  // Literal form: counts divided by the weight total, no renormalization.
  double weight_total = 0.0;
  for (const auto& [value, count] : bins)
    weight_total += static_cast<double>(value) * static_cast<double>(count);
  double h = 0.0;
  for (const auto& [value, count] : bins) {
    double p = static_cast<double>(count) / weight_total;
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

}  // namespace detail

// Degree diversity: entropy over the weighted-degree distribution of the
// subgraph's non-isolated nodes. All-isolated subgraphs have no value.
inline std::optional<double> ddi(const InducedSubgraph& sub, DegreeNorm norm = DegreeNorm::Mass) {
  std::map<long long, long long> bins;
  for (std::size_t i = 0; i < sub.node_count(); ++i) {
    long long d = sub.weighted_degree(static_cast<int>(i));
    if (d > 0) ++bins[d];
  }
  return detail::bin_entropy(bins, norm);
}

// Edge-strength diversity: entropy over the edge-weight distribution.
inline std::optional<double> edi(const InducedSubgraph& sub, DegreeNorm norm = DegreeNorm::Mass) {
  std::map<long long, long long> bins;
  for (std::size_t i = 0; i < sub.node_count(); ++i)
    for (const auto& [j, w] : sub.neighbors(static_cast<int>(i)))
      if (static_cast<int>(i) < j) ++bins[w];
  return detail::bin_entropy(bins, norm);
}

// Average closeness/betweenness over nodes with non-zero centrality. An
// edgeless subgraph yields 0, which is a valid value rather than a gap.
inline double acc_feature(const InducedSubgraph& sub) {
  std::vector<double> values = closeness_centrality(sub);
  return average_centrality(values);
}

inline double abc_feature(const InducedSubgraph& sub) {
  std::vector<double> values = betweenness_centrality(sub);
  return average_centrality(values);
}

// --- aggregation -------------------------------------------------------------

// Absolute consecutive-year differences. Requires at least two present years;
// a venue that cannot produce any is ineligible.
inline DeltaSeries delta_series(const YearSeries& series) {
  std::size_t present = 0;
  for (const auto& v : series.values)
    if (v) ++present;
  if (present < 2)
    throw EligibilityError("venue '" + series.venue_id + "': quantity " +
                           quantity_name(series.quantity) + " has " + std::to_string(present) +
                           " present year(s); need at least 2");
  DeltaSeries out;
  out.venue_id = series.venue_id;
  out.quantity = series.quantity;
  for (std::size_t i = 0; i + 1 < series.values.size(); ++i) {
    if (series.values[i] && series.values[i + 1])
      out.deltas.push_back(
          {series.first_year + static_cast<int>(i), std::fabs(*series.values[i] - *series.values[i + 1])});
  }
  return out;
}

struct Aggregate {
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;
};

// Mean, middle order statistic (midpoint of the two middles for even length),
// and sample standard deviation (n-1 divisor; 0 for a single value).
inline Aggregate aggregate(const std::vector<double>& deltas) {
  if (deltas.empty()) throw ValidationError("aggregate of empty delta list");
  Aggregate a;
  std::vector<double> sorted = deltas;
  std::sort(sorted.begin(), sorted.end());
  std::size_t n = sorted.size();
  if (sorted.front() == sorted.back()) {
    // All equal: exact values, stddev exactly 0.
    a.mean = a.median = sorted.front();
    return a;
  }
  double sum = 0.0;
  for (double d : deltas) sum += d;
  a.mean = sum / static_cast<double>(n);
  a.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  double ss = 0.0;
  for (double d : deltas) ss += (d - a.mean) * (d - a.mean);
  a.stddev = std::sqrt(ss / static_cast<double>(n - 1));
  return a;
}

inline Aggregate aggregate(const DeltaSeries& series) {
  std::vector<double> values;
  values.reserve(series.deltas.size());
  for (const auto& [year, d] : series.deltas) values.push_back(d);
  if (values.empty())
    throw EligibilityError("venue '" + series.venue_id + "': quantity " +
                           quantity_name(series.quantity) + " has no consecutive-year pair");
  return aggregate(values);
}

// The 27 aggregated stability features of one venue: (mean, median, stddev)
// of the delta series per quantity, in bucket order.
struct FeatureVector {
  std::string venue_id;
  std::array<double, 27> values{};

  double operator[](std::size_t i) const { return values[i]; }
};

inline std::vector<std::string> feature_names() {
  std::vector<std::string> names;
  for (Quantity q : kAllQuantities)
    for (const char* stat : {"mean", "median", "stddev"})
      names.push_back(std::string(quantity_name(q)) + "_" + stat);
  return names;
}

// Index into FeatureVector::values for (quantity, statistic 0=mean 1=median
// 2=stddev).
inline std::size_t feature_index(Quantity q, int stat) {
  return static_cast<std::size_t>(q) * 3 + static_cast<std::size_t>(stat);
}

// --- extraction pipeline ------------------------------------------------------

// Computes per-venue yearly series and aggregated feature vectors. The
// co-authorship quantities for all requested venues are computed in one
// ascending-year sweep that grows a single global graph, since the graph for
// year y is the graph for year y-1 plus year y-1's papers.
class FeatureExtractor {
 public:
  FeatureExtractor(const Corpus& corpus, const AuthorIndex& index, int first_year, int last_year,
                   FeatureOptions options = {})
      : corpus_(&corpus), index_(&index), first_year_(first_year), last_year_(last_year),
        options_(options) {
    if (first_year > last_year) throw ConfigError("feature year window is inverted");
  }

  const FeatureOptions& options() const { return options_; }
  int first_year() const { return first_year_; }
  int last_year() const { return last_year_; }

  // All nine yearly series for one venue. Network quantities come from the
  // induced subgraph of the pre-year global graph.
  std::map<Quantity, YearSeries> year_series(const std::string& venue) const {
    std::vector<std::string> one{venue};
    return sweep(one).at(venue);
  }

  FeatureVector feature_vector(const std::string& venue) const {
    std::vector<std::string> one{venue};
    auto series = sweep(one);
    return build_vector(venue, series.at(venue));
  }

  struct MatrixResult {
    std::vector<FeatureVector> rows;
    std::vector<std::pair<std::string, std::string>> skipped;  // venue -> reason
    // Every computed delta: (venue, quantity, earlier year, delta).
    std::vector<std::tuple<std::string, Quantity, int, double>> deltas;
  };

  // Feature vectors for many venues; ineligible venues are reported in
  // `skipped` rather than aborting the batch.
  MatrixResult feature_matrix(const std::vector<std::string>& venues) const {
    std::vector<std::string> sorted = venues;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    auto all_series = sweep(sorted);
    MatrixResult result;
    for (const std::string& venue : sorted) {
      try {
        result.rows.push_back(build_vector(venue, all_series.at(venue), &result.deltas));
      } catch (const EligibilityError& e) {
        result.skipped.push_back({venue, e.what()});
      }
    }
    return result;
  }

 private:
  // Longest run of consecutive years with a nonempty slice.
  int longest_consecutive_run(const std::string& venue) const {
    int best = 0, run = 0;
    for (int y = first_year_; y <= last_year_; ++y) {
      const auto* papers = corpus_->venue_year_papers(venue, y);
      if (papers && !papers->empty()) {
        ++run;
        best = std::max(best, run);
      } else {
        run = 0;
      }
    }
    return best;
  }

  std::string coverage_string(const std::string& venue) const {
    std::ostringstream out;
    bool first = true;
    for (int y = first_year_; y <= last_year_; ++y) {
      const auto* papers = corpus_->venue_year_papers(venue, y);
      if (papers && !papers->empty()) {
        if (!first) out << ' ';
        out << y;
        first = false;
      }
    }
    return first ? "(none)" : out.str();
  }

  std::map<std::string, std::map<Quantity, YearSeries>> sweep(
      const std::vector<std::string>& venues) const {
    for (const std::string& v : venues)
      if (!corpus_->has_venue(v)) throw ValidationError("unknown venue '" + v + "'");

    std::map<std::string, std::map<Quantity, YearSeries>> out;
    const int n_years = last_year_ - first_year_ + 1;
    for (const std::string& v : venues) {
      for (Quantity q : kAllQuantities) {
        YearSeries s;
        s.venue_id = v;
        s.quantity = q;
        s.first_year = first_year_;
        s.values.assign(n_years, std::nullopt);
        out[v].emplace(q, std::move(s));
      }
    }

    GraphAccumulator acc(*corpus_);
    for (int y = corpus_->min_year(); y < first_year_; ++y) acc.add_year(y);
    for (int y = first_year_; y <= last_year_; ++y) {
      const int yi = y - first_year_;
      for (const std::string& v : venues) {
        VenueYearSlice s = slice(*corpus_, v, y);
        if (s.empty()) continue;
        auto& series = out[v];
        series.at(Quantity::CRDI).values[yi] = crdi(*corpus_, s);
        series.at(Quantity::CKDI).values[yi] = ckdi(*corpus_, s);
        series.at(Quantity::CADI).values[yi] = cadi(*index_, s);
        series.at(Quantity::PNA).values[yi] = pna(*index_, s, options_.pna_denominator);
        series.at(Quantity::CAAI).values[yi] = caai(*index_, s);
        std::set<std::string> authors(s.author_set.begin(), s.author_set.end());
        InducedSubgraph sub(acc.graph(), authors);
        series.at(Quantity::DDI).values[yi] = ddi(sub, options_.degree_norm);
        series.at(Quantity::EDI).values[yi] = edi(sub, options_.degree_norm);
        series.at(Quantity::ACC).values[yi] = acc_feature(sub);
        series.at(Quantity::ABC).values[yi] = abc_feature(sub);
      }
      acc.add_year(y);
    }
    return out;
  }

  FeatureVector build_vector(
      const std::string& venue, const std::map<Quantity, YearSeries>& series,
      std::vector<std::tuple<std::string, Quantity, int, double>>* delta_log = nullptr) const {
    int run = longest_consecutive_run(venue);
    if (run < options_.min_consecutive_years)
      throw EligibilityError("venue '" + venue + "' has " + std::to_string(run) +
                             " consecutive year(s) of data in " + std::to_string(first_year_) +
                             "-" + std::to_string(last_year_) + " (need " +
                             std::to_string(options_.min_consecutive_years) +
                             "); years present: " + coverage_string(venue));
    FeatureVector fv;
    fv.venue_id = venue;
    for (Quantity q : kAllQuantities) {
      DeltaSeries ds = delta_series(series.at(q));
      Aggregate agg = aggregate(ds);
      fv.values[feature_index(q, 0)] = agg.mean;
      fv.values[feature_index(q, 1)] = agg.median;
      fv.values[feature_index(q, 2)] = agg.stddev;
      if (delta_log)
        for (const auto& [year, d] : ds.deltas) delta_log->push_back({venue, q, year, d});
    }
    return fv;
  }

  const Corpus* corpus_;
  const AuthorIndex* index_;
  int first_year_;
  int last_year_;
  FeatureOptions options_;
};

// Single-venue convenience wrapper over the extractor.
inline FeatureVector feature_vector(const Corpus& corpus, const AuthorIndex& index,
                                    const std::string& venue, int first_year, int last_year,
                                    FeatureOptions options = {}) {
  return FeatureExtractor(corpus, index, first_year, last_year, options).feature_vector(venue);
}

// --- CSV ----------------------------------------------------------------------

inline std::string feature_csv_header() {
  std::string h = "venue";
  for (const std::string& name : feature_names()) h += "," + name;
  return h;
}

inline std::string feature_matrix_to_csv(const std::vector<FeatureVector>& rows,
                                         const std::string& config_hash) {
  std::ostringstream out;
  out << file_header(config_hash) << feature_csv_header() << '\n';
  for (const FeatureVector& fv : rows) {
    out << fv.venue_id;
    for (double v : fv.values) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

struct FeatureMatrix {
  std::vector<std::string> venue_ids;
  std::vector<std::array<double, 27>> rows;
};

inline FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
  FeatureMatrix m;
  const std::string expected_header = feature_csv_header();
  bool saw_header = false;
  for (const std::string& line : read_data_lines(path)) {
    if (!saw_header) {
      if (line != expected_header)
        throw ParseError("feature file " + path.string() + ": unexpected header");
      saw_header = true;
      continue;
    }
    std::vector<std::string> cells = split(line, ',');
    if (cells.size() != 28)
      throw ParseError("feature file " + path.string() + ": expected 28 columns, got " +
                       std::to_string(cells.size()));
    std::array<double, 27> row{};
    for (std::size_t i = 0; i < 27; ++i) {
      char* end = nullptr;
      row[i] = std::strtod(cells[i + 1].c_str(), &end);
      if (end == cells[i + 1].c_str() || *end != '\0')
        throw ParseError("feature file " + path.string() + ": bad number '" + cells[i + 1] + "'");
    }
    m.venue_ids.push_back(cells[0]);
    m.rows.push_back(row);
  }
  if (!saw_header || m.rows.empty())
    throw ParseError("feature file " + path.string() + ": no data rows");
  return m;
}

}  // namespace venuestab
