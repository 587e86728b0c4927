#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "venuestab/errors.hpp"

namespace venuestab {

// One publication record. Authors are trusted to be pre-disambiguated ids;
// extra keys in the input (title, affiliation, abstract, ...) are ignored.
struct PaperRecord {
  std::string paper_id;
  std::string venue_id;
  int year = 0;
  std::vector<std::string> author_ids;
  std::vector<std::string> subfields;
  std::vector<std::string> keywords;
  std::vector<std::string> reference_ids;
};

struct LoadOptions {
  std::optional<int> min_year;
  std::optional<int> max_year;
  bool strict = true;
  // Keep only papers that cite or are cited by at least one other paper.
  bool isolation_filter = false;
};

struct LoadReport {
  std::size_t total_lines = 0;
  std::size_t parsed = 0;
  std::size_t skipped_malformed = 0;       // lenient mode only
  std::size_t skipped_out_of_range = 0;    // outside the configured year range
  std::size_t skipped_duplicate_id = 0;    // lenient mode only
  std::size_t dropped_isolated = 0;        // isolation filter, when enabled
  std::size_t dangling_references = 0;
  std::vector<std::string> warnings;
};

class Corpus {
 public:
  Corpus(std::vector<PaperRecord> papers, std::optional<int> cfg_min_year,
         std::optional<int> cfg_max_year) {
    if (papers.empty()) throw ValidationError("corpus is empty");
    papers_ = std::move(papers);
    int lo = papers_[0].year, hi = papers_[0].year;
    for (std::size_t i = 0; i < papers_.size(); ++i) {
      const PaperRecord& p = papers_[i];
      if (!by_id_.emplace(p.paper_id, i).second)
        throw ValidationError("duplicate paper_id '" + p.paper_id + "'");
      by_venue_year_[p.venue_id][p.year].push_back(i);
      lo = std::min(lo, p.year);
      hi = std::max(hi, p.year);
      field_universe_.insert(p.subfields.begin(), p.subfields.end());
      keyword_universe_.insert(p.keywords.begin(), p.keywords.end());
    }
    min_year_ = cfg_min_year.value_or(lo);
    max_year_ = cfg_max_year.value_or(hi);
    resolved_refs_.resize(papers_.size());
    cited_by_count_.assign(papers_.size(), 0);
    for (std::size_t i = 0; i < papers_.size(); ++i) {
      std::unordered_set<std::string> seen;
      for (const std::string& ref : papers_[i].reference_ids) {
        if (!seen.insert(ref).second) continue;  // duplicate ref entries count once
        auto it = by_id_.find(ref);
        if (it == by_id_.end()) {
          ++dangling_references_;
        } else if (it->second != i) {
          resolved_refs_[i].push_back(it->second);
          ++cited_by_count_[it->second];
        }
      }
    }
  }

  const std::vector<PaperRecord>& papers() const { return papers_; }
  const PaperRecord& paper(std::size_t idx) const { return papers_[idx]; }

  int min_year() const { return min_year_; }
  int max_year() const { return max_year_; }

  const std::set<std::string>& field_universe() const { return field_universe_; }
  const std::set<std::string>& keyword_universe() const { return keyword_universe_; }
  std::size_t dangling_references() const { return dangling_references_; }

  // References that resolve inside the corpus; dangling ids are excluded
  // from all citation counts.
  const std::vector<std::size_t>& resolved_refs(std::size_t paper_idx) const {
    return resolved_refs_[paper_idx];
  }
  std::size_t citation_count(std::size_t paper_idx) const { return cited_by_count_[paper_idx]; }

  bool has_venue(const std::string& venue) const { return by_venue_year_.count(venue) > 0; }

  std::vector<std::string> venues() const {
    std::vector<std::string> out;
    out.reserve(by_venue_year_.size());
    for (const auto& [venue, years] : by_venue_year_) out.push_back(venue);
    return out;
  }

  // Years in which `venue` has at least one paper, ascending.
  std::vector<int> venue_years(const std::string& venue) const {
    auto it = by_venue_year_.find(venue);
    if (it == by_venue_year_.end()) throw ValidationError("unknown venue '" + venue + "'");
    std::vector<int> out;
    for (const auto& [year, idxs] : it->second) out.push_back(year);
    return out;
  }

  const std::vector<std::size_t>* venue_year_papers(const std::string& venue, int year) const {
    auto it = by_venue_year_.find(venue);
    if (it == by_venue_year_.end()) return nullptr;
    auto yit = it->second.find(year);
    return yit == it->second.end() ? nullptr : &yit->second;
  }

  std::optional<std::size_t> find_paper(const std::string& paper_id) const {
    auto it = by_id_.find(paper_id);
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::vector<PaperRecord> papers_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::map<std::string, std::map<int, std::vector<std::size_t>>> by_venue_year_;
  std::vector<std::vector<std::size_t>> resolved_refs_;
  std::vector<std::size_t> cited_by_count_;
  std::set<std::string> field_universe_;
  std::set<std::string> keyword_universe_;
  int min_year_ = 0;
  int max_year_ = 0;
  std::size_t dangling_references_ = 0;
};

// All papers of one venue in one year. paper_count == 0 marks a missing year;
// downstream feature code propagates the marker instead of erroring.
struct VenueYearSlice {
  std::string venue_id;
  int year = 0;
  std::vector<std::size_t> paper_indices;
  std::vector<std::string> author_set;  // sorted, unique
  std::size_t paper_count = 0;

  bool empty() const { return paper_count == 0; }
};

inline VenueYearSlice slice(const Corpus& corpus, const std::string& venue, int year) {
  if (!corpus.has_venue(venue)) throw ValidationError("unknown venue '" + venue + "'");
  VenueYearSlice s;
  s.venue_id = venue;
  s.year = year;
  if (const std::vector<std::size_t>* idxs = corpus.venue_year_papers(venue, year)) {
    s.paper_indices = *idxs;
    std::set<std::string> authors;
    for (std::size_t i : s.paper_indices) {
      const PaperRecord& p = corpus.paper(i);
      authors.insert(p.author_ids.begin(), p.author_ids.end());
    }
    s.author_set.assign(authors.begin(), authors.end());
    s.paper_count = s.paper_indices.size();
  }
  return s;
}

// Per-author view of the corpus: publication list sorted by year plus the
// first publication year (the basis of publication age).
class AuthorIndex {
 public:
  struct Entry {
    int year;
    std::string venue_id;
    std::size_t paper_idx;
  };

  explicit AuthorIndex(const Corpus& corpus) : corpus_(&corpus) {
    for (std::size_t i = 0; i < corpus.papers().size(); ++i) {
      const PaperRecord& p = corpus.paper(i);
      for (const std::string& a : p.author_ids) entries_[a].push_back({p.year, p.venue_id, i});
    }
    for (auto& [author, list] : entries_) {
      std::sort(list.begin(), list.end(), [](const Entry& x, const Entry& y) {
        if (x.year != y.year) return x.year < y.year;
        return x.paper_idx < y.paper_idx;
      });
      first_pub_year_[author] = list.front().year;
    }
  }

  // First publication year over the whole corpus; nullopt for unknown authors.
  std::optional<int> first_pub_year(const std::string& author) const {
    auto it = first_pub_year_.find(author);
    if (it == first_pub_year_.end()) return std::nullopt;
    return it->second;
  }

  // Papers by `author` with year in [from_year, to_year], optionally only in
  // one venue. Unknown authors yield an empty list: new authors are expected.
  std::vector<std::size_t> history(const std::string& author, int from_year, int to_year,
                                   const std::string* venue_filter = nullptr) const {
    if (from_year > to_year) throw ValidationError("author history window is inverted");
    std::vector<std::size_t> out;
    auto it = entries_.find(author);
    if (it == entries_.end()) return out;
    for (const Entry& e : it->second) {
      if (e.year < from_year) continue;
      if (e.year > to_year) break;
      if (venue_filter && e.venue_id != *venue_filter) continue;
      out.push_back(e.paper_idx);
    }
    return out;
  }

  bool has_author(const std::string& author) const { return entries_.count(author) > 0; }

  const Corpus& corpus() const { return *corpus_; }

 private:
  const Corpus* corpus_;
  std::unordered_map<std::string, std::vector<Entry>> entries_;
  std::unordered_map<std::string, int> first_pub_year_;
};

inline std::vector<std::size_t> author_history(const AuthorIndex& index, const std::string& author,
                                               int from_year, int to_year,
                                               const std::string* venue_filter = nullptr) {
  return index.history(author, from_year, to_year, venue_filter);
}

namespace detail {

inline PaperRecord record_from_json(const nlohmann::json& j) {
  PaperRecord rec;
  if (!j.is_object()) throw ParseError("record is not an object");
  auto need = [&](const char* key) -> const nlohmann::json& {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string("missing key '") + key + "'");
    return *it;
  };
  auto str_array = [](const nlohmann::json& a, const char* key) {
    if (!a.is_array()) throw ParseError(std::string("key '") + key + "' is not an array");
    std::vector<std::string> out;
    for (const auto& v : a) {
      if (!v.is_string()) throw ParseError(std::string("key '") + key + "' has a non-string element");
      out.push_back(v.get<std::string>());
    }
    return out;
  };

  const nlohmann::json& id = need("id");
  if (!id.is_string() || id.get<std::string>().empty()) throw ParseError("key 'id' must be a nonempty string");
  rec.paper_id = id.get<std::string>();

  const nlohmann::json& venue = need("venue");
  if (!venue.is_string() || venue.get<std::string>().empty())
    throw ParseError("key 'venue' must be a nonempty string");
  rec.venue_id = venue.get<std::string>();

  const nlohmann::json& year = need("year");
  if (!year.is_number_integer()) throw ParseError("key 'year' must be an integer");
  rec.year = year.get<int>();
  if (rec.year < 1000 || rec.year > 9999) throw ParseError("key 'year' must be a 4-digit year");

  rec.author_ids = str_array(need("authors"), "authors");
  if (rec.author_ids.empty()) throw ParseError("key 'authors' must be nonempty");
  std::set<std::string> uniq(rec.author_ids.begin(), rec.author_ids.end());
  if (uniq.size() != rec.author_ids.size())
    throw ParseError("key 'authors' contains duplicate author ids");

  // fields/keywords/refs may be absent, which reads as empty.
  if (j.contains("fields")) rec.subfields = str_array(j.at("fields"), "fields");
  if (j.contains("keywords")) rec.keywords = str_array(j.at("keywords"), "keywords");
  if (j.contains("refs")) rec.reference_ids = str_array(j.at("refs"), "refs");
  return rec;
}

// Papers with no resolved citation in either direction are dropped. Any
// surviving resolved reference has both endpoints surviving, so the kept
// set is closed under citation.
inline std::vector<PaperRecord> drop_isolated(const Corpus& corpus, std::size_t* dropped) {
  std::vector<char> keep(corpus.papers().size(), 0);
  for (std::size_t i = 0; i < corpus.papers().size(); ++i) {
    if (!corpus.resolved_refs(i).empty() || corpus.citation_count(i) > 0) keep[i] = 1;
  }
  std::vector<PaperRecord> out;
  for (std::size_t i = 0; i < corpus.papers().size(); ++i) {
    if (keep[i]) out.push_back(corpus.paper(i));
    else ++*dropped;
  }
  return out;
}

}  // namespace detail

// Parse and validate a line-delimited corpus file. Strict mode fails on the
// first malformed record; lenient mode skips it with a warning.
inline Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options,
                          LoadReport* report = nullptr) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path.string());
  if (options.min_year && options.max_year && *options.min_year > *options.max_year)
    throw ConfigError("corpus year range is inverted");

  LoadReport local;
  LoadReport& rep = report ? *report : local;
  std::vector<PaperRecord> records;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    ++rep.total_lines;
    PaperRecord rec;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      rec = detail::record_from_json(j);
    } catch (const nlohmann::json::exception& e) {
      if (options.strict) throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
      ++rep.skipped_malformed;
      rep.warnings.push_back("line " + std::to_string(line_no) + ": skipped (invalid JSON)");
      continue;
    } catch (const ParseError& e) {
      if (options.strict) throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
      ++rep.skipped_malformed;
      rep.warnings.push_back("line " + std::to_string(line_no) + ": skipped (" + e.what() + ")");
      continue;
    }
    if ((options.min_year && rec.year < *options.min_year) ||
        (options.max_year && rec.year > *options.max_year)) {
      ++rep.skipped_out_of_range;
      continue;
    }
    if (!seen_ids.insert(rec.paper_id).second) {
      if (options.strict)
        throw ValidationError("line " + std::to_string(line_no) + ": duplicate paper_id '" +
                              rec.paper_id + "'");
      ++rep.skipped_duplicate_id;
      rep.warnings.push_back("line " + std::to_string(line_no) + ": skipped duplicate paper_id '" +
                             rec.paper_id + "'");
      continue;
    }
    records.push_back(std::move(rec));
    ++rep.parsed;
  }
  if (records.empty()) throw ValidationError("corpus file has no usable records: " + path.string());

  Corpus corpus(std::move(records), options.min_year, options.max_year);
  if (options.isolation_filter) {
    std::size_t dropped = 0;
    std::vector<PaperRecord> kept = detail::drop_isolated(corpus, &dropped);
    rep.dropped_isolated = dropped;
    if (kept.empty()) throw ValidationError("isolation filter removed every paper");
    corpus = Corpus(std::move(kept), options.min_year, options.max_year);
  }
  rep.dangling_references = corpus.dangling_references();
  return corpus;
}

inline std::string record_to_json_line(const PaperRecord& rec) {
  nlohmann::json j;
  j["id"] = rec.paper_id;
  j["venue"] = rec.venue_id;
  j["year"] = rec.year;
  j["authors"] = rec.author_ids;
  j["fields"] = rec.subfields;
  j["keywords"] = rec.keywords;
  j["refs"] = rec.reference_ids;
  return j.dump();
}

}  // namespace venuestab
