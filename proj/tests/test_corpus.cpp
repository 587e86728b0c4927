#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "venuestab/corpus.hpp"
#include "venuestab/io.hpp"

using namespace venuestab;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
  fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path;
}

std::string record_line(const std::string& id, const std::string& venue, int year,
                        std::vector<std::string> authors, std::vector<std::string> fields = {},
                        std::vector<std::string> keywords = {},
                        std::vector<std::string> refs = {}) {
  PaperRecord rec{id, venue, year, std::move(authors), std::move(fields), std::move(keywords),
                  std::move(refs)};
  return record_to_json_line(rec) + "\n";
}

}  // namespace

TEST_CASE("load_corpus parses valid records") {
  auto path = write_temp("corpus_basic.jsonl", record_line("p1", "V", 2000, {"a", "b"}) +
                                                   record_line("p2", "V", 2001, {"b"}) +
                                                   record_line("p3", "W", 2000, {"c"}));
  LoadReport report;
  Corpus corpus = load_corpus(path, {}, &report);
  CHECK(corpus.papers().size() == 3);
  CHECK(report.dangling_references == 0);
  CHECK(corpus.min_year() == 2000);
  CHECK(corpus.max_year() == 2001);
  CHECK(corpus.venues() == std::vector<std::string>{"V", "W"});
}

TEST_CASE("dangling references are flagged and excluded") {
  auto path = write_temp("corpus_dangling.jsonl",
                         record_line("A", "V", 2000, {"a"}, {}, {}, {"X"}) +
                             record_line("B", "V", 2001, {"b"}, {}, {}, {"A"}));
  LoadReport report;
  Corpus corpus = load_corpus(path, {}, &report);
  CHECK(corpus.papers().size() == 2);
  CHECK(report.dangling_references == 1);
  CHECK(corpus.resolved_refs(*corpus.find_paper("A")).empty());
  CHECK(corpus.resolved_refs(*corpus.find_paper("B")).size() == 1);
  CHECK(corpus.citation_count(*corpus.find_paper("A")) == 1);
}

TEST_CASE("duplicate paper_id rejected in strict mode, skipped in lenient") {
  auto content = record_line("p1", "V", 2000, {"a"}) + record_line("p1", "V", 2001, {"b"});
  auto path = write_temp("corpus_dup.jsonl", content);
  CHECK_THROWS_WITH(load_corpus(path, {}), Catch::Matchers::ContainsSubstring("p1"));
  LoadOptions lenient;
  lenient.strict = false;
  LoadReport report;
  Corpus corpus = load_corpus(path, lenient, &report);
  CHECK(corpus.papers().size() == 1);
  CHECK(report.skipped_duplicate_id == 1);
}

TEST_CASE("malformed lines: strict errors with line number, lenient skips") {
  auto content = record_line("p1", "V", 2000, {"a"}) + "{not json\n" +
                 record_line("p2", "V", 2001, {"b"});
  auto path = write_temp("corpus_malformed.jsonl", content);
  CHECK_THROWS_WITH(load_corpus(path, {}), Catch::Matchers::ContainsSubstring("line 2"));
  LoadOptions lenient;
  lenient.strict = false;
  LoadReport report;
  Corpus corpus = load_corpus(path, lenient, &report);
  CHECK(corpus.papers().size() == 2);
  CHECK(report.skipped_malformed == 1);
}

TEST_CASE("validation rejects bad records") {
  CHECK_THROWS_AS(load_corpus(write_temp("c_noauthors.jsonl",
                                         "{\"id\":\"p\",\"venue\":\"V\",\"year\":2000,\"authors\":[]}\n"),
                              {}),
                  ParseError);
  CHECK_THROWS_AS(
      load_corpus(write_temp("c_dupauthor.jsonl",
                             "{\"id\":\"p\",\"venue\":\"V\",\"year\":2000,\"authors\":[\"a\",\"a\"]}\n"),
                  {}),
      ParseError);
  CHECK_THROWS_AS(
      load_corpus(write_temp("c_badyear.jsonl",
                             "{\"id\":\"p\",\"venue\":\"V\",\"year\":99,\"authors\":[\"a\"]}\n"),
                  {}),
      ParseError);
  CHECK_THROWS_AS(load_corpus(write_temp("c_empty.jsonl", "\n"), {}), ValidationError);
}

TEST_CASE("unknown keys ignored, missing arrays default to empty") {
  auto path = write_temp("corpus_extra.jsonl",
                         "{\"id\":\"p\",\"venue\":\"V\",\"year\":2000,\"authors\":[\"a\"],"
                         "\"title\":\"ignored\",\"abstract\":\"ignored\"}\n");
  Corpus corpus = load_corpus(path, {});
  CHECK(corpus.paper(0).subfields.empty());
  CHECK(corpus.paper(0).keywords.empty());
  CHECK(corpus.paper(0).reference_ids.empty());
}

TEST_CASE("comment lines are skipped") {
  auto path = write_temp("corpus_comment.jsonl",
                         "# venuestab 0.1.0 config=abc\n" + record_line("p1", "V", 2000, {"a"}));
  CHECK(load_corpus(path, {}).papers().size() == 1);
}

TEST_CASE("configured year range filters records") {
  auto content = record_line("p1", "V", 1995, {"a"}) + record_line("p2", "V", 2000, {"b"}) +
                 record_line("p3", "V", 2005, {"c"});
  auto path = write_temp("corpus_range.jsonl", content);
  LoadOptions opts;
  opts.min_year = 1999;
  opts.max_year = 2004;
  LoadReport report;
  Corpus corpus = load_corpus(path, opts, &report);
  CHECK(corpus.papers().size() == 1);
  CHECK(report.skipped_out_of_range == 2);
  CHECK(corpus.min_year() == 1999);
  CHECK(corpus.max_year() == 2004);
}

TEST_CASE("isolation filter drops papers with no resolved citations") {
  auto content = record_line("p1", "V", 2000, {"a"}) +
                 record_line("p2", "V", 2001, {"b"}, {}, {}, {"p1"}) +
                 record_line("p3", "V", 2001, {"c"});
  auto path = write_temp("corpus_isolation.jsonl", content);
  LoadOptions opts;
  opts.isolation_filter = true;
  LoadReport report;
  Corpus corpus = load_corpus(path, opts, &report);
  CHECK(corpus.papers().size() == 2);
  CHECK(report.dropped_isolated == 1);
  CHECK_FALSE(corpus.find_paper("p3").has_value());
}

TEST_CASE("slice collects papers and authors") {
  auto content = record_line("p1", "V", 2005, {"a", "b"}) +
                 record_line("p2", "V", 2005, {"b", "c"}) + record_line("p3", "V", 2006, {"d"});
  Corpus corpus = load_corpus(write_temp("corpus_slice.jsonl", content), {});

  VenueYearSlice s = slice(corpus, "V", 2005);
  CHECK(s.paper_count == 2);
  CHECK(s.author_set == std::vector<std::string>{"a", "b", "c"});

  VenueYearSlice empty = slice(corpus, "V", 2003);
  CHECK(empty.empty());
  CHECK(empty.paper_count == 0);

  CHECK_THROWS_AS(slice(corpus, "NOPE", 2005), ValidationError);
}

TEST_CASE("slices partition the corpus") {
  std::string content;
  for (int v = 0; v < 3; ++v)
    for (int y = 2000; y <= 2004; ++y)
      for (int p = 0; p < 2 + (v + y) % 3; ++p)
        content += record_line("p" + std::to_string(v) + "_" + std::to_string(y) + "_" +
                                   std::to_string(p),
                               "V" + std::to_string(v), y,
                               {"a" + std::to_string((v * 7 + y + p) % 5)});
  Corpus corpus = load_corpus(write_temp("corpus_partition.jsonl", content), {});

  std::size_t total = 0;
  std::set<std::string> seen;
  for (const std::string& venue : corpus.venues()) {
    std::set<std::string> venue_papers;
    for (int y = corpus.min_year(); y <= corpus.max_year(); ++y) {
      VenueYearSlice s = slice(corpus, venue, y);
      total += s.paper_count;
      for (std::size_t idx : s.paper_indices) {
        CHECK(venue_papers.insert(corpus.paper(idx).paper_id).second);  // no overlap
        seen.insert(corpus.paper(idx).paper_id);
      }
    }
    std::size_t direct = 0;
    for (const PaperRecord& p : corpus.papers())
      if (p.venue_id == venue) ++direct;
    CHECK(venue_papers.size() == direct);
  }
  CHECK(total == corpus.papers().size());
  CHECK(seen.size() == corpus.papers().size());
}

TEST_CASE("author index: history windows and first publication year") {
  auto content = record_line("p1", "V", 2001, {"a"}) + record_line("p2", "W", 2004, {"a"}) +
                 record_line("p3", "V", 2007, {"a"}) + record_line("p4", "V", 2000, {"b"});
  Corpus corpus = load_corpus(write_temp("corpus_hist.jsonl", content), {});
  AuthorIndex index(corpus);

  CHECK(author_history(index, "a", 2003, 2007).size() == 2);
  CHECK(author_history(index, "nobody", 1990, 2100).empty());

  std::string venue = "V";
  CHECK(author_history(index, "a", 2001, 2005, &venue).size() == 1);
  // Published in the venue only before the window: counts as new there.
  std::string w = "W";
  CHECK(author_history(index, "a", 2005, 2009, &w).empty());

  CHECK(*index.first_pub_year("a") == 2001);
  CHECK_FALSE(index.first_pub_year("nobody").has_value());
  for (const PaperRecord& p : corpus.papers())
    for (const std::string& author : p.author_ids)
      CHECK(*index.first_pub_year(author) <= p.year);

  CHECK_THROWS_AS(author_history(index, "a", 2005, 2001), ValidationError);
}
