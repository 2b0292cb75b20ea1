#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace novelty {

enum class DocType { article, review, other };

std::string_view to_string(DocType type);

/// Case-insensitive; anything outside {article, review} maps to `other`.
DocType parse_doc_type(std::string_view text);

struct YearRange {
  int start = 0;
  int end = 0;

  bool contains(int year) const { return year >= start && year <= end; }
  bool operator==(const YearRange&) const = default;
};

/// Parses "START:END" (inclusive). Throws ValidationError.
YearRange parse_year_range(std::string_view text);

struct RefRecord {
  std::string journal;
  int pub_year = 0;

  bool operator==(const RefRecord&) const = default;
};

struct PaperRecord {
  std::string paper_id;
  int year = 0;
  DocType doc_type = DocType::article;
  std::string journal;
  std::vector<std::string> subject_categories;  // trimmed, sorted, unique
  std::vector<std::string> keywords;            // normalized, sorted, unique
  std::vector<RefRecord> references;

  bool operator==(const PaperRecord&) const = default;
};

struct CorpusConfig {
  int min_ref_year = 1980;
  /// Papers outside the range are dropped. Unset: inferred from the data.
  std::optional<YearRange> year_range;
  int w_prior_window = 3;
  int w_following_window = 3;

  void validate() const;
  bool operator==(const CorpusConfig&) const = default;
};

struct IngestReport {
  std::size_t records = 0;
  std::size_t papers_retained = 0;
  std::size_t papers_out_of_range = 0;
  std::size_t references_retained = 0;
  std::size_t references_before_min_year = 0;
  std::size_t references_missing_journal = 0;

  std::string to_text() const;
};

using JournalId = std::uint32_t;

/// Lowercase (ASCII), trim, collapse internal whitespace runs to one space.
std::string normalize_keyword(std::string_view raw);

/// Immutable, validated citation corpus. Cited journals are interned into
/// dense ids whose order matches the lexicographic order of their names.
class Corpus {
 public:
  static Corpus build(std::vector<PaperRecord> papers, const CorpusConfig& config,
                      IngestReport* report = nullptr);

  const std::vector<PaperRecord>& papers() const { return papers_; }
  const CorpusConfig& config() const { return config_; }
  YearRange years() const { return years_; }

  std::size_t journal_count() const { return journal_names_.size(); }
  const std::string& journal_name(JournalId id) const { return journal_names_.at(id); }
  std::optional<JournalId> find_journal(std::string_view name) const;

  /// Interned journals of the paper's references, in reference order.
  std::span<const JournalId> ref_journals(std::size_t paper_index) const {
    return ref_journals_[paper_index];
  }

  std::optional<std::size_t> find_paper(std::string_view paper_id) const;

  bool operator==(const Corpus& other) const {
    return config_ == other.config_ && years_ == other.years_ && papers_ == other.papers_;
  }

 private:
  std::vector<PaperRecord> papers_;
  CorpusConfig config_;
  YearRange years_;
  std::vector<std::string> journal_names_;
  std::unordered_map<std::string, JournalId> journal_ids_;
  std::vector<std::vector<JournalId>> ref_journals_;
  std::unordered_map<std::string, std::size_t> paper_index_;
};

Corpus parse_corpus(std::istream& in, const CorpusConfig& config, IngestReport* report = nullptr);
Corpus ingest_corpus(const std::filesystem::path& path, const CorpusConfig& config,
                     IngestReport* report = nullptr);

/// One JSON object per line, papers in corpus order.
void write_corpus(std::ostream& out, const Corpus& corpus);
std::string serialize_corpus(const Corpus& corpus);

// -- Tag tables ---------------------------------------------------------------

inline constexpr std::size_t kTagCount = 9;
inline constexpr std::array<std::string_view, kTagCount> kTagNames = {
    "confirmation", "good_for_teaching", "negative_null",     "refutation",       "controversial",
    "hypothesis",   "new_finding",       "novel_drug_target", "technical_advance"};

std::optional<std::size_t> tag_index(std::string_view name);

struct TagRecord {
  std::string paper_id;
  std::array<std::int64_t, kTagCount> tag_counts{};
  std::int64_t fm_score_sum = 0;
  std::int64_t citation_count = 0;

  std::int64_t count(std::string_view tag) const;
  bool operator==(const TagRecord&) const = default;
};

class TagTable {
 public:
  TagTable() = default;
  explicit TagTable(std::vector<TagRecord> records);  // throws ConflictError on duplicates

  const std::vector<TagRecord>& records() const { return records_; }  // sorted by paper_id
  const TagRecord* find(std::string_view paper_id) const;
  std::size_t size() const { return records_.size(); }

 private:
  std::vector<TagRecord> records_;
};

TagTable parse_tags(std::istream& in);
TagTable ingest_tags(const std::filesystem::path& path);
void write_tags(std::ostream& out, const TagTable& table);

}  // namespace novelty
