#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/SparseCore>

#include "novelty/corpus.hpp"

namespace novelty {

/// Unordered journal pair in canonical order (lo <= hi by interned id, which
/// follows lexicographic journal-name order). Self-pairs are allowed.
struct JournalPair {
  JournalId lo = 0;
  JournalId hi = 0;

  static JournalPair of(JournalId a, JournalId b) { return a <= b ? JournalPair{a, b} : JournalPair{b, a}; }
  static JournalPair from_key(std::uint64_t key) {
    return {static_cast<JournalId>(key >> 32), static_cast<JournalId>(key & 0xFFFFFFFFu)};
  }
  std::uint64_t key() const { return (static_cast<std::uint64_t>(lo) << 32) | hi; }
  bool operator==(const JournalPair&) const = default;
};

struct IndexOptions {
  /// Count two references to the same journal as the pair {i, i}.
  bool count_self_pairs = true;
  /// Count every reference pair; false collapses a paper's repeated journal
  /// pairs to one.
  bool count_duplicate_pairs = true;

  bool operator==(const IndexOptions&) const = default;
};

/// Calls fn(JournalPair) once per counted reference pair of one paper.
template <typename Fn>
void for_each_reference_pair(std::span<const JournalId> refs, const IndexOptions& options, Fn&& fn) {
  if (options.count_duplicate_pairs) {
    for (std::size_t a = 0; a < refs.size(); ++a)
      for (std::size_t b = a + 1; b < refs.size(); ++b)
        if (options.count_self_pairs || refs[a] != refs[b]) fn(JournalPair::of(refs[a], refs[b]));
    return;
  }
  std::vector<std::uint64_t> keys;
  for (std::size_t a = 0; a < refs.size(); ++a)
    for (std::size_t b = a + 1; b < refs.size(); ++b)
      if (options.count_self_pairs || refs[a] != refs[b])
        keys.push_back(JournalPair::of(refs[a], refs[b]).key());
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  for (auto k : keys) fn(JournalPair::from_key(k));
}

/// Co-citation counts of one citing year: N_ij (pair_counts), N_i
/// (journal_marginals; a self-pair counts once toward its journal) and N
/// (total). Hence sum_i N_i = 2 N - (number of self-pairs).
struct YearPairCounts {
  int year = 0;
  std::unordered_map<std::uint64_t, std::uint64_t> pair_counts;
  std::vector<std::uint64_t> journal_marginals;  // indexed by JournalId
  std::uint64_t total = 0;

  std::uint64_t count(JournalPair pair) const {
    auto it = pair_counts.find(pair.key());
    return it == pair_counts.end() ? 0 : it->second;
  }
  std::uint64_t marginal(JournalId id) const {
    return id < journal_marginals.size() ? journal_marginals[id] : 0;
  }
};

YearPairCounts build_year_pair_counts(const Corpus& corpus, int year, const IndexOptions& options = {});

/// N_ij N / (N_i N_j). Throws UndefinedError if either marginal is zero.
double commonness(const YearPairCounts& counts, JournalId i, JournalId j);

/// Journals cited in a prior window, with the least-cited half removed.
struct JournalActivity {
  YearRange window;
  std::vector<std::uint64_t> citation_counts;  // indexed by JournalId
  std::vector<bool> retained;
  double median = 0.0;
  bool truncated = false;  // window extends before the corpus start

  bool is_retained(JournalId id) const { return id < retained.size() && retained[id]; }
};

/// Symmetric journal-by-journal co-citation counts aggregated over a window,
/// restricted to retained journals. The diagonal is left empty: a profile
/// describes co-citation with *other* journals.
struct CoCitationProfile {
  YearRange window;
  Eigen::SparseMatrix<double, Eigen::RowMajor> vectors;

  auto profile(JournalId id) const { return vectors.row(static_cast<Eigen::Index>(id)); }
};

class CoCitationIndex {
 public:
  static CoCitationIndex build(const Corpus& corpus, const IndexOptions& options = {},
                               unsigned threads = 1);

  YearRange years() const { return years_; }
  const IndexOptions& options() const { return options_; }
  int prior_window() const { return prior_window_; }
  int following_window() const { return following_window_; }
  const std::string& corpus_digest() const { return corpus_digest_; }

  std::size_t journal_count() const { return journal_names_.size(); }
  const std::string& journal_name(JournalId id) const { return journal_names_.at(id); }

  /// Throws UndefinedError for years outside the indexed range.
  const YearPairCounts& year_counts(int year) const;
  /// Reference instances per journal made by papers published in `year`.
  std::span<const std::uint64_t> journal_citations(int year) const;
  /// Smallest positive commonness in `year`, or 0 if none.
  double min_positive_commonness(int year) const;

  /// True iff some paper published in a year <= before - 1 co-cites the pair.
  bool cocited_before(JournalPair pair, int before) const;
  /// True iff some paper published inside the inclusive window co-cites it.
  bool cocited_in(JournalPair pair, YearRange window) const;

  /// Versioned little-endian binary snapshot.
  void save(const std::filesystem::path& path) const;
  static CoCitationIndex load(const std::filesystem::path& path);

  /// CSV `year,journal_lo,journal_hi,count`, sorted.
  void dump_csv(std::ostream& out) const;

  bool operator==(const CoCitationIndex& other) const;

 private:
  void finalize();

  YearRange years_;
  IndexOptions options_;
  int prior_window_ = 3;
  int following_window_ = 3;
  std::string corpus_digest_;
  std::vector<std::string> journal_names_;
  std::vector<YearPairCounts> counts_;                  // one per year in years_
  std::vector<std::vector<std::uint64_t>> citations_;  // one per year in years_
  std::vector<double> min_positive_;
  std::unordered_map<std::uint64_t, int> first_cocited_;
};

/// Activity over [focal_year - prior_window, focal_year - 1] clipped to the
/// corpus. Retained = citation count >= median over journals cited in the
/// window. Throws UndefinedError when the window is empty or has no citations.
JournalActivity journal_activity_filter(const CoCitationIndex& index, int focal_year);

CoCitationProfile build_cocitation_profiles(const CoCitationIndex& index, int focal_year,
                                            const JournalActivity& activity);

}  // namespace novelty
