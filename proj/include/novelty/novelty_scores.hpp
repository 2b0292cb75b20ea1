#pragma once

#include <algorithm>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/SparseCore>

#include "novelty/cocite_index.hpp"
#include "novelty/corpus.hpp"

namespace novelty {

/// A score or the reason it is missing.
template <typename T>
struct Scored {
  std::optional<T> score;
  std::string missing_reason;

  static Scored missing(std::string reason) { return {std::nullopt, std::move(reason)}; }
  explicit operator bool() const { return score.has_value(); }
  const T& operator*() const { return *score; }
  const T* operator->() const { return &*score; }
};

// -- U: atypical journal combinations ----------------------------------------

struct NoveltyU {
  double value = 0.0;
  std::size_t n_pairs = 0;
  bool zero_floor_applied = false;
};

/// -ln of the nearest-rank 10th percentile of a paper's commonness series. A
/// zero percentile is replaced by `positive_floor`; throws UndefinedError if
/// that is not positive.
NoveltyU u_from_series(std::vector<double> series, double positive_floor);

Scored<NoveltyU> score_u(std::span<const JournalId> refs, const YearPairCounts& counts,
                         const IndexOptions& options, double positive_floor);

// -- W: first-time, later-reused journal combinations -------------------------

enum class WCategory { non_novel, moderately_novel, highly_novel };

std::string_view to_string(WCategory category);
std::optional<WCategory> parse_w_category(std::string_view text);

struct NoveltyW {
  double value = 0.0;
  std::size_t n_new_pairs = 0;
  WCategory category = WCategory::non_novel;
  std::size_t undefined_profile_pairs = 0;
  bool prior_window_truncated = false;
};

/// u.v / (|u| |v|) for non-negative sparse vectors; 0 if either is all-zero.
template <typename A, typename B>
double cosine_similarity(const Eigen::SparseMatrixBase<A>& u, const Eigen::SparseMatrixBase<B>& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(u.dot(v) / (nu * nv), 0.0, 1.0);
}

/// Activity filter and co-citation profiles shared by all papers of one year.
struct WContext {
  int focal_year = 0;
  std::optional<JournalActivity> activity;
  CoCitationProfile profiles;
  std::string missing_reason;  // set when no paper of this year can get a W
};

WContext make_w_context(const CoCitationIndex& index, int focal_year);

Scored<NoveltyW> score_w(std::span<const JournalId> refs, int year, const CoCitationIndex& index,
                         const WContext& context);

/// Assigns categories in place and returns the nearest-rank 99th-percentile
/// cutoff. highly_novel iff W is strictly above the cutoff (the top 1%).
double categorize_w(std::span<NoveltyW> scores);

// -- K: new keywords within a subject category --------------------------------

enum class KeywordNewness {
  all_prior_years,  // new iff never used in the category before the paper's year
  same_year_only,   // new iff no other paper of the category uses it in that year
};

struct NoveltyK {
  double value = 0.0;
  std::map<std::string, double> per_category;
  std::size_t k_total = 0;
  std::size_t k_new_max = 0;
};

class KeywordHistory {
 public:
  static KeywordHistory build(const Corpus& corpus);

  std::optional<int> first_year(const std::string& category, const std::string& keyword) const;
  /// Number of papers in `category` published in `year` that carry `keyword`.
  std::size_t uses(const std::string& category, const std::string& keyword, int year) const;

  void record(const std::string& category, const std::string& keyword, int year);

 private:
  struct Entry {
    int first_year = 0;
    std::map<int, std::size_t> per_year;
  };
  std::unordered_map<std::string, Entry> entries_;
};

Scored<NoveltyK> score_k(const PaperRecord& paper, const KeywordHistory& history,
                         KeywordNewness newness = KeywordNewness::all_prior_years);

// -- batch scoring ------------------------------------------------------------

struct ScoreOptions {
  KeywordNewness keyword_newness = KeywordNewness::all_prior_years;
  unsigned threads = 1;
};

struct PaperScores {
  std::string paper_id;
  int year = 0;
  DocType doc_type = DocType::article;
  Scored<NoveltyU> u;
  Scored<NoveltyW> w;
  Scored<NoveltyK> k;
};

/// Scores every paper published in `years`, sorted by paper_id, with W
/// categories assigned over the scored set.
std::vector<PaperScores> score_corpus(const Corpus& corpus, const CoCitationIndex& index,
                                      YearRange years, const ScoreOptions& options = {});

/// Re-derives W categories over exactly `scores` (e.g. after a join).
double categorize_scores(std::vector<PaperScores>& scores);

/// CSV `paper_id,year,u,u_flag,n_pairs,w,w_category,n_new_pairs,k`.
void write_scores_csv(std::ostream& out, std::span<const PaperScores> scores);
std::vector<PaperScores> read_scores_csv(std::istream& in);

}  // namespace novelty
