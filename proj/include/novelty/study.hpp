#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "novelty/cocite_index.hpp"
#include "novelty/corpus.hpp"
#include "novelty/glm.hpp"
#include "novelty/novelty_scores.hpp"
#include "novelty/stats.hpp"

namespace novelty {

enum class Predictor { u, w, w_categorical, k, citations, fm_recommendations };

inline constexpr std::array<Predictor, 6> kAllPredictors{Predictor::u,         Predictor::w,
                                                         Predictor::w_categorical, Predictor::k,
                                                         Predictor::citations, Predictor::fm_recommendations};

std::string_view to_string(Predictor predictor);
std::optional<Predictor> parse_predictor(std::string_view text);

/// One paper with its scores and tag record.
struct StudyRecord {
  std::string paper_id;
  int year = 0;
  DocType doc_type = DocType::article;
  std::optional<double> u, w, k;
  std::optional<WCategory> w_category;
  std::array<std::int64_t, kTagCount> tags{};
  std::int64_t fm_score_sum = 0;
  std::int64_t citations = 0;
};

struct JoinReport {
  std::size_t scored = 0;
  std::size_t tagged = 0;
  std::size_t matched = 0;
};

/// Inner join on paper_id, sorted by id. W categories are re-derived over the
/// joined set, so "top 1%" refers to the analysed papers.
std::vector<StudyRecord> join_scores_tags(std::span<const PaperScores> scores, const TagTable& tags,
                                          JoinReport* report = nullptr);

std::optional<double> predictor_value(const StudyRecord& record, Predictor predictor);

// -- model cells --------------------------------------------------------------

struct ModelTerm {
  std::string column;
  double coefficient = 0.0;
  double robust_se = 0.0;
  double sd = 0.0;      // sample SD of the column over the estimation rows
  double effect = 0.0;  // percent change per SD, or fully standardized coefficient for probit
  double p_value = 1.0;
  std::string stars;
};

struct ModelCell {
  std::string outcome;
  Predictor predictor = Predictor::u;
  Family family = Family::poisson;
  int year = 0;  // 0 when pooled over years
  std::size_t n = 0;
  std::size_t dropped = 0;
  double percent_assigned = std::numeric_limits<double>::quiet_NaN();
  std::vector<ModelTerm> terms;
  double pseudo_r2 = std::numeric_limits<double>::quiet_NaN();
  std::optional<FitResult> fit;
  std::string error;  // fit failure or non-convergence diagnostic

  bool ok() const { return error.empty(); }
  /// The term judged against expectations: the single predictor column, or
  /// the highly-novel dummy for categorical W.
  const ModelTerm* key_term() const { return terms.empty() ? nullptr : &terms.back(); }
};

struct ModelOptions {
  unsigned threads = 1;
  std::size_t min_rows = 30;
  FitOptions fit;
};

/// Intercept, predictor column(s) and year dummies against the earliest year.
struct PredictorDesign {
  DesignMatrix design;
  std::vector<std::string> predictor_columns;
  std::vector<std::size_t> rows;  // indices into the input records
  std::size_t dropped = 0;
  int reference_year = 0;
};

/// Throws UndefinedError when the predictor is constant over the kept rows.
PredictorDesign build_predictor_design(std::span<const StudyRecord> records, Predictor predictor);

std::vector<double> dichotomize(std::span<const double> counts);

/// One Poisson model per tag: count ~ predictor + year dummies. Throws
/// UndefinedError for fewer than `min_rows` usable rows or a constant
/// predictor; per-tag fit failures are recorded in the cell.
std::vector<ModelCell> run_tag_models(std::span<const StudyRecord> records, Predictor predictor,
                                      const ModelOptions& options = {});

/// One tag, one family: Poisson on counts, logistic or probit on the
/// dichotomized tag. Same row and predictor checks as run_tag_models.
ModelCell run_single_model(std::span<const StudyRecord> records, std::string_view tag, Predictor predictor,
                           Family family, const ModelOptions& options = {});

/// Probit on dichotomized tags with fully standardized coefficients. W is
/// always entered as categorical.
std::vector<ModelCell> run_probit_robustness(std::span<const StudyRecord> records, Predictor predictor,
                                             const ModelOptions& options = {});

// -- comparison group ---------------------------------------------------------

struct Stratum {
  int year = 0;
  DocType doc_type = DocType::article;
  auto operator<=>(const Stratum&) const = default;
};

std::string to_string(const Stratum& stratum);

struct SampleSpec {
  std::map<Stratum, std::size_t> strata;
  std::uint64_t seed = 0;
};

SampleSpec sample_spec_of(const Corpus& corpus, const std::set<std::string>& group, std::uint64_t seed);

/// Papers in `years` of type article or review, outside `included`, sharing
/// at least one subject category with the included papers.
std::vector<PaperRecord> eligible_pool(const Corpus& corpus, const std::set<std::string>& included, YearRange years);

/// Seeded sample without replacement matching every stratum count. The pool
/// is sorted by id first, so its order does not matter. Throws ValidationError
/// naming the first short stratum.
std::vector<std::string> stratified_sample(std::span<const PaperRecord> pool, const SampleSpec& spec);

struct InclusionRow {
  std::string paper_id;
  int year = 0;
  bool included = false;
  std::optional<double> u, w, k;
};

struct InclusionYear {
  int year = 0;
  std::size_t n = 0;
  std::size_t dropped = 0;
  std::vector<SummaryRow> key_figures;  // included, u, w, k
  std::map<std::string, double> spearman;  // "u,w", "u,k", "w,k"
  ModelCell model;
};

/// Per year: logistic included ~ u + w + k on complete cases. Failures for
/// one year are recorded in that year's cell.
std::vector<InclusionYear> run_inclusion_models(std::span<const InclusionRow> rows, YearRange years,
                                                const ModelOptions& options = {});

// -- expectations -------------------------------------------------------------

enum class Sign { positive, negative, either };

std::string_view to_string(Sign sign);

struct ExpectationTable {
  std::array<Sign, kTagCount> signs{};

  /// Newness tags positive, confirmation-type tags negative, controversial either.
  static ExpectationTable defaults();
  Sign expected(std::string_view tag) const;
};

struct Verdict {
  Predictor predictor = Predictor::u;
  std::size_t matched = 0;
  std::size_t total = 0;  // tags with a definite expectation
  bool convergent = false;
  std::vector<std::string> unmatched;
};

/// `cells` must hold one cell per tag for a single predictor. Failed cells
/// count as unmatched.
Verdict evaluate_expectations(std::span<const ModelCell> cells,
                              const ExpectationTable& expectations = ExpectationTable::defaults());

// -- synthetic data -----------------------------------------------------------

struct TagModel {
  std::array<double, kTagCount> intercept{};
  std::array<double, kTagCount> coef_u{};
  double year_effect = -0.1;  // added per year after the first study year

  static TagModel defaults();
};

struct SynthParams {
  int first_year = 2008;
  int last_year = 2018;
  YearRange study_years{2013, 2015};
  int background_papers_per_year = 300;
  int study_papers = 3000;
  int n_journals = 300;
  int n_communities = 4;
  int refs_per_paper = 10;
  bool distinct_journals = false;
  double cross_community_rate = 0.15;
  int keywords_per_paper = 5;
  int base_vocabulary = 120;
  int vocabulary_growth = 25;  // new keywords per category per year
  double inclusion_intercept = -1.5;
  double inclusion_coef_u = 0.6;
  bool include_all = false;  // tag every study-year paper
  TagModel tag_model = TagModel::defaults();

  void validate() const;
  nlohmann::ordered_json to_json() const;
};

struct SyntheticData {
  Corpus corpus;
  TagTable tags;
};

/// Corpus with journal communities (cross-community co-citation is rare),
/// keywords drawn from growing per-category vocabularies, inclusion drawn
/// from a logistic model on U, and tag counts drawn from Poisson models on U
/// for the included papers.
SyntheticData generate_synthetic_corpus(std::uint64_t seed, const SynthParams& params = {}, unsigned threads = 1);

// -- full study ---------------------------------------------------------------

struct StudyConfig {
  std::filesystem::path corpus;
  std::filesystem::path tags;
  std::optional<YearRange> years;  // focal years; defaults to the tagged papers' years
  std::vector<Predictor> predictors{kAllPredictors.begin(), kAllPredictors.end()};
  std::optional<std::uint64_t> seed;
  CorpusConfig corpus_config;
  IndexOptions index;
  KeywordNewness keyword_newness = KeywordNewness::all_prior_years;
  RobustCorrection correction = RobustCorrection::small_sample;
  std::size_t min_rows = 30;
};

/// Flat `key = value` file; values are JSON literals (strings, numbers,
/// booleans, arrays) and `#` starts a comment. Relative paths resolve against
/// `base_dir`. Throws SchemaError on unknown keys.
StudyConfig parse_study_config(std::istream& in, const std::filesystem::path& base_dir);
StudyConfig load_study_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const StudyConfig& config);

struct StudyOutputs {
  std::map<std::string, std::string> files;  // file name -> contents
  nlohmann::ordered_json counts;
};

/// Runs the whole pipeline in memory. Output is identical for any thread count.
StudyOutputs run_study(const StudyConfig& config, std::uint64_t seed, unsigned threads = 1);

}  // namespace novelty
