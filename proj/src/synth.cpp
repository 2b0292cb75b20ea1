#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "novelty/errors.hpp"
#include "novelty/study.hpp"

namespace novelty {

TagModel TagModel::defaults() {
  TagModel m;
  // Base rates loosely follow how often each tag is assigned; U effects point
  // in the expected direction for every tag.
  m.intercept = {-1.5, -1.3, -2.0, -2.0, -1.8, -1.3, -0.2, -1.8, -1.5};
  m.coef_u = {-0.2, -0.15, -0.25, -0.2, -0.1, 0.2, 0.1, 0.4, 0.25};
  return m;
}

void SynthParams::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw ValidationError(fmt::format("synthetic parameter {} must be positive", name));
  };
  positive(background_papers_per_year, "background_papers_per_year");
  positive(study_papers, "study_papers");
  positive(n_journals, "n_journals");
  positive(n_communities, "n_communities");
  positive(refs_per_paper, "refs_per_paper");
  positive(keywords_per_paper, "keywords_per_paper");
  positive(base_vocabulary, "base_vocabulary");
  if (first_year > last_year) throw ValidationError("synthetic first_year is after last_year");
  if (study_years.start > study_years.end || study_years.start < first_year || study_years.end > last_year)
    throw ValidationError("synthetic study years must lie within [first_year, last_year]");
  if (n_communities > n_journals) throw ValidationError("more journal communities than journals");
  if (refs_per_paper < 2) throw ValidationError("refs_per_paper must be at least 2");
  if (distinct_journals && refs_per_paper > n_journals)
    throw ValidationError(fmt::format("refs_per_paper ({}) exceeds n_journals ({}) with distinct journals",
                                      refs_per_paper, n_journals));
  if (keywords_per_paper > base_vocabulary) throw ValidationError("keywords_per_paper exceeds base_vocabulary");
  if (vocabulary_growth < 0) throw ValidationError("vocabulary_growth must be non-negative");
  if (!(cross_community_rate >= 0.0 && cross_community_rate <= 1.0))
    throw ValidationError("cross_community_rate must lie in [0, 1]");
}

nlohmann::ordered_json SynthParams::to_json() const {
  nlohmann::ordered_json j;
  j["first_year"] = first_year;
  j["last_year"] = last_year;
  j["study_years"] = fmt::format("{}:{}", study_years.start, study_years.end);
  j["background_papers_per_year"] = background_papers_per_year;
  j["study_papers"] = study_papers;
  j["n_journals"] = n_journals;
  j["n_communities"] = n_communities;
  j["refs_per_paper"] = refs_per_paper;
  j["distinct_journals"] = distinct_journals;
  j["cross_community_rate"] = cross_community_rate;
  j["keywords_per_paper"] = keywords_per_paper;
  j["base_vocabulary"] = base_vocabulary;
  j["vocabulary_growth"] = vocabulary_growth;
  j["inclusion_intercept"] = inclusion_intercept;
  j["inclusion_coef_u"] = inclusion_coef_u;
  j["include_all"] = include_all;
  auto& tags = j["tag_model"];
  for (std::size_t t = 0; t < kTagCount; ++t) {
    tags[std::string(kTagNames[t])] = {{"intercept", tag_model.intercept[t]}, {"coef_u", tag_model.coef_u[t]}};
  }
  tags["year_effect"] = tag_model.year_effect;
  return j;
}

SyntheticData generate_synthetic_corpus(std::uint64_t seed, const SynthParams& params, unsigned threads) {
  params.validate();
  std::mt19937_64 rng(seed);
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };

  // Journals are dealt round-robin into communities; within a community the
  // k-th journal is cited with weight 1/(k+1) so activity is skewed.
  std::vector<std::vector<int>> members(static_cast<std::size_t>(params.n_communities));
  for (int j = 0; j < params.n_journals; ++j) members[static_cast<std::size_t>(j % params.n_communities)].push_back(j);
  std::vector<std::discrete_distribution<int>> pick;
  for (const auto& m : members) {
    std::vector<double> w(m.size());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = 1.0 / static_cast<double>(k + 1);
    pick.emplace_back(w.begin(), w.end());
  }
  auto journal_name = [](int j) { return fmt::format("J{:03}", j); };
  auto draw_journal = [&](int community) {
    const auto& m = members[static_cast<std::size_t>(community)];
    return m[static_cast<std::size_t>(pick[static_cast<std::size_t>(community)](rng))];
  };

  const int n_study_years = params.study_years.end - params.study_years.start + 1;
  std::vector<PaperRecord> papers;
  for (int year = params.first_year; year <= params.last_year; ++year) {
    int count = params.background_papers_per_year;
    if (params.study_years.contains(year)) {
      const int slot = year - params.study_years.start;
      count = params.study_papers / n_study_years + (slot < params.study_papers % n_study_years ? 1 : 0);
    }
    const int vocabulary = params.base_vocabulary + params.vocabulary_growth * (year - params.first_year);
    for (int i = 0; i < count; ++i) {
      PaperRecord p;
      p.paper_id = fmt::format("P{}-{:05}", year, i);
      p.year = year;
      const double kind = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      p.doc_type = kind < 0.85 ? DocType::article : kind < 0.95 ? DocType::review : DocType::other;
      const int home = uniform_int(0, params.n_communities - 1);
      p.journal = journal_name(draw_journal(home));
      p.subject_categories.push_back(fmt::format("cat{}", home));
      if (params.n_communities > 1 && coin(0.2)) {
        int other = uniform_int(0, params.n_communities - 2);
        if (other >= home) ++other;
        p.subject_categories.push_back(fmt::format("cat{}", other));
      }
      std::sort(p.subject_categories.begin(), p.subject_categories.end());

      std::vector<int> kw;
      while (static_cast<int>(kw.size()) < params.keywords_per_paper) {
        const int idx = uniform_int(0, vocabulary - 1);
        if (std::find(kw.begin(), kw.end(), idx) == kw.end()) kw.push_back(idx);
      }
      std::sort(kw.begin(), kw.end());
      for (int idx : kw) p.keywords.push_back(fmt::format("c{} term {}", home, idx));
      std::sort(p.keywords.begin(), p.keywords.end());

      std::vector<int> used;
      for (int r = 0; r < params.refs_per_paper; ++r) {
        int j = 0;
        for (int attempt = 0;; ++attempt) {
          int community = home;
          if (params.n_communities > 1 && coin(params.cross_community_rate)) {
            community = uniform_int(0, params.n_communities - 2);
            if (community >= home) ++community;
          }
          j = draw_journal(community);
          if (!params.distinct_journals || std::find(used.begin(), used.end(), j) == used.end()) break;
          if (attempt > 64) {  // fall back to the first unused journal
            for (j = 0; std::find(used.begin(), used.end(), j) != used.end(); ++j) {
            }
            break;
          }
        }
        used.push_back(j);
        p.references.push_back({journal_name(j), year - uniform_int(0, 8)});
      }
      papers.push_back(std::move(p));
    }
  }

  CorpusConfig config;
  config.year_range = YearRange{params.first_year, params.last_year};
  Corpus corpus = Corpus::build(std::move(papers), config);
  const auto index = CoCitationIndex::build(corpus, {}, threads);
  ScoreOptions options;
  options.threads = threads;
  const auto scores = score_corpus(corpus, index, params.study_years, options);

  std::vector<TagRecord> tags;
  const auto& tm = params.tag_model;
  for (const auto& s : scores) {
    if (!s.u) continue;
    const bool eligible = s.doc_type == DocType::article || s.doc_type == DocType::review;
    const double u = s.u->value;
    bool included = params.include_all;
    if (!included) {
      const double p = 1.0 / (1.0 + std::exp(-(params.inclusion_intercept + params.inclusion_coef_u * u)));
      included = coin(p) && eligible;
    }
    if (!included) continue;
    TagRecord rec;
    rec.paper_id = s.paper_id;
    const double year_shift = tm.year_effect * (s.year - params.study_years.start);
    for (std::size_t t = 0; t < kTagCount; ++t) {
      const double mu = std::exp(tm.intercept[t] + tm.coef_u[t] * u + year_shift);
      rec.tag_counts[t] = std::poisson_distribution<std::int64_t>(mu)(rng);
    }
    rec.fm_score_sum = 1 + std::poisson_distribution<std::int64_t>(std::exp(0.2 + 0.15 * u))(rng);
    rec.citation_count = std::poisson_distribution<std::int64_t>(std::exp(3.0 + 0.1 * u + year_shift))(rng);
    tags.push_back(std::move(rec));
  }
  return {std::move(corpus), TagTable(std::move(tags))};
}

}  // namespace novelty
