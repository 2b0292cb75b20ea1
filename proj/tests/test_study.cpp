#include <algorithm>
#include <cmath>
#include <random>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "novelty/errors.hpp"
#include "novelty/study.hpp"

using namespace novelty;

namespace {

PaperRecord pool_paper(std::string id, int year, DocType type, std::vector<std::string> categories = {"C"}) {
  PaperRecord p;
  p.paper_id = std::move(id);
  p.year = year;
  p.doc_type = type;
  p.subject_categories = std::move(categories);
  return p;
}

std::vector<PaperRecord> ample_pool() {
  std::vector<PaperRecord> pool;
  for (int i = 0; i < 10; ++i) {
    pool.push_back(pool_paper("a13-" + std::to_string(i), 2013, DocType::article));
    pool.push_back(pool_paper("r14-" + std::to_string(i), 2014, DocType::review));
    pool.push_back(pool_paper("a14-" + std::to_string(i), 2014, DocType::article));
  }
  return pool;
}

std::map<Stratum, std::size_t> strata_of(const std::vector<std::string>& ids, const std::vector<PaperRecord>& pool) {
  std::map<Stratum, std::size_t> out;
  for (const auto& id : ids) {
    const auto it = std::find_if(pool.begin(), pool.end(), [&](const PaperRecord& p) { return p.paper_id == id; });
    REQUIRE(it != pool.end());
    ++out[{it->year, it->doc_type}];
  }
  return out;
}

/// Records with U ~ N(0, sd_u), W and K uniform, years 2013..2015 and every
/// tag count drawn from Poisson(exp(intercept + beta * U)).
std::vector<StudyRecord> poisson_records(std::uint64_t seed, std::size_t n, double beta, double intercept,
                                         double sd_u = 0.95) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sd_u);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<StudyRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = out[i];
    r.paper_id = "P" + std::to_string(100000 + i);
    r.year = 2013 + static_cast<int>(i % 3);
    r.u = normal(rng);
    r.w = unit(rng);
    r.k = unit(rng);
    r.w_category = i % 50 == 0 ? WCategory::highly_novel : i % 7 == 0 ? WCategory::moderately_novel
                                                                       : WCategory::non_novel;
    r.citations = static_cast<std::int64_t>(i % 13);
    r.fm_score_sum = 1 + static_cast<std::int64_t>(i % 4);
    for (std::size_t t = 0; t < kTagCount; ++t)
      r.tags[t] = std::poisson_distribution<std::int64_t>(std::exp(intercept + beta * *r.u))(rng);
  }
  return out;
}

ModelCell cell_with_effect(std::string_view tag, double effect) {
  ModelCell c;
  c.outcome = std::string(tag);
  ModelTerm t;
  t.column = "u";
  t.effect = effect;
  c.terms.push_back(t);
  return c;
}

std::vector<ModelCell> cells_matching(const ExpectationTable& table) {
  std::vector<ModelCell> cells;
  for (std::size_t t = 0; t < kTagCount; ++t) {
    const double e = table.signs[t] == Sign::negative ? -1.0 : 1.0;
    cells.push_back(cell_with_effect(kTagNames[t], e));
  }
  return cells;
}

}  // namespace

TEST_CASE("stratified sample matches the requested stratum counts") {
  const auto pool = ample_pool();
  SampleSpec spec;
  spec.seed = 3;
  spec.strata[{2013, DocType::article}] = 2;
  spec.strata[{2014, DocType::review}] = 1;
  const auto ids = stratified_sample(pool, spec);
  CHECK(ids.size() == 3);
  CHECK(strata_of(ids, pool) == spec.strata);
  CHECK(std::is_sorted(ids.begin(), ids.end()));
  CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
}

TEST_CASE("stratified sample is deterministic and ignores pool order") {
  auto pool = ample_pool();
  SampleSpec spec;
  spec.seed = 99;
  spec.strata[{2013, DocType::article}] = 4;
  spec.strata[{2014, DocType::article}] = 5;
  const auto a = stratified_sample(pool, spec);
  CHECK(a == stratified_sample(pool, spec));
  std::reverse(pool.begin(), pool.end());
  std::shuffle(pool.begin(), pool.end(), std::mt19937_64(5));
  CHECK(a == stratified_sample(pool, spec));
  spec.seed = 100;
  CHECK(strata_of(stratified_sample(pool, spec), pool) == spec.strata);
}

TEST_CASE("stratified sample names the short stratum") {
  std::vector<PaperRecord> pool{pool_paper("x", 2014, DocType::review), pool_paper("y", 2013, DocType::article)};
  SampleSpec spec;
  spec.strata[{2014, DocType::review}] = 2;
  try {
    (void)stratified_sample(pool, spec);
    FAIL("expected a shortage error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("(2014, review)") != std::string::npos);
  }
}

TEST_CASE("sample spec and eligible pool") {
  std::vector<PaperRecord> papers{pool_paper("inc1", 2013, DocType::article, {"Bio"}),
                                  pool_paper("inc2", 2014, DocType::review, {"Bio"}),
                                  pool_paper("ok", 2013, DocType::article, {"Bio", "Chem"}),
                                  pool_paper("other_cat", 2013, DocType::article, {"Phys"}),
                                  pool_paper("editorial", 2013, DocType::other, {"Bio"}),
                                  pool_paper("late", 2016, DocType::article, {"Bio"})};
  const auto corpus = Corpus::build(papers, {});
  const std::set<std::string> included{"inc1", "inc2"};
  const auto spec = sample_spec_of(corpus, included, 1);
  CHECK(spec.strata.size() == 2);
  CHECK(spec.strata.at({2013, DocType::article}) == 1);
  CHECK(spec.strata.at({2014, DocType::review}) == 1);
  const auto pool = eligible_pool(corpus, included, {2013, 2015});
  REQUIRE(pool.size() == 1);
  CHECK(pool[0].paper_id == "ok");
  CHECK_THROWS_AS(sample_spec_of(corpus, {"nope"}, 1), ValidationError);
}

TEST_CASE("dichotomize thresholds at one") {
  const std::vector<double> counts{0, 2, 1, 0};
  CHECK(dichotomize(counts) == std::vector<double>{0, 1, 1, 0});
}

TEST_CASE("expectation verdicts") {
  const auto table = ExpectationTable::defaults();
  CHECK(table.expected("new_finding") == Sign::positive);
  CHECK(table.expected("confirmation") == Sign::negative);
  CHECK(table.expected("controversial") == Sign::either);
  CHECK_THROWS_AS(table.expected("bogus"), SchemaError);

  SUBCASE("all as expected") {
    const auto v = evaluate_expectations(cells_matching(table), table);
    CHECK(v.matched == 8);
    CHECK(v.total == 8);
    CHECK(v.convergent);
    CHECK(v.unmatched.empty());
  }
  SUBCASE("three of eight") {
    auto cells = cells_matching(table);
    int flipped = 0;
    for (std::size_t t = 0; t < kTagCount && flipped < 5; ++t) {
      if (table.signs[t] == Sign::either) continue;
      cells[t].terms[0].effect = -cells[t].terms[0].effect;
      ++flipped;
    }
    const auto v = evaluate_expectations(cells, table);
    CHECK(v.matched == 3);
    CHECK(v.total == 8);
    CHECK_FALSE(v.convergent);
    CHECK(v.unmatched.size() == 5);
  }
  SUBCASE("either matches whatever its sign") {
    auto cells = cells_matching(table);
    cells[*tag_index("controversial")].terms[0].effect = -7.0;
    CHECK(evaluate_expectations(cells, table).convergent);
  }
  SUBCASE("failed cell is unmatched and listed") {
    auto cells = cells_matching(table);
    cells[*tag_index("refutation")].error = "all-zero outcome";
    const auto v = evaluate_expectations(cells, table);
    CHECK(v.matched == 7);
    CHECK_FALSE(v.convergent);
    CHECK(v.unmatched == std::vector<std::string>{"refutation"});
  }
  SUBCASE("flipping one matching cell lowers the count by exactly one") {
    const auto base = cells_matching(table);
    for (std::size_t t = 0; t < kTagCount; ++t) {
      if (table.signs[t] == Sign::either) continue;
      auto cells = base;
      cells[t].terms[0].effect = -cells[t].terms[0].effect;
      CHECK(evaluate_expectations(cells, table).matched == 7);
    }
  }
  SUBCASE("missing and duplicate tags are rejected") {
    auto cells = cells_matching(table);
    cells.pop_back();
    CHECK_THROWS_AS(evaluate_expectations(cells, table), ValidationError);
    cells.push_back(cells.front());
    CHECK_THROWS_AS(evaluate_expectations(cells, table), ConflictError);
  }
}

TEST_CASE("tag models recover a known Poisson coefficient") {
  // Truth mirrors the printed U effect: count ~ Poisson(exp(0.08 U - 0.15)).
  const auto records = poisson_records(21, 4000, 0.08, -0.15);
  const auto cells = run_tag_models(records, Predictor::u);
  REQUIRE(cells.size() == kTagCount);
  for (const auto& c : cells) {
    REQUIRE(c.ok());
    const auto& term = *c.key_term();
    CHECK(term.column == "u");
    CHECK(std::abs(term.coefficient - 0.08) <= 3.0 * term.robust_se);
    CHECK(term.effect == doctest::Approx(100.0 * (std::exp(term.coefficient * term.sd) - 1.0)).epsilon(1e-12));
    CHECK(c.fit->columns == std::vector<std::string>{"(intercept)", "u", "year_2014", "year_2015"});
    CHECK(c.n == 4000);
  }
}

TEST_CASE("report stars follow the stored fit") {
  const auto records = poisson_records(5, 600, 0.3, -0.5);
  for (const auto& c : run_tag_models(records, Predictor::u)) {
    REQUIRE(c.ok());
    const auto& t = *c.key_term();
    const auto col = c.fit->index(t.column);
    CHECK(t.coefficient == c.fit->coefficients(col));
    CHECK(t.robust_se == c.fit->robust_se(col));
    CHECK(t.stars == significance_stars(wald_p_value(t.coefficient, t.robust_se)));
    CHECK(c.pseudo_r2 == mcfadden_r2(*c.fit));
  }
}

TEST_CASE("tag models refuse degenerate inputs") {
  SUBCASE("small sample") {
    const auto records = poisson_records(1, 29, 0.1, 0.0);
    try {
      (void)run_tag_models(records, Predictor::u);
      FAIL("expected refusal");
    } catch (const UndefinedError& e) {
      CHECK(std::string(e.what()).find("small sample") != std::string::npos);
    }
    ModelOptions lenient;
    lenient.min_rows = 10;
    CHECK(run_tag_models(records, Predictor::u, lenient).size() == kTagCount);
  }
  SUBCASE("missing values are dropped and counted") {
    auto records = poisson_records(2, 100, 0.1, 0.0);
    for (std::size_t i = 0; i < 10; ++i) records[i].k.reset();
    const auto cells = run_tag_models(records, Predictor::k);
    CHECK(cells[0].n == 90);
    CHECK(cells[0].dropped == 10);
  }
  SUBCASE("constant predictor") {
    auto records = poisson_records(3, 100, 0.1, 0.0);
    for (auto& r : records) r.k = 0.5;
    CHECK_THROWS_AS(run_tag_models(records, Predictor::k), UndefinedError);
  }
  SUBCASE("a never-assigned tag fails alone") {
    auto records = poisson_records(4, 200, 0.1, 0.0);
    const auto refutation = *tag_index("refutation");
    for (auto& r : records) r.tags[refutation] = 0;
    const auto cells = run_tag_models(records, Predictor::u);
    for (std::size_t t = 0; t < kTagCount; ++t) {
      if (t == refutation) {
        CHECK_FALSE(cells[t].ok());
        CHECK(cells[t].terms.empty());
      } else {
        CHECK(cells[t].ok());
      }
    }
  }
  SUBCASE("unknown tag") {
    const auto records = poisson_records(1, 50, 0.1, 0.0);
    CHECK_THROWS_AS(run_single_model(records, "bogus", Predictor::u, Family::poisson), SchemaError);
  }
}

TEST_CASE("categorical W enters as two dummies against non-novel") {
  const auto records = poisson_records(8, 1000, 0.0, 0.0);
  const auto pd = build_predictor_design(records, Predictor::w_categorical);
  CHECK(pd.predictor_columns == std::vector<std::string>{"w_moderately_novel", "w_highly_novel"});
  CHECK(pd.reference_year == 2013);
  for (std::size_t i = 0; i < pd.rows.size(); ++i) {
    const auto cat = *records[pd.rows[i]].w_category;
    CHECK(pd.design.predictors(static_cast<Eigen::Index>(i), 1) == (cat == WCategory::moderately_novel ? 1.0 : 0.0));
    CHECK(pd.design.predictors(static_cast<Eigen::Index>(i), 2) == (cat == WCategory::highly_novel ? 1.0 : 0.0));
  }
  const auto cells = run_probit_robustness(records, Predictor::w);
  CHECK(cells[0].predictor == Predictor::w_categorical);
  CHECK(cells[0].key_term()->column == "w_highly_novel");
}

TEST_CASE("probit signs agree with a known generating coefficient") {
  const double beta = 0.5;
  int agree = 0;
  const int runs = 100;
  for (int s = 0; s < runs; ++s) {
    std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(s));
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<StudyRecord> records(800);
    for (std::size_t i = 0; i < records.size(); ++i) {
      auto& r = records[i];
      r.paper_id = std::to_string(i);
      r.year = 2013 + static_cast<int>(i % 3);
      r.u = z(rng);
      const bool y = -0.3 + beta * *r.u + z(rng) > 0.0;
      for (auto& t : r.tags) t = y ? 1 : 0;
    }
    const auto cell = run_single_model(records, "new_finding", Predictor::u, Family::probit);
    if (cell.ok() && cell.key_term()->effect > 0.0) ++agree;
  }
  CHECK(agree >= 99);
}

TEST_CASE("perfectly separated tag is flagged non-converged") {
  auto records = poisson_records(6, 200, 0.0, 0.0);
  const auto t = *tag_index("hypothesis");
  for (auto& r : records) r.tags[t] = *r.u > 0.0 ? 1 : 0;
  const auto cell = run_single_model(records, "hypothesis", Predictor::u, Family::probit);
  CHECK_FALSE(cell.ok());
  REQUIRE(cell.fit.has_value());
  CHECK_FALSE(cell.fit->converged);
  CHECK(cell.error.find("not converged") != std::string::npos);
}

TEST_CASE("inclusion models") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SUBCASE("inclusion generated from U only") {
    std::vector<InclusionRow> rows;
    for (int i = 0; i < 3000; ++i) {
      InclusionRow r;
      r.paper_id = std::to_string(i);
      r.year = 2013 + i % 3;
      r.u = z(rng);
      r.w = unit(rng);
      r.k = unit(rng);
      r.included = unit(rng) < 1.0 / (1.0 + std::exp(-(0.8 * *r.u)));
      rows.push_back(r);
    }
    rows[0].k.reset();
    const auto years = run_inclusion_models(rows, {2013, 2015});
    REQUIRE(years.size() == 3);
    CHECK(years[0].dropped == 1);
    for (const auto& y : years) {
      REQUIRE(y.model.ok());
      CHECK(y.model.terms[0].column == "u");
      CHECK(y.model.terms[0].effect > 0.0);
      CHECK(y.model.terms[0].stars == "***");
      for (std::size_t t = 1; t < 3; ++t)
        CHECK(std::abs(y.model.terms[t].coefficient / y.model.terms[t].robust_se) < 4.0);
      CHECK(y.key_figures.size() == 4);
      CHECK(y.spearman.count("u,w") == 1);
    }
  }
  SUBCASE("single-class year fails alone") {
    std::vector<InclusionRow> rows;
    for (int i = 0; i < 400; ++i) {
      InclusionRow r;
      r.year = 2013 + i % 2;
      r.u = z(rng);
      r.w = unit(rng);
      r.k = unit(rng);
      r.included = r.year == 2013 ? unit(rng) < 0.5 : false;
      rows.push_back(r);
    }
    const auto years = run_inclusion_models(rows, {2013, 2014});
    CHECK(years[0].model.ok());
    CHECK_FALSE(years[1].model.ok());
  }
}

TEST_CASE("synthetic corpus generation") {
  SynthParams small;
  small.background_papers_per_year = 40;
  small.study_papers = 300;
  small.n_journals = 40;

  SUBCASE("same seed twice gives identical data") {
    const auto a = generate_synthetic_corpus(7, small);
    const auto b = generate_synthetic_corpus(7, small, 4);
    CHECK(a.corpus == b.corpus);
    CHECK(a.tags.records() == b.tags.records());
    const auto c = generate_synthetic_corpus(8, small);
    CHECK_FALSE(a.corpus == c.corpus);
  }
  SUBCASE("cross-community pairs are less common than within-community pairs") {
    SynthParams p = small;
    p.n_communities = 2;
    p.n_journals = 20;
    const auto data = generate_synthetic_corpus(3, p);
    const auto& corpus = data.corpus;
    const auto counts = build_year_pair_counts(corpus, 2014);
    auto community = [&](JournalId id) { return std::stoi(corpus.journal_name(id).substr(1)) % 2; };
    double within = 0, cross = 0;
    std::size_t n_within = 0, n_cross = 0;
    // Brute force over every reference pair of every 2014 paper.
    for (std::size_t i = 0; i < corpus.papers().size(); ++i) {
      if (corpus.papers()[i].year != 2014) continue;
      const auto refs = corpus.ref_journals(i);
      for (std::size_t a = 0; a < refs.size(); ++a)
        for (std::size_t b = a + 1; b < refs.size(); ++b) {
          if (refs[a] == refs[b]) continue;
          const double c = commonness(counts, refs[a], refs[b]);
          if (community(refs[a]) == community(refs[b])) {
            within += c;
            ++n_within;
          } else {
            cross += c;
            ++n_cross;
          }
        }
    }
    REQUIRE(n_cross > 0);
    REQUIRE(n_within > 0);
    CHECK(cross / static_cast<double>(n_cross) < within / static_cast<double>(n_within));
  }
  SUBCASE("infeasible parameters are rejected") {
    SynthParams p = small;
    p.distinct_journals = true;
    p.refs_per_paper = 41;
    CHECK_THROWS_AS(generate_synthetic_corpus(1, p), ValidationError);
    p = small;
    p.study_papers = 0;
    CHECK_THROWS_AS(generate_synthetic_corpus(1, p), ValidationError);
  }
  SUBCASE("distinct journals option") {
    SynthParams p = small;
    p.distinct_journals = true;
    const auto data = generate_synthetic_corpus(2, p);
    for (const auto& paper : data.corpus.papers()) {
      std::set<std::string> seen;
      for (const auto& r : paper.references) CHECK(seen.insert(r.journal).second);
    }
  }
  SUBCASE("zero tag coefficients give null effects") {
    SynthParams p = small;
    p.study_papers = 1500;
    p.include_all = true;
    p.tag_model.coef_u.fill(0.0);
    p.tag_model.year_effect = 0.0;
    const auto data = generate_synthetic_corpus(11, p);
    const auto index = CoCitationIndex::build(data.corpus);
    const auto scores = score_corpus(data.corpus, index, p.study_years);
    const auto records = join_scores_tags(scores, data.tags);
    for (const auto& c : run_tag_models(records, Predictor::u)) {
      REQUIRE(c.ok());
      CHECK(std::abs(c.key_term()->coefficient / c.key_term()->robust_se) < 4.0);
    }
  }
}

TEST_CASE("join re-derives W categories over the joined papers") {
  SynthParams p;
  p.background_papers_per_year = 60;
  p.study_papers = 600;
  p.n_journals = 120;
  const auto data = generate_synthetic_corpus(5, p);
  const auto index = CoCitationIndex::build(data.corpus);
  const auto scores = score_corpus(data.corpus, index, p.study_years);
  JoinReport report;
  const auto records = join_scores_tags(scores, data.tags, &report);
  CHECK(report.scored == scores.size());
  CHECK(report.tagged == data.tags.size());
  CHECK(report.matched == records.size());
  CHECK(records.size() == data.tags.size());
  CHECK(std::is_sorted(records.begin(), records.end(),
                       [](const StudyRecord& a, const StudyRecord& b) { return a.paper_id < b.paper_id; }));

  std::vector<double> ws;
  for (const auto& r : records)
    if (r.w) ws.push_back(*r.w);
  std::sort(ws.begin(), ws.end());
  const double p99 = nearest_rank_percentile(ws, 99);
  for (const auto& r : records) {
    if (!r.w) continue;
    const auto expected = *r.w == 0.0  ? WCategory::non_novel
                          : *r.w > p99 ? WCategory::highly_novel
                                       : WCategory::moderately_novel;
    CHECK(*r.w_category == expected);
  }
}

TEST_CASE("study config parsing") {
  const std::filesystem::path base = "/data/study";
  auto parse = [&](const std::string& text) {
    std::istringstream in(text);
    return parse_study_config(in, base);
  };

  SUBCASE("full config") {
    const auto c = parse(
        "# comment\n"
        "corpus = \"corpus.jsonl\"  # trailing comment\n"
        "tags = \"/abs/tags.jsonl\"\n"
        "years = \"2013:2015\"\n"
        "predictors = [\"u\", \"w_categorical\"]\n"
        "seed = 42\n"
        "min_ref_year = 1990\n"
        "keyword_newness = \"same_year_only\"\n"
        "count_self_pairs = false\n"
        "robust_correction = \"hc0\"\n"
        "min_rows = 50\n");
    CHECK(c.corpus == base / "corpus.jsonl");
    CHECK(c.tags == std::filesystem::path("/abs/tags.jsonl"));
    CHECK(c.years == YearRange{2013, 2015});
    CHECK(c.predictors == std::vector<Predictor>{Predictor::u, Predictor::w_categorical});
    CHECK(c.seed == 42u);
    CHECK(c.corpus_config.min_ref_year == 1990);
    CHECK(c.keyword_newness == KeywordNewness::same_year_only);
    CHECK_FALSE(c.index.count_self_pairs);
    CHECK(c.correction == RobustCorrection::hc0);
    CHECK(c.min_rows == 50);
  }
  SUBCASE("defaults") {
    const auto c = parse("corpus = \"c\"\ntags = \"t\"\n");
    CHECK_FALSE(c.years.has_value());
    CHECK_FALSE(c.seed.has_value());
    CHECK(c.predictors.size() == kAllPredictors.size());
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(parse("corpus = \"c\"\ntags = \"t\"\ncolour = 1\n"), SchemaError);
    CHECK_THROWS_AS(parse("corpus = \"c\"\ncorpus = \"d\"\ntags = \"t\"\n"), ConflictError);
    CHECK_THROWS_AS(parse("tags = \"t\"\n"), SchemaError);
    CHECK_THROWS_AS(parse("corpus = \"c\"\ntags = \"t\"\npredictors = [\"x\"]\n"), SchemaError);
    try {
      (void)parse("corpus = \"c\"\ntags = unquoted\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse("just words\n"), ParseError);
  }
}

TEST_CASE("study run is independent of the thread count") {
  SynthParams p;
  p.background_papers_per_year = 60;
  p.study_papers = 900;
  p.n_journals = 120;
  p.inclusion_intercept = -2.0;
  const auto data = generate_synthetic_corpus(9, p);
  const auto dir = std::filesystem::temp_directory_path() / "novelty_test_study";
  std::filesystem::create_directories(dir);
  {
    std::ofstream c(dir / "corpus.jsonl");
    write_corpus(c, data.corpus);
    std::ofstream t(dir / "tags.jsonl");
    write_tags(t, data.tags);
  }
  StudyConfig config;
  config.corpus = dir / "corpus.jsonl";
  config.tags = dir / "tags.jsonl";
  config.years = p.study_years;
  const auto one = run_study(config, 5, 1);
  const auto many = run_study(config, 5, 6);
  CHECK(one.files == many.files);
  CHECK(one.counts == many.counts);
  for (const char* name : {"table1_stats.csv", "table4_prm.csv", "table5_probit.csv", "table6_groups.csv",
                           "table7_logit.csv", "figure1_counts.csv", "verdicts.csv", "study_bundle.json"})
    CHECK(one.files.count(name) == 1);
  CHECK(run_study(config, 6, 1).files.at("table7_logit.csv") != one.files.at("table7_logit.csv"));
  std::filesystem::remove_all(dir);
}
