#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

#include <fmt/format.h>

#include "novelty/csv.hpp"
#include "novelty/digest.hpp"
#include "novelty/errors.hpp"
#include "novelty/study.hpp"

namespace novelty {

// -- config -------------------------------------------------------------------

namespace {

constexpr std::string_view kConfigKeys[] = {
    "corpus",         "tags",           "years",           "predictors",         "seed",
    "min_ref_year",   "corpus_years",   "w_prior_window",  "w_following_window", "count_self_pairs",
    "count_duplicate_pairs", "keyword_newness", "robust_correction", "min_rows"};

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T get(const nlohmann::json& v, std::string_view key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaError(fmt::format("config key '{}' has the wrong type", key));
  }
}

}  // namespace

StudyConfig parse_study_config(std::istream& in, const std::filesystem::path& base_dir) {
  StudyConfig cfg;
  std::map<std::string, nlohmann::json> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(strip_comment(line));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    nlohmann::json value;
    try {
      value = nlohmann::json::parse(text.substr(eq + 1));
    } catch (const nlohmann::json::parse_error&) {
      throw ParseError(line_no, fmt::format("cannot parse the value of '{}'", key));
    }
    if (std::find(std::begin(kConfigKeys), std::end(kConfigKeys), key) == std::end(kConfigKeys)) {
      std::string known;
      for (auto k : kConfigKeys) known += (known.empty() ? "" : ", ") + std::string(k);
      throw SchemaError(fmt::format("unknown config key '{}' (known keys: {})", key, known));
    }
    if (!values.emplace(key, std::move(value)).second)
      throw ConflictError(fmt::format("config key '{}' is set twice", key));
  }

  auto path_of = [&](const char* key) {
    const auto it = values.find(key);
    if (it == values.end()) throw SchemaError(fmt::format("config is missing '{}'", key));
    std::filesystem::path p = get<std::string>(it->second, key);
    return p.is_absolute() ? p : base_dir / p;
  };
  cfg.corpus = path_of("corpus");
  cfg.tags = path_of("tags");

  for (const auto& [key, v] : values) {
    if (key == "years") {
      cfg.years = parse_year_range(get<std::string>(v, key));
    } else if (key == "corpus_years") {
      cfg.corpus_config.year_range = parse_year_range(get<std::string>(v, key));
    } else if (key == "predictors") {
      cfg.predictors.clear();
      for (const auto& name : get<std::vector<std::string>>(v, key)) {
        const auto p = parse_predictor(name);
        if (!p) throw SchemaError(fmt::format("unknown predictor '{}'", name));
        cfg.predictors.push_back(*p);
      }
    } else if (key == "seed") {
      cfg.seed = get<std::uint64_t>(v, key);
    } else if (key == "min_ref_year") {
      cfg.corpus_config.min_ref_year = get<int>(v, key);
    } else if (key == "w_prior_window") {
      cfg.corpus_config.w_prior_window = get<int>(v, key);
    } else if (key == "w_following_window") {
      cfg.corpus_config.w_following_window = get<int>(v, key);
    } else if (key == "count_self_pairs") {
      cfg.index.count_self_pairs = get<bool>(v, key);
    } else if (key == "count_duplicate_pairs") {
      cfg.index.count_duplicate_pairs = get<bool>(v, key);
    } else if (key == "keyword_newness") {
      const auto s = get<std::string>(v, key);
      if (s == "all_prior_years")
        cfg.keyword_newness = KeywordNewness::all_prior_years;
      else if (s == "same_year_only")
        cfg.keyword_newness = KeywordNewness::same_year_only;
      else
        throw SchemaError(fmt::format("keyword_newness must be all_prior_years or same_year_only, not '{}'", s));
    } else if (key == "robust_correction") {
      const auto s = get<std::string>(v, key);
      if (s == "small_sample")
        cfg.correction = RobustCorrection::small_sample;
      else if (s == "hc0")
        cfg.correction = RobustCorrection::hc0;
      else
        throw SchemaError(fmt::format("robust_correction must be small_sample or hc0, not '{}'", s));
    } else if (key == "min_rows") {
      cfg.min_rows = get<std::size_t>(v, key);
    }
  }
  cfg.corpus_config.validate();
  return cfg;
}

StudyConfig load_study_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open config {}", path.string()));
  return parse_study_config(in, path.parent_path());
}

nlohmann::ordered_json to_json(const StudyConfig& config) {
  nlohmann::ordered_json j;
  j["corpus"] = config.corpus.filename().string();
  j["tags"] = config.tags.filename().string();
  j["years"] = config.years ? nlohmann::ordered_json(fmt::format("{}:{}", config.years->start, config.years->end))
                            : nlohmann::ordered_json(nullptr);
  auto& preds = j["predictors"] = nlohmann::ordered_json::array();
  for (auto p : config.predictors) preds.push_back(std::string(to_string(p)));
  j["seed"] = config.seed ? nlohmann::ordered_json(*config.seed) : nlohmann::ordered_json(nullptr);
  j["min_ref_year"] = config.corpus_config.min_ref_year;
  j["corpus_years"] = config.corpus_config.year_range
                          ? nlohmann::ordered_json(fmt::format("{}:{}", config.corpus_config.year_range->start,
                                                               config.corpus_config.year_range->end))
                          : nlohmann::ordered_json(nullptr);
  j["w_prior_window"] = config.corpus_config.w_prior_window;
  j["w_following_window"] = config.corpus_config.w_following_window;
  j["count_self_pairs"] = config.index.count_self_pairs;
  j["count_duplicate_pairs"] = config.index.count_duplicate_pairs;
  j["keyword_newness"] =
      config.keyword_newness == KeywordNewness::all_prior_years ? "all_prior_years" : "same_year_only";
  j["robust_correction"] = config.correction == RobustCorrection::small_sample ? "small_sample" : "hc0";
  j["min_rows"] = config.min_rows;
  return j;
}

// -- reports ------------------------------------------------------------------

namespace {

using csv::field;
using csv::number;

nlohmann::ordered_json fit_json(const FitResult& fit) {
  nlohmann::ordered_json j;
  j["family"] = std::string(to_string(fit.family));
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  if (!fit.diagnostic.empty()) j["diagnostic"] = fit.diagnostic;
  j["n"] = fit.n;
  j["log_likelihood"] = fit.log_likelihood;
  j["null_log_likelihood"] = fit.null_log_likelihood;
  auto& coefs = j["coefficients"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < fit.columns.size(); ++c) {
    const auto i = static_cast<Eigen::Index>(c);
    coefs.push_back({{"column", fit.columns[c]},
                     {"estimate", fit.coefficients(i)},
                     {"model_se", fit.model_se(i)},
                     {"robust_se", fit.robust_se(i)}});
  }
  return j;
}

nlohmann::ordered_json cell_json(const ModelCell& cell) {
  nlohmann::ordered_json j;
  j["outcome"] = cell.outcome;
  j["predictor"] = std::string(to_string(cell.predictor));
  j["family"] = std::string(to_string(cell.family));
  if (cell.year) j["year"] = cell.year;
  j["n"] = cell.n;
  j["dropped"] = cell.dropped;
  j["percent_assigned"] = cell.percent_assigned;
  j["pseudo_r2_mcfadden_percent"] = cell.pseudo_r2;
  j["status"] = cell.ok() ? "ok" : cell.error;
  auto& terms = j["terms"] = nlohmann::ordered_json::array();
  for (const auto& t : cell.terms)
    terms.push_back({{"column", t.column},
                     {"coefficient", t.coefficient},
                     {"robust_se", t.robust_se},
                     {"sd", t.sd},
                     {cell.family == Family::probit ? "std_coef_sd_units" : "percent_change", t.effect},
                     {"p_value", t.p_value},
                     {"stars", t.stars}});
  j["fit"] = cell.fit ? fit_json(*cell.fit) : nlohmann::ordered_json(nullptr);
  return j;
}

/// One row per predictor term; a failed cell still gets one row carrying its status.
void write_cell_rows(std::ostream& out, const ModelCell& cell, const std::string& lead) {
  const std::string status = cell.ok() ? "ok" : cell.error;
  if (cell.terms.empty()) {
    out << lead << ",," << cell.n << ',' << cell.dropped << ',' << number(cell.percent_assigned) << ",,,,,,,"
        << number(cell.pseudo_r2) << ',' << field(status) << '\n';
    return;
  }
  for (const auto& t : cell.terms)
    out << lead << ',' << field(t.column) << ',' << cell.n << ',' << cell.dropped << ','
        << number(cell.percent_assigned) << ',' << number(t.coefficient) << ',' << number(t.robust_se) << ','
        << number(t.sd) << ',' << number(t.effect) << ',' << number(t.p_value) << ',' << t.stars << ','
        << number(cell.pseudo_r2) << ',' << field(status) << '\n';
}

std::vector<ModelCell> failed_cells(Predictor predictor, Family family, const std::string& error) {
  std::vector<ModelCell> cells(kTagCount);
  for (std::size_t t = 0; t < kTagCount; ++t) {
    cells[t].outcome = std::string(kTagNames[t]);
    cells[t].predictor = predictor;
    cells[t].family = family;
    cells[t].error = error;
  }
  return cells;
}

void summary_row(std::ostream& out, const std::string& lead, const SummaryRow& r) {
  out << lead << ',' << field(r.group) << ',' << r.n << ',' << number(r.mean) << ',' << number(r.median) << ','
      << number(r.sd) << ',' << number(r.min) << ',' << number(r.max) << '\n';
}

}  // namespace

StudyOutputs run_study(const StudyConfig& config, std::uint64_t seed, unsigned threads) {
  StudyOutputs outputs;
  auto& counts = outputs.counts;

  IngestReport ingest;
  const Corpus corpus = ingest_corpus(config.corpus, config.corpus_config, &ingest);
  const TagTable tags = ingest_tags(config.tags);
  counts["papers"] = corpus.papers().size();
  counts["tag_records"] = tags.size();

  YearRange years;
  if (config.years) {
    years = *config.years;
  } else {
    std::optional<int> lo, hi;
    for (const auto& t : tags.records())
      if (auto idx = corpus.find_paper(t.paper_id)) {
        const int y = corpus.papers()[*idx].year;
        lo = std::min(lo.value_or(y), y);
        hi = std::max(hi.value_or(y), y);
      }
    if (!lo) throw ValidationError("no tagged paper appears in the corpus");
    years = {*lo, *hi};
  }
  const YearRange cy = corpus.years();
  if (years.start < cy.start || years.end > cy.end)
    throw ValidationError(fmt::format("study years {}:{} lie outside the corpus years {}:{}", years.start, years.end,
                                      cy.start, cy.end));

  const auto index = CoCitationIndex::build(corpus, config.index, threads);
  ScoreOptions score_options;
  score_options.keyword_newness = config.keyword_newness;
  score_options.threads = threads;
  const auto scores = score_corpus(corpus, index, years, score_options);
  counts["scored"] = scores.size();

  JoinReport join;
  const auto records = join_scores_tags(scores, tags, &join);
  counts["joined"] = join.matched;

  ModelOptions model_options;
  model_options.threads = threads;
  model_options.min_rows = config.min_rows;
  model_options.fit.correction = config.correction;

  nlohmann::ordered_json bundle;
  bundle["config"] = to_json(config);
  bundle["seed"] = seed;
  bundle["corpus_digest"] = sha256_file(config.corpus);
  bundle["tags_digest"] = sha256_file(config.tags);
  bundle["index_digest"] = index.corpus_digest();
  bundle["study_years"] = fmt::format("{}:{}", years.start, years.end);
  bundle["ingest"] = {{"records", ingest.records},
                      {"papers_retained", ingest.papers_retained},
                      {"papers_out_of_range", ingest.papers_out_of_range},
                      {"references_retained", ingest.references_retained},
                      {"references_before_min_year", ingest.references_before_min_year},
                      {"references_missing_journal", ingest.references_missing_journal}};
  bundle["join"] = {{"scored", join.scored}, {"tagged", join.tagged}, {"matched", join.matched}};
  bundle["pseudo_r2_variant"] = "mcfadden";

  // Table 1: descriptives by year and pooled
  {
    std::ostringstream t1;
    t1 << "variable,group,n,mean,median,sd,min,max\n";
    const std::pair<const char*, Predictor> vars[] = {{"u", Predictor::u},
                                                      {"w", Predictor::w},
                                                      {"k", Predictor::k},
                                                      {"citations", Predictor::citations},
                                                      {"fm_recommendations", Predictor::fm_recommendations}};
    for (const auto& [name, pred] : vars) {
      std::vector<double> values;
      std::vector<std::string> groups;
      for (const auto& r : records)
        if (auto v = predictor_value(r, pred)) {
          values.push_back(*v);
          groups.push_back(std::to_string(r.year));
        }
      if (values.empty()) continue;
      const auto table = descriptive_stats(values, groups);
      for (const auto& row : table.groups) summary_row(t1, name, row);
      summary_row(t1, name, table.pooled);
    }
    outputs.files["table1_stats.csv"] = t1.str();
  }

  // Table 4: PRMs; Table 5: probit robustness
  const std::string header =
      "tag,predictor,term,n,dropped,percent_assigned,coefficient,robust_se,sd,{},p_value,stars,pseudo_r2_percent,status\n";
  std::ostringstream t4, t5, verdicts;
  t4 << fmt::format(fmt::runtime(header), "percent_change");
  t5 << fmt::format(fmt::runtime(header), "std_coef_sd_units");
  verdicts << "model,predictor,matched,total,convergent,unmatched\n";
  auto& models = bundle["models"] = nlohmann::ordered_json::array();
  auto emit = [&](std::ostream& table, const char* model, Predictor predictor, const std::vector<ModelCell>& cells) {
    for (const auto& cell : cells) {
      write_cell_rows(table, cell, cell.outcome + "," + std::string(to_string(predictor)));
      models.push_back(cell_json(cell));
    }
    const auto v = evaluate_expectations(cells);
    std::string unmatched;
    for (const auto& u : v.unmatched) unmatched += (unmatched.empty() ? "" : ";") + u;
    verdicts << model << ',' << to_string(predictor) << ',' << v.matched << ',' << v.total << ','
             << (v.convergent ? "true" : "false") << ',' << unmatched << '\n';
  };
  std::size_t failed_cells_total = 0;
  for (Predictor p : config.predictors) {
    std::vector<ModelCell> cells;
    try {
      cells = run_tag_models(records, p, model_options);
    } catch (const DataError& e) {
      cells = failed_cells(p, Family::poisson, e.what());
    }
    failed_cells_total += static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return !c.ok(); }));
    emit(t4, "poisson", p, cells);
  }
  std::vector<Predictor> probit_predictors;
  for (Predictor p : config.predictors) {
    if (p == Predictor::w) p = Predictor::w_categorical;
    if (p != Predictor::u && p != Predictor::w_categorical && p != Predictor::k) continue;
    if (std::find(probit_predictors.begin(), probit_predictors.end(), p) == probit_predictors.end())
      probit_predictors.push_back(p);
  }
  for (Predictor p : probit_predictors) {
    std::vector<ModelCell> cells;
    try {
      cells = run_probit_robustness(records, p, model_options);
    } catch (const DataError& e) {
      cells = failed_cells(p, Family::probit, e.what());
    }
    failed_cells_total += static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return !c.ok(); }));
    emit(t5, "probit", p, cells);
  }
  outputs.files["table4_prm.csv"] = t4.str();
  outputs.files["table5_probit.csv"] = t5.str();
  outputs.files["verdicts.csv"] = verdicts.str();
  counts["failed_cells"] = failed_cells_total;

  // Figure 1: observed vs intercept-only Poisson frequencies per tag
  {
    std::ostringstream f1;
    f1 << "tag,count,observed_n,observed,predicted\n";
    for (std::size_t t = 0; t < kTagCount; ++t) {
      std::vector<double> y;
      y.reserve(records.size());
      for (const auto& r : records) y.push_back(static_cast<double>(r.tags[t]));
      if (y.empty()) continue;
      for (const auto& row : poisson_count_diagnostics(y))
        f1 << kTagNames[t] << ',' << row.count << ',' << row.observed_n << ',' << number(row.observed) << ','
           << number(row.predicted) << '\n';
    }
    outputs.files["figure1_counts.csv"] = f1.str();
  }

  // Tables 6 and 7: included papers against a stratified comparison sample
  {
    std::set<std::string> included;
    for (const auto& r : records)
      if (r.doc_type == DocType::article || r.doc_type == DocType::review) included.insert(r.paper_id);
    std::ostringstream t6, t7, corr;
    t6 << "year,variable,n,mean,median,sd,min,max\n";
    t7 << "year,term,n,dropped,percent_included,coefficient,robust_se,sd,percent_change,p_value,stars,pseudo_r2_percent,"
          "status\n";
    corr << "year,pair,spearman\n";
    auto& inclusion = bundle["inclusion"];
    try {
      const auto pool = eligible_pool(corpus, included, years);
      const auto spec = sample_spec_of(corpus, included, seed);
      const auto sample = stratified_sample(pool, spec);
      auto& strata = inclusion["strata"] = nlohmann::ordered_json::array();
      for (const auto& [s, n] : spec.strata) strata.push_back({{"stratum", to_string(s)}, {"count", n}});
      inclusion["included"] = included.size();
      inclusion["pool"] = pool.size();
      inclusion["sampled"] = sample.size();
      counts["comparison_sample"] = sample.size();

      std::unordered_map<std::string, const PaperScores*> by_id;
      for (const auto& s : scores) by_id.emplace(s.paper_id, &s);
      std::vector<InclusionRow> rows;
      auto add = [&](const std::string& id, bool inc) {
        const auto* s = by_id.at(id);
        InclusionRow row{id, s->year, inc, {}, {}, {}};
        if (s->u) row.u = s->u->value;
        if (s->w) row.w = s->w->value;
        if (s->k) row.k = s->k->value;
        rows.push_back(std::move(row));
      };
      for (const auto& id : included) add(id, true);
      for (const auto& id : sample) add(id, false);

      auto& per_year = inclusion["years"] = nlohmann::ordered_json::array();
      for (const auto& iy : run_inclusion_models(rows, years, model_options)) {
        for (const auto& kf : iy.key_figures) summary_row(t6, std::to_string(iy.year), kf);
        for (const auto& [pair, rho] : iy.spearman)
          corr << iy.year << ',' << field(pair) << ',' << number(rho) << '\n';
        write_cell_rows(t7, iy.model, std::to_string(iy.year));
        auto j = cell_json(iy.model);
        j["spearman"] = iy.spearman;
        per_year.push_back(std::move(j));
      }
    } catch (const DataError& e) {
      inclusion["error"] = e.what();
      t7 << fmt::format("{}:{},,,,,,,,,,,,{}\n", years.start, years.end, field(e.what()));
    }
    outputs.files["table6_groups.csv"] = t6.str();
    outputs.files["table7_logit.csv"] = t7.str();
    outputs.files["correlations.csv"] = corr.str();
  }

  bundle["counts"] = counts;
  outputs.files["study_bundle.json"] = bundle.dump(2) + "\n";
  return outputs;
}

}  // namespace novelty
