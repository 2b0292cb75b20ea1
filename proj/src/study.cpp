#include "novelty/study.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include <fmt/format.h>

#include "novelty/errors.hpp"
#include "novelty/parallel.hpp"

namespace novelty {

std::string_view to_string(Predictor predictor) {
  switch (predictor) {
    case Predictor::u: return "u";
    case Predictor::w: return "w";
    case Predictor::w_categorical: return "w_categorical";
    case Predictor::k: return "k";
    case Predictor::citations: return "citations";
    case Predictor::fm_recommendations: return "fm_recommendations";
  }
  return "?";
}

std::optional<Predictor> parse_predictor(std::string_view text) {
  for (Predictor p : kAllPredictors)
    if (to_string(p) == text) return p;
  return std::nullopt;
}

std::vector<StudyRecord> join_scores_tags(std::span<const PaperScores> scores, const TagTable& tags,
                                          JoinReport* report) {
  std::vector<PaperScores> matched;
  std::vector<const TagRecord*> tag_rows;
  for (const auto& s : scores) {
    if (const auto* t = tags.find(s.paper_id)) {
      matched.push_back(s);
      tag_rows.push_back(t);
    }
  }
  categorize_scores(matched);

  std::vector<StudyRecord> out;
  out.reserve(matched.size());
  for (std::size_t i = 0; i < matched.size(); ++i) {
    const auto& s = matched[i];
    StudyRecord r;
    r.paper_id = s.paper_id;
    r.year = s.year;
    r.doc_type = s.doc_type;
    if (s.u) r.u = s.u->value;
    if (s.w) {
      r.w = s.w->value;
      r.w_category = s.w->category;
    }
    if (s.k) r.k = s.k->value;
    r.tags = tag_rows[i]->tag_counts;
    r.fm_score_sum = tag_rows[i]->fm_score_sum;
    r.citations = tag_rows[i]->citation_count;
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.paper_id < b.paper_id; });
  if (report) *report = {scores.size(), tags.size(), out.size()};
  return out;
}

std::optional<double> predictor_value(const StudyRecord& record, Predictor predictor) {
  switch (predictor) {
    case Predictor::u: return record.u;
    case Predictor::w: return record.w;
    case Predictor::w_categorical:
      if (!record.w_category) return std::nullopt;
      return static_cast<double>(static_cast<int>(*record.w_category));
    case Predictor::k: return record.k;
    case Predictor::citations: return static_cast<double>(record.citations);
    case Predictor::fm_recommendations: return static_cast<double>(record.fm_score_sum);
  }
  return std::nullopt;
}

// -- designs and cells --------------------------------------------------------

namespace {

double column_sd(const Eigen::VectorXd& col) {
  return std::sqrt(sample_variance(std::span<const double>(col.data(), static_cast<std::size_t>(col.size()))));
}

std::size_t usable_rows(std::span<const StudyRecord> records, Predictor predictor) {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [&](const StudyRecord& r) {
    return predictor_value(r, predictor).has_value();
  }));
}

void require_rows(std::size_t rows, std::size_t min_rows, Predictor predictor) {
  if (rows < min_rows)
    throw UndefinedError(fmt::format("small sample: {} usable rows for predictor '{}' (need at least {})", rows,
                                     to_string(predictor), min_rows));
}

/// Fills a cell from a finished fit; `effect` maps (fit, design, term) to the
/// reported statistic.
template <typename Effect>
void fill_cell(ModelCell& cell, const PredictorDesign& pd, const DesignMatrix& design, Effect&& effect,
               const FitOptions& options) {
  try {
    FitResult fit = fit_glm(cell.family, design, options);
    if (!fit.converged) {
      cell.error = "not converged: " + fit.diagnostic;
      cell.fit = std::move(fit);
      return;
    }
    for (const auto& name : pd.predictor_columns) {
      ModelTerm term;
      term.column = name;
      const auto c = design.column(name);
      term.coefficient = fit.coefficients(c);
      term.robust_se = fit.robust_se(c);
      term.sd = column_sd(design.predictors.col(c));
      term.effect = effect(fit, design, term);
      term.p_value = wald_p_value(term.coefficient, term.robust_se);
      term.stars = significance_stars(term.p_value);
      cell.terms.push_back(std::move(term));
    }
    cell.pseudo_r2 = mcfadden_r2(fit);
    cell.fit = std::move(fit);
  } catch (const DataError& e) {
    cell.error = e.what();
    cell.terms.clear();
  }
}

double share_positive(const Eigen::VectorXd& y) {
  return 100.0 * static_cast<double>((y.array() > 0.0).count()) / static_cast<double>(y.size());
}

ModelCell fit_tag_cell(std::span<const StudyRecord> records, const PredictorDesign& pd, std::size_t tag,
                       Predictor predictor, Family family, const FitOptions& options) {
  ModelCell cell;
  cell.outcome = std::string(kTagNames[tag]);
  cell.predictor = predictor;
  cell.family = family;
  cell.n = pd.rows.size();
  cell.dropped = pd.dropped;

  DesignMatrix design = pd.design;
  std::vector<double> counts(pd.rows.size());
  for (std::size_t i = 0; i < pd.rows.size(); ++i) counts[i] = static_cast<double>(records[pd.rows[i]].tags[tag]);
  if (family != Family::poisson) counts = dichotomize(counts);
  design.outcome = Eigen::Map<const Eigen::VectorXd>(counts.data(), static_cast<Eigen::Index>(counts.size()));
  cell.percent_assigned = share_positive(design.outcome);

  if (family == Family::probit) {
    fill_cell(
        cell, pd, design,
        [](const FitResult& fit, const DesignMatrix& d, const ModelTerm& term) {
          return std_coef_probit(fit, d, term.column);
        },
        options);
  } else {
    fill_cell(
        cell, pd, design,
        [](const FitResult&, const DesignMatrix&, const ModelTerm& term) {
          return percent_change(term.coefficient, term.sd);
        },
        options);
  }
  return cell;
}

std::vector<ModelCell> run_per_tag(std::span<const StudyRecord> records, Predictor predictor, Family family,
                                   const ModelOptions& options) {
  require_rows(usable_rows(records, predictor), options.min_rows, predictor);
  const auto pd = build_predictor_design(records, predictor);
  std::vector<ModelCell> cells(kTagCount);
  parallel_for(kTagCount, options.threads,
               [&](std::size_t t) { cells[t] = fit_tag_cell(records, pd, t, predictor, family, options.fit); });
  return cells;
}

}  // namespace

PredictorDesign build_predictor_design(std::span<const StudyRecord> records, Predictor predictor) {
  PredictorDesign pd;
  std::vector<int> years;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (predictor_value(records[i], predictor)) {
      pd.rows.push_back(i);
      years.push_back(records[i].year);
    } else {
      ++pd.dropped;
    }
  }
  if (pd.rows.empty()) throw UndefinedError(fmt::format("no rows with predictor '{}'", to_string(predictor)));
  std::sort(years.begin(), years.end());
  years.erase(std::unique(years.begin(), years.end()), years.end());
  pd.reference_year = years.front();

  if (predictor == Predictor::w_categorical)
    pd.predictor_columns = {"w_moderately_novel", "w_highly_novel"};
  else
    pd.predictor_columns = {std::string(to_string(predictor))};

  const auto n = static_cast<Eigen::Index>(pd.rows.size());
  const auto k = static_cast<Eigen::Index>(1 + pd.predictor_columns.size() + years.size() - 1);
  auto& d = pd.design;
  d.predictors = Eigen::MatrixXd::Zero(n, k);
  d.outcome = Eigen::VectorXd::Zero(n);
  d.columns.emplace_back(kInterceptColumn);
  for (const auto& c : pd.predictor_columns) d.columns.push_back(c);
  for (std::size_t y = 1; y < years.size(); ++y) d.columns.push_back(fmt::format("year_{}", years[y]));

  const auto first_dummy = static_cast<Eigen::Index>(1 + pd.predictor_columns.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = records[pd.rows[static_cast<std::size_t>(i)]];
    d.predictors(i, 0) = 1.0;
    if (predictor == Predictor::w_categorical) {
      d.predictors(i, 1) = *r.w_category == WCategory::moderately_novel ? 1.0 : 0.0;
      d.predictors(i, 2) = *r.w_category == WCategory::highly_novel ? 1.0 : 0.0;
    } else {
      d.predictors(i, 1) = *predictor_value(r, predictor);
    }
    const auto y = std::lower_bound(years.begin(), years.end(), r.year) - years.begin();
    if (y > 0) d.predictors(i, first_dummy + y - 1) = 1.0;
  }

  for (std::size_t c = 0; c < pd.predictor_columns.size(); ++c) {
    const auto col = d.predictors.col(static_cast<Eigen::Index>(c) + 1);
    if (col.maxCoeff() == col.minCoeff())
      throw UndefinedError(fmt::format("predictor column '{}' is constant over {} rows", pd.predictor_columns[c], n));
  }
  return pd;
}

std::vector<double> dichotomize(std::span<const double> counts) {
  std::vector<double> out(counts.size());
  std::transform(counts.begin(), counts.end(), out.begin(), [](double c) { return c >= 1.0 ? 1.0 : 0.0; });
  return out;
}

std::vector<ModelCell> run_tag_models(std::span<const StudyRecord> records, Predictor predictor,
                                      const ModelOptions& options) {
  return run_per_tag(records, predictor, Family::poisson, options);
}

ModelCell run_single_model(std::span<const StudyRecord> records, std::string_view tag, Predictor predictor,
                           Family family, const ModelOptions& options) {
  const auto t = tag_index(tag);
  if (!t) throw SchemaError(fmt::format("unknown tag \"{}\"", tag));
  require_rows(usable_rows(records, predictor), options.min_rows, predictor);
  return fit_tag_cell(records, build_predictor_design(records, predictor), *t, predictor, family, options.fit);
}

std::vector<ModelCell> run_probit_robustness(std::span<const StudyRecord> records, Predictor predictor,
                                             const ModelOptions& options) {
  if (predictor == Predictor::w) predictor = Predictor::w_categorical;
  return run_per_tag(records, predictor, Family::probit, options);
}

// -- comparison group ---------------------------------------------------------

std::string to_string(const Stratum& stratum) {
  return fmt::format("({}, {})", stratum.year, to_string(stratum.doc_type));
}

SampleSpec sample_spec_of(const Corpus& corpus, const std::set<std::string>& group, std::uint64_t seed) {
  SampleSpec spec;
  spec.seed = seed;
  for (const auto& id : group) {
    const auto idx = corpus.find_paper(id);
    if (!idx) throw ValidationError(fmt::format("paper \"{}\" is not in the corpus", id));
    const auto& p = corpus.papers()[*idx];
    ++spec.strata[{p.year, p.doc_type}];
  }
  return spec;
}

std::vector<PaperRecord> eligible_pool(const Corpus& corpus, const std::set<std::string>& included, YearRange years) {
  std::set<std::string> categories;
  for (const auto& id : included)
    if (auto idx = corpus.find_paper(id))
      for (const auto& c : corpus.papers()[*idx].subject_categories) categories.insert(c);

  std::vector<PaperRecord> pool;
  for (const auto& p : corpus.papers()) {
    if (!years.contains(p.year) || included.count(p.paper_id)) continue;
    if (p.doc_type != DocType::article && p.doc_type != DocType::review) continue;
    const bool shares = std::any_of(p.subject_categories.begin(), p.subject_categories.end(),
                                    [&](const std::string& c) { return categories.count(c) > 0; });
    if (shares) pool.push_back(p);
  }
  return pool;
}

std::vector<std::string> stratified_sample(std::span<const PaperRecord> pool, const SampleSpec& spec) {
  std::map<Stratum, std::vector<std::string>> by_stratum;
  for (const auto& p : pool) by_stratum[{p.year, p.doc_type}].push_back(p.paper_id);
  for (auto& [s, ids] : by_stratum) std::sort(ids.begin(), ids.end());

  std::mt19937_64 rng(spec.seed);
  std::vector<std::string> out;
  for (const auto& [stratum, wanted] : spec.strata) {
    const auto it = by_stratum.find(stratum);
    const std::size_t have = it == by_stratum.end() ? 0 : it->second.size();
    if (have < wanted)
      throw ValidationError(fmt::format("stratum {} has {} eligible papers, {} requested", to_string(stratum), have, wanted));
    if (wanted == 0) continue;
    std::sample(it->second.begin(), it->second.end(), std::back_inserter(out), wanted, rng);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<InclusionYear> run_inclusion_models(std::span<const InclusionRow> rows, YearRange years,
                                                const ModelOptions& options) {
  std::vector<InclusionYear> out(static_cast<std::size_t>(years.end - years.start + 1));
  parallel_for(out.size(), options.threads, [&](std::size_t slot) {
    InclusionYear& iy = out[slot];
    iy.year = years.start + static_cast<int>(slot);
    ModelCell& cell = iy.model;
    cell.outcome = "included";
    cell.family = Family::logistic;
    cell.year = iy.year;

    std::vector<double> inc, u, w, k;
    for (const auto& r : rows) {
      if (r.year != iy.year) continue;
      if (!r.u || !r.w || !r.k) {
        ++iy.dropped;
        continue;
      }
      inc.push_back(r.included ? 1.0 : 0.0);
      u.push_back(*r.u);
      w.push_back(*r.w);
      k.push_back(*r.k);
    }
    iy.n = inc.size();
    cell.n = iy.n;
    cell.dropped = iy.dropped;
    if (inc.empty()) {
      cell.error = "no complete rows";
      return;
    }
    iy.key_figures = {summarize(inc, "included"), summarize(u, "u"), summarize(w, "w"), summarize(k, "k")};
    auto rho = [](const std::vector<double>& a, const std::vector<double>& b) {
      try {
        return spearman(a, b);
      } catch (const DataError&) {
        return std::numeric_limits<double>::quiet_NaN();
      }
    };
    iy.spearman = {{"u,w", rho(u, w)}, {"u,k", rho(u, k)}, {"w,k", rho(w, k)}};
    cell.percent_assigned = 100.0 * mean(inc);

    PredictorDesign pd;
    pd.predictor_columns = {"u", "w", "k"};
    const auto n = static_cast<Eigen::Index>(inc.size());
    auto& d = pd.design;
    d.columns = {std::string(kInterceptColumn), "u", "w", "k"};
    d.predictors.resize(n, 4);
    d.predictors.col(0).setOnes();
    d.predictors.col(1) = Eigen::Map<const Eigen::VectorXd>(u.data(), n);
    d.predictors.col(2) = Eigen::Map<const Eigen::VectorXd>(w.data(), n);
    d.predictors.col(3) = Eigen::Map<const Eigen::VectorXd>(k.data(), n);
    d.outcome = Eigen::Map<const Eigen::VectorXd>(inc.data(), n);
    fill_cell(
        cell, pd, d,
        [](const FitResult&, const DesignMatrix&, const ModelTerm& term) {
          return term.sd > 0.0 ? percent_change(term.coefficient, term.sd) : std::numeric_limits<double>::quiet_NaN();
        },
        options.fit);
  });
  return out;
}

// -- expectations -------------------------------------------------------------

std::string_view to_string(Sign sign) {
  switch (sign) {
    case Sign::positive: return "positive";
    case Sign::negative: return "negative";
    case Sign::either: return "either";
  }
  return "?";
}

ExpectationTable ExpectationTable::defaults() {
  ExpectationTable t;
  for (std::size_t i = 0; i < kTagCount; ++i) {
    const auto name = kTagNames[i];
    if (name == "controversial")
      t.signs[i] = Sign::either;
    else if (name == "hypothesis" || name == "new_finding" || name == "novel_drug_target" ||
             name == "technical_advance")
      t.signs[i] = Sign::positive;
    else
      t.signs[i] = Sign::negative;
  }
  return t;
}

Sign ExpectationTable::expected(std::string_view tag) const {
  const auto idx = tag_index(tag);
  if (!idx) throw SchemaError(fmt::format("unknown tag \"{}\"", tag));
  return signs[*idx];
}

Verdict evaluate_expectations(std::span<const ModelCell> cells, const ExpectationTable& expectations) {
  std::array<const ModelCell*, kTagCount> by_tag{};
  for (const auto& c : cells) {
    const auto idx = tag_index(c.outcome);
    if (!idx) throw SchemaError(fmt::format("cell outcome \"{}\" is not a tag", c.outcome));
    if (by_tag[*idx]) throw ConflictError(fmt::format("two cells for tag \"{}\"", c.outcome));
    by_tag[*idx] = &c;
  }
  Verdict v;
  if (!cells.empty()) v.predictor = cells.front().predictor;
  for (std::size_t t = 0; t < kTagCount; ++t) {
    if (!by_tag[t]) throw ValidationError(fmt::format("report has no cell for tag \"{}\"", kTagNames[t]));
    const Sign want = expectations.signs[t];
    if (want == Sign::either) continue;
    ++v.total;
    const ModelCell& cell = *by_tag[t];
    const ModelTerm* term = cell.ok() ? cell.key_term() : nullptr;
    const bool match = term && ((want == Sign::positive && term->effect > 0.0) ||
                                (want == Sign::negative && term->effect < 0.0));
    if (match)
      ++v.matched;
    else
      v.unmatched.emplace_back(kTagNames[t]);
  }
  v.convergent = v.matched == v.total;
  return v;
}

}  // namespace novelty
