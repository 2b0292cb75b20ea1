#include "novelty/novelty_scores.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "novelty/csv.hpp"
#include "novelty/errors.hpp"
#include "novelty/parallel.hpp"
#include "novelty/stats.hpp"

namespace novelty {

// -- U ------------------------------------------------------------------------

NoveltyU u_from_series(std::vector<double> series, double positive_floor) {
  if (series.empty()) throw UndefinedError("score U needs at least one reference pair");
  std::sort(series.begin(), series.end());
  NoveltyU u;
  u.n_pairs = series.size();
  double p10 = nearest_rank_percentile(series, 10);
  if (p10 <= 0.0) {
    if (!(positive_floor > 0.0))
      throw UndefinedError("score U undefined: 10th-percentile commonness is 0 and no positive floor exists");
    p10 = positive_floor;
    u.zero_floor_applied = true;
  }
  u.value = -std::log(p10);
  return u;
}

Scored<NoveltyU> score_u(std::span<const JournalId> refs, const YearPairCounts& counts,
                         const IndexOptions& options, double positive_floor) {
  if (refs.size() < 2) return Scored<NoveltyU>::missing("fewer than two references");
  std::vector<double> series;
  series.reserve(refs.size() * (refs.size() - 1) / 2);
  for_each_reference_pair(refs, options,
                          [&](JournalPair pair) { series.push_back(commonness(counts, pair.lo, pair.hi)); });
  if (series.empty()) return Scored<NoveltyU>::missing("no scoreable reference pairs");
  return {u_from_series(std::move(series), positive_floor), {}};
}

// -- W ------------------------------------------------------------------------

std::string_view to_string(WCategory category) {
  switch (category) {
    case WCategory::non_novel: return "non_novel";
    case WCategory::moderately_novel: return "moderately_novel";
    case WCategory::highly_novel: return "highly_novel";
  }
  return "non_novel";
}

std::optional<WCategory> parse_w_category(std::string_view text) {
  for (auto c : {WCategory::non_novel, WCategory::moderately_novel, WCategory::highly_novel})
    if (to_string(c) == text) return c;
  return std::nullopt;
}

WContext make_w_context(const CoCitationIndex& index, int focal_year) {
  WContext ctx;
  ctx.focal_year = focal_year;
  if (focal_year + index.following_window() > index.years().end) {
    ctx.missing_reason = "following window extends beyond the corpus";
    return ctx;
  }
  try {
    ctx.activity = journal_activity_filter(index, focal_year);
    ctx.profiles = build_cocitation_profiles(index, focal_year, *ctx.activity);
  } catch (const UndefinedError& e) {
    ctx.activity.reset();
    ctx.missing_reason = e.what();
  }
  return ctx;
}

Scored<NoveltyW> score_w(std::span<const JournalId> refs, int year, const CoCitationIndex& index,
                         const WContext& context) {
  if (refs.size() < 2) return Scored<NoveltyW>::missing("fewer than two references");
  if (context.focal_year != year) throw std::logic_error("score_w: context built for another year");
  if (!context.activity) return Scored<NoveltyW>::missing(context.missing_reason);
  const auto& activity = *context.activity;

  std::vector<JournalId> journals;
  for (JournalId j : refs)
    if (activity.is_retained(j)) journals.push_back(j);
  std::sort(journals.begin(), journals.end());
  journals.erase(std::unique(journals.begin(), journals.end()), journals.end());

  const YearRange following{year + 1, year + index.following_window()};
  NoveltyW w;
  w.prior_window_truncated = activity.truncated;
  for (std::size_t a = 0; a < journals.size(); ++a) {
    for (std::size_t b = a + 1; b < journals.size(); ++b) {
      const auto pair = JournalPair::of(journals[a], journals[b]);
      if (index.cocited_before(pair, year) || !index.cocited_in(pair, following)) continue;
      ++w.n_new_pairs;
      const auto pa = context.profiles.profile(pair.lo);
      const auto pb = context.profiles.profile(pair.hi);
      if (pa.nonZeros() == 0 || pb.nonZeros() == 0) ++w.undefined_profile_pairs;
      w.value += 1.0 - cosine_similarity(pa, pb);
    }
  }
  w.category = w.n_new_pairs == 0 ? WCategory::non_novel : WCategory::moderately_novel;
  return {w, {}};
}

double categorize_w(std::span<NoveltyW> scores) {
  if (scores.empty()) return 0.0;
  std::vector<double> values;
  values.reserve(scores.size());
  for (const auto& w : scores) values.push_back(w.value);
  std::sort(values.begin(), values.end());
  const double cutoff = nearest_rank_percentile(values, 99);
  for (auto& w : scores) {
    if (w.n_new_pairs == 0)
      w.category = WCategory::non_novel;
    else if (w.value > cutoff)
      w.category = WCategory::highly_novel;
    else
      w.category = WCategory::moderately_novel;
  }
  return cutoff;
}

// -- K ------------------------------------------------------------------------

namespace {
std::string history_key(const std::string& category, const std::string& keyword) {
  std::string key;
  key.reserve(category.size() + keyword.size() + 1);
  key += category;
  key += '\x1f';
  key += keyword;
  return key;
}
}  // namespace

void KeywordHistory::record(const std::string& category, const std::string& keyword, int year) {
  auto [it, inserted] = entries_.try_emplace(history_key(category, keyword));
  if (inserted || year < it->second.first_year) it->second.first_year = year;
  ++it->second.per_year[year];
}

KeywordHistory KeywordHistory::build(const Corpus& corpus) {
  KeywordHistory history;
  for (const auto& paper : corpus.papers())
    for (const auto& category : paper.subject_categories)
      for (const auto& keyword : paper.keywords) history.record(category, keyword, paper.year);
  return history;
}

std::optional<int> KeywordHistory::first_year(const std::string& category, const std::string& keyword) const {
  auto it = entries_.find(history_key(category, keyword));
  if (it == entries_.end()) return std::nullopt;
  return it->second.first_year;
}

std::size_t KeywordHistory::uses(const std::string& category, const std::string& keyword, int year) const {
  auto it = entries_.find(history_key(category, keyword));
  if (it == entries_.end()) return 0;
  auto y = it->second.per_year.find(year);
  return y == it->second.per_year.end() ? 0 : y->second;
}

Scored<NoveltyK> score_k(const PaperRecord& paper, const KeywordHistory& history, KeywordNewness newness) {
  if (paper.keywords.empty()) return Scored<NoveltyK>::missing("no keywords");
  if (paper.subject_categories.empty()) return Scored<NoveltyK>::missing("no subject categories");
  NoveltyK k;
  k.k_total = paper.keywords.size();
  for (const auto& category : paper.subject_categories) {
    std::size_t fresh = 0;
    for (const auto& keyword : paper.keywords) {
      bool is_new = false;
      if (newness == KeywordNewness::all_prior_years) {
        auto first = history.first_year(category, keyword);
        is_new = !first || *first >= paper.year;
      } else {
        is_new = history.uses(category, keyword, paper.year) <= 1;
      }
      if (is_new) ++fresh;
    }
    const double ratio = static_cast<double>(fresh) / static_cast<double>(k.k_total);
    k.per_category.emplace(category, ratio);
    k.k_new_max = std::max(k.k_new_max, fresh);
    k.value = std::max(k.value, ratio);
  }
  return {k, {}};
}

// -- batch --------------------------------------------------------------------

double categorize_scores(std::vector<PaperScores>& scores) {
  std::vector<NoveltyW> ws;
  for (const auto& s : scores)
    if (s.w) ws.push_back(*s.w);
  const double cutoff = categorize_w(ws);
  std::size_t i = 0;
  for (auto& s : scores)
    if (s.w) s.w.score->category = ws[i++].category;
  return cutoff;
}

std::vector<PaperScores> score_corpus(const Corpus& corpus, const CoCitationIndex& index, YearRange years,
                                      const ScoreOptions& options) {
  std::vector<std::size_t> selected;
  const auto& papers = corpus.papers();
  for (std::size_t p = 0; p < papers.size(); ++p)
    if (years.contains(papers[p].year)) selected.push_back(p);
  std::sort(selected.begin(), selected.end(),
            [&](std::size_t a, std::size_t b) { return papers[a].paper_id < papers[b].paper_id; });

  std::set<int> focal_years;
  for (auto p : selected) focal_years.insert(papers[p].year);
  std::vector<int> year_list(focal_years.begin(), focal_years.end());
  std::vector<WContext> contexts(year_list.size());
  parallel_for(year_list.size(), options.threads,
               [&](std::size_t i) { contexts[i] = make_w_context(index, year_list[i]); });
  auto context_for = [&](int year) -> const WContext& {
    return contexts[static_cast<std::size_t>(std::lower_bound(year_list.begin(), year_list.end(), year) -
                                             year_list.begin())];
  };

  const auto history = KeywordHistory::build(corpus);
  std::vector<PaperScores> out(selected.size());
  parallel_for(selected.size(), options.threads, [&](std::size_t i) {
    const auto p = selected[i];
    const auto& paper = papers[p];
    auto& s = out[i];
    s.paper_id = paper.paper_id;
    s.year = paper.year;
    s.doc_type = paper.doc_type;
    const auto refs = corpus.ref_journals(p);
    s.u = score_u(refs, index.year_counts(paper.year), index.options(),
                  index.min_positive_commonness(paper.year));
    s.w = score_w(refs, paper.year, index, context_for(paper.year));
    s.k = score_k(paper, history, options.keyword_newness);
  });
  categorize_scores(out);
  return out;
}

void write_scores_csv(std::ostream& out, std::span<const PaperScores> scores) {
  out << "paper_id,year,u,u_flag,n_pairs,w,w_category,n_new_pairs,k\n";
  for (const auto& s : scores) {
    out << csv::field(s.paper_id) << ',' << s.year << ',';
    if (s.u)
      out << csv::number(s.u->value) << ',' << (s.u->zero_floor_applied ? "zero_floor" : "ok") << ','
          << s.u->n_pairs;
    else
      out << ",,";
    out << ',';
    if (s.w)
      out << csv::number(s.w->value) << ',' << to_string(s.w->category) << ',' << s.w->n_new_pairs;
    else
      out << ",,";
    out << ',';
    if (s.k) out << csv::number(s.k->value);
    out << '\n';
  }
}

std::vector<PaperScores> read_scores_csv(std::istream& in) {
  std::vector<PaperScores> out;
  std::string line;
  std::size_t n = 0;
  if (!std::getline(in, line)) throw DataError("score file is empty");
  ++n;
  if (line.rfind("paper_id,year,u,u_flag,n_pairs,w,w_category,n_new_pairs,k", 0) != 0)
    throw ParseError(n, "unexpected score file header");
  auto to_double = [&](const std::string& s) {
    try {
      return std::stod(s);
    } catch (const std::logic_error&) {
      throw ParseError(n, fmt::format("'{}' is not a number", s));
    }
  };
  auto to_size = [&](const std::string& s) { return static_cast<std::size_t>(to_double(s)); };
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto f = csv::split_line(line);
    if (f.size() != 9) throw ParseError(n, fmt::format("expected 9 fields, got {}", f.size()));
    PaperScores s;
    s.paper_id = f[0];
    s.year = static_cast<int>(to_double(f[1]));
    if (!f[2].empty())
      s.u.score = NoveltyU{to_double(f[2]), to_size(f[4]), f[3] == "zero_floor"};
    else
      s.u.missing_reason = "missing";
    if (!f[5].empty()) {
      auto cat = parse_w_category(f[6]);
      if (!cat) throw ParseError(n, fmt::format("unknown W category '{}'", f[6]));
      s.w.score = NoveltyW{to_double(f[5]), to_size(f[7]), *cat, 0, false};
    } else {
      s.w.missing_reason = "missing";
    }
    if (!f[8].empty()) {
      NoveltyK k;
      k.value = to_double(f[8]);
      s.k.score = k;
    } else {
      s.k.missing_reason = "missing";
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace novelty
