#pragma once
// Naive reference implementations used only by tests. They work directly on
// string-keyed paper records and never touch the index or scoring code.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "novelty/corpus.hpp"

namespace oracle {

using novelty::PaperRecord;
using StrPair = std::pair<std::string, std::string>;

inline StrPair canon(const std::string& a, const std::string& b) { return a <= b ? StrPair{a, b} : StrPair{b, a}; }

struct NaiveYear {
  std::map<StrPair, long> pairs;
  std::map<std::string, long> marginals;
  long total = 0;
};

/// Every unordered pair of reference positions, optionally skipping
/// same-journal pairs and collapsing repeats within the paper.
inline std::vector<StrPair> paper_pairs(const PaperRecord& p, bool self_pairs = true, bool duplicates = true) {
  std::vector<StrPair> out;
  for (std::size_t a = 0; a < p.references.size(); ++a)
    for (std::size_t b = a + 1; b < p.references.size(); ++b) {
      const auto& ja = p.references[a].journal;
      const auto& jb = p.references[b].journal;
      if (!self_pairs && ja == jb) continue;
      out.push_back(canon(ja, jb));
    }
  if (!duplicates) {
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

inline NaiveYear naive_year(const std::vector<PaperRecord>& papers, int year, bool self_pairs = true,
                            bool duplicates = true) {
  NaiveYear y;
  for (const auto& p : papers) {
    if (p.year != year) continue;
    for (const auto& pr : paper_pairs(p, self_pairs, duplicates)) {
      ++y.pairs[pr];
      ++y.total;
      // "pairs where one of the references is in journal i"
      ++y.marginals[pr.first];
      if (pr.second != pr.first) ++y.marginals[pr.second];
    }
  }
  return y;
}

inline double naive_commonness(const NaiveYear& y, const std::string& i, const std::string& j) {
  auto it = y.pairs.find(canon(i, j));
  const double nij = it == y.pairs.end() ? 0.0 : static_cast<double>(it->second);
  return nij * static_cast<double>(y.total) /
         (static_cast<double>(y.marginals.at(i)) * static_cast<double>(y.marginals.at(j)));
}

inline std::optional<double> naive_u(const PaperRecord& paper, const std::vector<PaperRecord>& papers) {
  if (paper.references.size() < 2) return std::nullopt;
  const auto y = naive_year(papers, paper.year);
  std::vector<double> series;
  for (const auto& pr : paper_pairs(paper)) series.push_back(naive_commonness(y, pr.first, pr.second));
  std::sort(series.begin(), series.end());
  const auto rank = static_cast<std::size_t>(std::ceil(static_cast<double>(series.size()) / 10.0));
  return -std::log(series[std::max<std::size_t>(rank, 1) - 1]);
}

inline bool naive_cocited(const std::vector<PaperRecord>& papers, const std::string& a, const std::string& b,
                          int from, int to) {
  for (const auto& p : papers) {
    if (p.year < from || p.year > to) continue;
    bool has_a = false, has_b = false;
    for (const auto& r : p.references) {
      has_a |= r.journal == a;
      has_b |= r.journal == b;
    }
    if (has_a && has_b) return true;
  }
  return false;
}

struct NaiveW {
  double value = 0.0;
  std::size_t n_new_pairs = 0;
  std::vector<double> cosines;
};

/// W with a prior window of 3 and a following window of 3 years.
inline std::optional<NaiveW> naive_w(const PaperRecord& paper, const std::vector<PaperRecord>& papers,
                                     int corpus_start, int corpus_end) {
  const int t = paper.year;
  if (paper.references.size() < 2 || t + 3 > corpus_end) return std::nullopt;
  const int from = std::max(t - 3, corpus_start);
  const int to = t - 1;
  if (from > to) return std::nullopt;

  std::map<std::string, long> cites;
  for (const auto& p : papers)
    if (p.year >= from && p.year <= to)
      for (const auto& r : p.references) ++cites[r.journal];
  if (cites.empty()) return std::nullopt;
  std::vector<double> counts;
  for (const auto& [j, c] : cites) counts.push_back(static_cast<double>(c));
  std::sort(counts.begin(), counts.end());
  const std::size_t m = counts.size();
  const double median = m % 2 ? counts[m / 2] : 0.5 * (counts[m / 2 - 1] + counts[m / 2]);
  std::set<std::string> retained;
  for (const auto& [j, c] : cites)
    if (static_cast<double>(c) >= median) retained.insert(j);

  // profile[a][b]: co-cited reference pairs over the window, a != b, both retained
  std::map<std::string, std::map<std::string, double>> profile;
  for (const auto& p : papers) {
    if (p.year < from || p.year > to) continue;
    for (const auto& [a, b] : paper_pairs(p)) {
      if (a == b || !retained.count(a) || !retained.count(b)) continue;
      profile[a][b] += 1.0;
      profile[b][a] += 1.0;
    }
  }
  auto cosine = [&](const std::string& a, const std::string& b) {
    const auto& pa = profile[a];
    const auto& pb = profile[b];
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [k, v] : pa) {
      na += v * v;
      auto it = pb.find(k);
      if (it != pb.end()) dot += v * it->second;
    }
    for (const auto& [k, v] : pb) nb += v * v;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::min(1.0, dot / std::sqrt(na * nb));
  };

  std::set<std::string> journals;
  for (const auto& r : paper.references)
    if (retained.count(r.journal)) journals.insert(r.journal);
  NaiveW w;
  for (auto a = journals.begin(); a != journals.end(); ++a)
    for (auto b = std::next(a); b != journals.end(); ++b) {
      if (naive_cocited(papers, *a, *b, corpus_start - 1000, t - 1)) continue;
      if (!naive_cocited(papers, *a, *b, t + 1, t + 3)) continue;
      ++w.n_new_pairs;
      const double c = cosine(*a, *b);
      w.cosines.push_back(c);
      w.value += 1.0 - c;
    }
  return w;
}

inline std::optional<double> naive_k(const PaperRecord& paper, const std::vector<PaperRecord>& papers) {
  if (paper.keywords.empty() || paper.subject_categories.empty()) return std::nullopt;
  double best = 0.0;
  for (const auto& c : paper.subject_categories) {
    std::size_t fresh = 0;
    for (const auto& kw : paper.keywords) {
      bool seen = false;
      for (const auto& p : papers) {
        if (p.year >= paper.year) continue;
        if (std::find(p.subject_categories.begin(), p.subject_categories.end(), c) == p.subject_categories.end())
          continue;
        if (std::find(p.keywords.begin(), p.keywords.end(), kw) != p.keywords.end()) seen = true;
      }
      if (!seen) ++fresh;
    }
    best = std::max(best, static_cast<double>(fresh) / static_cast<double>(paper.keywords.size()));
  }
  return best;
}

/// Small random corpus: <= max_papers papers, <= max_journals journals,
/// years [2000, 2000 + n_years).
inline std::vector<PaperRecord> random_papers(std::uint64_t seed, int max_papers = 50, int max_journals = 10,
                                              int n_years = 8) {
  std::mt19937_64 rng(seed);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int n_papers = uni(5, max_papers);
  const int n_journals = uni(2, max_journals);
  std::vector<PaperRecord> papers;
  for (int i = 0; i < n_papers; ++i) {
    PaperRecord p;
    p.paper_id = "P" + std::to_string(i);
    p.year = 2000 + uni(0, n_years - 1);
    p.subject_categories.push_back("C" + std::to_string(uni(0, 2)));
    if (uni(0, 3) == 0) p.subject_categories.push_back("C" + std::to_string(uni(0, 2)));
    std::sort(p.subject_categories.begin(), p.subject_categories.end());
    p.subject_categories.erase(std::unique(p.subject_categories.begin(), p.subject_categories.end()),
                               p.subject_categories.end());
    const int n_kw = uni(0, 4);
    for (int k = 0; k < n_kw; ++k) p.keywords.push_back("kw" + std::to_string(uni(0, 9)));
    std::sort(p.keywords.begin(), p.keywords.end());
    p.keywords.erase(std::unique(p.keywords.begin(), p.keywords.end()), p.keywords.end());
    const int n_refs = uni(0, 7);
    for (int r = 0; r < n_refs; ++r)
      p.references.push_back({"J" + std::to_string(uni(0, n_journals - 1)), 1990 + uni(0, 15)});
    papers.push_back(std::move(p));
  }
  return papers;
}

}  // namespace oracle
