#include "novelty/cocite_index.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "novelty/digest.hpp"
#include "novelty/errors.hpp"
#include "novelty/parallel.hpp"
#include "novelty/stats.hpp"

namespace novelty {

namespace {

constexpr std::array<char, 4> kMagic = {'N', 'V', 'I', 'X'};
constexpr std::uint32_t kFormatVersion = 1;

void count_paper(YearPairCounts& counts, std::span<const JournalId> refs, const IndexOptions& options) {
  for_each_reference_pair(refs, options, [&](JournalPair pair) {
    ++counts.pair_counts[pair.key()];
    ++counts.total;
  });
}

void derive_marginals(YearPairCounts& counts, std::size_t journals) {
  counts.journal_marginals.assign(journals, 0);
  for (const auto& [key, n] : counts.pair_counts) {
    auto pair = JournalPair::from_key(key);
    counts.journal_marginals[pair.lo] += n;
    if (pair.hi != pair.lo) counts.journal_marginals[pair.hi] += n;
  }
}

double min_positive(const YearPairCounts& counts) {
  double best = 0.0;
  for (const auto& [key, n] : counts.pair_counts) {
    if (n == 0) continue;
    auto pair = JournalPair::from_key(key);
    double c = commonness(counts, pair.lo, pair.hi);
    if (c > 0.0 && (best == 0.0 || c < best)) best = c;
  }
  return best;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> sorted_pairs(const YearPairCounts& counts) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out(counts.pair_counts.begin(),
                                                           counts.pair_counts.end());
  std::sort(out.begin(), out.end());
  return out;
}

// -- little-endian binary helpers ---------------------------------------------

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((u >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw DataError("index snapshot is truncated");
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(bytes[i]) << (8 * i);
  return static_cast<T>(u);
}

std::string get_string(std::istream& in) {
  auto n = get<std::uint32_t>(in);
  if (n > (1u << 24)) throw DataError("index snapshot has an oversized string");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw DataError("index snapshot is truncated");
  return s;
}

}  // namespace

YearPairCounts build_year_pair_counts(const Corpus& corpus, int year, const IndexOptions& options) {
  if (!corpus.years().contains(year))
    throw UndefinedError(fmt::format("year {} is outside the corpus range {}:{}", year,
                                     corpus.years().start, corpus.years().end));
  YearPairCounts counts;
  counts.year = year;
  const auto& papers = corpus.papers();
  for (std::size_t p = 0; p < papers.size(); ++p)
    if (papers[p].year == year) count_paper(counts, corpus.ref_journals(p), options);
  derive_marginals(counts, corpus.journal_count());
  return counts;
}

double commonness(const YearPairCounts& counts, JournalId i, JournalId j) {
  const auto ni = counts.marginal(i);
  const auto nj = counts.marginal(j);
  if (ni == 0 || nj == 0)
    throw UndefinedError(fmt::format("commonness undefined in year {}: journal {} has no co-citations",
                                     counts.year, ni == 0 ? i : j));
  const auto nij = counts.count(JournalPair::of(i, j));
  return static_cast<double>(nij) * static_cast<double>(counts.total) /
         (static_cast<double>(ni) * static_cast<double>(nj));
}

// -- CoCitationIndex ----------------------------------------------------------

CoCitationIndex CoCitationIndex::build(const Corpus& corpus, const IndexOptions& options,
                                       unsigned threads) {
  CoCitationIndex index;
  index.years_ = corpus.years();
  index.options_ = options;
  index.prior_window_ = corpus.config().w_prior_window;
  index.following_window_ = corpus.config().w_following_window;
  index.corpus_digest_ = sha256_hex(serialize_corpus(corpus));
  index.journal_names_.reserve(corpus.journal_count());
  for (JournalId j = 0; j < corpus.journal_count(); ++j) index.journal_names_.push_back(corpus.journal_name(j));

  const auto n_years = static_cast<std::size_t>(index.years_.end - index.years_.start + 1);
  std::vector<std::vector<std::size_t>> by_year(n_years);
  const auto& papers = corpus.papers();
  for (std::size_t p = 0; p < papers.size(); ++p)
    by_year[static_cast<std::size_t>(papers[p].year - index.years_.start)].push_back(p);

  index.counts_.resize(n_years);
  index.citations_.resize(n_years);
  parallel_for(n_years, threads, [&](std::size_t y) {
    auto& counts = index.counts_[y];
    auto& cites = index.citations_[y];
    counts.year = index.years_.start + static_cast<int>(y);
    cites.assign(corpus.journal_count(), 0);
    for (std::size_t p : by_year[y]) {
      auto refs = corpus.ref_journals(p);
      count_paper(counts, refs, options);
      for (JournalId j : refs) ++cites[j];
    }
  });
  index.finalize();
  return index;
}

void CoCitationIndex::finalize() {
  min_positive_.clear();
  first_cocited_.clear();
  for (auto& counts : counts_) {
    derive_marginals(counts, journal_names_.size());
    min_positive_.push_back(min_positive(counts));
    for (const auto& [key, n] : counts.pair_counts) {
      if (n == 0) continue;
      auto [it, inserted] = first_cocited_.emplace(key, counts.year);
      if (!inserted) it->second = std::min(it->second, counts.year);
    }
  }
}

const YearPairCounts& CoCitationIndex::year_counts(int year) const {
  if (!years_.contains(year))
    throw UndefinedError(fmt::format("year {} is outside the indexed range {}:{}", year, years_.start, years_.end));
  return counts_[static_cast<std::size_t>(year - years_.start)];
}

std::span<const std::uint64_t> CoCitationIndex::journal_citations(int year) const {
  if (!years_.contains(year))
    throw UndefinedError(fmt::format("year {} is outside the indexed range {}:{}", year, years_.start, years_.end));
  return citations_[static_cast<std::size_t>(year - years_.start)];
}

double CoCitationIndex::min_positive_commonness(int year) const {
  year_counts(year);
  return min_positive_[static_cast<std::size_t>(year - years_.start)];
}

bool CoCitationIndex::cocited_before(JournalPair pair, int before) const {
  auto it = first_cocited_.find(pair.key());
  return it != first_cocited_.end() && it->second <= before - 1;
}

bool CoCitationIndex::cocited_in(JournalPair pair, YearRange window) const {
  const int lo = std::max(window.start, years_.start);
  const int hi = std::min(window.end, years_.end);
  for (int y = lo; y <= hi; ++y)
    if (counts_[static_cast<std::size_t>(y - years_.start)].count(pair) > 0) return true;
  return false;
}

bool CoCitationIndex::operator==(const CoCitationIndex& other) const {
  if (years_ != other.years_ || !(options_ == other.options_) || prior_window_ != other.prior_window_ ||
      following_window_ != other.following_window_ || corpus_digest_ != other.corpus_digest_ ||
      journal_names_ != other.journal_names_ || citations_ != other.citations_)
    return false;
  for (std::size_t y = 0; y < counts_.size(); ++y)
    if (counts_[y].pair_counts != other.counts_[y].pair_counts || counts_[y].total != other.counts_[y].total)
      return false;
  return true;
}

void CoCitationIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write index snapshot '{}'", path.string()));
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint8_t>(out, options_.count_self_pairs ? 1 : 0);
  put<std::uint8_t>(out, options_.count_duplicate_pairs ? 1 : 0);
  put<std::int32_t>(out, prior_window_);
  put<std::int32_t>(out, following_window_);
  put_string(out, corpus_digest_);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(journal_names_.size()));
  for (const auto& name : journal_names_) put_string(out, name);

  // Year manifest, then one block per year.
  put<std::int32_t>(out, years_.start);
  put<std::int32_t>(out, years_.end);
  for (const auto& counts : counts_) {
    put<std::int32_t>(out, counts.year);
    put<std::uint64_t>(out, counts.total);
    put<std::uint64_t>(out, counts.pair_counts.size());
  }
  for (std::size_t y = 0; y < counts_.size(); ++y) {
    for (const auto& [key, n] : sorted_pairs(counts_[y])) {
      put<std::uint64_t>(out, key);
      put<std::uint64_t>(out, n);
    }
    for (auto c : citations_[y]) put<std::uint64_t>(out, c);
  }
  if (!out) throw DataError(fmt::format("failed writing index snapshot '{}'", path.string()));
}

CoCitationIndex CoCitationIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot read index snapshot '{}'", path.string()));
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw DataError(fmt::format("'{}' is not an index snapshot", path.string()));
  auto version = get<std::uint32_t>(in);
  if (version != kFormatVersion)
    throw DataError(fmt::format("unsupported index snapshot version {} (expected {})", version, kFormatVersion));

  CoCitationIndex index;
  index.options_.count_self_pairs = get<std::uint8_t>(in) != 0;
  index.options_.count_duplicate_pairs = get<std::uint8_t>(in) != 0;
  index.prior_window_ = get<std::int32_t>(in);
  index.following_window_ = get<std::int32_t>(in);
  index.corpus_digest_ = get_string(in);
  auto n_journals = get<std::uint32_t>(in);
  index.journal_names_.reserve(n_journals);
  for (std::uint32_t j = 0; j < n_journals; ++j) index.journal_names_.push_back(get_string(in));

  index.years_.start = get<std::int32_t>(in);
  index.years_.end = get<std::int32_t>(in);
  if (index.years_.start > index.years_.end) throw DataError("index snapshot has an invalid year range");
  const auto n_years = static_cast<std::size_t>(index.years_.end - index.years_.start + 1);
  std::vector<std::uint64_t> n_pairs(n_years);
  index.counts_.resize(n_years);
  index.citations_.resize(n_years);
  for (std::size_t y = 0; y < n_years; ++y) {
    index.counts_[y].year = get<std::int32_t>(in);
    if (index.counts_[y].year != index.years_.start + static_cast<int>(y))
      throw DataError("index snapshot year manifest is out of order");
    index.counts_[y].total = get<std::uint64_t>(in);
    n_pairs[y] = get<std::uint64_t>(in);
  }
  for (std::size_t y = 0; y < n_years; ++y) {
    std::uint64_t total = 0;
    for (std::uint64_t k = 0; k < n_pairs[y]; ++k) {
      auto key = get<std::uint64_t>(in);
      auto n = get<std::uint64_t>(in);
      auto pair = JournalPair::from_key(key);
      if (pair.lo > pair.hi || pair.hi >= n_journals) throw DataError("index snapshot has an invalid pair");
      index.counts_[y].pair_counts.emplace(key, n);
      total += n;
    }
    if (total != index.counts_[y].total) throw DataError("index snapshot pair counts disagree with the manifest");
    index.citations_[y].resize(n_journals);
    for (auto& c : index.citations_[y]) c = get<std::uint64_t>(in);
  }
  index.finalize();
  return index;
}

void CoCitationIndex::dump_csv(std::ostream& out) const {
  out << "year,journal_lo,journal_hi,count\n";
  for (const auto& counts : counts_) {
    std::vector<std::tuple<std::string_view, std::string_view, std::uint64_t>> rows;
    rows.reserve(counts.pair_counts.size());
    for (const auto& [key, n] : counts.pair_counts) {
      auto pair = JournalPair::from_key(key);
      rows.emplace_back(journal_names_[pair.lo], journal_names_[pair.hi], n);
    }
    std::sort(rows.begin(), rows.end());
    for (const auto& [lo, hi, n] : rows) out << counts.year << ',' << lo << ',' << hi << ',' << n << '\n';
  }
}

// -- window queries -----------------------------------------------------------

JournalActivity journal_activity_filter(const CoCitationIndex& index, int focal_year) {
  JournalActivity activity;
  const YearRange requested{focal_year - index.prior_window(), focal_year - 1};
  activity.window = {std::max(requested.start, index.years().start), std::min(requested.end, index.years().end)};
  activity.truncated = requested.start < index.years().start;
  if (activity.window.start > activity.window.end)
    throw UndefinedError(fmt::format("prior window {}:{} lies outside the corpus", requested.start, requested.end));

  activity.citation_counts.assign(index.journal_count(), 0);
  for (int y = activity.window.start; y <= activity.window.end; ++y) {
    auto cites = index.journal_citations(y);
    for (std::size_t j = 0; j < cites.size(); ++j) activity.citation_counts[j] += cites[j];
  }

  std::vector<double> cited;
  for (auto c : activity.citation_counts)
    if (c > 0) cited.push_back(static_cast<double>(c));
  if (cited.empty())
    throw UndefinedError(fmt::format("no citations in window {}:{}", activity.window.start, activity.window.end));
  std::sort(cited.begin(), cited.end());
  activity.median = median_sorted(cited);

  activity.retained.assign(index.journal_count(), false);
  for (std::size_t j = 0; j < activity.citation_counts.size(); ++j)
    activity.retained[j] = activity.citation_counts[j] > 0 &&
                           static_cast<double>(activity.citation_counts[j]) >= activity.median;
  return activity;
}

CoCitationProfile build_cocitation_profiles(const CoCitationIndex& index, int focal_year,
                                            const JournalActivity& activity) {
  const YearRange requested{focal_year - index.prior_window(), focal_year - 1};
  CoCitationProfile profile;
  profile.window = {std::max(requested.start, index.years().start), std::min(requested.end, index.years().end)};
  if (profile.window.start > profile.window.end)
    throw UndefinedError(fmt::format("prior window {}:{} lies outside the corpus", requested.start, requested.end));

  std::vector<Eigen::Triplet<double>> triplets;
  for (int y = profile.window.start; y <= profile.window.end; ++y) {
    for (const auto& [key, n] : index.year_counts(y).pair_counts) {
      auto pair = JournalPair::from_key(key);
      if (pair.lo == pair.hi || n == 0) continue;
      if (!activity.is_retained(pair.lo) || !activity.is_retained(pair.hi)) continue;
      triplets.emplace_back(pair.lo, pair.hi, static_cast<double>(n));
      triplets.emplace_back(pair.hi, pair.lo, static_cast<double>(n));
    }
  }
  const auto n = static_cast<Eigen::Index>(index.journal_count());
  profile.vectors.resize(n, n);
  profile.vectors.setFromTriplets(triplets.begin(), triplets.end());
  return profile;
}

}  // namespace novelty
