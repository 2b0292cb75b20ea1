#include "novelty/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "novelty/errors.hpp"

namespace novelty {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

int require_int(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, fmt::format("missing field '{}'", key));
  if (!it->is_number_integer())
    throw ParseError(line, fmt::format("field '{}' must be an integer", key));
  return it->get<int>();
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, fmt::format("missing field '{}'", key));
  if (!it->is_string()) throw ParseError(line, fmt::format("field '{}' must be a string", key));
  return it->get<std::string>();
}

std::vector<std::string> string_array(const json& obj, const char* key, std::size_t line) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw ParseError(line, fmt::format("field '{}' must be an array", key));
  for (const auto& v : *it) {
    if (!v.is_string())
      throw ParseError(line, fmt::format("field '{}' must contain strings", key));
    out.push_back(v.get<std::string>());
  }
  return out;
}

json parse_line(const std::string& text, std::size_t line) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line, std::string("malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(line, "record must be a JSON object");
  return obj;
}

template <typename T>
void sort_unique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

std::string_view to_string(DocType type) {
  switch (type) {
    case DocType::article: return "article";
    case DocType::review: return "review";
    case DocType::other: return "other";
  }
  return "other";
}

DocType parse_doc_type(std::string_view text) {
  std::string lower = trim(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "article") return DocType::article;
  if (lower == "review") return DocType::review;
  return DocType::other;
}

YearRange parse_year_range(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw ValidationError(fmt::format("year range '{}' must be START:END", text));
  try {
    std::size_t used = 0;
    std::string a(text.substr(0, colon));
    std::string b(text.substr(colon + 1));
    YearRange r{std::stoi(a, &used), 0};
    if (used != a.size()) throw std::invalid_argument(a);
    r.end = std::stoi(b, &used);
    if (used != b.size()) throw std::invalid_argument(b);
    if (r.start > r.end) throw ValidationError(fmt::format("year range '{}' has START > END", text));
    return r;
  } catch (const std::logic_error&) {
    throw ValidationError(fmt::format("year range '{}' must be START:END", text));
  }
}

void CorpusConfig::validate() const {
  if (year_range && year_range->start > year_range->end)
    throw ValidationError("corpus year range has start > end");
  if (w_prior_window < 1 || w_following_window < 1)
    throw ValidationError("score W windows must be at least one year");
}

std::string IngestReport::to_text() const {
  return fmt::format(
      "records read: {}\n"
      "papers retained: {}\n"
      "papers dropped (outside year range): {}\n"
      "references retained: {}\n"
      "references dropped (published before minimum year): {}\n"
      "references dropped (missing journal): {}\n",
      records, papers_retained, papers_out_of_range, references_retained,
      references_before_min_year, references_missing_journal);
}

std::string normalize_keyword(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

Corpus Corpus::build(std::vector<PaperRecord> papers, const CorpusConfig& config,
                     IngestReport* report) {
  config.validate();
  IngestReport local;
  IngestReport& rep = report ? *report : local;
  if (rep.records == 0) rep.records = papers.size();

  Corpus corpus;
  corpus.config_ = config;

  std::set<std::string> journals;
  for (auto& paper : papers) {
    if (paper.paper_id.empty()) throw ValidationError("paper with empty paper_id");
    if (config.year_range && !config.year_range->contains(paper.year)) {
      ++rep.papers_out_of_range;
      continue;
    }
    if (corpus.paper_index_.contains(paper.paper_id))
      throw ConflictError(fmt::format("duplicate paper_id \"{}\"", paper.paper_id));

    std::vector<std::string> keywords;
    for (const auto& kw : paper.keywords) {
      auto norm = normalize_keyword(kw);
      if (!norm.empty()) keywords.push_back(std::move(norm));
    }
    sort_unique(keywords);
    paper.keywords = std::move(keywords);

    std::vector<std::string> categories;
    for (const auto& c : paper.subject_categories) {
      auto t = trim(c);
      if (!t.empty()) categories.push_back(std::move(t));
    }
    sort_unique(categories);
    paper.subject_categories = std::move(categories);

    std::vector<RefRecord> refs;
    refs.reserve(paper.references.size());
    for (auto& ref : paper.references) {
      if (ref.journal.empty()) {
        ++rep.references_missing_journal;
      } else if (ref.pub_year < config.min_ref_year) {
        ++rep.references_before_min_year;
      } else {
        journals.insert(ref.journal);
        refs.push_back(std::move(ref));
      }
    }
    rep.references_retained += refs.size();
    paper.references = std::move(refs);

    corpus.paper_index_.emplace(paper.paper_id, corpus.papers_.size());
    corpus.papers_.push_back(std::move(paper));
  }
  if (corpus.papers_.empty()) throw ValidationError("corpus contains no papers");
  rep.papers_retained = corpus.papers_.size();

  if (config.year_range) {
    corpus.years_ = *config.year_range;
  } else {
    auto [lo, hi] = std::minmax_element(
        corpus.papers_.begin(), corpus.papers_.end(),
        [](const PaperRecord& a, const PaperRecord& b) { return a.year < b.year; });
    corpus.years_ = {lo->year, hi->year};
  }

  corpus.journal_names_.assign(journals.begin(), journals.end());
  for (JournalId id = 0; id < corpus.journal_names_.size(); ++id)
    corpus.journal_ids_.emplace(corpus.journal_names_[id], id);
  corpus.ref_journals_.reserve(corpus.papers_.size());
  for (const auto& paper : corpus.papers_) {
    std::vector<JournalId> ids;
    ids.reserve(paper.references.size());
    for (const auto& ref : paper.references) ids.push_back(corpus.journal_ids_.at(ref.journal));
    corpus.ref_journals_.push_back(std::move(ids));
  }
  return corpus;
}

std::optional<JournalId> Corpus::find_journal(std::string_view name) const {
  auto it = journal_ids_.find(std::string(name));
  if (it == journal_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Corpus::find_paper(std::string_view paper_id) const {
  auto it = paper_index_.find(std::string(paper_id));
  if (it == paper_index_.end()) return std::nullopt;
  return it->second;
}

Corpus parse_corpus(std::istream& in, const CorpusConfig& config, IngestReport* report) {
  IngestReport local;
  IngestReport& rep = report ? *report : local;
  rep = IngestReport{};

  std::vector<PaperRecord> papers;
  std::map<std::string, std::size_t> first_line;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) continue;
    json obj = parse_line(text, line);

    PaperRecord paper;
    paper.paper_id = require_string(obj, "paper_id", line);
    if (paper.paper_id.empty()) throw ParseError(line, "paper_id is empty");
    paper.year = require_int(obj, "year", line);
    if (auto it = obj.find("doc_type"); it != obj.end() && it->is_string())
      paper.doc_type = parse_doc_type(it->get<std::string>());
    else
      paper.doc_type = DocType::other;
    if (auto it = obj.find("journal"); it != obj.end() && it->is_string())
      paper.journal = it->get<std::string>();
    paper.subject_categories = string_array(obj, "subject_categories", line);
    paper.keywords = string_array(obj, "keywords", line);

    if (auto it = obj.find("references"); it != obj.end() && !it->is_null()) {
      if (!it->is_array()) throw ParseError(line, "field 'references' must be an array");
      for (const auto& ref : *it) {
        if (!ref.is_object()) throw ParseError(line, "each reference must be an object");
        RefRecord r;
        if (auto j = ref.find("journal"); j != ref.end() && j->is_string())
          r.journal = trim(j->get<std::string>());
        r.pub_year = require_int(ref, "year", line);
        paper.references.push_back(std::move(r));
      }
    }

    auto [pos, inserted] = first_line.emplace(paper.paper_id, line);
    if (!inserted)
      throw ConflictError(fmt::format("duplicate paper_id \"{}\" (lines {} and {})",
                                      paper.paper_id, pos->second, line));
    papers.push_back(std::move(paper));
  }
  if (papers.empty()) throw ValidationError("corpus file contains no records");
  rep.records = papers.size();
  return Corpus::build(std::move(papers), config, &rep);
}

Corpus ingest_corpus(const std::filesystem::path& path, const CorpusConfig& config,
                     IngestReport* report) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot read corpus file '{}'", path.string()));
  return parse_corpus(in, config, report);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& paper : corpus.papers()) {
    ordered_json obj;
    obj["paper_id"] = paper.paper_id;
    obj["year"] = paper.year;
    obj["doc_type"] = to_string(paper.doc_type);
    obj["journal"] = paper.journal;
    obj["subject_categories"] = paper.subject_categories;
    obj["keywords"] = paper.keywords;
    ordered_json refs = ordered_json::array();
    for (const auto& ref : paper.references) {
      ordered_json r;
      r["journal"] = ref.journal;
      r["year"] = ref.pub_year;
      refs.push_back(std::move(r));
    }
    obj["references"] = std::move(refs);
    out << obj.dump() << '\n';
  }
}

std::string serialize_corpus(const Corpus& corpus) {
  std::ostringstream out;
  write_corpus(out, corpus);
  return out.str();
}

// -- Tags ---------------------------------------------------------------------

std::optional<std::size_t> tag_index(std::string_view name) {
  for (std::size_t i = 0; i < kTagCount; ++i)
    if (kTagNames[i] == name) return i;
  return std::nullopt;
}

std::int64_t TagRecord::count(std::string_view tag) const {
  auto idx = tag_index(tag);
  if (!idx) throw SchemaError(fmt::format("unknown tag '{}'", tag));
  return tag_counts[*idx];
}

TagTable::TagTable(std::vector<TagRecord> records) : records_(std::move(records)) {
  std::sort(records_.begin(), records_.end(),
            [](const TagRecord& a, const TagRecord& b) { return a.paper_id < b.paper_id; });
  for (std::size_t i = 1; i < records_.size(); ++i)
    if (records_[i].paper_id == records_[i - 1].paper_id)
      throw ConflictError(fmt::format("duplicate tag record for paper_id \"{}\"", records_[i].paper_id));
}

const TagRecord* TagTable::find(std::string_view paper_id) const {
  auto it = std::lower_bound(records_.begin(), records_.end(), paper_id,
                             [](const TagRecord& r, std::string_view id) { return r.paper_id < id; });
  if (it == records_.end() || it->paper_id != paper_id) return nullptr;
  return &*it;
}

TagTable parse_tags(std::istream& in) {
  std::vector<TagRecord> records;
  std::string text;
  std::size_t line = 0;
  auto non_negative = [&](std::int64_t v, std::string_view what) {
    if (v < 0) throw ValidationError(fmt::format("line {}: {} must be non-negative, got {}", line, what, v));
    return v;
  };
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) continue;
    json obj = parse_line(text, line);
    TagRecord rec;
    rec.paper_id = require_string(obj, "paper_id", line);
    if (auto it = obj.find("tags"); it != obj.end() && !it->is_null()) {
      if (!it->is_object()) throw ParseError(line, "field 'tags' must be an object");
      for (const auto& [name, value] : it->items()) {
        auto idx = tag_index(name);
        if (!idx) {
          std::string vocab;
          for (auto t : kTagNames) vocab += (vocab.empty() ? "" : ", ") + std::string(t);
          throw SchemaError(
              fmt::format("line {}: unknown tag '{}' (valid tags: {})", line, name, vocab));
        }
        if (!value.is_number_integer())
          throw ParseError(line, fmt::format("tag '{}' count must be an integer", name));
        rec.tag_counts[*idx] = non_negative(value.get<std::int64_t>(), name);
      }
    }
    if (obj.contains("fm_score_sum"))
      rec.fm_score_sum = non_negative(require_int(obj, "fm_score_sum", line), "fm_score_sum");
    if (obj.contains("citations"))
      rec.citation_count = non_negative(require_int(obj, "citations", line), "citations");
    records.push_back(std::move(rec));
  }
  return TagTable(std::move(records));
}

TagTable ingest_tags(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot read tag file '{}'", path.string()));
  return parse_tags(in);
}

void write_tags(std::ostream& out, const TagTable& table) {
  for (const auto& rec : table.records()) {
    ordered_json obj;
    obj["paper_id"] = rec.paper_id;
    ordered_json tags = ordered_json::object();
    for (std::size_t i = 0; i < kTagCount; ++i) tags[std::string(kTagNames[i])] = rec.tag_counts[i];
    obj["tags"] = std::move(tags);
    obj["fm_score_sum"] = rec.fm_score_sum;
    obj["citations"] = rec.citation_count;
    out << obj.dump() << '\n';
  }
}

}  // namespace novelty
