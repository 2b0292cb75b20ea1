// novelty: command-line front end for ingestion, indexing, scoring, model
// fitting and the full validation study.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>

#include "novelty/cocite_index.hpp"
#include "novelty/corpus.hpp"
#include "novelty/csv.hpp"
#include "novelty/digest.hpp"
#include "novelty/errors.hpp"
#include "novelty/glm.hpp"
#include "novelty/novelty_scores.hpp"
#include "novelty/parallel.hpp"
#include "novelty/stats.hpp"
#include "novelty/study.hpp"

#ifndef NOVELTY_VERSION
#define NOVELTY_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace novelty;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitConvergence = 3;

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string utc_now() { return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr))); }

void require_file(const fs::path& path, std::string_view what) {
  if (!fs::is_regular_file(path)) throw DataError(fmt::format("{} file not found: {}", what, path.string()));
}

/// Files are staged in memory and only written once the command succeeded.
class Outputs {
 public:
  void add(fs::path path, std::string contents) { files_.emplace_back(std::move(path), std::move(contents)); }

  json digests() const {
    json j = json::object();
    for (const auto& [path, contents] : files_) j[path.filename().string()] = sha256_hex(contents);
    return j;
  }

  void commit() const {
    std::vector<fs::path> temps;
    try {
      for (const auto& [path, contents] : files_) {
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        fs::path tmp = path;
        tmp += ".partial";
        std::ofstream out(tmp, std::ios::binary);
        out << contents;
        out.close();
        if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
        temps.push_back(tmp);
      }
      for (std::size_t i = 0; i < files_.size(); ++i) fs::rename(temps[i], files_[i].first);
    } catch (...) {
      std::error_code ec;
      for (const auto& t : temps) fs::remove(t, ec);
      throw;
    }
  }

 private:
  std::vector<std::pair<fs::path, std::string>> files_;
};

struct Manifest {
  std::string subcommand;
  json arguments = json::object();
  std::optional<std::string> config_digest;
  std::optional<std::string> corpus_digest;
  std::optional<std::uint64_t> seed;
  json row_counts = json::object();
  std::string started_at = utc_now();

  std::string render(const Outputs& outputs) const {
    json j;
    j["tool"] = "novelty";
    j["version"] = NOVELTY_VERSION;
    j["subcommand"] = subcommand;
    j["arguments"] = arguments;
    j["config_digest"] = config_digest ? json(*config_digest) : json(sha256_hex(arguments.dump()));
    j["corpus_digest"] = corpus_digest ? json(*corpus_digest) : json(nullptr);
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["row_counts"] = row_counts;
    j["outputs"] = outputs.digests();
    j["started_at"] = started_at;
    j["finished_at"] = utc_now();
    return j.dump(2) + "\n";
  }
};

fs::path manifest_next_to(const fs::path& out) {
  fs::path p = out;
  p += ".manifest.json";
  return p;
}

CorpusConfig corpus_config(int min_ref_year, const std::string& years) {
  CorpusConfig c;
  c.min_ref_year = min_ref_year;
  if (!years.empty()) c.year_range = parse_year_range(years);
  c.validate();
  return c;
}

Corpus load_corpus(const fs::path& path, const CorpusConfig& config, IngestReport* report = nullptr) {
  require_file(path, "corpus");
  return ingest_corpus(path, config, report);
}

KeywordNewness parse_newness(const std::string& s) {
  if (s == "all_prior_years") return KeywordNewness::all_prior_years;
  if (s == "same_year_only") return KeywordNewness::same_year_only;
  throw UsageError(fmt::format("--keyword-newness must be all_prior_years or same_year_only, not '{}'", s));
}

std::vector<StudyRecord> join_for_models(const Corpus& corpus, const TagTable& tags, YearRange years,
                                         KeywordNewness newness, unsigned threads) {
  const auto index = CoCitationIndex::build(corpus, {}, threads);
  ScoreOptions opts;
  opts.keyword_newness = newness;
  opts.threads = threads;
  const auto scores = score_corpus(corpus, index, years, opts);
  return join_scores_tags(scores, tags);
}

YearRange years_or_corpus(const std::string& years, const Corpus& corpus) {
  return years.empty() ? corpus.years() : parse_year_range(years);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bibliometric novelty scores (U, W, K) and their convergent-validity study"};
  app.set_version_flag("--version", NOVELTY_VERSION);
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores); output does not depend on it")
      ->capture_default_str();

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate and normalize a corpus file");
  std::string in_corpus, in_out, in_report, in_years;
  int in_min_ref = 1980;
  ingest->add_option("--corpus", in_corpus, "Input corpus (JSON lines)")->required();
  ingest->add_option("--out", in_out, "Normalized corpus output")->required();
  ingest->add_option("--report", in_report, "Ingestion report (text)");
  ingest->add_option("--min-ref-year", in_min_ref, "Drop references published before this year")->capture_default_str();
  ingest->add_option("--years", in_years, "Keep papers published in START:END");

  // index
  auto* index_cmd = app.add_subcommand("index", "Build, save or dump a co-citation index");
  std::string ix_corpus, ix_load, ix_out, ix_dump, ix_years;
  int ix_min_ref = 1980;
  bool ix_no_self = false, ix_no_dup = false;
  auto* ix_corpus_opt = index_cmd->add_option("--corpus", ix_corpus, "Corpus to index");
  auto* ix_load_opt = index_cmd->add_option("--load", ix_load, "Existing index snapshot to read");
  ix_corpus_opt->excludes(ix_load_opt);
  index_cmd->add_option("--out", ix_out, "Write a binary snapshot here");
  index_cmd->add_option("--dump", ix_dump, "Write pair counts as CSV year,journal_lo,journal_hi,count");
  index_cmd->add_option("--min-ref-year", ix_min_ref, "Drop references published before this year")->capture_default_str();
  index_cmd->add_option("--years", ix_years, "Keep papers published in START:END");
  index_cmd->add_flag("--no-self-pairs", ix_no_self, "Do not count same-journal reference pairs");
  index_cmd->add_flag("--no-duplicate-pairs", ix_no_dup, "Count each journal pair once per paper");

  // score
  auto* score = app.add_subcommand("score", "Compute U, W and K for every paper in a year range");
  std::string sc_corpus, sc_years, sc_out, sc_index, sc_newness = "all_prior_years", sc_corpus_years;
  int sc_min_ref = 1980;
  score->add_option("--corpus", sc_corpus, "Corpus (JSON lines)")->required();
  score->add_option("--years", sc_years, "Score papers published in START:END (default: all)");
  score->add_option("--out", sc_out, "Score CSV")->required();
  score->add_option("--index", sc_index, "Reuse an index snapshot built from the same corpus");
  score->add_option("--keyword-newness", sc_newness, "all_prior_years or same_year_only")->capture_default_str();
  score->add_option("--min-ref-year", sc_min_ref, "Drop references published before this year")->capture_default_str();
  score->add_option("--corpus-years", sc_corpus_years, "Restrict the corpus to START:END before indexing");

  // regress
  auto* regress = app.add_subcommand("regress", "Fit one tag model: outcome ~ predictor + year dummies");
  std::string rg_family = "poisson", rg_outcome, rg_predictor, rg_corpus, rg_tags, rg_years, rg_out;
  std::size_t rg_min_rows = 30;
  bool rg_allow = false;
  regress->add_option("--family", rg_family, "poisson, logistic or probit")->capture_default_str();
  regress->add_option("--outcome", rg_outcome, "Tag name, e.g. new_finding")->required();
  regress->add_option("--predictor", rg_predictor, "u, w, w_categorical, k, citations or fm_recommendations")
      ->required();
  regress->add_option("--corpus", rg_corpus, "Corpus (JSON lines)")->required();
  regress->add_option("--tags", rg_tags, "Tag table (JSON lines)")->required();
  regress->add_option("--years", rg_years, "Focal years START:END (default: all)");
  regress->add_option("--out", rg_out, "Result CSV")->required();
  regress->add_option("--min-rows", rg_min_rows, "Refuse samples smaller than this")->capture_default_str();
  regress->add_flag("--allow-nonconvergence", rg_allow, "Write the row instead of exiting with status 3");

  // study
  auto* study = app.add_subcommand("study", "Run the full validation study");
  std::string st_config, st_out = "study_out";
  std::optional<std::uint64_t> st_seed;
  bool st_strict = false;
  study->add_option("--config", st_config, "Study config file")->required();
  study->add_option("--seed", st_seed, "Sampling seed (overrides the config)");
  study->add_option("--out", st_out, "Output directory")->capture_default_str();
  study->add_flag("--fail-on-nonconvergence", st_strict, "Exit with status 3 if any model fails to converge");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus and tag table");
  std::optional<std::uint64_t> sy_seed;
  std::string sy_out;
  SynthParams sy;
  std::string sy_study_years = "2013:2015";
  synth->add_option("--seed", sy_seed, "Random seed (required)");
  synth->add_option("--out", sy_out, "Output directory")->required();
  synth->add_option("--study-papers", sy.study_papers, "Papers in the study years")->capture_default_str();
  synth->add_option("--background-papers", sy.background_papers_per_year, "Papers per other year")
      ->capture_default_str();
  synth->add_option("--journals", sy.n_journals, "Number of journals")->capture_default_str();
  synth->add_option("--communities", sy.n_communities, "Journal communities")->capture_default_str();
  synth->add_option("--cross-community-rate", sy.cross_community_rate, "Share of references to other communities")
      ->capture_default_str();
  synth->add_option("--inclusion-intercept", sy.inclusion_intercept, "Intercept of the inclusion model")
      ->capture_default_str();
  synth->add_option("--refs", sy.refs_per_paper, "References per paper")->capture_default_str();
  synth->add_option("--study-years", sy_study_years, "Study years START:END")->capture_default_str();
  synth->add_flag("--distinct-journals", sy.distinct_journals, "No journal twice in one reference list");
  synth->add_flag("--include-all", sy.include_all, "Tag every study-year paper");

  // stats
  auto* stats = app.add_subcommand("stats", "Descriptive statistics of scores by publication year");
  std::string ss_scores, ss_tags, ss_out;
  stats->add_option("--scores", ss_scores, "Score CSV from `score`")->required();
  stats->add_option("--tags", ss_tags, "Tag table, adds citations and recommendations");
  stats->add_option("--out", ss_out, "Statistics CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    Outputs outputs;
    Manifest manifest;
    fs::path manifest_path;

    if (*ingest) {
      manifest.subcommand = "ingest";
      manifest.arguments = {{"corpus", in_corpus}, {"out", in_out}, {"min_ref_year", in_min_ref}, {"years", in_years}};
      IngestReport report;
      const auto corpus = load_corpus(in_corpus, corpus_config(in_min_ref, in_years), &report);
      manifest.corpus_digest = sha256_file(in_corpus);
      outputs.add(in_out, serialize_corpus(corpus));
      if (!in_report.empty()) outputs.add(in_report, report.to_text());
      manifest.row_counts = {{"records", report.records},
                             {"papers", report.papers_retained},
                             {"papers_out_of_range", report.papers_out_of_range},
                             {"references", report.references_retained},
                             {"references_before_min_year", report.references_before_min_year},
                             {"references_missing_journal", report.references_missing_journal}};
      std::cerr << report.to_text();
      manifest_path = manifest_next_to(in_out);
    } else if (*index_cmd) {
      manifest.subcommand = "index";
      if (ix_corpus.empty() && ix_load.empty()) throw UsageError("index needs --corpus or --load");
      if (ix_out.empty() && ix_dump.empty()) throw UsageError("index needs --out and/or --dump");
      manifest.arguments = {{"corpus", ix_corpus},        {"load", ix_load},
                            {"out", ix_out},              {"dump", ix_dump},
                            {"min_ref_year", ix_min_ref}, {"years", ix_years},
                            {"self_pairs", !ix_no_self},  {"duplicate_pairs", !ix_no_dup}};
      std::optional<CoCitationIndex> index;
      if (!ix_load.empty()) {
        require_file(ix_load, "index");
        index = CoCitationIndex::load(ix_load);
      } else {
        const auto corpus = load_corpus(ix_corpus, corpus_config(ix_min_ref, ix_years));
        manifest.corpus_digest = sha256_file(ix_corpus);
        index = CoCitationIndex::build(corpus, {!ix_no_self, !ix_no_dup}, threads);
      }
      if (!ix_out.empty()) {
        const fs::path tmp = fs::temp_directory_path() / fmt::format("novelty-index-{}.bin", ::getpid());
        index->save(tmp);
        std::ifstream in(tmp, std::ios::binary);
        outputs.add(ix_out, std::string(std::istreambuf_iterator<char>(in), {}));
        fs::remove(tmp);
      }
      if (!ix_dump.empty()) {
        std::ostringstream dump;
        index->dump_csv(dump);
        outputs.add(ix_dump, dump.str());
      }
      std::size_t pairs = 0;
      for (int y = index->years().start; y <= index->years().end; ++y) pairs += index->year_counts(y).pair_counts.size();
      manifest.row_counts = {{"journals", index->journal_count()}, {"year_pairs", pairs}};
      manifest_path = manifest_next_to(!ix_out.empty() ? ix_out : ix_dump);
    } else if (*score) {
      manifest.subcommand = "score";
      manifest.arguments = {{"corpus", sc_corpus},         {"years", sc_years},
                            {"out", sc_out},               {"index", sc_index},
                            {"keyword_newness", sc_newness}, {"min_ref_year", sc_min_ref},
                            {"corpus_years", sc_corpus_years}};
      const auto newness = parse_newness(sc_newness);
      const auto corpus = load_corpus(sc_corpus, corpus_config(sc_min_ref, sc_corpus_years));
      manifest.corpus_digest = sha256_file(sc_corpus);
      std::optional<CoCitationIndex> index;
      if (!sc_index.empty()) {
        require_file(sc_index, "index");
        index = CoCitationIndex::load(sc_index);
        if (index->corpus_digest() != sha256_hex(serialize_corpus(corpus)))
          throw ValidationError("index snapshot was built from a different corpus");
      } else {
        index = CoCitationIndex::build(corpus, {}, threads);
      }
      ScoreOptions opts;
      opts.keyword_newness = newness;
      opts.threads = threads;
      const auto scores = score_corpus(corpus, *index, years_or_corpus(sc_years, corpus), opts);
      std::ostringstream out;
      write_scores_csv(out, scores);
      outputs.add(sc_out, out.str());
      std::size_t u = 0, w = 0, k = 0;
      for (const auto& s : scores) {
        u += s.u.score.has_value();
        w += s.w.score.has_value();
        k += s.k.score.has_value();
      }
      manifest.row_counts = {{"papers", scores.size()}, {"u", u}, {"w", w}, {"k", k}};
      manifest_path = manifest_next_to(sc_out);
    } else if (*regress) {
      manifest.subcommand = "regress";
      manifest.arguments = {{"family", rg_family}, {"outcome", rg_outcome}, {"predictor", rg_predictor},
                            {"corpus", rg_corpus}, {"tags", rg_tags},       {"years", rg_years},
                            {"out", rg_out},       {"min_rows", rg_min_rows}};
      const auto family = parse_family(rg_family);
      if (!family) throw UsageError(fmt::format("unknown family '{}'", rg_family));
      const auto predictor = parse_predictor(rg_predictor);
      if (!predictor) throw UsageError(fmt::format("unknown predictor '{}'", rg_predictor));
      if (!tag_index(rg_outcome)) throw UsageError(fmt::format("unknown tag '{}'", rg_outcome));
      const auto corpus = load_corpus(rg_corpus, {});
      require_file(rg_tags, "tag");
      const auto tags = ingest_tags(rg_tags);
      manifest.corpus_digest = sha256_file(rg_corpus);
      const auto records =
          join_for_models(corpus, tags, years_or_corpus(rg_years, corpus), KeywordNewness::all_prior_years, threads);
      ModelOptions mo;
      mo.min_rows = rg_min_rows;
      const auto cell = run_single_model(records, rg_outcome, *predictor, *family, mo);
      if (cell.fit && !cell.fit->converged && !rg_allow) throw ConvergenceError(cell.error);
      if (!cell.ok() && !cell.fit) throw UndefinedError(cell.error);
      std::ostringstream out;
      out << "tag,predictor,family,term,n,dropped,percent_assigned,coefficient,robust_se,sd,"
          << (*family == Family::probit ? "std_coef_sd_units" : "percent_change") << ",p_value,stars,pseudo_r2_percent,status\n";
      const std::string status = cell.ok() ? "ok" : cell.error;
      for (const auto& t : cell.terms)
        out << rg_outcome << ',' << rg_predictor << ',' << rg_family << ',' << t.column << ',' << cell.n << ','
            << cell.dropped << ',' << csv::number(cell.percent_assigned) << ',' << csv::number(t.coefficient) << ','
            << csv::number(t.robust_se) << ',' << csv::number(t.sd) << ',' << csv::number(t.effect) << ','
            << csv::number(t.p_value) << ',' << t.stars << ',' << csv::number(cell.pseudo_r2) << ','
            << csv::field(status) << '\n';
      if (cell.terms.empty())
        out << rg_outcome << ',' << rg_predictor << ',' << rg_family << ",," << cell.n << ',' << cell.dropped
            << ",,,,,,,,," << csv::field(status) << '\n';
      outputs.add(rg_out, out.str());
      manifest.row_counts = {{"joined", records.size()}, {"n", cell.n}, {"dropped", cell.dropped}};
      manifest_path = manifest_next_to(rg_out);
    } else if (*study) {
      manifest.subcommand = "study";
      require_file(st_config, "config");
      const auto config = load_study_config(st_config);
      const auto seed = st_seed ? st_seed : config.seed;
      if (!seed) throw UsageError("study needs a seed: pass --seed or set seed in the config");
      require_file(config.corpus, "corpus");
      require_file(config.tags, "tag");
      manifest.arguments = {{"config", st_config}, {"out", st_out}};
      manifest.seed = *seed;
      manifest.config_digest = sha256_file(st_config);
      manifest.corpus_digest = sha256_file(config.corpus);
      const auto result = run_study(config, *seed, threads);
      if (st_strict && result.counts.value("failed_cells", 0) > 0)
        throw ConvergenceError(fmt::format("{} model cells failed or did not converge", result.counts["failed_cells"].get<int>()));
      for (const auto& [name, contents] : result.files) outputs.add(fs::path(st_out) / name, contents);
      manifest.row_counts = result.counts;
      manifest_path = fs::path(st_out) / "run_manifest.json";
    } else if (*synth) {
      manifest.subcommand = "synth";
      if (!sy_seed) throw UsageError("synth needs --seed");
      sy.study_years = parse_year_range(sy_study_years);
      manifest.seed = *sy_seed;
      manifest.arguments = sy.to_json();
      manifest.arguments["out"] = sy_out;
      const auto data = generate_synthetic_corpus(*sy_seed, sy, threads);
      std::ostringstream corpus_out, tags_out;
      write_corpus(corpus_out, data.corpus);
      write_tags(tags_out, data.tags);
      manifest.corpus_digest = sha256_hex(corpus_out.str());
      outputs.add(fs::path(sy_out) / "corpus.jsonl", corpus_out.str());
      outputs.add(fs::path(sy_out) / "tags.jsonl", tags_out.str());
      json params = sy.to_json();
      params["seed"] = *sy_seed;
      outputs.add(fs::path(sy_out) / "synth_params.json", params.dump(2) + "\n");
      manifest.row_counts = {{"papers", data.corpus.papers().size()}, {"tagged", data.tags.size()}};
      manifest_path = fs::path(sy_out) / "run_manifest.json";
    } else if (*stats) {
      manifest.subcommand = "stats";
      manifest.arguments = {{"scores", ss_scores}, {"tags", ss_tags}, {"out", ss_out}};
      require_file(ss_scores, "score");
      std::ifstream in(ss_scores);
      const auto scores = read_scores_csv(in);
      std::optional<TagTable> tags;
      if (!ss_tags.empty()) {
        require_file(ss_tags, "tag");
        tags = ingest_tags(ss_tags);
      }
      std::ostringstream out;
      out << "variable,group,n,mean,median,sd,min,max\n";
      auto emit = [&](const char* name, auto&& value_of) {
        std::vector<double> values;
        std::vector<std::string> groups;
        for (const auto& s : scores)
          if (auto v = value_of(s)) {
            values.push_back(*v);
            groups.push_back(std::to_string(s.year));
          }
        if (values.empty()) return;
        const auto table = descriptive_stats(values, groups);
        auto row = [&](const SummaryRow& r) {
          out << name << ',' << csv::field(r.group) << ',' << r.n << ',' << csv::number(r.mean) << ','
              << csv::number(r.median) << ',' << csv::number(r.sd) << ',' << csv::number(r.min) << ','
              << csv::number(r.max) << '\n';
        };
        for (const auto& r : table.groups) row(r);
        row(table.pooled);
      };
      emit("u", [](const PaperScores& s) { return s.u ? std::optional(s.u->value) : std::nullopt; });
      emit("w", [](const PaperScores& s) { return s.w ? std::optional(s.w->value) : std::nullopt; });
      emit("k", [](const PaperScores& s) { return s.k ? std::optional(s.k->value) : std::nullopt; });
      if (tags) {
        emit("citations", [&](const PaperScores& s) -> std::optional<double> {
          const auto* t = tags->find(s.paper_id);
          return t ? std::optional(static_cast<double>(t->citation_count)) : std::nullopt;
        });
        emit("fm_recommendations", [&](const PaperScores& s) -> std::optional<double> {
          const auto* t = tags->find(s.paper_id);
          return t ? std::optional(static_cast<double>(t->fm_score_sum)) : std::nullopt;
        });
      }
      outputs.add(ss_out, out.str());
      manifest.row_counts = {{"papers", scores.size()}};
      manifest_path = manifest_next_to(ss_out);
    }

    outputs.add(manifest_path, manifest.render(outputs));
    outputs.commit();
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ConvergenceError& e) {
    std::cerr << "model did not converge: " << e.what() << "\n";
    return kExitConvergence;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  }
}
