#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "novelty/corpus.hpp"

namespace testing_helpers {

inline novelty::PaperRecord paper(std::string id, int year, std::initializer_list<const char*> journals,
                                  std::vector<std::string> categories = {"C"},
                                  std::vector<std::string> keywords = {}) {
  novelty::PaperRecord p;
  p.paper_id = std::move(id);
  p.year = year;
  p.subject_categories = std::move(categories);
  p.keywords = std::move(keywords);
  for (const char* j : journals) p.references.push_back({j, 2000});
  return p;
}

inline novelty::Corpus corpus_of(std::vector<novelty::PaperRecord> papers, novelty::CorpusConfig config = {}) {
  return novelty::Corpus::build(std::move(papers), config);
}

inline novelty::JournalId jid(const novelty::Corpus& c, const char* name) { return *c.find_journal(name); }

}  // namespace testing_helpers
