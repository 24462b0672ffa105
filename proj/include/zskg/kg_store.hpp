#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace zskg {

class Lexicon;

struct Triple {
  std::string head;
  std::string relation;
  std::string tail;

  auto operator<=>(const Triple&) const = default;
};

// Fact graph with an (entity, relation) -> entities index that covers both
// orientations of every triple. Immutable once built; concurrent reads are safe.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  // Returns false when the triple was already present. Throws ContractError on
  // an empty field. Fields are case-folded; any further normalization
  // (lemmatization, aliases) is the caller's job.
  bool insert(Triple t);

  const std::set<Triple>& triples() const noexcept { return triples_; }
  const std::set<std::string>& entities() const noexcept { return entities_; }
  const std::set<std::string>& relations() const noexcept { return relations_; }
  std::size_t size() const noexcept { return triples_.size(); }

  // {t | (e,r,t) in kg} U {t | (t,r,e) in kg}; empty for unknown keys.
  // Query tokens are case-folded to match storage.
  const std::set<std::string>& neighbors(const std::string& entity, const std::string& relation) const;

 private:
  std::set<Triple> triples_;
  std::set<std::string> entities_;
  std::set<std::string> relations_;
  std::map<std::pair<std::string, std::string>, std::set<std::string>> index_;
};

// Tab-separated triples, '#' comments, trailing whitespace stripped. Tokens
// pass through lexicon normalization when one is given, else case-folding.
KnowledgeGraph load_triples(const std::filesystem::path& path, const Lexicon* lexicon = nullptr);
KnowledgeGraph parse_triples(const std::string& text, const std::string& source_name,
                             const Lexicon* lexicon = nullptr);
std::string serialize_triples(const KnowledgeGraph& kg);
void save_triples(const KnowledgeGraph& kg, const std::filesystem::path& path);

// Union of neighbors(e, r) over the product c_ent x c_rel.
std::set<std::string> target_set(const KnowledgeGraph& kg, const std::vector<std::string>& c_ent,
                                 const std::vector<std::string>& c_rel);

// Same set as target_set, with one witnessing triple per target. Witnesses come
// from the earliest (entity, relation) pair in the given orders.
std::map<std::string, Triple> target_set_with_witness(const KnowledgeGraph& kg,
                                                      const std::vector<std::string>& c_ent,
                                                      const std::vector<std::string>& c_rel);

}  // namespace zskg
