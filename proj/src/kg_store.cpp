#include "zskg/kg_store.hpp"

#include <fstream>
#include <sstream>

#include "zskg/embedding.hpp"
#include "zskg/error.hpp"
#include "zskg/io.hpp"

namespace zskg {

bool KnowledgeGraph::insert(Triple t) {
  if (t.head.empty() || t.relation.empty() || t.tail.empty()) {
    throw ContractError("triple has an empty field");
  }
  t.head = casefold(t.head);
  t.relation = casefold(t.relation);
  t.tail = casefold(t.tail);
  auto [it, inserted] = triples_.insert(std::move(t));
  if (!inserted) return false;
  const Triple& s = *it;
  entities_.insert(s.head);
  entities_.insert(s.tail);
  relations_.insert(s.relation);
  index_[{s.head, s.relation}].insert(s.tail);
  index_[{s.tail, s.relation}].insert(s.head);
  return true;
}

const std::set<std::string>& KnowledgeGraph::neighbors(const std::string& entity,
                                                       const std::string& relation) const {
  static const std::set<std::string> empty;
  auto it = is_casefolded(entity) && is_casefolded(relation) ? index_.find({entity, relation})
                                                              : index_.find({casefold(entity), casefold(relation)});
  return it == index_.end() ? empty : it->second;
}

namespace {

std::string normalize_field(const std::string& raw, const Lexicon* lexicon) {
  return lexicon != nullptr ? lexicon->normalize(raw) : casefold(raw);
}

}  // namespace

KnowledgeGraph parse_triples(const std::string& text, const std::string& source_name, const Lexicon* lexicon) {
  KnowledgeGraph kg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = rstrip(line);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3) {
      throw ParseError(source_name, line_no, "expected 3 tab-separated fields, got " + std::to_string(fields.size()));
    }
    Triple t{normalize_field(strip(fields[0]), lexicon), normalize_field(strip(fields[1]), lexicon),
             normalize_field(strip(fields[2]), lexicon)};
    if (t.head.empty() || t.relation.empty() || t.tail.empty()) {
      throw ParseError(source_name, line_no, "empty triple field");
    }
    kg.insert(std::move(t));
  }
  return kg;
}

KnowledgeGraph load_triples(const std::filesystem::path& path, const Lexicon* lexicon) {
  return parse_triples(read_file(path), path.string(), lexicon);
}

std::string serialize_triples(const KnowledgeGraph& kg) {
  std::string out;
  for (const auto& t : kg.triples()) {
    out += t.head;
    out += '\t';
    out += t.relation;
    out += '\t';
    out += t.tail;
    out += '\n';
  }
  return out;
}

void save_triples(const KnowledgeGraph& kg, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_triples(kg));
}

std::set<std::string> target_set(const KnowledgeGraph& kg, const std::vector<std::string>& c_ent,
                                 const std::vector<std::string>& c_rel) {
  std::set<std::string> out;
  for (const auto& e : c_ent) {
    for (const auto& r : c_rel) {
      const auto& n = kg.neighbors(e, r);
      out.insert(n.begin(), n.end());
    }
  }
  return out;
}

std::map<std::string, Triple> target_set_with_witness(const KnowledgeGraph& kg,
                                                      const std::vector<std::string>& c_ent,
                                                      const std::vector<std::string>& c_rel) {
  std::map<std::string, Triple> out;
  for (const auto& e : c_ent) {
    for (const auto& r : c_rel) {
      for (const auto& t : kg.neighbors(e, r)) {
        if (out.contains(t)) continue;
        Triple forward{casefold(e), casefold(r), t};
        out.emplace(t, kg.triples().contains(forward) ? forward : Triple{t, forward.relation, forward.head});
      }
    }
  }
  return out;
}

}  // namespace zskg
