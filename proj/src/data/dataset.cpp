#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "zskg/data.hpp"
#include "zskg/error.hpp"
#include "zskg/io.hpp"

namespace zskg {

std::optional<std::string> Sample::support_entity() const {
  if (!fact) return std::nullopt;
  return fact->head == answer ? fact->tail : fact->head;
}

void FeatureTable::add(std::string id, Vector values) {
  if (values.size() != dim_) throw ContractError("feature row '" + id + "' has the wrong dim");
  if (!rows_.emplace(std::move(id), std::move(values)).second) throw ContractError("duplicate image id");
}

const Vector& FeatureTable::at(const std::string& id) const {
  auto it = rows_.find(id);
  if (it == rows_.end()) throw ContractError("no image features for '" + id + "'");
  return it->second;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.features = features;
  out.samples.reserve(indices.size());
  for (std::size_t i : indices) out.samples.push_back(samples.at(i));
  return out;
}

namespace {

std::string norm(const std::string& s, const Lexicon* lexicon) {
  return lexicon != nullptr ? lexicon->normalize(s) : casefold(s);
}

FeatureTable parse_features(const std::string& text, const std::string& name) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::optional<FeatureTable> table;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty()) continue;
    if (!table) {
      std::size_t dim = 0;
      if (line.rfind("#dim", 0) != 0) throw ParseError(name, line_no, "expected '#dim D' header");
      std::string rest = strip(line.substr(4));
      auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), dim);
      if (ec != std::errc() || p != rest.data() + rest.size() || dim == 0) {
        throw ParseError(name, line_no, "bad feature dimension");
      }
      table.emplace(dim);
      continue;
    }
    if (line.front() == '#') continue;
    std::istringstream fields(line);
    std::string id;
    fields >> id;
    Vector values;
    std::string tok;
    while (fields >> tok) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || p != tok.data() + tok.size() || !std::isfinite(v)) {
        throw ParseError(name, line_no, "bad number '" + tok + "'");
      }
      values.push_back(v);
    }
    if (values.size() != table->dim()) {
      throw ParseError(name, line_no, "expected " + std::to_string(table->dim()) + " values, got " +
                                          std::to_string(values.size()));
    }
    if (table->contains(id)) throw ParseError(name, line_no, "duplicate image id '" + id + "'");
    table->add(std::move(id), std::move(values));
  }
  if (!table) throw ParseError(name, 0, "missing '#dim D' header");
  return std::move(*table);
}

std::string required_string(const nlohmann::json& j, const char* key, const std::string& name, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw ParseError(name, line, std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

}  // namespace

Dataset parse_dataset(const std::string& samples_text, const std::string& features_text,
                      const std::string& samples_name, const std::string& features_name, LoadReport* report,
                      const Lexicon* lexicon) {
  Dataset ds;
  auto features = std::make_shared<FeatureTable>(parse_features(features_text, features_name));
  ds.features = features;
  std::set<std::string> ids;
  std::istringstream in(samples_text);
  std::string line;
  std::size_t line_no = 0;
  auto reject = [&](const std::string& id, const std::string& why) {
    if (report != nullptr) report->rejected.push_back(id + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(samples_name, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(samples_name, line_no, "expected a JSON object");
    Sample s;
    s.id = required_string(j, "id", samples_name, line_no);
    s.image_feature_id = required_string(j, "img_id", samples_name, line_no);
    s.question = required_string(j, "question", samples_name, line_no);
    s.answer = norm(strip(required_string(j, "answer", samples_name, line_no)), lexicon);
    if (auto f = j.find("fact"); f != j.end() && !f->is_null()) {
      if (!f->is_object()) throw ParseError(samples_name, line_no, "'fact' must be an object");
      s.fact = Triple{norm(strip(required_string(*f, "h", samples_name, line_no)), lexicon),
                      norm(strip(required_string(*f, "r", samples_name, line_no)), lexicon),
                      norm(strip(required_string(*f, "t", samples_name, line_no)), lexicon)};
    }
    if (s.answer.empty()) {
      reject(s.id, "empty answer");
      continue;
    }
    if (s.fact && (s.fact->head.empty() || s.fact->relation.empty() || s.fact->tail.empty())) {
      reject(s.id, "fact has an empty field");
      continue;
    }
    if (s.fact && s.answer != s.fact->head && s.answer != s.fact->tail) {
      reject(s.id, "answer is neither endpoint of its fact");
      continue;
    }
    if (!features->contains(s.image_feature_id)) {
      reject(s.id, "unknown image id '" + s.image_feature_id + "'");
      continue;
    }
    if (!ids.insert(s.id).second) {
      reject(s.id, "duplicate sample id");
      continue;
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& samples_path, const std::filesystem::path& features_path,
                     LoadReport* report, const Lexicon* lexicon) {
  return parse_dataset(read_file(samples_path), read_file(features_path), samples_path.string(),
                       features_path.string(), report, lexicon);
}

std::string serialize_samples(const Dataset& ds) {
  std::string out;
  for (const auto& s : ds.samples) {
    nlohmann::ordered_json j{{"id", s.id}, {"img_id", s.image_feature_id}, {"question", s.question},
                             {"answer", s.answer}};
    if (s.fact) j["fact"] = nlohmann::ordered_json{{"h", s.fact->head}, {"r", s.fact->relation}, {"t", s.fact->tail}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string serialize_features(const FeatureTable& features) {
  std::string out = "#dim " + std::to_string(features.dim()) + "\n";
  char buf[32];
  for (const auto& [id, values] : features.rows()) {
    out += id;
    for (double v : values) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out += ' ';
      out.append(buf, p);
    }
    out += '\n';
  }
  return out;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& samples_path,
                  const std::filesystem::path& features_path) {
  write_file_atomic(samples_path, serialize_samples(ds));
  write_file_atomic(features_path, serialize_features(*ds.features));
}

std::vector<std::string> top_k_answers(const Dataset& ds, std::size_t k) {
  if (k < 1) throw ContractError("answer pool size must be at least 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& s : ds.samples) ++counts[s.answer];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> pool;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) pool.push_back(ranked[i].first);
  return pool;
}

PoolFilter filter_to_pool(const Dataset& ds, const std::vector<std::string>& pool) {
  const std::set<std::string> members(pool.begin(), pool.end());
  PoolFilter out;
  out.kept.features = ds.features;
  for (const auto& s : ds.samples) {
    if (members.contains(s.answer)) {
      out.kept.samples.push_back(s);
    } else {
      ++out.dropped;
    }
  }
  return out;
}

namespace {

void column(ColumnStats& c, const std::vector<std::optional<std::string>>& train,
            const std::vector<std::optional<std::string>>& test) {
  std::set<std::string> tr, te;
  for (const auto& v : train) {
    if (v) tr.insert(*v);
  }
  for (const auto& v : test) {
    if (v) {
      te.insert(*v);
      if (tr.contains(*v)) ++c.instance_overlap;
    }
  }
  c.train_classes = tr.size();
  c.test_classes = te.size();
  for (const auto& v : te) c.class_overlap += tr.contains(v) ? 1 : 0;
}

template <typename F>
std::vector<std::optional<std::string>> extract(const Dataset& ds, F f) {
  std::vector<std::optional<std::string>> out;
  out.reserve(ds.size());
  for (const auto& s : ds.samples) out.push_back(f(s));
  return out;
}

}  // namespace

SplitStats split_stats(const Dataset& train, const Dataset& test) {
  SplitStats st;
  st.train_instances = train.size();
  st.test_instances = test.size();
  auto image = [](const Sample& s) { return std::optional<std::string>(s.image_feature_id); };
  auto question = [](const Sample& s) { return std::optional<std::string>(casefold(strip(s.question))); };
  auto answer = [](const Sample& s) { return std::optional<std::string>(s.answer); };
  auto support = [](const Sample& s) { return s.support_entity(); };
  column(st.images, extract(train, image), extract(test, image));
  column(st.questions, extract(train, question), extract(test, question));
  column(st.answers, extract(train, answer), extract(test, answer));
  column(st.support_entities, extract(train, support), extract(test, support));
  return st;
}

Vector fusion_input(const Dataset& ds, const Sample& sample, const EmbeddingTable& table, const Lexicon& lexicon,
                    bool* oov) {
  const Vector& img = ds.features->at(sample.image_feature_id);
  auto q = phrase_vector(table, sample.question, lexicon);
  if (oov != nullptr) *oov = q.out_of_vocabulary;
  Vector input;
  input.reserve(img.size() + q.values.size());
  input.insert(input.end(), img.begin(), img.end());
  input.insert(input.end(), q.values.begin(), q.values.end());
  return input;
}

}  // namespace zskg
