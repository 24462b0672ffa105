#include <algorithm>
#include <random>
#include <unordered_map>

#include <json.hpp>

#include "zskg/data.hpp"
#include "zskg/error.hpp"
#include "zskg/io.hpp"

namespace zskg {

std::set<std::string> AnswerSplit::pool() const {
  std::set<std::string> out = seen;
  out.insert(unseen.begin(), unseen.end());
  return out;
}

SplitManifest DatasetSplit::manifest() const {
  SplitManifest m{kind, seed, answers, {}, {}};
  for (const auto& s : train.samples) m.train_ids.push_back(s.id);
  for (const auto& s : test.samples) m.test_ids.push_back(s.id);
  return m;
}

namespace {

std::mt19937_64 repeat_rng(std::uint64_t seed, int repeat) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(repeat)};
  return std::mt19937_64(seq);
}

std::vector<std::string> canonical_pool(const std::vector<std::string>& pool) {
  if (pool.empty()) throw ContractError("answer pool is empty");
  std::vector<std::string> sorted = pool;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  return sorted;
}

}  // namespace

std::vector<DatasetSplit> zero_shot_split(const Dataset& ds, const std::vector<std::string>& pool,
                                          std::uint64_t seed, int repeats) {
  const auto sorted = canonical_pool(pool);
  std::vector<DatasetSplit> out;
  for (int r = 0; r < repeats; ++r) {
    auto rng = repeat_rng(seed, r);
    auto shuffled = sorted;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const std::size_t n_seen = (shuffled.size() + 1) / 2;
    DatasetSplit split;
    split.kind = SplitKind::zero_shot;
    split.seed = seed;
    split.answers.repeat_index = r;
    split.answers.seen.insert(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_seen));
    split.answers.unseen.insert(shuffled.begin() + static_cast<std::ptrdiff_t>(n_seen), shuffled.end());
    split.train.features = ds.features;
    split.test.features = ds.features;
    for (const auto& s : ds.samples) {
      if (split.answers.seen.contains(s.answer)) {
        split.train.samples.push_back(s);
      } else if (split.answers.unseen.contains(s.answer)) {
        split.test.samples.push_back(s);
      }
    }
    out.push_back(std::move(split));
  }
  return out;
}

std::vector<DatasetSplit> standard_split(const Dataset& ds, const std::vector<std::string>& pool, std::uint64_t seed,
                                         int repeats, double test_fraction) {
  if (test_fraction <= 0.0 || test_fraction >= 1.0) throw ContractError("test fraction must be in (0, 1)");
  const auto sorted = canonical_pool(pool);
  const auto filtered = filter_to_pool(ds, sorted).kept;
  std::vector<DatasetSplit> out;
  for (int r = 0; r < repeats; ++r) {
    auto rng = repeat_rng(seed, r);
    std::vector<std::size_t> order(filtered.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_test = static_cast<std::size_t>(test_fraction * static_cast<double>(order.size()));
    std::vector<std::size_t> test_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(test_idx.begin(), test_idx.end());
    std::sort(train_idx.begin(), train_idx.end());
    DatasetSplit split;
    split.kind = SplitKind::standard;
    split.seed = seed;
    split.answers.repeat_index = r;
    split.answers.seen.insert(sorted.begin(), sorted.end());
    split.train = filtered.subset(train_idx);
    split.test = filtered.subset(test_idx);
    out.push_back(std::move(split));
  }
  return out;
}

std::string serialize_manifest(const SplitManifest& m) {
  nlohmann::ordered_json j{
      {"kind", m.kind == SplitKind::zero_shot ? "zero_shot" : "standard"},
      {"seed", m.seed},
      {"repeat", m.answers.repeat_index},
      {"seen", m.answers.seen},
      {"unseen", m.answers.unseen},
      {"train", m.train_ids},
      {"test", m.test_ids},
  };
  return j.dump(1) + "\n";
}

SplitManifest parse_manifest(const std::string& text, const std::string& source_name) {
  try {
    auto j = nlohmann::json::parse(text);
    SplitManifest m;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "zero_shot") {
      m.kind = SplitKind::zero_shot;
    } else if (kind == "standard") {
      m.kind = SplitKind::standard;
    } else {
      throw ParseError(source_name, 0, "unknown split kind '" + kind + "'");
    }
    m.seed = j.at("seed").get<std::uint64_t>();
    m.answers.repeat_index = j.at("repeat").get<int>();
    m.answers.seen = j.at("seen").get<std::set<std::string>>();
    m.answers.unseen = j.at("unseen").get<std::set<std::string>>();
    m.train_ids = j.at("train").get<std::vector<std::string>>();
    m.test_ids = j.at("test").get<std::vector<std::string>>();
    for (const auto& a : m.answers.seen) {
      if (m.answers.unseen.contains(a)) throw ParseError(source_name, 0, "answer '" + a + "' is both seen and unseen");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source_name, 0, std::string("bad split manifest: ") + e.what());
  }
}

SplitManifest load_manifest(const std::filesystem::path& path) { return parse_manifest(read_file(path), path.string()); }

void save_manifest(const SplitManifest& m, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_manifest(m));
}

DatasetSplit apply_manifest(const Dataset& ds, const SplitManifest& m) {
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) by_id.emplace(ds.samples[i].id, i);
  auto pick = [&](const std::vector<std::string>& ids) {
    std::vector<std::size_t> idx;
    idx.reserve(ids.size());
    for (const auto& id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw ParseError("split manifest", 0, "sample id '" + id + "' not in dataset");
      idx.push_back(it->second);
    }
    return ds.subset(idx);
  };
  DatasetSplit split;
  split.kind = m.kind;
  split.seed = m.seed;
  split.answers = m.answers;
  split.train = pick(m.train_ids);
  split.test = pick(m.test_ids);
  return split;
}

}  // namespace zskg
