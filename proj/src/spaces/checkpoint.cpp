#include <algorithm>
#include <bit>
#include <cstring>

#include "zskg/error.hpp"
#include "zskg/io.hpp"
#include "zskg/serialization.hpp"
#include "zskg/spaces.hpp"

namespace zskg {

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{
      {"batch_size", c.batch_size},
      {"tau", c.tau},
      {"epochs", c.epochs},
      {"patience", c.patience},
      {"seed", c.seed},
      {"holdout_fraction", c.holdout_fraction},
      {"adam", {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"epsilon", c.adam.epsilon}}},
      {"schedule",
       {{"base", c.schedule.base},
        {"warmup_factor", c.schedule.warmup_factor},
        {"warmup_epochs", c.schedule.warmup_epochs},
        {"decay_start", c.schedule.decay_start},
        {"decay_end", c.schedule.decay_end},
        {"decay_every", c.schedule.decay_every},
        {"decay_rate", c.schedule.decay_rate}}},
      {"shape",
       {{"input_dim", c.shape.input_dim},
        {"hidden_dim", c.shape.hidden_dim},
        {"common_dim", c.shape.common_dim},
        {"projection", c.shape.projection}}},
  };
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.tau = j.at("tau").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.patience = j.at("patience").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.holdout_fraction = j.at("holdout_fraction").get<double>();
  const auto& a = j.at("adam");
  c.adam = {a.at("beta1").get<double>(), a.at("beta2").get<double>(), a.at("epsilon").get<double>()};
  const auto& s = j.at("schedule");
  c.schedule.base = s.at("base").get<double>();
  c.schedule.warmup_factor = s.at("warmup_factor").get<double>();
  c.schedule.warmup_epochs = s.at("warmup_epochs").get<int>();
  c.schedule.decay_start = s.at("decay_start").get<int>();
  c.schedule.decay_end = s.at("decay_end").get<int>();
  c.schedule.decay_every = s.at("decay_every").get<int>();
  c.schedule.decay_rate = s.at("decay_rate").get<double>();
  const auto& sh = j.at("shape");
  c.shape.input_dim = sh.at("input_dim").get<std::size_t>();
  c.shape.hidden_dim = sh.at("hidden_dim").get<std::size_t>();
  c.shape.common_dim = sh.at("common_dim").get<std::size_t>();
  c.shape.projection = sh.at("projection").get<bool>();
}

namespace {

constexpr char kMagic[8] = {'Z', 'S', 'K', 'G', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(buf, sizeof(T));
}

void put_doubles(std::string& out, std::span<const double> values) {
  for (double v : values) put_le(out, v);
}

class Reader {
 public:
  Reader(std::string_view bytes, const std::string& source) : bytes_(bytes), source_(source) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    char buf[sizeof(T)];
    std::memcpy(buf, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void fill(std::span<double> out) {
    for (double& v : out) v = get<double>();
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw ParseError(source_, 0, "truncated checkpoint");
  }

  std::string_view bytes_;
  const std::string& source_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const SpaceModel& space, const TrainConfig& config) {
  nlohmann::json header{
      {"kind", to_string(space.kind())},
      {"layer_dims", space.params().fusion.layer_dims()},
      {"activation", "tanh"},
      {"common_dim", space.common_dim()},
      {"embedding_dim", space.targets().dim()},
      {"projection", space.has_projection()},
      {"tokens", space.targets().tokens()},
      {"config", config},
  };
  const std::string text = header.dump();
  std::string out(kMagic, sizeof kMagic);
  put_le(out, kVersion);
  put_le(out, static_cast<std::uint64_t>(text.size()));
  out += text;
  for (auto block : space.params().blocks()) put_doubles(out, block);
  put_doubles(out, space.targets().inputs().flat());
  return out;
}

SpaceModel deserialize_checkpoint(std::string_view bytes, const std::string& source_name, TrainConfig* config) {
  Reader in(bytes, source_name);
  if (in.take(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) {
    throw ParseError(source_name, 0, "not a checkpoint (bad magic)");
  }
  if (auto v = in.get<std::uint32_t>(); v != kVersion) {
    throw ParseError(source_name, 0, "unsupported checkpoint version " + std::to_string(v));
  }
  const auto header_len = in.get<std::uint64_t>();
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(in.take(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source_name, 0, std::string("bad checkpoint header: ") + e.what());
  }
  try {
    if (header.at("activation") != "tanh") throw ParseError(source_name, 0, "unsupported activation");
    const auto kind = space_kind_from_string(header.at("kind").get<std::string>());
    SpaceParameters params;
    params.fusion = FusionModel(header.at("layer_dims").get<std::vector<std::size_t>>());
    const auto emb_dim = header.at("embedding_dim").get<std::size_t>();
    if (header.at("projection").get<bool>()) params.projection = Matrix(params.fusion.output_dim(), emb_dim);
    for (auto block : params.blocks()) in.fill(block);
    auto tokens = header.at("tokens").get<std::vector<std::string>>();
    Matrix inputs(tokens.size(), emb_dim);
    in.fill(inputs.flat());
    if (!in.at_end()) throw ParseError(source_name, 0, "trailing bytes after checkpoint payload");
    if (config != nullptr) *config = header.at("config").get<TrainConfig>();
    return SpaceModel(kind, std::move(params), TargetTable(std::move(tokens), std::move(inputs)));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source_name, 0, std::string("bad checkpoint header: ") + e.what());
  } catch (const ContractError& e) {
    throw ParseError(source_name, 0, e.what());
  }
}

void save_checkpoint(const SpaceModel& space, const TrainConfig& config, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_checkpoint(space, config));
}

SpaceModel load_checkpoint(const std::filesystem::path& path, TrainConfig* config) {
  return deserialize_checkpoint(read_file(path), path.string(), config);
}

}  // namespace zskg
