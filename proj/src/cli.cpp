#include "zskg/cli.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "zskg/data.hpp"
#include "zskg/error.hpp"
#include "zskg/eval.hpp"
#include "zskg/io.hpp"
#include "zskg/kernels.hpp"
#include "zskg/pipeline.hpp"
#include "zskg/serialization.hpp"

namespace zskg {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
  std::string command;
  fs::path workdir = "zskg_work";
  fs::path kg, embeddings, dataset, features, splits, checkpoints, out;
  fs::path base_forms, aliases;
  std::size_t embedding_dim = 0;  // 0: infer from the first line

  // Mask / evaluation.
  std::size_t k_r = 3;
  std::size_t k_e = 1;
  double mask_score = 10.0;
  double tau = 0.01;
  std::string mode = "standard";
  std::size_t top_k_output = 10;

  // Training.
  int epochs = 48;
  std::size_t batch_size = 128;
  int patience = 30;
  std::uint64_t seed = 0;
  std::size_t hidden_dim = 128;
  std::size_t common_dim = 300;
  bool no_projection = false;

  // Splits.
  std::size_t top_answers = 500;
  int repeats = 5;
  std::string split_kind = "zero_shot";
  int repeat = -1;  // -1: every repeat

  // Synthetic data.
  SyntheticSpec synth;

  // Sweeps.
  std::string sweep = "scores";
  std::vector<double> scores{0, 1, 2, 5, 10, 20, 50, 100};
  std::vector<std::size_t> kr_list{1, 3, 5, 10, 15, 25};
  std::vector<std::size_t> ke_list{1, 3, 5, 10, 15, 25};

  unsigned threads = 1;
  bool deterministic = false;

  fs::path path_or(const fs::path& p, const char* name) const { return p.empty() ? workdir / name : p; }
  fs::path kg_path() const { return path_or(kg, "kg.tsv"); }
  fs::path embeddings_path() const { return path_or(embeddings, "embeddings.txt"); }
  fs::path dataset_path() const { return path_or(dataset, "dataset.jsonl"); }
  fs::path features_path() const { return path_or(features, "features.txt"); }
  fs::path splits_dir() const { return path_or(splits, "splits"); }
  fs::path checkpoints_dir() const { return path_or(checkpoints, "checkpoints"); }
  fs::path reports_dir() const { return workdir / "reports"; }

  MaskConfig mask() const {
    MaskConfig m{k_r, k_e, mask_score, tau, eval_mode_from_string(mode)};
    m.validate();
    return m;
  }

  TrainConfig train() const {
    TrainConfig c;
    c.epochs = epochs;
    c.batch_size = batch_size;
    c.patience = patience;
    c.seed = seed;
    c.tau = tau;
    c.shape.hidden_dim = hidden_dim;
    c.shape.common_dim = common_dim;
    c.shape.projection = !no_projection;
    c.validate();
    return c;
  }

  unsigned eval_threads() const { return deterministic ? 1u : std::max(1u, threads); }

  nlohmann::ordered_json to_json() const {
    return {
        {"command", command},
        {"paths",
         {{"kg", kg_path().generic_string()},
          {"embeddings", embeddings_path().generic_string()},
          {"dataset", dataset_path().generic_string()},
          {"features", features_path().generic_string()},
          {"splits", splits_dir().generic_string()},
          {"checkpoints", checkpoints_dir().generic_string()},
          {"base_forms", base_forms.generic_string()},
          {"aliases", aliases.generic_string()}}},
        {"mask", {{"k_r", k_r}, {"k_e", k_e}, {"mask_score", mask_score}, {"tau", tau}, {"mode", mode}}},
        {"train",
         {{"epochs", epochs},
          {"batch_size", batch_size},
          {"patience", patience},
          {"seed", seed},
          {"hidden_dim", hidden_dim},
          {"common_dim", common_dim},
          {"projection", !no_projection}}},
        {"split", {{"top_answers", top_answers}, {"repeats", repeats}, {"kind", split_kind}, {"repeat", repeat}}},
        {"deterministic", deterministic},
        {"threads", eval_threads()},
    };
  }
};

std::size_t infer_embedding_dim(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string tok;
    std::size_t n = 0;
    while (fields >> tok) ++n;
    if (n == 0) continue;
    if (n < 2) throw ParseError(path.string(), 1, "embedding line has no components");
    return n - 1;
  }
  throw ParseError(path.string(), 0, "empty embedding file");
}

struct Workspace {
  Lexicon lexicon;
  KnowledgeGraph kg;
  EmbeddingTable embeddings;
  Dataset dataset;
  LoadReport load_report;

  Resources resources() const { return {kg, embeddings, lexicon}; }
};

Lexicon load_lexicon(const RunConfig& rc) {
  if (rc.base_forms.empty() && rc.aliases.empty()) return {};
  return Lexicon::load(rc.base_forms, rc.aliases);
}

Workspace load_workspace(const RunConfig& rc, bool need_kg = true) {
  Workspace w;
  w.lexicon = load_lexicon(rc);
  if (need_kg) {
    w.kg = load_triples(rc.kg_path(), &w.lexicon);
    const auto emb = rc.embeddings_path();
    w.embeddings = load_embeddings(emb, rc.embedding_dim != 0 ? rc.embedding_dim : infer_embedding_dim(emb));
  }
  w.dataset = load_dataset(rc.dataset_path(), rc.features_path(), &w.load_report, &w.lexicon);
  return w;
}

std::vector<fs::path> manifest_paths(const RunConfig& rc) {
  std::vector<fs::path> out;
  const auto dir = rc.splits_dir();
  if (rc.repeat >= 0) {
    out.push_back(dir / ("split_" + std::to_string(rc.repeat) + ".json"));
    if (!fs::exists(out.back())) throw ParseError(out.back().string(), 0, "split manifest not found");
    return out;
  }
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto name = entry.path().filename().string();
      if (name.rfind("split_", 0) == 0 && entry.path().extension() == ".json") out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
    auto index = [](const fs::path& p) { return std::stoi(p.stem().string().substr(6)); };
    return index(a) < index(b);
  });
  return out;
}

fs::path repeat_dir(const RunConfig& rc, int repeat) {
  return rc.checkpoints_dir() / ("repeat_" + std::to_string(repeat));
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

int cmd_synth(const RunConfig& rc, std::ostream& out) {
  SyntheticSpec spec = rc.synth;
  spec.seed = rc.seed;
  const auto bench = gen_synthetic(spec);
  save_triples(bench.kg, rc.kg_path());
  save_dataset(bench.dataset, rc.dataset_path(), rc.features_path());
  write_file_atomic(rc.embeddings_path(), serialize_embeddings(bench.embeddings));
  out << "synth: " << bench.kg.size() << " triples, " << bench.dataset.size() << " samples, "
      << bench.dataset.features->size() << " images, " << bench.embeddings.size() << " embeddings -> "
      << rc.workdir.generic_string() << "\n";
  return 0;
}

std::vector<SplitManifest> make_splits(const RunConfig& rc, const Workspace& w, std::ostream& out) {
  const auto pool = top_k_answers(w.dataset, rc.top_answers);
  const auto filtered = filter_to_pool(w.dataset, pool);
  std::vector<DatasetSplit> splits;
  if (rc.split_kind == "zero_shot") {
    splits = zero_shot_split(filtered.kept, pool, rc.seed, rc.repeats);
  } else if (rc.split_kind == "standard") {
    splits = standard_split(filtered.kept, pool, rc.seed, rc.repeats);
  } else {
    throw ContractError("unknown split kind '" + rc.split_kind + "' (expected zero_shot or standard)");
  }
  std::vector<SplitManifest> manifests;
  for (const auto& s : splits) {
    manifests.push_back(s.manifest());
    save_manifest(manifests.back(), rc.splits_dir() / ("split_" + std::to_string(s.answers.repeat_index) + ".json"));
  }
  nlohmann::ordered_json report{{"pool_size", pool.size()},
                                {"dropped_outside_pool", filtered.dropped},
                                {"rejected_at_load", w.load_report.rejected}};
  write_json(rc.splits_dir() / "drop_report.json", report);
  out << "split: " << manifests.size() << " " << rc.split_kind << " repeats, pool " << pool.size() << ", dropped "
      << filtered.dropped << " samples outside the pool\n";
  return manifests;
}

int cmd_split(const RunConfig& rc, std::ostream& out) {
  const auto w = load_workspace(rc, false);
  make_splits(rc, w, out);
  return 0;
}

int cmd_train(const RunConfig& rc, std::ostream& out) {
  const auto w = load_workspace(rc);
  auto paths = manifest_paths(rc);
  if (paths.empty()) {
    out << "train: no split manifests in " << rc.splits_dir().generic_string() << ", generating them\n";
    make_splits(rc, w, out);
    paths = manifest_paths(rc);
  }
  const TrainConfig cfg = rc.train();
  for (const auto& p : paths) {
    const auto manifest = load_manifest(p);
    const auto split = apply_manifest(w.dataset, manifest);
    const auto trained = train_models(split, w.resources(), cfg);
    const auto dir = repeat_dir(rc, manifest.answers.repeat_index);
    save_models(trained.models, trained.config, dir);
    write_file_atomic(dir / "train_log.csv", training_log_csv(trained.logs));
    out << "train: repeat " << manifest.answers.repeat_index;
    for (const auto& log : trained.logs) {
      out << " | " << to_string(log.kind) << " held-out loss " << log.initial_holdout_loss << " -> "
          << log.best_holdout_loss << " (epoch " << log.best_epoch << ")";
    }
    out << "\n";
  }
  return 0;
}

struct LoadedRepeat {
  DatasetSplit split;
  AlignmentModels models;
};

std::vector<LoadedRepeat> load_repeats(const RunConfig& rc, const Workspace& w) {
  const auto paths = manifest_paths(rc);
  if (paths.empty()) throw ParseError(rc.splits_dir().string(), 0, "no split manifests");
  std::vector<LoadedRepeat> out;
  for (const auto& p : paths) {
    auto manifest = load_manifest(p);
    LoadedRepeat r{apply_manifest(w.dataset, manifest), load_models(repeat_dir(rc, manifest.answers.repeat_index))};
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ScoredSplit> score_repeats(const RunConfig& rc, const Workspace& w, const std::vector<LoadedRepeat>& reps,
                                       std::size_t max_k_r, std::size_t max_k_e) {
  std::vector<ScoredSplit> scored;
  const MaskConfig mask = rc.mask();
  for (const auto& r : reps) {
    ScoringOptions opts{mask.tau, max_k_r, max_k_e, rc.eval_threads()};
    scored.push_back(score_split(r.models, r.split.test, r.split.answers, mask.mode, w.embeddings, w.lexicon, opts));
  }
  return scored;
}

int cmd_eval(const RunConfig& rc, std::ostream& out) {
  const auto w = load_workspace(rc);
  const auto reps = load_repeats(rc, w);
  const MaskConfig mask = rc.mask();
  const auto scored = score_repeats(rc, w, reps, mask.k_r, mask.k_e);
  auto report = evaluate_scored(scored, w.kg, mask);
  report.config = rc.to_json();
  const fs::path path = rc.out.empty() ? rc.reports_dir() / ("eval_" + rc.mode + ".json") : rc.out;
  write_json(path, report.to_json());
  out << "eval[" << rc.mode << " k_r=" << mask.k_r << " k_e=" << mask.k_e << " s=" << mask.score
      << "]: hit@1 " << report.overall.hit1 << " hit@3 " << report.overall.hit3 << " hit@10 "
      << report.overall.hit10 << " mrr " << report.overall.mrr << " mr " << report.overall.mr << " (n="
      << report.overall.n << ", excluded " << report.excluded << ") -> " << path.generic_string() << "\n";
  return 0;
}

int cmd_predict(const RunConfig& rc, std::ostream& out) {
  const auto w = load_workspace(rc);
  const auto reps = load_repeats(rc, w);
  const MaskConfig mask = rc.mask();
  std::string lines;
  std::size_t written = 0, skipped = 0;
  for (const auto& r : reps) {
    std::vector<std::string> pool;
    for (auto& a : candidate_pool(r.split.answers, mask.mode)) {
      if (r.models.answer.targets().contains(a)) pool.push_back(std::move(a));
    }
    if (pool.empty()) continue;
    for (const auto& s : r.split.test.samples) {
      bool oov = false;
      const Vector input = fusion_input(r.split.test, s, w.embeddings, w.lexicon, &oov);
      if (oov) {
        ++skipped;
        continue;
      }
      const auto pred = predict(r.models, w.kg, input, pool, mask);
      nlohmann::ordered_json j{{"id", s.id}, {"repeat", r.split.answers.repeat_index}, {"gold", s.answer}};
      auto& answers = j["answers"] = nlohmann::ordered_json::array();
      for (std::size_t i = 0; i < pred.ranking.size() && i < rc.top_k_output; ++i) {
        const auto& a = pred.ranking[i];
        nlohmann::ordered_json e{{"token", a.token}, {"score", a.score}, {"masked", a.masked}};
        if (a.witness) e["witness"] = {{"h", a.witness->head}, {"r", a.witness->relation}, {"t", a.witness->tail}};
        answers.push_back(std::move(e));
      }
      lines += j.dump();
      lines += '\n';
      ++written;
    }
  }
  const fs::path path = rc.out.empty() ? rc.reports_dir() / ("predictions_" + rc.mode + ".jsonl") : rc.out;
  write_file_atomic(path, lines);
  out << "predict: " << written << " records (" << skipped << " skipped) -> " << path.generic_string() << "\n";
  return 0;
}

nlohmann::ordered_json column_json(const ColumnStats& c) {
  return {{"train_classes", c.train_classes},
          {"test_classes", c.test_classes},
          {"class_overlap", c.class_overlap},
          {"instance_overlap", c.instance_overlap}};
}

int cmd_stats(const RunConfig& rc, std::ostream& out) {
  const auto w = load_workspace(rc, false);
  const auto paths = manifest_paths(rc);
  if (paths.empty()) throw ParseError(rc.splits_dir().string(), 0, "no split manifests");
  nlohmann::ordered_json j;
  j["config"] = rc.to_json();
  auto& reps = j["repeats"] = nlohmann::ordered_json::array();
  for (const auto& p : paths) {
    const auto m = load_manifest(p);
    const auto split = apply_manifest(w.dataset, m);
    const auto st = split_stats(split.train, split.test);
    reps.push_back({{"repeat", m.answers.repeat_index},
                    {"train_instances", st.train_instances},
                    {"test_instances", st.test_instances},
                    {"images", column_json(st.images)},
                    {"questions", column_json(st.questions)},
                    {"answers", column_json(st.answers)},
                    {"support_entities", column_json(st.support_entities)}});
    out << "stats: repeat " << m.answers.repeat_index << " answers " << st.answers.train_classes << "/"
        << st.answers.test_classes << "/" << st.answers.class_overlap << " images " << st.images.train_classes
        << "/" << st.images.test_classes << "/" << st.images.class_overlap << "\n";
  }
  const fs::path path = rc.out.empty() ? rc.reports_dir() / "stats.json" : rc.out;
  write_json(path, j);
  return 0;
}

int cmd_sweep(const RunConfig& rc, std::ostream& out) {
  const auto w = load_workspace(rc);
  const auto reps = load_repeats(rc, w);
  const MaskConfig mask = rc.mask();
  std::vector<SweepRow> rows;
  if (rc.sweep == "scores") {
    const auto scored = score_repeats(rc, w, reps, mask.k_r, mask.k_e);
    double span = 0.0;
    for (const auto& s : scored) span = std::max(span, logit_span(s));
    out << "sweep: largest logit spread " << span << " (mask scores above it are hard)\n";
    rows = mask_score_sweep(scored, w.kg, mask.k_r, mask.k_e, rc.scores);
  } else if (rc.sweep == "grid") {
    const auto max_kr = *std::max_element(rc.kr_list.begin(), rc.kr_list.end());
    const auto max_ke = *std::max_element(rc.ke_list.begin(), rc.ke_list.end());
    const auto scored = score_repeats(rc, w, reps, max_kr, max_ke);
    rows = k_grid_sweep(scored, w.kg, rc.kr_list, rc.ke_list, mask.score);
  } else {
    throw ContractError("unknown sweep '" + rc.sweep + "' (expected scores or grid)");
  }
  const fs::path path = rc.out.empty() ? rc.reports_dir() / ("sweep_" + rc.sweep + "_" + rc.mode + ".csv") : rc.out;
  write_file_atomic(path, sweep_csv(rows));
  out << "sweep: " << rows.size() << " rows -> " << path.generic_string() << "\n";
  return 0;
}

std::string env_name(const std::string& long_name) {
  std::string out = "ZSKG_";
  for (char c : long_name) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  CLI::App app{"Knowledge-graph-masked zero-shot answer ranking"};
  app.name("zskg");
  app.set_config("--config", "", "key=value configuration file; flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--workdir", rc.workdir, "Directory for default input/output paths");
  app.add_option("--kg", rc.kg, "Triple file (default <workdir>/kg.tsv)");
  app.add_option("--embeddings", rc.embeddings, "GloVe-format embeddings (default <workdir>/embeddings.txt)");
  app.add_option("--embedding-dim", rc.embedding_dim, "Embedding dimension (0 infers from the file)");
  app.add_option("--dataset", rc.dataset, "Samples JSONL (default <workdir>/dataset.jsonl)");
  app.add_option("--features", rc.features, "Image features (default <workdir>/features.txt)");
  app.add_option("--splits", rc.splits, "Split manifest directory (default <workdir>/splits)");
  app.add_option("--checkpoints", rc.checkpoints, "Checkpoint directory (default <workdir>/checkpoints)");
  app.add_option("--out", rc.out, "Output file for eval/predict/stats/sweep");
  app.add_option("--base-forms", rc.base_forms, "Lemmatizer base-form word list");
  app.add_option("--aliases", rc.aliases, "Irregular alias file (surface<TAB>canonical)");

  app.add_option("--kr", rc.k_r, "Top-k relations");
  app.add_option("--ke", rc.k_e, "Top-k support entities");
  app.add_option("--mask-score", rc.mask_score, "Additive mask score s");
  app.add_option("--tau", rc.tau, "Softmax temperature");
  app.add_option("--mode", rc.mode, "standard | zsl | gzsl")->check(CLI::IsMember({"standard", "zsl", "gzsl"}));
  app.add_option("--top-k-output", rc.top_k_output, "Answers per prediction record");

  app.add_option("--epochs", rc.epochs, "Training epochs");
  app.add_option("--batch-size", rc.batch_size, "Mini-batch size");
  app.add_option("--patience", rc.patience, "Early-stopping patience (epochs)");
  app.add_option("--seed", rc.seed, "Random seed");
  app.add_option("--hidden-dim", rc.hidden_dim, "Fusion hidden width");
  app.add_option("--common-dim", rc.common_dim, "Common space dimension");
  app.add_flag("--no-projection", rc.no_projection, "Use frozen embeddings directly as targets");

  app.add_option("--top-answers", rc.top_answers, "Answer pool size");
  app.add_option("--repeats", rc.repeats, "Split repeats");
  app.add_option("--split-kind", rc.split_kind, "zero_shot | standard");
  app.add_option("--repeat", rc.repeat, "Restrict to one repeat index");

  app.add_option("--n-entities", rc.synth.n_entities, "synth: entities");
  app.add_option("--n-relations", rc.synth.n_relations, "synth: relations");
  app.add_option("--n-answers", rc.synth.n_answers, "synth: answer entities");
  app.add_option("--n-samples", rc.synth.n_samples, "synth: samples");
  app.add_option("--feature-dim", rc.synth.feature_dim, "synth: image feature dim");
  app.add_option("--synth-embedding-dim", rc.synth.embedding_dim, "synth: embedding dim");
  app.add_option("--noise", rc.synth.noise, "synth: image feature noise level");
  app.add_option("--relations-per-entity", rc.synth.relations_per_entity, "synth: facts per support entity");

  app.add_option("--sweep", rc.sweep, "scores | grid");
  app.add_option("--scores", rc.scores, "Mask scores for a score sweep")->delimiter(',');
  app.add_option("--kr-list", rc.kr_list, "k_r values for a grid sweep")->delimiter(',');
  app.add_option("--ke-list", rc.ke_list, "k_e values for a grid sweep")->delimiter(',');

  app.add_option("--threads", rc.threads, "Evaluation worker threads");
  app.add_flag("--deterministic", rc.deterministic, "Force single-threaded evaluation");

  for (CLI::Option* opt : app.get_options()) {
    const auto& names = opt->get_lnames();
    if (!names.empty() && names.front() != "help" && names.front() != "config") opt->envname(env_name(names.front()));
  }

  const std::pair<const char*, const char*> commands[] = {
      {"synth", "Generate a synthetic KG, dataset, features and embeddings"},
      {"split", "Build answer-pool split manifests"},
      {"train", "Train the three spaces for every split"},
      {"predict", "Write ranked answers with provenance (JSONL)"},
      {"eval", "Write a metric report (JSON)"},
      {"stats", "Write split statistics (JSON)"},
      {"sweep", "Write mask-score or (k_r, k_e) sweeps (CSV)"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "zskg: " << e.what() << "\n";
    return 2;
  }

  rc.command = app.get_subcommands().front()->get_name();
  try {
    if (rc.command == "synth") return cmd_synth(rc, out);
    if (rc.command == "split") return cmd_split(rc, out);
    if (rc.command == "train") return cmd_train(rc, out);
    if (rc.command == "predict") return cmd_predict(rc, out);
    if (rc.command == "eval") return cmd_eval(rc, out);
    if (rc.command == "stats") return cmd_stats(rc, out);
    if (rc.command == "sweep") return cmd_sweep(rc, out);
  } catch (const std::exception& e) {
    err << "zskg " << rc.command << ": " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace zskg
