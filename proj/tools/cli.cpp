#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nbmoe/analysis.hpp"
#include "nbmoe/data.hpp"
#include "nbmoe/errors.hpp"
#include "nbmoe/evaluation.hpp"
#include "nbmoe/hpo.hpp"
#include "nbmoe/model.hpp"
#include "nbmoe/stl.hpp"
#include "nbmoe/training.hpp"

namespace nbmoe::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kBaseline = "seasonal-naive";

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

std::uint64_t parse_u64(std::string_view s, std::string_view what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError("invalid " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return v;
}

// "1,2,5" or "0-9" or a mix.
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(parse_u64(item, "seed"));
      continue;
    }
    const auto lo = parse_u64(std::string_view(item).substr(0, dash), "seed range");
    const auto hi = parse_u64(std::string_view(item).substr(dash + 1), "seed range");
    if (hi < lo) throw ConfigError("seed range '" + item + "' is decreasing");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw ConfigError("--seeds lists no seeds");
  std::set<std::uint64_t> uniq(seeds.begin(), seeds.end());
  if (uniq.size() != seeds.size()) throw ConfigError("--seeds contains duplicates");
  return seeds;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// Flags shared by the data-consuming subcommands.
struct DataArgs {
  std::string data;
  std::string manifest;
  std::string series_ids;

  void attach(CLI::App& app, bool series_ids_flag) {
    app.add_option("--data", data, "Long-format CSV (unique_id, ds, y)")->required()->check(CLI::ExistingFile);
    app.add_option("--manifest", manifest, "Dataset manifest JSON (name, frequency, period, horizon)")
        ->required()
        ->check(CLI::ExistingFile);
    if (series_ids_flag) app.add_option("--series-ids", series_ids, "Comma-separated series ids");
  }
};

struct LoadedData {
  data::DatasetManifest manifest;
  std::vector<data::TimeSeries> series;
  data::SplitDataset split;
};

LoadedData load_data(const DataArgs& args, std::ostream& err) {
  LoadedData d;
  d.manifest = data::DatasetManifest::load(args.manifest);
  d.series = data::load_long_csv(args.data, d.manifest.period);
  d.split = data::split(d.series, d.manifest.horizon);
  for (const auto& id : d.split.skipped)
    err << "warning: series " << id << " is shorter than 2H+1 = " << 2 * d.manifest.horizon + 1 << "; skipped\n";
  if (d.split.series.empty()) {
    throw DataError("no series in " + args.data + " is long enough for horizon " +
                    std::to_string(d.manifest.horizon));
  }
  return d;
}

// Hyperparameter flags that override the config file.
struct Overrides {
  std::size_t input_multiplier = 0;
  std::size_t mlp_units = 0;
  std::size_t mlp_layers = 0;
  std::size_t blocks_per_stack = 0;
  std::size_t n_experts = 0;
  std::size_t top_k = 0;
  std::size_t max_steps = 0;
  std::size_t batch_size = 0;
  std::size_t windows_batch_size = 0;
  std::size_t patience = 0;
  double learning_rate = 0.0;
  std::size_t eval_interval = 0;

  void attach(CLI::App& app) {
    app.add_option("--input-multiplier", input_multiplier, "Lookback L = multiplier * H (1..5)");
    app.add_option("--mlp-units", mlp_units, "Units per FC layer");
    app.add_option("--mlp-layers", mlp_layers, "FC layers per block trunk");
    app.add_option("--blocks-per-stack", blocks_per_stack, "Blocks per stack");
    app.add_option("--n-experts", n_experts, "Routed experts (moe-* variants)");
    app.add_option("--top-k", top_k, "Experts selected per input (moe-* variants)");
    app.add_option("--max-steps", max_steps, "Training steps");
    app.add_option("--batch-size", batch_size, "Series per batch");
    app.add_option("--windows-batch-size", windows_batch_size, "Windows per batch");
    app.add_option("--patience", patience, "Early-stopping patience in evaluations");
    app.add_option("--learning-rate", learning_rate, "Adam learning rate");
    app.add_option("--eval-interval", eval_interval, "Steps between validation evaluations");
  }
};

struct ResolvedConfig {
  model::Variant variant = model::Variant::NBeatsMoe;
  model::ModelConfig model;
  train::TrainConfig train;
};

ResolvedConfig resolve_config(const std::string& config_path, const std::string& variant_name,
                              const Overrides& o, std::size_t horizon) {
  ResolvedConfig r;
  if (!variant_name.empty()) r.variant = model::variant_from_string(variant_name);
  if (!config_path.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(config_path));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config " + config_path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config " + config_path + " must be a JSON object");
    for (const auto& [key, _] : j.items()) {
      if (key != "model" && key != "train" && key != "variant")
        throw ConfigError("config " + config_path + ": unknown field '" + key + "'");
    }
    if (j.contains("model")) r.model = model::ModelConfig::from_json(j["model"].dump());
    if (j.contains("train")) r.train = train::TrainConfig::from_json(j["train"].dump());
    if (j.contains("variant") && variant_name.empty())
      r.variant = model::variant_from_string(j["variant"].get<std::string>());
  }
  auto& m = r.model;
  m.horizon = horizon;
  if (o.input_multiplier) m.lookback_multiplier = o.input_multiplier;
  if (o.mlp_units || o.mlp_layers) {
    const std::size_t units = o.mlp_units ? o.mlp_units : m.mlp_units.back();
    const std::size_t layers = o.mlp_layers ? o.mlp_layers : m.mlp_units.size();
    m.mlp_units.assign(layers, units);
  }
  if (o.blocks_per_stack) m.blocks_per_stack = o.blocks_per_stack;

  std::size_t experts = m.block_variant.is_moe() ? m.block_variant.n_experts : 4;
  std::size_t k = m.block_variant.is_moe() ? m.block_variant.top_k : 2;
  if (o.n_experts) experts = o.n_experts;
  if (o.top_k) k = o.top_k;
  const auto widths = m.block_variant.expert_widths;
  model::apply_variant(m, r.variant, experts, k);
  if (r.variant == model::Variant::MoeScaled && widths.size() == experts)
    m.block_variant.expert_widths = widths;

  auto& t = r.train;
  if (o.max_steps) t.max_steps = o.max_steps;
  if (o.batch_size) t.batch_size = o.batch_size;
  if (o.windows_batch_size) t.windows_batch_size = o.windows_batch_size;
  if (o.patience) t.patience = o.patience;
  if (o.learning_rate > 0.0) t.learning_rate = o.learning_rate;
  if (o.eval_interval) t.eval_interval = o.eval_interval;
  m.validate();
  t.validate();
  return r;
}

ordered_json config_json(const ResolvedConfig& r) {
  ordered_json j;
  j["variant"] = std::string(model::to_string(r.variant));
  j["model"] = ordered_json::parse(r.model.to_json());
  j["train"] = ordered_json::parse(r.train.to_json());
  return j;
}

struct Checkpoint {
  fs::path dir;
  std::uint64_t seed = 0;
  std::string variant;
};

// A run directory holds resolved_config.json and seed_<s>/ subdirectories;
// a seed directory can also be passed directly.
std::vector<Checkpoint> find_checkpoints(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("checkpoint directory not found: " + dir.string());
  auto variant_of = [](const fs::path& run_dir) -> std::string {
    const auto cfg = run_dir / "resolved_config.json";
    if (!fs::exists(cfg)) return "";
    return nlohmann::json::parse(read_file(cfg)).value("variant", std::string());
  };
  auto require = [](const fs::path& seed_dir) {
    for (const char* f : {"checkpoint.json", "model_config.json"}) {
      if (!fs::exists(seed_dir / f)) throw DataError("missing checkpoint file: " + (seed_dir / f).string());
    }
  };
  auto seed_of = [](const fs::path& seed_dir) {
    const std::string name = seed_dir.filename().string();
    return parse_u64(std::string_view(name).substr(5), "seed directory");
  };

  std::vector<Checkpoint> out;
  if (dir.filename().string().rfind("seed_", 0) == 0) {
    require(dir);
    out.push_back({dir, seed_of(dir), variant_of(dir.parent_path())});
    return out;
  }
  const std::string variant = variant_of(dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_directory() || entry.path().filename().string().rfind("seed_", 0) != 0) continue;
    require(entry.path());
    out.push_back({entry.path(), seed_of(entry.path()), variant});
  }
  if (out.empty()) throw DataError("no seed_<s>/ checkpoints under " + dir.string());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.seed < b.seed; });
  return out;
}

model::Model load_model(const fs::path& seed_dir) {
  auto cfg = model::ModelConfig::from_json(read_file(seed_dir / "model_config.json"));
  model::Model m(cfg, 0);
  m.parameters().load(seed_dir / "checkpoint.json");
  return m;
}

std::vector<const data::TimeSeries*> select_series(const std::vector<data::TimeSeries>& all,
                                                   const std::string& ids) {
  std::vector<const data::TimeSeries*> out;
  if (ids.empty()) {
    for (const auto& s : all) out.push_back(&s);
    return out;
  }
  for (const auto& id : split_list(ids)) {
    auto it = std::find_if(all.begin(), all.end(), [&](const auto& s) { return s.id == id; });
    if (it == all.end()) throw DataError("series id not found: " + id);
    out.push_back(&*it);
  }
  return out;
}

std::string frequency_label(const data::DatasetManifest& m) {
  std::string f(data::to_string(m.frequency));
  if (!f.empty()) f[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(f[0])));
  return f + "/" + std::to_string(m.horizon);
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  DataArgs data;
  Overrides overrides;
  std::string config;
  std::string variant;
  std::string seeds = "0";
  std::string out;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  if (a.variant == kBaseline) throw ConfigError("--variant seasonal-naive has nothing to train; use evaluate");
  const auto d = load_data(a.data, err);
  const auto seeds = parse_seeds(a.seeds);
  const auto cfg = resolve_config(a.config, a.variant, a.overrides, d.manifest.horizon);

  const fs::path root(a.out);
  ordered_json resolved = config_json(cfg);
  resolved["command"] = "train";
  resolved["data"] = a.data.data;
  resolved["manifest"] = ordered_json::parse(d.manifest.to_json());
  resolved["seeds"] = seeds;
  write_file(root / "resolved_config.json", resolved.dump(2));

  for (auto seed : seeds) {
    const fs::path dir = root / ("seed_" + std::to_string(seed));
    fs::create_directories(dir);
    train::TrainConfig tc = cfg.train;
    tc.seed = seed;
    model::Model m(cfg.model, seed);
    std::ofstream log(dir / "train_log.ndjson", std::ios::binary);
    auto report = train::train(m, d.split, tc, [&](const train::LogRecord& r) { log << r.to_json() << '\n'; });
    m.parameters().save(dir / "checkpoint.json");
    write_file(dir / "model_config.json", cfg.model.to_json());
    write_file(dir / "train_report.json", report.to_json());
    out << "seed " << seed << ": steps=" << report.steps_run << " best_val_mae=" << fmt(report.best_val_loss)
        << " -> " << dir.string() << '\n';
  }
  return kOk;
}

// ---- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  DataArgs data;
  std::vector<std::string> checkpoint_dirs;
  std::string variant;
  std::string out;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  if (a.checkpoint_dirs.empty() && a.variant.empty())
    throw ConfigError("evaluate needs --checkpoint-dir or --variant seasonal-naive");
  if (!a.variant.empty() && a.variant != kBaseline)
    throw ConfigError("evaluate --variant only accepts seasonal-naive; pass trained models via --checkpoint-dir");
  const auto d = load_data(a.data, err);
  const std::string freq(data::to_string(d.manifest.frequency));

  std::vector<eval::ResultRow> rows;
  if (!a.variant.empty()) {
    eval::SeasonalNaiveForecaster naive(d.manifest.period);
    const auto r = eval::evaluate_model(naive, d.split, d.manifest.name, freq);
    rows.push_back({d.manifest.name, freq, naive.name(), "0", r.smape_percent});
  }
  for (const auto& dir : a.checkpoint_dirs) {
    for (const auto& ck : find_checkpoints(dir)) {
      const auto m = load_model(ck.dir);
      if (m.config().horizon != d.manifest.horizon) {
        throw ConfigError("checkpoint " + ck.dir.string() + " has horizon " + std::to_string(m.config().horizon) +
                          " but the manifest horizon is " + std::to_string(d.manifest.horizon));
      }
      const std::string name = ck.variant.empty() ? ck.dir.parent_path().filename().string() : ck.variant;
      eval::ModelForecaster f(m, name);
      const auto r = eval::evaluate_model(f, d.split, d.manifest.name, freq);
      rows.push_back({d.manifest.name, freq, name, std::to_string(ck.seed), r.smape_percent});
    }
  }
  rows = eval::with_median_rows(std::move(rows));

  std::vector<eval::TableCell> cells;
  for (const auto& r : rows) {
    if (r.seed != "median") continue;
    cells.push_back({r.dataset, frequency_label(d.manifest), r.model, r.smape});
  }
  const fs::path root(a.out);
  std::ostringstream csv;
  eval::write_results_csv(csv, rows);
  write_file(root / "results.csv", csv.str());
  const std::string table = eval::markdown_table(cells);
  write_file(root / "table.md", table);
  out << table;
  return kOk;
}

// ---- tune ------------------------------------------------------------------

struct TuneArgs {
  DataArgs data;
  Overrides overrides;
  std::string config;
  std::string variant;
  std::string search_space;
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out;
};

int cmd_tune(const TuneArgs& a, std::ostream& out, std::ostream& err) {
  if (a.variant == kBaseline) throw ConfigError("--variant seasonal-naive has no hyperparameters to tune");
  const auto d = load_data(a.data, err);
  const auto base = resolve_config(a.config, a.variant, a.overrides, d.manifest.horizon);
  const auto space = a.search_space.empty() ? hpo::SearchSpace::defaults(base.variant)
                                            : hpo::SearchSpace::from_json(read_file(a.search_space), base.variant);
  const auto tuning = d.split.tuning_view();
  const auto evaluator = hpo::make_training_evaluator(tuning);
  const auto result =
      hpo::run_search(space, base.variant, base.model, base.train, a.trials, a.seed, evaluator, a.threads);

  const fs::path root(a.out);
  std::ostringstream csv;
  hpo::write_trials_csv(csv, result);
  write_file(root / "trials.csv", csv.str());
  write_file(root / "search_space.json", space.to_json());
  ResolvedConfig best{base.variant, result.best().config.model, result.best().config.train};
  best.train.seed = 0;
  write_file(root / "best_config.json", config_json(best).dump(2));
  std::size_t failed = 0;
  for (const auto& t : result.trials) failed += t.failed ? 1 : 0;
  out << "trials=" << result.trials.size() << " failed=" << failed << " best=" << result.best_index
      << " val_smape=" << fmt(result.best().val_smape) << '\n';
  return kOk;
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
  DataArgs data;
  std::string checkpoint;
  std::string out;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  const auto d = load_data(a.data, err);
  const auto cks = find_checkpoints(a.checkpoint);
  if (cks.size() != 1) throw ConfigError("--checkpoint must name one seed_<s>/ directory");
  const auto m = load_model(cks.front().dir);
  if (!m.config().output_gating) {
    throw ConfigError("checkpoint " + cks.front().dir.string() +
                      " has no output gate; analyze needs a model trained with --variant nbeats-moe");
  }

  // Specialization uses the history visible at test time (train + val).
  std::vector<data::TimeSeries> histories;
  for (const auto& s : d.split.series) histories.push_back({s.id, s.history(), s.period, std::nullopt});
  const auto table = analysis::measure_specialization(m, histories, d.manifest.period, d.manifest.name);

  const fs::path root(a.out);
  std::ostringstream csv;
  analysis::write_specialization_csv(csv, {table});
  write_file(root / "specialization.csv", csv.str());
  out << csv.str();

  if (!a.data.series_ids.empty()) {
    for (const auto& id : split_list(a.data.series_ids)) {
      auto it = std::find_if(d.split.series.begin(), d.split.series.end(), [&](const auto& s) { return s.id == id; });
      if (it == d.split.series.end()) throw DataError("series id not found (or too short to split): " + id);
      const auto exp = analysis::export_decomposition(m, id, it->history(), it->test);
      write_file(root / ("decomposition_" + id + ".json"), exp.to_json());
      std::ostringstream dcsv;
      exp.write_csv(dcsv);
      write_file(root / ("decomposition_" + id + ".csv"), dcsv.str());
    }
  }
  return kOk;
}

// ---- decompose-stl ---------------------------------------------------------

struct StlArgs {
  DataArgs data;
  std::string out;
};

int cmd_decompose_stl(const StlArgs& a, std::ostream& out) {
  const auto manifest = data::DatasetManifest::load(a.data.manifest);
  const auto series = data::load_long_csv(a.data.data, manifest.period);
  const fs::path root(a.out);
  std::size_t written = 0;
  for (const auto* s : select_series(series, a.data.series_ids)) {
    const auto c = analysis::stl_decompose(s->values, manifest.period);
    std::ostringstream csv;
    csv << "step,value,trend,seasonal,residual\n";
    for (std::size_t t = 0; t < s->values.size(); ++t) {
      csv << t + 1 << ',' << fmt(s->values[t]) << ',' << fmt(c.trend[t]) << ',' << fmt(c.seasonal[t]) << ','
          << fmt(c.residual[t]) << '\n';
    }
    write_file(root / ("stl_" + s->id + ".csv"), csv.str());
    ++written;
  }
  out << "decomposed " << written << " series into " << root.string() << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"N-BEATS with mixture-of-experts gating: train, evaluate, tune and analyze", "nbmoe"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train one model per seed");
  train_args.data.attach(*train_cmd, false);
  train_args.overrides.attach(*train_cmd);
  train_cmd->add_option("--config", train_args.config, "JSON config: {variant, model, train}")->check(CLI::ExistingFile);
  train_cmd->add_option("--variant,--model", train_args.variant,
                        "nbeats | nbeats-moe | moe-block | moe-shared | moe-scaled");
  train_cmd->add_option("--seeds", train_args.seeds, "Seeds, e.g. 1,2 or 0-9");
  train_cmd->add_option("--out", train_args.out, "Output directory")->required();

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score checkpoints and baselines on the test window");
  eval_args.data.attach(*eval_cmd, false);
  eval_cmd->add_option("--checkpoint-dir", eval_args.checkpoint_dirs, "Run directory written by train (repeatable)");
  eval_cmd->add_option("--variant,--model", eval_args.variant, "seasonal-naive to include the baseline");
  eval_cmd->add_option("--out", eval_args.out, "Output directory")->required();

  TuneArgs tune_args;
  auto* tune_cmd = app.add_subcommand("tune", "Random search over the hyperparameter grid");
  tune_args.data.attach(*tune_cmd, false);
  tune_args.overrides.attach(*tune_cmd);
  tune_cmd->add_option("--config", tune_args.config, "Base JSON config")->check(CLI::ExistingFile);
  tune_cmd->add_option("--variant,--model", tune_args.variant, "Model family to tune");
  tune_cmd->add_option("--search-space", tune_args.search_space, "JSON grid overrides")->check(CLI::ExistingFile);
  tune_cmd->add_option("--trials", tune_args.trials, "Number of sampled configurations")->check(CLI::PositiveNumber);
  tune_cmd->add_option("--seed", tune_args.seed, "Base seed; trial i uses seed + i");
  tune_cmd->add_option("--threads", tune_args.threads, "Concurrent trials")->check(CLI::PositiveNumber);
  tune_cmd->add_option("--out", tune_args.out, "Output directory")->required();

  AnalyzeArgs analyze_args;
  auto* analyze_cmd = app.add_subcommand("analyze", "Stack specialization and forecast decomposition");
  analyze_args.data.attach(*analyze_cmd, true);
  analyze_cmd->add_option("--checkpoint", analyze_args.checkpoint, "seed_<s>/ directory of a gated model")
      ->required();
  analyze_cmd->add_option("--out", analyze_args.out, "Output directory")->required();

  StlArgs stl_args;
  auto* stl_cmd = app.add_subcommand("decompose-stl", "Write STL components per series");
  stl_args.data.attach(*stl_cmd, true);
  stl_cmd->add_option("--out", stl_args.out, "Output directory")->required();

  std::vector<std::string> argv_store{"nbmoe"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_args, out, err);
    if (eval_cmd->parsed()) return cmd_evaluate(eval_args, out, err);
    if (tune_cmd->parsed()) return cmd_tune(tune_args, out, err);
    if (analyze_cmd->parsed()) return cmd_analyze(analyze_args, out, err);
    if (stl_cmd->parsed()) return cmd_decompose_stl(stl_args, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const DimensionError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const DivergenceError& e) {
    err << "training diverged: " << e.what() << '\n';
    return kDivergence;
  } catch (const NumericError& e) {
    err << "training diverged: " << e.what() << '\n';
    return kDivergence;
  } catch (const nlohmann::json::exception& e) {
    err << "data error: malformed JSON: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace nbmoe::cli
