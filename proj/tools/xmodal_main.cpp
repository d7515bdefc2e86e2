// xmodal command-line front-end: synthetic data generation, training of the
// ablation scenarios, retrieval evaluation, lambda sweeps, scenario
// comparison, and ad-hoc nearest-neighbor queries.
//
// Exit codes: 0 success, 1 usage error, 2 data/config error, 3 runtime error.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "xmodal/checkpoint.hpp"
#include "xmodal/config_json.hpp"
#include "xmodal/dataset.hpp"
#include "xmodal/error.hpp"
#include "xmodal/evaluation.hpp"
#include "xmodal/optimizer.hpp"
#include "xmodal/serialize.hpp"
#include "xmodal/synthetic.hpp"

namespace {

using nlohmann::json;
using namespace xmodal;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Configuration file

struct CliConfig {
  TrainConfig train;
  std::vector<std::size_t> hidden_dims;
  std::size_t latent_dim = 64;
  Activation activation = Activation::Relu;
  std::string train_dataset;
  std::string validation_dataset;
  std::string test_dataset;
};

void reject_unknown_keys(const json& j, const std::vector<std::string>& known,
                         const std::string& context) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw DataError(context + ": unknown key '" + key + "'");
    }
  }
}

CliConfig load_cli_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path + ": invalid JSON: " + e.what());
  }
  reject_unknown_keys(
      j,
      {"scenario", "alpha", "lambda", "alpha_pos", "alpha_neg",
       "learning_rate", "epochs", "batch_size", "labeled_fraction",
       "freeze_branch", "unfreeze_epoch", "eval_every", "seed", "encoder",
       "train_dataset", "validation_dataset", "test_dataset"},
      path);

  CliConfig c;
  try {
    if (j.contains("scenario"))
      c.train.scenario = parse_scenario(j["scenario"].get<std::string>());
    if (j.contains("alpha")) c.train.loss.alpha = j["alpha"].get<double>();
    if (j.contains("lambda")) c.train.loss.lambda = j["lambda"].get<double>();
    if (j.contains("alpha_pos"))
      c.train.loss.alpha_pos = j["alpha_pos"].get<double>();
    if (j.contains("alpha_neg"))
      c.train.loss.alpha_neg = j["alpha_neg"].get<double>();
    if (j.contains("learning_rate"))
      c.train.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("epochs")) c.train.epochs = j["epochs"].get<std::size_t>();
    if (j.contains("batch_size"))
      c.train.batch_size = j["batch_size"].get<std::size_t>();
    if (j.contains("labeled_fraction"))
      c.train.labeled_fraction = j["labeled_fraction"].get<double>();
    if (j.contains("freeze_branch"))
      c.train.freeze_branch = parse_freeze(j["freeze_branch"].get<std::string>());
    if (j.contains("unfreeze_epoch"))
      c.train.unfreeze_epoch = j["unfreeze_epoch"].get<std::size_t>();
    if (j.contains("eval_every"))
      c.train.eval_every = j["eval_every"].get<std::size_t>();
    if (j.contains("seed")) c.train.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("encoder")) {
      const json& e = j["encoder"];
      reject_unknown_keys(e, {"hidden_dims", "latent_dim", "activation"},
                          path + ": encoder");
      if (e.contains("hidden_dims"))
        c.hidden_dims = e["hidden_dims"].get<std::vector<std::size_t>>();
      if (e.contains("latent_dim"))
        c.latent_dim = e["latent_dim"].get<std::size_t>();
      if (e.contains("activation"))
        c.activation = parse_activation(e["activation"].get<std::string>());
    }
    if (j.contains("train_dataset"))
      c.train_dataset = j["train_dataset"].get<std::string>();
    if (j.contains("validation_dataset"))
      c.validation_dataset = j["validation_dataset"].get<std::string>();
    if (j.contains("test_dataset"))
      c.test_dataset = j["test_dataset"].get<std::string>();
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  } catch (const ConfigError& e) {
    throw DataError(path + ": " + e.what());
  }
  return c;
}

std::vector<std::size_t> parse_dims_list(const std::string& text) {
  std::vector<std::size_t> dims;
  if (text.empty() || text == "none") return dims;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto stop = comma == std::string::npos ? text.size() : comma;
    const std::string item = text.substr(start, stop - start);
    try {
      dims.push_back(std::stoul(item));
    } catch (const std::exception&) {
      throw UsageError("invalid dimension '" + item + "' in list '" + text +
                       "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return dims;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto stop = comma == std::string::npos ? text.size() : comma;
    const std::string item = text.substr(start, stop - start);
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("invalid number '" + item + "' in list '" + text + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return values;
}

Dataset load_dataset_checked(const std::string& path, const char* role) {
  if (path.empty()) {
    throw UsageError(std::string("no ") + role +
                     " dataset given (config key or flag)");
  }
  return load_dataset(path);
}

EncoderSpec make_spec(const CliConfig& config, const Dataset& ds) {
  EncoderSpec spec;
  spec.input_dim_a = ds.dim_a;
  spec.input_dim_b = ds.dim_b;
  spec.hidden_dims = config.hidden_dims;
  spec.latent_dim = config.latent_dim;
  spec.activation = config.activation;
  return spec;
}

// ---------------------------------------------------------------------------
// Output formatting

void write_log_header(std::ostream& out) {
  out << "# epoch\tloss\tbeta_r\tbeta_s\tupdate_norm\tval_medr_ab\t"
         "val_medr_ba\n";
}

void write_log_line(std::ostream& out, const EpochRecord& rec) {
  out << rec.epoch << '\t' << format_double(rec.mean_loss) << '\t'
      << format_double(rec.mean_beta_r) << '\t'
      << format_double(rec.mean_beta_s) << '\t'
      << format_double(rec.mean_update_norm) << '\t'
      << format_double(rec.val_medr_ab) << '\t'
      << format_double(rec.val_medr_ba) << '\n';
  out.flush();
}

void print_direction_block(std::ostream& out, const std::string& name,
                           const DirectionMetrics& m) {
  out << name << ".medr_mean: " << format_double(m.medr_mean) << '\n'
      << name << ".medr_std: " << format_double(m.medr_std) << '\n'
      << name << ".r1_mean: " << format_double(m.r1_mean) << '\n'
      << name << ".r1_std: " << format_double(m.r1_std) << '\n'
      << name << ".r5_mean: " << format_double(m.r5_mean) << '\n'
      << name << ".r5_std: " << format_double(m.r5_std) << '\n'
      << name << ".r10_mean: " << format_double(m.r10_mean) << '\n'
      << name << ".r10_std: " << format_double(m.r10_std) << '\n';
}

void print_report_block(std::ostream& out, const RetrievalReport& r) {
  out << "subset_size: " << r.subset_size << '\n'
      << "n_subsets: " << r.n_subsets << '\n'
      << "seed: " << r.seed << '\n';
  print_direction_block(out, "a_to_b", r.a_to_b);
  print_direction_block(out, "b_to_a", r.b_to_a);
}

void write_report_row(std::ostream& out, const std::string& prefix,
                      const std::string& direction,
                      const DirectionMetrics& m) {
  if (!prefix.empty()) out << prefix << '\t';
  out << direction << '\t' << format_double(m.medr_mean) << '\t'
      << format_double(m.medr_std) << '\t' << format_double(m.r1_mean) << '\t'
      << format_double(m.r1_std) << '\t' << format_double(m.r5_mean) << '\t'
      << format_double(m.r5_std) << '\t' << format_double(m.r10_mean) << '\t'
      << format_double(m.r10_std) << '\n';
}

void write_report_rows(std::ostream& out, const std::string& prefix,
                       const RetrievalReport& r) {
  write_report_row(out, prefix, "a_to_b", r.a_to_b);
  write_report_row(out, prefix, "b_to_a", r.b_to_a);
}

constexpr const char* kReportHeader =
    "direction\tmedr_mean\tmedr_std\tr1_mean\tr1_std\tr5_mean\tr5_std\t"
    "r10_mean\tr10_std";

std::size_t auto_subset_size(std::size_t requested, std::size_t available) {
  if (requested > 0) return requested;
  return std::min<std::size_t>(1000, available);
}

// ---------------------------------------------------------------------------
// Commands

struct GenOptions {
  std::string spec_file;
  std::string out_dir;
  SyntheticSpec spec;
};

int cmd_gen(const GenOptions& opt) {
  SyntheticSpec spec = opt.spec;
  if (!opt.spec_file.empty()) {
    std::ifstream in(opt.spec_file);
    if (!in) throw DataError("cannot open spec file '" + opt.spec_file + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw DataError(opt.spec_file + ": invalid JSON: " + e.what());
    }
    reject_unknown_keys(j,
                        {"n_classes", "pairs_per_class", "latent_dim_true",
                         "dim_a", "dim_b", "within_class_noise",
                         "cross_modal_noise", "unlabeled_fraction", "seed"},
                        opt.spec_file);
    try {
      if (j.contains("n_classes")) spec.n_classes = j["n_classes"];
      if (j.contains("pairs_per_class")) spec.pairs_per_class = j["pairs_per_class"];
      if (j.contains("latent_dim_true")) spec.latent_dim_true = j["latent_dim_true"];
      if (j.contains("dim_a")) spec.dim_a = j["dim_a"];
      if (j.contains("dim_b")) spec.dim_b = j["dim_b"];
      if (j.contains("within_class_noise")) spec.within_class_noise = j["within_class_noise"];
      if (j.contains("cross_modal_noise")) spec.cross_modal_noise = j["cross_modal_noise"];
      if (j.contains("unlabeled_fraction")) spec.unlabeled_fraction = j["unlabeled_fraction"];
      if (j.contains("seed")) spec.seed = j["seed"];
    } catch (const json::exception& e) {
      throw DataError(opt.spec_file + ": " + e.what());
    }
  }
  const SyntheticSplits splits = generate_synthetic(spec);
  std::filesystem::create_directories(opt.out_dir);
  const std::filesystem::path dir(opt.out_dir);
  save_dataset(splits.train, dir / "train.pairs");
  save_dataset(splits.validation, dir / "validation.pairs");
  save_dataset(splits.test, dir / "test.pairs");
  std::cout << "train\t" << splits.train.size() << '\n'
            << "validation\t" << splits.validation.size() << '\n'
            << "test\t" << splits.test.size() << '\n';
  return 0;
}

struct TrainOptions {
  std::string config_file;
  std::string out_checkpoint;
  std::string log_file;
};

int cmd_train(const CliConfig& config, const TrainOptions& opt) {
  const Dataset train_set = load_dataset_checked(config.train_dataset, "train");
  train_set.validate();
  const Dataset val_set =
      load_dataset_checked(config.validation_dataset, "validation");
  val_set.validate();
  const EncoderSpec spec = make_spec(config, train_set);

  std::ofstream log_stream;
  std::ostream* log = &std::cout;
  if (!opt.log_file.empty()) {
    log_stream.open(opt.log_file);
    if (!log_stream) {
      throw DataError("cannot open log file '" + opt.log_file + "'");
    }
    log = &log_stream;
  }
  write_log_header(*log);
  std::size_t fallback_total = 0;
  const TrainResult result =
      train(config.train, spec, train_set, val_set,
            [log, &fallback_total](const EpochRecord& rec) {
              write_log_line(*log, rec);
              fallback_total += rec.quota_fallback_batches;
            });
  if (fallback_total > 0) {
    std::cerr << "note: " << fallback_total
              << " batches fell back from the labeled/unlabeled quota "
                 "because a pool ran dry\n";
  }
  save_checkpoint(result.best_params, config.train, opt.out_checkpoint);
  std::cout << "best_epoch: " << result.history.best_epoch << '\n'
            << "best_val_medr: " << format_double(result.history.best_val_medr)
            << '\n'
            << "checkpoint: " << opt.out_checkpoint << '\n';
  return 0;
}

struct EvalOptions {
  std::string checkpoint;
  std::string dataset;
  std::size_t subset_size = 0;  // 0 = min(1000, dataset size)
  std::size_t n_subsets = 10;
  std::uint64_t seed = 1;
  std::string report_file;
};

int cmd_eval(const EvalOptions& opt) {
  const Checkpoint ckpt = load_checkpoint(opt.checkpoint);
  const Dataset ds = load_dataset(opt.dataset);
  ds.validate();
  const std::size_t subset = auto_subset_size(opt.subset_size, ds.size());
  const RetrievalReport report =
      subset_protocol(ckpt.params, ds, subset, opt.n_subsets, opt.seed);
  print_report_block(std::cout, report);
  if (!opt.report_file.empty()) {
    std::ofstream out(opt.report_file);
    if (!out) {
      throw DataError("cannot open report file '" + opt.report_file + "'");
    }
    out << "# " << kReportHeader << '\n';
    write_report_rows(out, "", report);
  }
  return 0;
}

struct SweepOptions {
  std::string values;
  std::string report_file;
};

int cmd_sweep_lambda(const CliConfig& config, const SweepOptions& opt) {
  const auto lambdas = parse_double_list(opt.values);
  if (lambdas.empty()) throw UsageError("no lambda values given");
  const Dataset train_set = load_dataset_checked(config.train_dataset, "train");
  train_set.validate();
  const Dataset val_set =
      load_dataset_checked(config.validation_dataset, "validation");
  val_set.validate();
  const EncoderSpec spec = make_spec(config, train_set);

  std::ostringstream rows;
  std::cout << "lambda\tval_medr_ab\tval_medr_ba\tval_medr_mean\n";
  for (double lambda : lambdas) {
    TrainConfig cfg = config.train;
    cfg.loss.lambda = lambda;
    const TrainResult result = train(cfg, spec, train_set, val_set);
    const auto& best = result.history.epochs.at(result.history.best_epoch - 1);
    std::ostringstream row;
    row << format_double(lambda) << '\t' << format_double(best.val_medr_ab)
        << '\t' << format_double(best.val_medr_ba) << '\t'
        << format_double(result.history.best_val_medr) << '\n';
    std::cout << row.str() << std::flush;
    rows << row.str();
  }
  if (!opt.report_file.empty()) {
    std::ofstream out(opt.report_file);
    if (!out) {
      throw DataError("cannot open report file '" + opt.report_file + "'");
    }
    out << "# lambda\tval_medr_ab\tval_medr_ba\tval_medr_mean\n" << rows.str();
  }
  return 0;
}

struct CompareOptions {
  std::string scenarios;
  std::size_t subset_size = 0;
  std::size_t n_subsets = 10;
  std::uint64_t eval_seed = 1;
  std::string report_file;
};

int cmd_compare(const CliConfig& config, const CompareOptions& opt) {
  std::vector<Scenario> scenarios;
  {
    std::size_t start = 0;
    const std::string& text = opt.scenarios;
    while (start <= text.size()) {
      const auto comma = text.find(',', start);
      const auto stop = comma == std::string::npos ? text.size() : comma;
      const std::string name = text.substr(start, stop - start);
      try {
        scenarios.push_back(parse_scenario(name));
      } catch (const ConfigError& e) {
        throw UsageError(e.what());
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  if (scenarios.empty()) throw UsageError("no scenarios given");

  const Dataset train_set = load_dataset_checked(config.train_dataset, "train");
  train_set.validate();
  const Dataset val_set =
      load_dataset_checked(config.validation_dataset, "validation");
  val_set.validate();
  const Dataset test_set = load_dataset_checked(config.test_dataset, "test");
  test_set.validate();
  const EncoderSpec spec = make_spec(config, train_set);
  const std::size_t subset = auto_subset_size(opt.subset_size, test_set.size());

  std::ostringstream rows;
  std::cout << "scenario\t" << kReportHeader << '\n';
  for (Scenario scenario : scenarios) {
    TrainConfig cfg = config.train;
    cfg.scenario = scenario;
    const TrainResult result = train(cfg, spec, train_set, val_set);
    const RetrievalReport report = subset_protocol(
        result.best_params, test_set, subset, opt.n_subsets, opt.eval_seed);
    std::ostringstream row;
    write_report_rows(row, scenario_name(scenario), report);
    std::cout << row.str() << std::flush;
    rows << row.str();
  }
  if (!opt.report_file.empty()) {
    std::ofstream out(opt.report_file);
    if (!out) {
      throw DataError("cannot open report file '" + opt.report_file + "'");
    }
    out << "# scenario\t" << kReportHeader << '\n' << rows.str();
  }
  return 0;
}

struct QueryOptions {
  std::string checkpoint;
  std::string dataset;
  std::string modality;
  std::string features;
  std::string id;
  std::size_t top = 10;
};

int cmd_query(const QueryOptions& opt) {
  if (opt.modality != "A" && opt.modality != "B") {
    throw UsageError("modality must be A or B");
  }
  if (opt.features.empty() == opt.id.empty()) {
    throw UsageError("give exactly one of --features or --id");
  }
  const Branch query_branch = opt.modality == "A" ? Branch::A : Branch::B;
  const Branch candidate_branch =
      query_branch == Branch::A ? Branch::B : Branch::A;

  const Checkpoint ckpt = load_checkpoint(opt.checkpoint);
  const Dataset ds = load_dataset(opt.dataset);
  ds.validate();

  Vector query_features;
  if (!opt.features.empty()) {
    query_features = parse_vector(opt.features, "--features");
  } else {
    const auto it = std::find_if(
        ds.samples.begin(), ds.samples.end(),
        [&](const PairedSample& s) { return s.id == opt.id; });
    if (it == ds.samples.end()) {
      throw DataError("sample id '" + opt.id + "' not found in dataset");
    }
    query_features =
        query_branch == Branch::A ? it->features_a : it->features_b;
  }
  const Vector query_latent = encode(ckpt.params, query_branch, query_features);

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& s = ds.samples[i];
    const Vector latent =
        encode(ckpt.params, candidate_branch,
               candidate_branch == Branch::A ? s.features_a : s.features_b);
    scored.push_back({cosine_distance(query_latent, latent), i});
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  const std::size_t top = std::min(opt.top, scored.size());
  std::cout << "rank\tid\tdistance\n";
  for (std::size_t r = 0; r < top; ++r) {
    std::cout << (r + 1) << '\t' << ds.samples[scored[r].second].id << '\t'
              << format_double(scored[r].first) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cross-modal embedding trainer and retrieval evaluator"};
  app.require_subcommand(1);

  GenOptions gen_opt;
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  gen->add_option("--spec", gen_opt.spec_file, "synthetic spec JSON file");
  gen->add_option("--out", gen_opt.out_dir, "output directory")->required();
  gen->add_option("--classes", gen_opt.spec.n_classes, "number of classes");
  gen->add_option("--pairs-per-class", gen_opt.spec.pairs_per_class,
                  "pairs per class");
  gen->add_option("--true-latent-dim", gen_opt.spec.latent_dim_true,
                  "generator latent dimension");
  gen->add_option("--dim-a", gen_opt.spec.dim_a, "modality A feature dim");
  gen->add_option("--dim-b", gen_opt.spec.dim_b, "modality B feature dim");
  gen->add_option("--sigma-within", gen_opt.spec.within_class_noise,
                  "within-class noise");
  gen->add_option("--sigma-cross", gen_opt.spec.cross_modal_noise,
                  "cross-modal noise");
  gen->add_option("--unlabeled-fraction", gen_opt.spec.unlabeled_fraction,
                  "fraction of pairs stripped of labels");
  gen->add_option("--seed", gen_opt.spec.seed, "generator seed");

  TrainOptions train_opt;
  std::string train_config_file;
  auto* train_cmd = app.add_subcommand("train", "train a scenario");
  train_cmd->add_option("--config", train_config_file, "config JSON file")
      ->required();
  train_cmd->add_option("--out", train_opt.out_checkpoint, "output checkpoint")
      ->required();
  train_cmd->add_option("--log", train_opt.log_file,
                        "epoch log file (default: stdout)");
  // Flag overrides (flags win over the config file).
  std::string ov_scenario, ov_freeze, ov_activation, ov_hidden;
  std::string ov_train_ds, ov_val_ds, ov_test_ds;
  double ov_alpha = -1, ov_lambda = -1, ov_alpha_pos = -1, ov_alpha_neg = -1;
  double ov_lr = -1, ov_labeled_fraction = -1;
  std::int64_t ov_epochs = -1, ov_batch = -1, ov_eval_every = -1;
  std::int64_t ov_unfreeze = -1, ov_latent = -1;
  std::int64_t ov_seed = -1;
  for (CLI::App* cmd : {train_cmd}) {
    cmd->add_option("--scenario", ov_scenario, "scenario override");
    cmd->add_option("--alpha", ov_alpha, "triplet margin override");
    cmd->add_option("--lambda", ov_lambda, "semantic weight override");
    cmd->add_option("--alpha-pos", ov_alpha_pos, "pairwise positive margin");
    cmd->add_option("--alpha-neg", ov_alpha_neg, "pairwise negative margin");
    cmd->add_option("--lr", ov_lr, "learning rate override");
    cmd->add_option("--epochs", ov_epochs, "epoch count override");
    cmd->add_option("--batch-size", ov_batch, "batch size override");
    cmd->add_option("--labeled-fraction", ov_labeled_fraction,
                    "labeled quota fraction override");
    cmd->add_option("--freeze-branch", ov_freeze, "freeze branch (none|A|B)");
    cmd->add_option("--unfreeze-epoch", ov_unfreeze, "unfreeze epoch");
    cmd->add_option("--eval-every", ov_eval_every, "validation interval");
    cmd->add_option("--seed", ov_seed, "training seed override");
    cmd->add_option("--latent-dim", ov_latent, "encoder latent dim override");
    cmd->add_option("--hidden-dims", ov_hidden,
                    "encoder hidden dims, comma separated");
    cmd->add_option("--activation", ov_activation, "relu|tanh");
    cmd->add_option("--train-dataset", ov_train_ds, "train dataset path");
    cmd->add_option("--validation-dataset", ov_val_ds,
                    "validation dataset path");
    cmd->add_option("--test-dataset", ov_test_ds, "test dataset path");
  }

  EvalOptions eval_opt;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", eval_opt.checkpoint)->required();
  eval_cmd->add_option("--dataset", eval_opt.dataset)->required();
  eval_cmd->add_option("--subset-size", eval_opt.subset_size,
                       "subset size (0 = min(1000, dataset size))");
  eval_cmd->add_option("--n-subsets", eval_opt.n_subsets, "number of subsets");
  eval_cmd->add_option("--seed", eval_opt.seed, "subset draw seed");
  eval_cmd->add_option("--report", eval_opt.report_file,
                       "machine-readable TSV output file");

  SweepOptions sweep_opt;
  std::string sweep_config_file;
  auto* sweep_cmd =
      app.add_subcommand("sweep-lambda", "train at several lambda values");
  sweep_cmd->add_option("--config", sweep_config_file, "config JSON file")
      ->required();
  sweep_cmd->add_option("--values", sweep_opt.values,
                        "comma-separated lambda values")
      ->required();
  sweep_cmd->add_option("--report", sweep_opt.report_file, "TSV output file");

  CompareOptions compare_opt;
  std::string compare_config_file;
  auto* compare_cmd =
      app.add_subcommand("compare", "train and evaluate several scenarios");
  compare_cmd->add_option("--config", compare_config_file, "config JSON file")
      ->required();
  compare_cmd
      ->add_option("--scenarios", compare_opt.scenarios,
                   "comma-separated scenario names")
      ->required();
  compare_cmd->add_option("--subset-size", compare_opt.subset_size,
                          "evaluation subset size (0 = auto)");
  compare_cmd->add_option("--n-subsets", compare_opt.n_subsets,
                          "number of evaluation subsets");
  compare_cmd->add_option("--eval-seed", compare_opt.eval_seed,
                          "evaluation subset seed");
  compare_cmd->add_option("--report", compare_opt.report_file,
                          "TSV output file");

  QueryOptions query_opt;
  auto* query_cmd =
      app.add_subcommand("query", "nearest neighbors for one query");
  query_cmd->add_option("--checkpoint", query_opt.checkpoint)->required();
  query_cmd->add_option("--dataset", query_opt.dataset)->required();
  query_cmd->add_option("--modality", query_opt.modality, "A or B")
      ->required();
  query_cmd->add_option("--features", query_opt.features,
                        "comma-separated query feature vector");
  query_cmd->add_option("--id", query_opt.id, "query by sample id");
  query_cmd->add_option("--top", query_opt.top, "number of results");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*gen) return cmd_gen(gen_opt);
    if (*train_cmd || *sweep_cmd || *compare_cmd) {
      const std::string& config_path = *train_cmd ? train_config_file
                                       : *sweep_cmd ? sweep_config_file
                                                    : compare_config_file;
      CliConfig config = load_cli_config(config_path);
      if (*train_cmd) {
        // Apply overrides; flags win.
        try {
          if (!ov_scenario.empty())
            config.train.scenario = parse_scenario(ov_scenario);
          if (!ov_freeze.empty())
            config.train.freeze_branch = parse_freeze(ov_freeze);
          if (!ov_activation.empty())
            config.activation = parse_activation(ov_activation);
        } catch (const ConfigError& e) {
          throw UsageError(e.what());
        }
        if (train_cmd->count("--hidden-dims"))
          config.hidden_dims = parse_dims_list(ov_hidden);
        if (ov_alpha >= 0) config.train.loss.alpha = ov_alpha;
        if (ov_lambda >= 0) config.train.loss.lambda = ov_lambda;
        if (ov_alpha_pos >= 0) config.train.loss.alpha_pos = ov_alpha_pos;
        if (ov_alpha_neg >= 0) config.train.loss.alpha_neg = ov_alpha_neg;
        if (ov_lr >= 0) config.train.learning_rate = ov_lr;
        if (ov_labeled_fraction >= 0)
          config.train.labeled_fraction = ov_labeled_fraction;
        if (ov_epochs >= 0) config.train.epochs = ov_epochs;
        if (ov_batch >= 0) config.train.batch_size = ov_batch;
        if (ov_eval_every >= 0) config.train.eval_every = ov_eval_every;
        if (ov_unfreeze >= 0) config.train.unfreeze_epoch = ov_unfreeze;
        if (ov_latent >= 0) config.latent_dim = ov_latent;
        if (ov_seed >= 0) config.train.seed = ov_seed;
        if (!ov_train_ds.empty()) config.train_dataset = ov_train_ds;
        if (!ov_val_ds.empty()) config.validation_dataset = ov_val_ds;
        if (!ov_test_ds.empty()) config.test_dataset = ov_test_ds;
        return cmd_train(config, train_opt);
      }
      if (*sweep_cmd) return cmd_sweep_lambda(config, sweep_opt);
      return cmd_compare(config, compare_opt);
    }
    if (*eval_cmd) return cmd_eval(eval_opt);
    if (*query_cmd) return cmd_query(query_opt);
    std::cerr << "no command given\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
