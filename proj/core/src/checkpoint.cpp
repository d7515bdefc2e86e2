#include "xmodal/checkpoint.hpp"

#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "xmodal/config_json.hpp"
#include "xmodal/error.hpp"
#include "xmodal/serialize.hpp"

namespace xmodal {

namespace {

constexpr const char* kFormat = "xmodal-ckpt/1";

using nlohmann::json;

json spec_to_json(const EncoderSpec& spec) {
  return {
      {"input_dim_a", spec.input_dim_a},
      {"input_dim_b", spec.input_dim_b},
      {"hidden_dims", spec.hidden_dims},
      {"latent_dim", spec.latent_dim},
      {"activation", activation_name(spec.activation)},
  };
}

EncoderSpec spec_from_json(const json& j) {
  EncoderSpec spec;
  spec.input_dim_a = j.at("input_dim_a").get<std::size_t>();
  spec.input_dim_b = j.at("input_dim_b").get<std::size_t>();
  spec.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
  spec.latent_dim = j.at("latent_dim").get<std::size_t>();
  spec.activation = parse_activation(j.at("activation").get<std::string>());
  return spec;
}

json config_to_json(const TrainConfig& c) {
  return {
      {"scenario", scenario_name(c.scenario)},
      {"alpha", c.loss.alpha},
      {"lambda", c.loss.lambda},
      {"alpha_pos", c.loss.alpha_pos},
      {"alpha_neg", c.loss.alpha_neg},
      {"learning_rate", c.learning_rate},
      {"epochs", c.epochs},
      {"batch_size", c.batch_size},
      {"labeled_fraction", c.labeled_fraction},
      {"freeze_branch", freeze_name(c.freeze_branch)},
      {"unfreeze_epoch", c.unfreeze_epoch},
      {"eval_every", c.eval_every},
      {"seed", c.seed},
  };
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.scenario = parse_scenario(j.at("scenario").get<std::string>());
  c.loss.alpha = j.at("alpha").get<double>();
  c.loss.lambda = j.at("lambda").get<double>();
  c.loss.alpha_pos = j.at("alpha_pos").get<double>();
  c.loss.alpha_neg = j.at("alpha_neg").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.labeled_fraction = j.at("labeled_fraction").get<double>();
  c.freeze_branch = parse_freeze(j.at("freeze_branch").get<std::string>());
  c.unfreeze_epoch = j.at("unfreeze_epoch").get<std::size_t>();
  c.eval_every = j.at("eval_every").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

void write_tensor(std::ofstream& out, const std::string& name,
                  const DenseLayer& layer) {
  out << name << ".weight\t" << layer.weight.size() << 'x'
      << (layer.weight.empty() ? 0 : layer.weight[0].size()) << '\t';
  for (std::size_t r = 0; r < layer.weight.size(); ++r) {
    if (r > 0) out << ',';
    out << format_vector(layer.weight[r]);
  }
  out << '\n';
  out << name << ".bias\t" << layer.bias.size() << '\t'
      << format_vector(layer.bias) << '\n';
}

struct TensorLine {
  std::string name;
  std::string shape;
  Vector values;
};

TensorLine read_tensor_line(std::ifstream& in, const std::string& file,
                            std::size_t& line_no) {
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(file + ": truncated checkpoint, expected more tensors");
  }
  ++line_no;
  const std::string context = file + ":" + std::to_string(line_no);
  const auto tab1 = line.find('\t');
  const auto tab2 = tab1 == std::string::npos ? std::string::npos
                                              : line.find('\t', tab1 + 1);
  if (tab1 == std::string::npos || tab2 == std::string::npos) {
    throw DataError(context + ": expected 'name<TAB>shape<TAB>values'");
  }
  TensorLine t;
  t.name = line.substr(0, tab1);
  t.shape = line.substr(tab1 + 1, tab2 - tab1 - 1);
  t.values = parse_vector(line.substr(tab2 + 1), context);
  return t;
}

void load_layer(std::ifstream& in, const std::string& file,
                std::size_t& line_no, const std::string& name,
                DenseLayer& layer) {
  auto w = read_tensor_line(in, file, line_no);
  const std::string context = file + ":" + std::to_string(line_no);
  if (w.name != name + ".weight") {
    throw DataError(context + ": expected tensor '" + name + ".weight', got '" +
                    w.name + "'");
  }
  const std::size_t rows = layer.weight.size();
  const std::size_t cols = rows == 0 ? 0 : layer.weight[0].size();
  const std::string want_shape =
      std::to_string(rows) + "x" + std::to_string(cols);
  if (w.shape != want_shape || w.values.size() != rows * cols) {
    throw DataError(context + ": tensor '" + w.name + "' has shape " +
                    w.shape + ", expected " + want_shape);
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      layer.weight[r][c] = w.values[r * cols + c];
    }
  }

  auto b = read_tensor_line(in, file, line_no);
  const std::string bcontext = file + ":" + std::to_string(line_no);
  if (b.name != name + ".bias") {
    throw DataError(bcontext + ": expected tensor '" + name + ".bias', got '" +
                    b.name + "'");
  }
  if (b.shape != std::to_string(layer.bias.size()) ||
      b.values.size() != layer.bias.size()) {
    throw DataError(bcontext + ": tensor '" + b.name + "' has shape " +
                    b.shape + ", expected " + std::to_string(layer.bias.size()));
  }
  layer.bias = b.values;
}

}  // namespace

void save_checkpoint(const EncoderParams& params, const TrainConfig& config,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot open '" + path.string() + "' for writing");
  }
  json header = {
      {"format", kFormat},
      {"spec", spec_to_json(params.spec)},
      {"config", config_to_json(config)},
      {"n_classes",
       params.head ? json(params.head->out_dim()) : json(nullptr)},
  };
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < params.branch_a.size(); ++i) {
    write_tensor(out, "branch_a." + std::to_string(i), params.branch_a[i]);
  }
  for (std::size_t i = 0; i < params.branch_b.size(); ++i) {
    write_tensor(out, "branch_b." + std::to_string(i), params.branch_b[i]);
  }
  if (params.head) {
    write_tensor(out, "head", *params.head);
  }
  if (!out) {
    throw DataError("write failure on '" + path.string() + "'");
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open checkpoint '" + path.string() + "'");
  }
  const std::string file = path.filename().string();
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw DataError(file + ": missing header line");
  }
  ++line_no;
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(file + ":1: invalid header: " + e.what());
  }
  const std::string format =
      header.contains("format") ? header["format"].get<std::string>() : "";
  if (format != kFormat) {
    throw DataError(file + ": checkpoint format '" + format +
                    "' does not match supported format '" + kFormat + "'");
  }

  Checkpoint ckpt;
  std::optional<std::size_t> n_classes;
  try {
    ckpt.params.spec = spec_from_json(header.at("spec"));
    ckpt.config = config_from_json(header.at("config"));
    if (!header.at("n_classes").is_null()) {
      n_classes = header.at("n_classes").get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw DataError(file + ":1: invalid header: " + e.what());
  }

  // Allocate the parameter layout from the spec, then fill tensor by tensor.
  ckpt.params = init_params(ckpt.params.spec, n_classes, 0);
  for (std::size_t i = 0; i < ckpt.params.branch_a.size(); ++i) {
    load_layer(in, file, line_no, "branch_a." + std::to_string(i),
               ckpt.params.branch_a[i]);
  }
  for (std::size_t i = 0; i < ckpt.params.branch_b.size(); ++i) {
    load_layer(in, file, line_no, "branch_b." + std::to_string(i),
               ckpt.params.branch_b[i]);
  }
  if (ckpt.params.head) {
    load_layer(in, file, line_no, "head", *ckpt.params.head);
  }
  return ckpt;
}

}  // namespace xmodal
