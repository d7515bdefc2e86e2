#include "xmodal/dataset.hpp"

#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "xmodal/error.hpp"
#include "xmodal/serialize.hpp"

namespace xmodal {

namespace {

constexpr const char* kFormat = "xmodal-pairs/1";

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t tab = line.find('\t', start);
    const std::size_t stop = tab == std::string::npos ? line.size() : tab;
    fields.push_back(line.substr(start, stop - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

}  // namespace

std::size_t Dataset::labeled_count() const {
  std::size_t n = 0;
  for (const auto& s : samples) {
    if (s.class_label) ++n;
  }
  return n;
}

std::vector<std::size_t> Dataset::labeled_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].class_label) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> Dataset::unlabeled_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].class_label) out.push_back(i);
  }
  return out;
}

void Dataset::validate() const {
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.features_a.size() != dim_a || s.features_b.size() != dim_b) {
      throw DataError("sample '" + s.id + "': feature dimensions (" +
                      std::to_string(s.features_a.size()) + ", " +
                      std::to_string(s.features_b.size()) +
                      ") do not match header (" + std::to_string(dim_a) +
                      ", " + std::to_string(dim_b) + ")");
    }
    if (s.class_label && *s.class_label >= n_classes) {
      throw DataError("sample '" + s.id + "': class " +
                      std::to_string(*s.class_label) + " out of range for " +
                      std::to_string(n_classes) + " classes");
    }
    if (!ids.insert(s.id).second) {
      throw DataError("duplicate sample id '" + s.id + "'");
    }
  }
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot open '" + path.string() + "' for writing");
  }
  nlohmann::json header = {
      {"format", kFormat},
      {"dim_a", dataset.dim_a},
      {"dim_b", dataset.dim_b},
      {"n_classes", dataset.n_classes},
      {"split", dataset.split},
  };
  out << header.dump() << '\n';
  for (const auto& s : dataset.samples) {
    out << s.id << '\t'
        << (s.class_label ? std::to_string(*s.class_label) : "-") << '\t'
        << format_vector(s.features_a) << '\t' << format_vector(s.features_b)
        << '\n';
  }
  if (!out) {
    throw DataError("write failure on '" + path.string() + "'");
  }
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open dataset '" + path.string() + "'");
  }
  const std::string name = path.filename().string();
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(name + ": missing header line");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(name + ":1: invalid header: " + e.what());
  }
  if (!header.contains("format") || header["format"] != kFormat) {
    throw DataError(name + ":1: expected format '" + std::string(kFormat) +
                    "', got '" +
                    (header.contains("format")
                         ? header["format"].get<std::string>()
                         : std::string("<missing>")) +
                    "'");
  }
  Dataset ds;
  try {
    ds.dim_a = header.at("dim_a").get<std::size_t>();
    ds.dim_b = header.at("dim_b").get<std::size_t>();
    ds.n_classes = header.at("n_classes").get<std::uint32_t>();
    ds.split = header.value("split", "");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(name + ":1: invalid header: " + e.what());
  }
  if (ds.dim_a == 0 || ds.dim_b == 0) {
    throw DataError(name + ":1: feature dimensions must be positive");
  }

  std::unordered_set<std::string> seen_ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string context = name + ":" + std::to_string(line_no);
    auto fields = split_tabs(line);
    if (fields.size() != 4) {
      throw DataError(context + ": expected 4 tab-separated fields, got " +
                      std::to_string(fields.size()));
    }
    PairedSample s;
    s.id = fields[0];
    if (s.id.empty()) {
      throw DataError(context + ": empty sample id");
    }
    if (!seen_ids.insert(s.id).second) {
      throw DataError(context + ": duplicate sample id '" + s.id + "'");
    }
    if (fields[1] != "-") {
      const double cls = parse_double(fields[1], context);
      if (cls < 0 || cls != static_cast<std::uint32_t>(cls)) {
        throw DataError(context + ": invalid class label '" + fields[1] + "'");
      }
      const auto label = static_cast<std::uint32_t>(cls);
      if (label >= ds.n_classes) {
        throw DataError(context + ": class " + std::to_string(label) +
                        " out of range for " + std::to_string(ds.n_classes) +
                        " declared classes");
      }
      s.class_label = label;
    }
    s.features_a = parse_vector(fields[2], context);
    s.features_b = parse_vector(fields[3], context);
    if (s.features_a.size() != ds.dim_a) {
      throw DataError(context + ": features_a has " +
                      std::to_string(s.features_a.size()) +
                      " values, expected " + std::to_string(ds.dim_a));
    }
    if (s.features_b.size() != ds.dim_b) {
      throw DataError(context + ": features_b has " +
                      std::to_string(s.features_b.size()) +
                      " values, expected " + std::to_string(ds.dim_b));
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace xmodal
