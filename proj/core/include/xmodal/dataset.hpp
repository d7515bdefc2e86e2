#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xmodal/math.hpp"

namespace xmodal {

// One matching cross-modal pair: a feature vector per modality and an
// optional class label.
struct PairedSample {
  std::string id;
  Vector features_a;
  Vector features_b;
  std::optional<std::uint32_t> class_label;
};

struct Dataset {
  std::size_t dim_a = 0;
  std::size_t dim_b = 0;
  std::uint32_t n_classes = 0;
  std::string split;
  std::vector<PairedSample> samples;

  std::size_t size() const { return samples.size(); }
  std::size_t labeled_count() const;
  std::vector<std::size_t> labeled_indices() const;
  std::vector<std::size_t> unlabeled_indices() const;

  // Checks dimension uniformity, label ranges and id uniqueness.
  void validate() const;
};

// Line-delimited text format: a JSON header line declaring dims and class
// count, then one tab-separated record per pair. Floats are written with
// enough digits to round-trip exactly.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

// Throws DataError naming the offending line on any malformed record.
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace xmodal
