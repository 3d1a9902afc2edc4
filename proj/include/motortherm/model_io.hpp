// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "motortherm/dataset.hpp"
#include "motortherm/network.hpp"

namespace motortherm {

inline constexpr const char* kModelFormat = "motortherm-model/1";
inline constexpr const char* kNormStatsFormat = "motortherm-normstats/1";

/// A trained network together with what is needed to use it on raw records.
struct ModelBundle {
  NetworkParams params;
  Normalization normalization;
  FeatureSelection features;
  double dropout = 0.0;
};

/// JSON text. Doubles are printed in shortest round-trip form, so the output
/// is byte-identical for identical bundles.
std::string serialize_model(const ModelBundle& model);
ModelBundle parse_model(const std::string& text);

void save_model(const ModelBundle& model, const std::filesystem::path& path);
ModelBundle load_model(const std::filesystem::path& path);

/// Normalization statistics with feature-selection metadata.
std::string serialize_norm_stats(const Normalization& norm, const FeatureSelection& features);
void save_norm_stats(const Normalization& norm, const FeatureSelection& features,
                     const std::filesystem::path& path);
Normalization load_norm_stats(const std::filesystem::path& path, FeatureSelection* features = nullptr);

/// 16 hex digits of FNV-1a over the text.
std::string content_id(const std::string& text);

}  // namespace motortherm
