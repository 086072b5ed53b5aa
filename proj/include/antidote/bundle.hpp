/*
 * Copyright 2026 The Antidote Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ANTIDOTE_BUNDLE_HPP_
#define ANTIDOTE_BUNDLE_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "antidote/classifier.hpp"
#include "antidote/comparability.hpp"
#include "antidote/gan.hpp"
#include "antidote/schema.hpp"

namespace antidote {

// Everything needed to resample antidote data or rescore a classifier:
// schema, scaling statistics, mixtures, generator and critic parameters,
// optional classifiers, seeds and free-form metadata. The file is "ANTB",
// a u32 format version, a u64 payload length, the payload and an FNV-1a
// checksum of the payload. Contents are fully determined by the inputs, so
// save -> load -> save reproduces the same bytes.
struct ArtifactBundle {
  FeatureSchema schema;
  ScalingStats scaling;
  ComparabilityConfig comparability;
  std::uint64_t root_seed = 0;
  TrainedGenerator model;
  std::vector<std::pair<std::string, ClassifierModel>> classifiers;
  std::map<std::string, std::string> metadata;

  std::string serialize() const;
  static ArtifactBundle deserialize(std::string_view bytes);  // throws ConfigError

  void save(const std::filesystem::path& path) const;
  static ArtifactBundle load(const std::filesystem::path& path);
};

}  // namespace antidote

#endif  // ANTIDOTE_BUNDLE_HPP_
