/*
 * Copyright 2026 The LEMoN Authors.
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

#ifndef LEMON_NOISE_H_
#define LEMON_NOISE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lemon/dataset.h"

namespace lemon {

enum class NoiseType { kRandom, kCategory, kNoun, kSymmetric, kAsymmetric };

std::string_view noise_type_name(NoiseType type);
NoiseType parse_noise_type(std::string_view name);

struct NoiseSpec {
  NoiseType noise_type = NoiseType::kRandom;
  double rate = 0.0;
  std::uint64_t seed = 0;
  // Split to corrupt; nullopt corrupts every record.
  std::optional<Split> split = Split::kTrain;
  // Asymmetric only: class c becomes class_permutation[c].
  std::optional<std::vector<int>> class_permutation;
};

struct NoiseReport {
  std::size_t requested = 0;
  std::size_t flagged = 0;
};

// Each injector returns a new dataset; the input is never mutated. Records
// in the target split get mislabel_flag (true for corrupted rows, false
// otherwise) and corrupted rows get swap_source. Image embeddings and
// image-side fields (category, split) are never touched.

// Selected rows take caption, text embedding, class_id and noun_set from a
// uniformly drawn other record of the target split.
Dataset inject_random_swap(const Dataset& dataset, const NoiseSpec& spec);

// As random swap, with donors drawn from the same category.
Dataset inject_category_swap(const Dataset& dataset, const NoiseSpec& spec);

// Donors share at least one noun with the target. Rows with no eligible
// donor are passed over; `report` receives the shortfall if any.
Dataset inject_noun_swap(const Dataset& dataset, const NoiseSpec& spec,
                         NoiseReport* report = nullptr);

// Selected rows move to a uniformly drawn different class. Caption and text
// embedding become those of the class's canonical record (lowest-index
// record of that class in the input).
Dataset inject_symmetric_flip(const Dataset& dataset, const NoiseSpec& spec,
                              int num_classes);

// Selected rows move from class c to class_permutation[c].
Dataset inject_asymmetric_flip(const Dataset& dataset, const NoiseSpec& spec);

// c -> (c + 1) mod num_classes.
std::vector<int> cyclic_permutation(int num_classes);

// Dispatches on spec.noise_type. num_classes <= 0 means max class_id + 1.
Dataset inject_noise(const Dataset& dataset, const NoiseSpec& spec,
                     int num_classes = 0, NoiseReport* report = nullptr);

// Lowercased word tokens minus stopwords; stands in for part-of-speech noun
// tagging when records carry no noun_set.
std::set<std::string> fallback_nouns(std::string_view caption);

}  // namespace lemon

#endif  // LEMON_NOISE_H_
