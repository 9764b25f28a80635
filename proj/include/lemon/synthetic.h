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

#ifndef LEMON_SYNTHETIC_H_
#define LEMON_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "lemon/dataset.h"

namespace lemon {

// Paired-embedding benchmark with one image/text cluster pair per class.
struct GeneratorSpec {
  int n_clusters = 10;
  int samples_per_cluster = 100;
  int dim = 32;
  // Expected distance between two cluster means; means are unit directions
  // scaled by cluster_separation / sqrt(2).
  double cluster_separation = 1.0;
  double image_noise_sd = 0.05;
  double text_noise_sd = 0.05;
  // Per-cluster perturbation of the text mean away from the image mean. Large
  // values make the raw image-text distance uninformative.
  double mm_alignment_noise_sd = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

GeneratorSpec generator_spec_from_json(std::string_view json);
std::string generator_spec_to_json(const GeneratorSpec& spec);

// Records are cluster-major (row i belongs to cluster i / samples_per_cluster)
// with class_id = category = cluster id. Splits are round-robin by row:
// i % 10 in 0..7 -> train, 8 -> val, 9 -> test.
Dataset generate(const GeneratorSpec& spec);

}  // namespace lemon

#endif  // LEMON_SYNTHETIC_H_
