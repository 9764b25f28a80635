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

#ifndef LEMON_DATASET_H_
#define LEMON_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lemon/common.h"

namespace lemon {

struct SampleRecord {
  std::int64_t index = 0;
  std::string caption_text;
  std::optional<int> class_id;
  std::optional<std::string> category;
  std::optional<std::set<std::string>> noun_set;
  Split split = Split::kTrain;
  std::optional<bool> mislabel_flag;
  std::optional<std::int64_t> swap_source;

  bool operator==(const SampleRecord&) const = default;
};

// Row-major float32 matrix as stored on disk. Rows are kept unnormalized.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim);
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data);

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }

  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<float> mutable_row(std::size_t i) {
    return {data_.data() + i * dim_, dim_};
  }
  const std::vector<float>& data() const { return data_; }

  // Throws ValidationError naming `label` and the first offending row
  // (non-finite entry or all-zero row).
  void validate(std::string_view label) const;

  bool operator==(const EmbeddingMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

// Provenance of injected noise, kept in manifest.json.
struct NoiseProvenance {
  std::string noise_type;
  double rate = 0.0;
  std::uint64_t seed = 0;
  std::string split;

  bool operator==(const NoiseProvenance&) const = default;
};

struct Manifest {
  std::string name;
  std::string encoder_id;
  std::uint64_t seed = 0;
  std::optional<NoiseProvenance> noise;

  bool operator==(const Manifest&) const = default;
};

struct Dataset {
  EmbeddingMatrix image_embeddings;
  EmbeddingMatrix text_embeddings;
  std::vector<SampleRecord> records;
  Manifest manifest;

  std::size_t size() const { return records.size(); }

  // Record indices belonging to `split`, ascending.
  std::vector<std::size_t> split_indices(Split split) const;

  // Checks every type invariant; throws ValidationError on the first
  // violation with the offending row.
  void validate() const;

  bool operator==(const Dataset&) const = default;
};

Dataset load_dataset(const std::filesystem::path& dir);

// Writes into a temp directory next to `dir`, then renames it into place.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);

// Per-sample decomposition of the mislabel score.
struct ScoreBreakdown {
  double d_mm = 0.0;
  double s_n = 0.0;
  double s_m = 0.0;
  double s = 0.0;

  bool operator==(const ScoreBreakdown&) const = default;
};

struct ScoreRow {
  std::int64_t index = 0;
  std::string method;
  double score = 0.0;
  std::optional<ScoreBreakdown> breakdown;

  bool operator==(const ScoreRow&) const = default;
};

using ScoreTable = std::vector<ScoreRow>;

// CSV with header `index,method,score,d_mm,s_n,s_m`; breakdown columns are
// empty for rows without one. Values use 17 significant digits.
std::string format_scores(const ScoreTable& table);
ScoreTable parse_scores(std::string_view csv, std::string_view source = "");

void write_scores(const ScoreTable& table, const std::filesystem::path& path);
ScoreTable read_scores(const std::filesystem::path& path);

}  // namespace lemon

#endif  // LEMON_DATASET_H_
