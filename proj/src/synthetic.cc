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

#include "lemon/synthetic.h"

#include <cmath>
#include <vector>

#include "json.hpp"
#include "lemon/rng.h"

namespace lemon {
namespace {

using Json = nlohmann::ordered_json;

std::vector<double> unit_direction(Rng& rng, int dim) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

void normalize(std::vector<double>& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) return;
  for (auto& x : v) x /= norm;
}

}  // namespace

void GeneratorSpec::validate() const {
  if (n_clusters < 2) throw ValidationError("n_clusters must be >= 2");
  if (samples_per_cluster < 1) {
    throw ValidationError("samples_per_cluster must be >= 1");
  }
  if (dim < 2) throw ValidationError("dim must be >= 2");
  if (!(cluster_separation > 0.0) || !std::isfinite(cluster_separation)) {
    throw ValidationError("cluster_separation must be positive");
  }
  for (double sd : {image_noise_sd, text_noise_sd, mm_alignment_noise_sd}) {
    if (!(sd >= 0.0) || !std::isfinite(sd)) {
      throw ValidationError("noise standard deviations must be >= 0");
    }
  }
}

GeneratorSpec generator_spec_from_json(std::string_view text) {
  GeneratorSpec s;
  try {
    const Json j = Json::parse(text);
    s.n_clusters = j.value("n_clusters", s.n_clusters);
    s.samples_per_cluster = j.value("samples_per_cluster", s.samples_per_cluster);
    s.dim = j.value("dim", s.dim);
    s.cluster_separation = j.value("cluster_separation", s.cluster_separation);
    s.image_noise_sd = j.value("image_noise_sd", s.image_noise_sd);
    s.text_noise_sd = j.value("text_noise_sd", s.text_noise_sd);
    s.mm_alignment_noise_sd =
        j.value("mm_alignment_noise_sd", s.mm_alignment_noise_sd);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("generator spec: ") + e.what());
  }
  s.validate();
  return s;
}

std::string generator_spec_to_json(const GeneratorSpec& s) {
  Json j;
  j["n_clusters"] = s.n_clusters;
  j["samples_per_cluster"] = s.samples_per_cluster;
  j["dim"] = s.dim;
  j["cluster_separation"] = s.cluster_separation;
  j["image_noise_sd"] = s.image_noise_sd;
  j["text_noise_sd"] = s.text_noise_sd;
  j["mm_alignment_noise_sd"] = s.mm_alignment_noise_sd;
  j["seed"] = s.seed;
  return j.dump(2) + "\n";
}

Dataset generate(const GeneratorSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const auto dim = static_cast<std::size_t>(spec.dim);
  const double scale = spec.cluster_separation / std::sqrt(2.0);

  std::vector<std::vector<double>> image_means, text_means;
  for (int c = 0; c < spec.n_clusters; ++c) {
    std::vector<double> img = unit_direction(rng, spec.dim);
    std::vector<double> txt = img;
    for (auto& x : txt) x += spec.mm_alignment_noise_sd * rng.normal();
    normalize(txt);
    for (auto& x : img) x *= scale;
    for (auto& x : txt) x *= scale;
    image_means.push_back(std::move(img));
    text_means.push_back(std::move(txt));
  }

  const std::size_t n = static_cast<std::size_t>(spec.n_clusters) *
                        static_cast<std::size_t>(spec.samples_per_cluster);
  Dataset ds;
  ds.image_embeddings = EmbeddingMatrix(n, dim);
  ds.text_embeddings = EmbeddingMatrix(n, dim);
  ds.records.resize(n);
  ds.manifest = {"synthetic", "synthetic-gaussian", spec.seed, std::nullopt};
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<int>(i / static_cast<std::size_t>(spec.samples_per_cluster));
    auto img = ds.image_embeddings.mutable_row(i);
    auto txt = ds.text_embeddings.mutable_row(i);
    for (std::size_t j = 0; j < dim; ++j) {
      img[j] = static_cast<float>(image_means[c][j] + spec.image_noise_sd * rng.normal());
    }
    for (std::size_t j = 0; j < dim; ++j) {
      txt[j] = static_cast<float>(text_means[c][j] + spec.text_noise_sd * rng.normal());
    }
    SampleRecord& r = ds.records[i];
    r.index = static_cast<std::int64_t>(i);
    r.caption_text = "c" + std::to_string(c);
    r.class_id = c;
    r.category = std::to_string(c);
    const std::size_t slot = i % 10;
    r.split = slot < 8 ? Split::kTrain : (slot == 8 ? Split::kVal : Split::kTest);
  }
  ds.validate();
  return ds;
}

}  // namespace lemon
