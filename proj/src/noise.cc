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

#include "lemon/noise.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "lemon/rng.h"

namespace lemon {
namespace {

constexpr std::string_view kStopwords[] = {
    "a", "about", "above", "across", "after", "again", "against", "all",
    "almost", "along", "also", "although", "always", "am", "among", "an",
    "and", "another", "any", "anyone", "anything", "are", "around", "as", "at",
    "away", "back", "be", "because", "been", "before", "behind", "being",
    "below", "beneath", "beside", "besides", "between", "beyond", "both",
    "but", "by", "can", "could", "did", "do", "does", "doing", "down",
    "during", "each", "either", "else", "enough", "even", "ever", "every",
    "few", "for", "from", "further", "get", "gets", "getting", "got", "had",
    "has", "have", "having", "he", "her", "here", "hers", "herself", "him",
    "himself", "his", "how", "however", "i", "if", "in", "inside", "into",
    "is", "it", "its", "itself", "just", "least", "less", "like", "many",
    "may", "me", "might", "more", "most", "much", "must", "my", "myself",
    "near", "neither", "never", "next", "no", "nor", "not", "now", "of",
    "off", "often", "on", "once", "one", "only", "onto", "or", "other",
    "others", "our", "ours", "ourselves", "out", "outside", "over", "own",
    "per", "perhaps", "quite", "rather", "really", "same", "several", "she",
    "should", "since", "so", "some", "someone", "something", "sometimes",
    "still", "such", "than", "that", "the", "their", "theirs", "them",
    "themselves", "then", "there", "these", "they", "this", "those", "though",
    "three", "through", "throughout", "thus", "to", "together", "too",
    "toward", "towards", "two", "under", "underneath", "until", "up", "upon",
    "us", "very", "via", "was", "we", "were", "what", "whatever", "when",
    "where", "whether", "which", "while", "who", "whom", "whose", "why",
    "will", "with", "within", "without", "would", "yet", "you", "your",
    "yours", "yourself", "yourselves", "four", "five", "big", "small",
    "large", "little", "red", "blue", "green", "white", "black", "yellow",
    "brown", "orange", "pink", "purple", "gray", "grey", "old", "young",
    "new", "sitting", "standing", "looking", "holding", "parked", "walking",
};

std::vector<std::size_t> target_rows(const Dataset& dataset,
                                     const NoiseSpec& spec) {
  if (!spec.split) {
    std::vector<std::size_t> all(dataset.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }
  return dataset.split_indices(*spec.split);
}

std::size_t flag_count(const NoiseSpec& spec, std::size_t n) {
  if (!(spec.rate >= 0.0 && spec.rate <= 1.0)) {
    throw ValidationError("noise rate must lie in [0, 1]");
  }
  const auto count = static_cast<std::size_t>(
      std::floor(spec.rate * static_cast<double>(n) + 1e-9));
  if (spec.rate > 0.0 && count == 0) {
    throw ValidationError("rate * n < 1: no record would be corrupted");
  }
  return std::min(count, n);
}

// First `count` entries of a seeded partial Fisher-Yates shuffle.
std::vector<std::size_t> sample_without_replacement(
    Rng& rng, std::vector<std::size_t> pool, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

// Draws uniformly from `candidates` minus `self`. `self` must be present.
std::size_t draw_other(Rng& rng, const std::vector<std::size_t>& candidates,
                       std::size_t self) {
  const auto self_pos = static_cast<std::size_t>(
      std::find(candidates.begin(), candidates.end(), self) -
      candidates.begin());
  std::size_t pick = rng.below(candidates.size() - 1);
  if (pick >= self_pos) ++pick;
  return candidates[pick];
}

// Copies the input and clears provenance on the target split.
Dataset prepare(const Dataset& dataset, const NoiseSpec& spec,
                const std::vector<std::size_t>& targets) {
  Dataset out = dataset;
  for (std::size_t i : targets) {
    out.records[i].mislabel_flag = false;
    out.records[i].swap_source.reset();
  }
  out.manifest.noise = NoiseProvenance{
      std::string(noise_type_name(spec.noise_type)), spec.rate, spec.seed,
      spec.split ? std::string(split_name(*spec.split)) : "all"};
  return out;
}

void copy_text(Dataset& out, const Dataset& in, std::size_t target,
               std::size_t donor) {
  SampleRecord& r = out.records[target];
  const SampleRecord& d = in.records[donor];
  r.caption_text = d.caption_text;
  r.class_id = d.class_id;
  r.noun_set = d.noun_set;
  r.mislabel_flag = true;
  r.swap_source = static_cast<std::int64_t>(donor);
  const auto src = in.text_embeddings.row(donor);
  std::copy(src.begin(), src.end(), out.text_embeddings.mutable_row(target).begin());
}

std::set<std::string> nouns_of(const SampleRecord& r) {
  return r.noun_set ? *r.noun_set : fallback_nouns(r.caption_text);
}

std::unordered_map<int, std::size_t> canonical_class_rows(const Dataset& ds) {
  std::unordered_map<int, std::size_t> rows;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.records[i].class_id) rows.emplace(*ds.records[i].class_id, i);
  }
  return rows;
}

void flip_to(Dataset& out, const Dataset& in,
             const std::unordered_map<int, std::size_t>& canonical,
             std::size_t row, int new_class) {
  const auto it = canonical.find(new_class);
  if (it == canonical.end()) {
    throw ValidationError("class " + std::to_string(new_class) +
                          " has no record to take a class-name caption from");
  }
  copy_text(out, in, row, it->second);
  out.records[row].class_id = new_class;
}

std::vector<std::size_t> require_targets(const Dataset& dataset,
                                         const NoiseSpec& spec) {
  auto targets = target_rows(dataset, spec);
  if (targets.size() < 2) {
    throw ValidationError("noise injection needs at least 2 target records");
  }
  return targets;
}

}  // namespace

std::string_view noise_type_name(NoiseType type) {
  switch (type) {
    case NoiseType::kRandom:
      return "random";
    case NoiseType::kCategory:
      return "cat";
    case NoiseType::kNoun:
      return "noun";
    case NoiseType::kSymmetric:
      return "symmetric";
    case NoiseType::kAsymmetric:
      return "asymmetric";
  }
  return "random";
}

NoiseType parse_noise_type(std::string_view name) {
  if (name == "random") return NoiseType::kRandom;
  if (name == "cat" || name == "category") return NoiseType::kCategory;
  if (name == "noun") return NoiseType::kNoun;
  if (name == "symmetric" || name == "sym") return NoiseType::kSymmetric;
  if (name == "asymmetric" || name == "asym") return NoiseType::kAsymmetric;
  throw ValidationError("unknown noise type '" + std::string(name) + "'");
}

std::set<std::string> fallback_nouns(std::string_view caption) {
  static const std::unordered_set<std::string_view> stop(std::begin(kStopwords),
                                                         std::end(kStopwords));
  std::set<std::string> out;
  std::string token;
  auto flush = [&] {
    if (!token.empty() && !stop.contains(token)) out.insert(token);
    token.clear();
  };
  for (char c : caption) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      token += static_cast<char>(std::tolower(uc));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

Dataset inject_random_swap(const Dataset& dataset, const NoiseSpec& spec) {
  const auto targets = require_targets(dataset, spec);
  const std::size_t count = flag_count(spec, targets.size());
  Dataset out = prepare(dataset, spec, targets);
  Rng rng(spec.seed);
  for (std::size_t row : sample_without_replacement(rng, targets, count)) {
    copy_text(out, dataset, row, draw_other(rng, targets, row));
  }
  return out;
}

Dataset inject_category_swap(const Dataset& dataset, const NoiseSpec& spec) {
  const auto targets = require_targets(dataset, spec);
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i : targets) {
    if (!dataset.records[i].category) {
      throw ValidationError("record " + std::to_string(i) +
                            " has no category for category-swap noise");
    }
    members[*dataset.records[i].category].push_back(i);
  }
  const std::size_t count = flag_count(spec, targets.size());
  Dataset out = prepare(dataset, spec, targets);
  Rng rng(spec.seed);
  for (std::size_t row : sample_without_replacement(rng, targets, count)) {
    const auto& same = members.at(*dataset.records[row].category);
    if (same.size() < 2) {
      throw ValidationError("record " + std::to_string(row) +
                            " is alone in category '" +
                            *dataset.records[row].category + "'");
    }
    copy_text(out, dataset, row, draw_other(rng, same, row));
  }
  return out;
}

Dataset inject_noun_swap(const Dataset& dataset, const NoiseSpec& spec,
                         NoiseReport* report) {
  const auto targets = require_targets(dataset, spec);
  std::vector<std::set<std::string>> nouns(dataset.size());
  std::map<std::string, std::vector<std::size_t>> by_noun;
  for (std::size_t i : targets) {
    nouns[i] = nouns_of(dataset.records[i]);
    for (const auto& noun : nouns[i]) by_noun[noun].push_back(i);
  }
  auto donors_for = [&](std::size_t row) {
    std::set<std::size_t> donors;
    for (const auto& noun : nouns[row]) {
      for (std::size_t d : by_noun[noun]) {
        if (d != row) donors.insert(d);
      }
    }
    return std::vector<std::size_t>(donors.begin(), donors.end());
  };
  const bool any_eligible = std::any_of(
      targets.begin(), targets.end(),
      [&](std::size_t i) { return !donors_for(i).empty(); });
  if (!any_eligible) {
    throw ValidationError("noun swap: no record shares a noun with another");
  }

  const std::size_t count = flag_count(spec, targets.size());
  Dataset out = prepare(dataset, spec, targets);
  Rng rng(spec.seed);
  // Walk a full seeded shuffle, passing over rows without donors.
  const auto order = sample_without_replacement(rng, targets, targets.size());
  std::size_t flagged = 0;
  for (std::size_t row : order) {
    if (flagged == count) break;
    const auto donors = donors_for(row);
    if (donors.empty()) continue;
    copy_text(out, dataset, row, donors[rng.below(donors.size())]);
    ++flagged;
  }
  if (report) *report = {count, flagged};
  return out;
}

Dataset inject_symmetric_flip(const Dataset& dataset, const NoiseSpec& spec,
                              int num_classes) {
  if (num_classes < 2) throw ValidationError("symmetric flip needs >= 2 classes");
  const auto targets = require_targets(dataset, spec);
  for (std::size_t i : targets) {
    const auto& id = dataset.records[i].class_id;
    if (!id || *id < 0 || *id >= num_classes) {
      throw ValidationError("record " + std::to_string(i) +
                            " needs a class_id in [0, " +
                            std::to_string(num_classes) + ")");
    }
  }
  const auto canonical = canonical_class_rows(dataset);
  const std::size_t count = flag_count(spec, targets.size());
  Dataset out = prepare(dataset, spec, targets);
  Rng rng(spec.seed);
  for (std::size_t row : sample_without_replacement(rng, targets, count)) {
    const int old_class = *dataset.records[row].class_id;
    auto new_class =
        static_cast<int>(rng.below(static_cast<std::uint64_t>(num_classes - 1)));
    if (new_class >= old_class) ++new_class;
    flip_to(out, dataset, canonical, row, new_class);
  }
  return out;
}

Dataset inject_asymmetric_flip(const Dataset& dataset, const NoiseSpec& spec) {
  if (!spec.class_permutation) {
    throw ValidationError("asymmetric flip needs a class permutation");
  }
  const std::vector<int>& perm = *spec.class_permutation;
  const auto targets = require_targets(dataset, spec);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& id = dataset.records[i].class_id;
    if (!id) continue;
    if (*id < 0 || static_cast<std::size_t>(*id) >= perm.size()) {
      throw ValidationError("class " + std::to_string(*id) +
                            " is not covered by the permutation");
    }
    if (perm[static_cast<std::size_t>(*id)] == *id) {
      throw ValidationError("permutation has a fixed point at class " +
                            std::to_string(*id));
    }
  }
  for (std::size_t i : targets) {
    if (!dataset.records[i].class_id) {
      throw ValidationError("record " + std::to_string(i) + " has no class_id");
    }
  }
  const auto canonical = canonical_class_rows(dataset);
  const std::size_t count = flag_count(spec, targets.size());
  Dataset out = prepare(dataset, spec, targets);
  Rng rng(spec.seed);
  for (std::size_t row : sample_without_replacement(rng, targets, count)) {
    const int old_class = *dataset.records[row].class_id;
    flip_to(out, dataset, canonical, row, perm[static_cast<std::size_t>(old_class)]);
  }
  return out;
}

std::vector<int> cyclic_permutation(int num_classes) {
  std::vector<int> perm(static_cast<std::size_t>(std::max(num_classes, 0)));
  for (int c = 0; c < num_classes; ++c) perm[c] = (c + 1) % num_classes;
  return perm;
}

Dataset inject_noise(const Dataset& dataset, const NoiseSpec& spec,
                     int num_classes, NoiseReport* report) {
  auto infer_classes = [&] {
    int max_id = -1;
    for (const auto& r : dataset.records) {
      if (r.class_id) max_id = std::max(max_id, *r.class_id);
    }
    return max_id + 1;
  };
  switch (spec.noise_type) {
    case NoiseType::kRandom:
      return inject_random_swap(dataset, spec);
    case NoiseType::kCategory:
      return inject_category_swap(dataset, spec);
    case NoiseType::kNoun:
      return inject_noun_swap(dataset, spec, report);
    case NoiseType::kSymmetric:
      return inject_symmetric_flip(
          dataset, spec, num_classes > 0 ? num_classes : infer_classes());
    case NoiseType::kAsymmetric: {
      if (spec.class_permutation) return inject_asymmetric_flip(dataset, spec);
      NoiseSpec with_perm = spec;
      with_perm.class_permutation = cyclic_permutation(
          num_classes > 0 ? num_classes : infer_classes());
      return inject_asymmetric_flip(dataset, with_perm);
    }
  }
  throw ValidationError("unsupported noise type");
}

}  // namespace lemon
