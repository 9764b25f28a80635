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

#include "lemon/dataset.h"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <map>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace lemon {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kImageFile = "image_emb.f32";
constexpr const char* kTextFile = "text_emb.f32";
constexpr const char* kRecordsFile = "records.jsonl";

std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) |
         (v >> 24);
}

std::string encode_f32(const EmbeddingMatrix& m) {
  std::string out(m.data().size() * sizeof(float), '\0');
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(m.data()[i]);
    if constexpr (std::endian::native == std::endian::big) {
      bits = byteswap32(bits);
    }
    std::memcpy(out.data() + i * sizeof(float), &bits, sizeof(bits));
  }
  return out;
}

EmbeddingMatrix decode_f32(const fs::path& path, std::size_t rows,
                           std::size_t dim) {
  const std::string bytes = read_file(path);
  const std::size_t expected = rows * dim * sizeof(float);
  if (bytes.size() != expected) {
    throw ValidationError(path.filename().string() + ": dimension mismatch: " +
                          std::to_string(bytes.size()) + " bytes, manifest " +
                          "declares " + std::to_string(rows) + "x" +
                          std::to_string(dim) + " float32 (" +
                          std::to_string(expected) + " bytes)");
  }
  std::vector<float> data(rows * dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, bytes.data() + i * sizeof(float), sizeof(bits));
    if constexpr (std::endian::native == std::endian::big) {
      bits = byteswap32(bits);
    }
    data[i] = std::bit_cast<float>(bits);
  }
  return EmbeddingMatrix(rows, dim, std::move(data));
}

Json record_to_json(const SampleRecord& r) {
  Json j;
  j["index"] = r.index;
  j["caption_text"] = r.caption_text;
  if (r.class_id) j["class_id"] = *r.class_id;
  if (r.category) j["category"] = *r.category;
  if (r.noun_set) j["noun_set"] = Json(*r.noun_set);
  j["split"] = std::string(split_name(r.split));
  if (r.mislabel_flag) j["mislabel_flag"] = *r.mislabel_flag;
  if (r.swap_source) j["swap_source"] = *r.swap_source;
  return j;
}

SampleRecord record_from_json(const Json& j, std::size_t row) {
  const std::string where =
      std::string(kRecordsFile) + ": row " + std::to_string(row) + ": ";
  if (!j.is_object()) throw ValidationError(where + "not a JSON object");
  SampleRecord r;
  try {
    if (!j.contains("index")) throw ValidationError(where + "missing 'index'");
    r.index = j.at("index").get<std::int64_t>();
    if (j.contains("caption_text")) {
      r.caption_text = j.at("caption_text").get<std::string>();
    }
    if (j.contains("class_id") && !j.at("class_id").is_null()) {
      r.class_id = j.at("class_id").get<int>();
    }
    if (j.contains("category") && !j.at("category").is_null()) {
      r.category = j.at("category").get<std::string>();
    }
    if (j.contains("noun_set") && !j.at("noun_set").is_null()) {
      std::set<std::string> nouns;
      for (const auto& noun : j.at("noun_set")) {
        nouns.insert(noun.get<std::string>());
      }
      r.noun_set = std::move(nouns);
    }
    if (!j.contains("split")) throw ValidationError(where + "missing 'split'");
    r.split = parse_split(j.at("split").get<std::string>());
    if (j.contains("mislabel_flag") && !j.at("mislabel_flag").is_null()) {
      r.mislabel_flag = j.at("mislabel_flag").get<bool>();
    }
    if (j.contains("swap_source") && !j.at("swap_source").is_null()) {
      r.swap_source = j.at("swap_source").get<std::int64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(where + e.what());
  } catch (const ValidationError& e) {
    if (std::string_view(e.what()).starts_with(kRecordsFile)) throw;
    throw ValidationError(where + e.what());
  }
  return r;
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim)
    : rows_(rows), dim_(dim), data_(rows * dim, 0.0f) {}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim,
                                 std::vector<float> data)
    : rows_(rows), dim_(dim), data_(std::move(data)) {
  if (data_.size() != rows_ * dim_) {
    throw ValidationError("embedding buffer holds " +
                          std::to_string(data_.size()) + " values, expected " +
                          std::to_string(rows_ * dim_));
  }
}

void EmbeddingMatrix::validate(std::string_view label) const {
  if (dim_ == 0 && rows_ > 0) {
    throw ValidationError(std::string(label) + ": embedding dim is 0");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    bool all_zero = true;
    for (float v : row(i)) {
      if (!std::isfinite(v)) {
        throw ValidationError(std::string(label) + ": row " +
                              std::to_string(i) + " has a non-finite value");
      }
      if (v != 0.0f) all_zero = false;
    }
    if (all_zero) {
      throw ValidationError(std::string(label) + ": row " + std::to_string(i) +
                            " is all zeros");
    }
  }
}

std::vector<std::size_t> Dataset::split_indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == split) out.push_back(i);
  }
  return out;
}

void Dataset::validate() const {
  if (image_embeddings.rows() != records.size() ||
      text_embeddings.rows() != records.size()) {
    throw ValidationError(
        "row count mismatch: " + std::to_string(records.size()) +
        " records, " + std::to_string(image_embeddings.rows()) +
        " image rows, " + std::to_string(text_embeddings.rows()) +
        " text rows");
  }
  image_embeddings.validate(kImageFile);
  text_embeddings.validate(kTextFile);
  std::map<Split, std::pair<std::size_t, std::size_t>> flag_counts;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const SampleRecord& r = records[i];
    const std::string where =
        std::string(kRecordsFile) + ": row " + std::to_string(i) + ": ";
    if (r.index != static_cast<std::int64_t>(i)) {
      throw ValidationError(where + "index " + std::to_string(r.index) +
                            " does not match row position");
    }
    if (r.swap_source) {
      if (*r.swap_source == r.index) {
        throw ValidationError(where + "swap_source equals own index");
      }
      if (*r.swap_source < 0 ||
          *r.swap_source >= static_cast<std::int64_t>(records.size())) {
        throw ValidationError(where + "swap_source out of range");
      }
    }
    auto& [total, flagged] = flag_counts[r.split];
    ++total;
    if (r.mislabel_flag) ++flagged;
  }
  for (const auto& [split, counts] : flag_counts) {
    if (counts.second != 0 && counts.second != counts.first) {
      throw ValidationError(std::string(kRecordsFile) + ": split '" +
                            std::string(split_name(split)) +
                            "' has mislabel_flag on only " +
                            std::to_string(counts.second) + " of " +
                            std::to_string(counts.first) + " records");
    }
  }
}

Dataset load_dataset(const fs::path& dir) {
  for (const char* name : {kManifestFile, kImageFile, kTextFile, kRecordsFile}) {
    if (!fs::exists(dir / name)) {
      throw ValidationError("missing file: " + (dir / name).string());
    }
  }
  Dataset ds;
  std::size_t n = 0, image_dim = 0, text_dim = 0;
  try {
    const Json m = Json::parse(read_file(dir / kManifestFile));
    ds.manifest.name = m.value("name", "");
    ds.manifest.encoder_id = m.value("encoder_id", "");
    ds.manifest.seed = m.value("seed", std::uint64_t{0});
    n = m.at("n").get<std::size_t>();
    image_dim = m.at("image_dim").get<std::size_t>();
    text_dim = m.at("text_dim").get<std::size_t>();
    if (m.contains("noise")) {
      const Json& nz = m.at("noise");
      ds.manifest.noise = NoiseProvenance{
          nz.at("noise_type").get<std::string>(), nz.at("rate").get<double>(),
          nz.at("seed").get<std::uint64_t>(), nz.at("split").get<std::string>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string(kManifestFile) + ": " + e.what());
  }

  ds.image_embeddings = decode_f32(dir / kImageFile, n, image_dim);
  ds.text_embeddings = decode_f32(dir / kTextFile, n, text_dim);

  std::istringstream lines(read_file(dir / kRecordsFile));
  std::string line;
  std::size_t row = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string(kRecordsFile) + ": row " +
                            std::to_string(row) + ": " + e.what());
    }
    ds.records.push_back(record_from_json(j, row));
    ++row;
  }
  if (ds.records.size() != n) {
    throw ValidationError(std::string(kRecordsFile) + ": " +
                          std::to_string(ds.records.size()) +
                          " records, manifest declares n=" + std::to_string(n));
  }
  ds.validate();
  return ds;
}

void write_dataset(const Dataset& dataset, const fs::path& dir) {
  dataset.validate();
  Json m;
  m["name"] = dataset.manifest.name;
  m["n"] = dataset.records.size();
  m["image_dim"] = dataset.image_embeddings.dim();
  m["text_dim"] = dataset.text_embeddings.dim();
  m["encoder_id"] = dataset.manifest.encoder_id;
  m["seed"] = dataset.manifest.seed;
  if (dataset.manifest.noise) {
    const NoiseProvenance& nz = *dataset.manifest.noise;
    m["noise"] = Json{{"noise_type", nz.noise_type},
                      {"rate", nz.rate},
                      {"seed", nz.seed},
                      {"split", nz.split}};
  }
  std::string records;
  for (const SampleRecord& r : dataset.records) {
    records += record_to_json(r).dump();
    records += '\n';
  }

  fs::path target = fs::absolute(dir);
  if (target.filename().empty()) target = target.parent_path();
  fs::path staging = target;
  staging += ".staging";
  std::error_code ec;
  fs::remove_all(staging, ec);
  if (!fs::create_directories(staging, ec) || ec) {
    throw IoError("cannot create directory " + staging.string() +
                  (ec ? ": " + ec.message() : ""));
  }
  write_file_atomic(staging / kManifestFile, m.dump(2) + "\n");
  write_file_atomic(staging / kImageFile, encode_f32(dataset.image_embeddings));
  write_file_atomic(staging / kTextFile, encode_f32(dataset.text_embeddings));
  write_file_atomic(staging / kRecordsFile, records);
  if (fs::exists(target)) fs::remove_all(target, ec);
  fs::rename(staging, target, ec);
  if (ec) {
    throw IoError("cannot move " + staging.string() + " to " +
                  target.string() + ": " + ec.message());
  }
}

std::string format_scores(const ScoreTable& table) {
  std::string out = "index,method,score,d_mm,s_n,s_m\n";
  for (const ScoreRow& row : table) {
    out += std::to_string(row.index);
    out += ',';
    out += row.method;
    out += ',';
    out += format_double(row.score);
    if (row.breakdown) {
      out += ',' + format_double(row.breakdown->d_mm);
      out += ',' + format_double(row.breakdown->s_n);
      out += ',' + format_double(row.breakdown->s_m);
    } else {
      out += ",,,";
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

double parse_real(const std::string& text, const std::string& where) {
  if (text.empty()) throw ValidationError(where + "empty numeric field");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  // strtod flags ERANGE on subnormal results; only reject true overflow.
  if (end != text.c_str() + text.size() || !std::isfinite(v)) {
    throw ValidationError(where + "invalid number '" + text + "'");
  }
  return v;
}

}  // namespace

ScoreTable parse_scores(std::string_view csv, std::string_view source) {
  const std::string prefix =
      source.empty() ? std::string("scores: ") : std::string(source) + ": ";
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(prefix + "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "index,method,score,d_mm,s_n,s_m") {
    throw ValidationError(prefix + "unexpected header '" + line + "'");
  }
  ScoreTable table;
  std::unordered_set<std::int64_t> seen;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::string where = prefix + "row " + std::to_string(row) + ": ";
    const auto fields = split_csv_line(line);
    if (fields.size() != 6) {
      throw ValidationError(where + "expected 6 fields, got " +
                            std::to_string(fields.size()));
    }
    ScoreRow r;
    char* end = nullptr;
    r.index = std::strtoll(fields[0].c_str(), &end, 10);
    if (fields[0].empty() || end != fields[0].c_str() + fields[0].size() ||
        r.index < 0) {
      throw ValidationError(where + "invalid index '" + fields[0] + "'");
    }
    if (!seen.insert(r.index).second) {
      throw ValidationError(where + "duplicate index " + fields[0]);
    }
    r.method = fields[1];
    r.score = parse_real(fields[2], where);
    const bool has_d = !fields[3].empty(), has_n = !fields[4].empty(),
               has_m = !fields[5].empty();
    if (has_d || has_n || has_m) {
      if (!(has_d && has_n && has_m)) {
        throw ValidationError(where + "partial breakdown columns");
      }
      r.breakdown = ScoreBreakdown{parse_real(fields[3], where),
                                   parse_real(fields[4], where),
                                   parse_real(fields[5], where), r.score};
    }
    table.push_back(std::move(r));
    ++row;
  }
  return table;
}

void write_scores(const ScoreTable& table, const fs::path& path) {
  for (const ScoreRow& r : table) {
    if (!std::isfinite(r.score)) {
      throw ValidationError("score for index " + std::to_string(r.index) +
                            " is not finite");
    }
  }
  write_file_atomic(path, format_scores(table));
}

ScoreTable read_scores(const fs::path& path) {
  return parse_scores(read_file(path), path.string());
}

}  // namespace lemon
