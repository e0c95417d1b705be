// Copyright 2026 the tutoreval authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tutoreval/rag_store.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "json.hpp"
#include "util.hpp"

namespace tutoreval {

using nlohmann::json;

namespace {

constexpr std::uint64_t kSignSalt = 0x9e3779b97f4a7c15ULL;

bool is_token_char(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (is_token_char(c)) {
      cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

bool is_degenerate(std::span<const double> v) { return l2_norm(v) == 0.0; }

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "cosine of vectors with " + std::to_string(a.size()) + " and " + std::to_string(b.size()) + " entries");
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::string_view to_string(SourceKind kind) {
  return kind == SourceKind::TranscriptChunk ? "transcript_chunk" : "principle_text";
}

namespace {

SourceKind source_kind_from(const std::string& s) {
  if (s == "transcript_chunk") return SourceKind::TranscriptChunk;
  if (s == "principle_text") return SourceKind::PrincipleText;
  throw Error(ErrorCode::ParseError, "unknown source_kind '" + s + "'");
}

}  // namespace

// ---------------------------------------------------------------------------

HashingEmbedder::HashingEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw Error(ErrorCode::ConfigError, "embedding dimension must be positive");
}

Vector HashingEmbedder::embed_one(std::string_view text) const {
  Vector v(dimension_, 0.0);
  for (const auto& token : tokenize(text)) {
    const std::uint64_t bucket = detail::fnv1a64(token) % dimension_;
    const std::uint64_t sign_hash = detail::fnv1a64(token, detail::fnv1a64("sign") ^ kSignSalt);
    v[bucket] += (sign_hash >> 63) ? -1.0 : 1.0;
  }
  const double norm = l2_norm(v);
  if (norm > 0.0) {
    for (double& x : v) x /= norm;
  }
  return v;
}

std::vector<Vector> HashingEmbedder::embed(std::span<const std::string> texts) {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t));
  return out;
}

RemoteEmbedder::RemoteEmbedder(HttpEndpoint endpoint, std::string model, std::size_t dimension)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), dimension_(dimension) {
  if (dimension_ == 0) throw Error(ErrorCode::ConfigError, "embedding dimension must be positive");
}

std::string embeddings_request_body(std::string_view model, std::span<const std::string> texts) {
  json input = json::array();
  for (const auto& t : texts) input.push_back(t);
  return json{{"model", std::string(model)}, {"input", std::move(input)}}.dump();
}

std::vector<Vector> parse_embeddings_response(std::string_view body, std::size_t expected_count) {
  std::vector<Vector> out;
  try {
    const json doc = json::parse(body);
    const auto& data = doc.at("data");
    out.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& item = data[i];
      const std::size_t slot = item.contains("index") ? item.at("index").get<std::size_t>() : i;
      if (slot >= out.size()) throw Error(ErrorCode::EmbedderUnavailable, "embedding index out of range");
      out[slot] = item.at("embedding").get<Vector>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::EmbedderUnavailable, std::string("embeddings response: ") + e.what());
  }
  if (out.size() != expected_count) {
    throw Error(ErrorCode::EmbedderUnavailable, "embeddings response has " + std::to_string(out.size()) +
                                                    " vectors for " + std::to_string(expected_count) + " inputs");
  }
  return out;
}

std::vector<Vector> RemoteEmbedder::embed(std::span<const std::string> texts) {
  std::string body;
  try {
    body = http_post_json(endpoint_, "/embeddings", embeddings_request_body(model_, texts));
  } catch (const Error& e) {
    throw Error(ErrorCode::EmbedderUnavailable, e.what());
  }
  return parse_embeddings_response(body, texts.size());
}

std::vector<Vector> embed(std::span<const std::string> texts, Embedder& embedder) {
  if (texts.empty()) throw Error(ErrorCode::ValidationError, "nothing to embed");
  std::vector<Vector> out = embedder.embed(texts);
  if (out.size() != texts.size()) {
    throw Error(ErrorCode::EmbedderUnavailable, "embedder returned " + std::to_string(out.size()) + " vectors for " +
                                                    std::to_string(texts.size()) + " texts");
  }
  for (const auto& v : out) {
    if (v.size() != embedder.dimension()) {
      throw Error(ErrorCode::DimensionMismatch, "embedder '" + embedder.id() + "' returned a vector of length " +
                                                    std::to_string(v.size()) + ", expected " +
                                                    std::to_string(embedder.dimension()));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

VectorStore::VectorStore(std::size_t dimension, std::string embedder_id)
    : dimension_(dimension), embedder_id_(std::move(embedder_id)) {
  if (dimension_ == 0) throw Error(ErrorCode::ConfigError, "store dimension must be positive");
}

void VectorStore::index(std::vector<EmbeddingRecord> records) {
  std::unique_lock lock(mu_);
  std::map<std::string, std::size_t, std::less<>> incoming;
  for (const auto& r : records) {
    if (r.vector.size() != dimension_) {
      throw Error(ErrorCode::DimensionMismatch, "record '" + r.record_id + "' has dimension " +
                                                    std::to_string(r.vector.size()) + ", store has " +
                                                    std::to_string(dimension_));
    }
    for (double x : r.vector) {
      if (!std::isfinite(x)) throw Error(ErrorCode::ValidationError, "record '" + r.record_id + "' is not finite");
    }
    if (r.record_id.empty()) throw Error(ErrorCode::ValidationError, "empty record_id");
    if (by_id_.count(r.record_id) || !incoming.emplace(r.record_id, 0).second) {
      throw Error(ErrorCode::DuplicateRecordId, r.record_id);
    }
  }
  for (auto& r : records) {
    by_id_.emplace(r.record_id, records_.size());
    records_.push_back(std::move(r));
  }
}

std::size_t VectorStore::size() const {
  std::shared_lock lock(mu_);
  return records_.size();
}

std::optional<EmbeddingRecord> VectorStore::get(std::string_view record_id) const {
  std::shared_lock lock(mu_);
  const auto it = by_id_.find(record_id);
  if (it == by_id_.end()) return std::nullopt;
  return records_[it->second];
}

std::vector<EmbeddingRecord> VectorStore::records() const {
  std::shared_lock lock(mu_);
  return records_;
}

std::vector<RetrievalHit> VectorStore::search(std::span<const double> query, std::size_t k,
                                              std::optional<SourceKind> filter) const {
  if (k == 0) throw Error(ErrorCode::ValidationError, "k must be at least 1");
  if (query.size() != dimension_) {
    throw Error(ErrorCode::DimensionMismatch, "query has dimension " + std::to_string(query.size()));
  }
  std::shared_lock lock(mu_);
  std::vector<RetrievalHit> hits;
  hits.reserve(records_.size());
  for (const auto& r : records_) {
    if (filter && r.source_kind != *filter) continue;
    hits.push_back(RetrievalHit{r.record_id, cosine(query, r.vector)});
  }
  if (hits.empty()) throw Error(ErrorCode::EmptyStore, "no records to search");
  const auto better = [](const RetrievalHit& a, const RetrievalHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.record_id < b.record_id;
  };
  const std::size_t n = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(), better);
  hits.resize(n);
  return hits;
}

std::vector<RetrievalHit> VectorStore::retrieve(std::string_view query_text, std::size_t k,
                                                std::optional<SourceKind> filter, Embedder& embedder) const {
  if (size() == 0) throw Error(ErrorCode::EmptyStore, "store is empty");
  const std::string q(query_text);
  const auto vectors = tutoreval::embed(std::span<const std::string>(&q, 1), embedder);
  return search(vectors.front(), k, filter);
}

void VectorStore::save(const std::filesystem::path& path) const {
  std::shared_lock lock(mu_);
  std::string out =
      json{{"dimension", dimension_}, {"embedder_id", embedder_id_}, {"count", records_.size()}}.dump() + "\n";
  for (const auto& r : records_) {
    out += json{{"record_id", r.record_id},
                {"source_kind", std::string(to_string(r.source_kind))},
                {"source_ref", r.source_ref},
                {"text", r.text},
                {"vector", r.vector}}
               .dump() +
           "\n";
  }
  detail::write_file(path, out);
}

std::unique_ptr<VectorStore> VectorStore::load(const std::filesystem::path& path) {
  const std::string content = detail::read_file(path);
  const auto lines = detail::split_lines(content);
  if (lines.empty()) throw Error(ErrorCode::ParseError, "store file is empty");
  try {
    const json header = json::parse(lines.front());
    auto store = std::make_unique<VectorStore>(header.at("dimension").get<std::size_t>(),
                                               header.at("embedder_id").get<std::string>());
    const auto count = header.at("count").get<std::size_t>();
    std::vector<EmbeddingRecord> records;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (detail::trim(lines[i]).empty()) continue;
      const json j = json::parse(lines[i]);
      records.push_back(EmbeddingRecord{j.at("record_id").get<std::string>(),
                                        source_kind_from(j.at("source_kind").get<std::string>()),
                                        j.at("source_ref").get<std::string>(), j.at("text").get<std::string>(),
                                        j.at("vector").get<Vector>()});
    }
    if (records.size() != count) {
      throw Error(ErrorCode::ValidationError, "store header says " + std::to_string(count) + " records, file has " +
                                                  std::to_string(records.size()));
    }
    store->index(std::move(records));
    return store;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("store file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

std::string principle_record_id(const Principle& principle) { return "principle:" + principle.principle_id; }

std::string principle_text(const Principle& principle) {
  return principle.name + ": " + principle.description + "\nCriteria:\n" + render_criteria(principle);
}

std::string principle_query(const Principle& principle) { return principle.name + " " + principle.description; }

std::unique_ptr<VectorStore> build_store(const Transcript& transcript, const Rubric& rubric, Embedder& embedder,
                                         ChunkParams chunking) {
  std::vector<EmbeddingRecord> records;
  std::vector<std::string> texts;
  for (auto& chunk : chunk_turns(transcript, chunking)) {
    texts.push_back(chunk.text);
    records.push_back(
        EmbeddingRecord{chunk.chunk_id, SourceKind::TranscriptChunk, chunk.chunk_id, std::move(chunk.text), {}});
  }
  for (const auto& p : rubric.principles) {
    texts.push_back(principle_text(p));
    records.push_back(
        EmbeddingRecord{principle_record_id(p), SourceKind::PrincipleText, p.principle_id, texts.back(), {}});
  }
  auto vectors = embed(texts, embedder);
  for (std::size_t i = 0; i < records.size(); ++i) records[i].vector = std::move(vectors[i]);
  auto store = std::make_unique<VectorStore>(embedder.dimension(), embedder.id());
  store->index(std::move(records));
  return store;
}

}  // namespace tutoreval
