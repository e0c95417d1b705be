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

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tutoreval/llm_client.hpp"
#include "tutoreval/principles.hpp"
#include "tutoreval/transcript.hpp"

namespace tutoreval {

using Vector = std::vector<double>;

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<Vector> embed(std::span<const std::string> texts) = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::string id() const = 0;
};

/// Feature hashing: lowercase alphanumeric tokens (bytes >= 0x80 count as
/// token characters), FNV-1a bucket, sign from a second salted hash, then L2
/// normalization. Text without tokens maps to the zero vector.
class HashingEmbedder final : public Embedder {
 public:
  static constexpr std::size_t kDefaultDimension = 256;

  explicit HashingEmbedder(std::size_t dimension = kDefaultDimension);

  std::vector<Vector> embed(std::span<const std::string> texts) override;
  Vector embed_one(std::string_view text) const;
  std::size_t dimension() const override { return dimension_; }
  std::string id() const override { return "hashing-fnv1a-" + std::to_string(dimension_); }

 private:
  std::size_t dimension_;
};

/// POST <base_url>/embeddings {model, input:[...]} and read data[i].embedding.
class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(HttpEndpoint endpoint, std::string model, std::size_t dimension);

  std::vector<Vector> embed(std::span<const std::string> texts) override;
  std::size_t dimension() const override { return dimension_; }
  std::string id() const override { return "remote:" + model_; }

 private:
  HttpEndpoint endpoint_;
  std::string model_;
  std::size_t dimension_;
};

std::string embeddings_request_body(std::string_view model, std::span<const std::string> texts);
std::vector<Vector> parse_embeddings_response(std::string_view body, std::size_t expected_count);

/// Checks count and dimensions of an embedder's output. Throws
/// Error(EmbedderUnavailable | DimensionMismatch).
std::vector<Vector> embed(std::span<const std::string> texts, Embedder& embedder);

std::vector<std::string> tokenize(std::string_view text);
double l2_norm(std::span<const double> v);
bool is_degenerate(std::span<const double> v);

/// Cosine similarity; 0 when either vector has zero norm. Throws DimensionMismatch.
double cosine(std::span<const double> a, std::span<const double> b);

enum class SourceKind { TranscriptChunk, PrincipleText };
std::string_view to_string(SourceKind kind);

struct EmbeddingRecord {
  std::string record_id;
  SourceKind source_kind = SourceKind::TranscriptChunk;
  std::string source_ref;
  std::string text;
  Vector vector;

  friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

struct RetrievalHit {
  std::string record_id;
  double score = 0.0;

  friend bool operator==(const RetrievalHit&, const RetrievalHit&) = default;
};

/// Exact-scan vector store. Readers may run concurrently; index() takes an
/// exclusive lock.
class VectorStore {
 public:
  VectorStore(std::size_t dimension, std::string embedder_id);

  VectorStore(const VectorStore&) = delete;
  VectorStore& operator=(const VectorStore&) = delete;

  /// All-or-nothing. Throws DuplicateRecordId or DimensionMismatch.
  void index(std::vector<EmbeddingRecord> records);

  std::size_t size() const;
  std::size_t dimension() const { return dimension_; }
  const std::string& embedder_id() const { return embedder_id_; }
  std::optional<EmbeddingRecord> get(std::string_view record_id) const;
  std::vector<EmbeddingRecord> records() const;

  /// Top-k by cosine, score descending, ties by ascending record_id.
  std::vector<RetrievalHit> search(std::span<const double> query, std::size_t k,
                                   std::optional<SourceKind> filter = std::nullopt) const;
  std::vector<RetrievalHit> retrieve(std::string_view query_text, std::size_t k, std::optional<SourceKind> filter,
                                     Embedder& embedder) const;

  /// Header line {dimension, embedder_id, count} then one record per line.
  void save(const std::filesystem::path& path) const;
  static std::unique_ptr<VectorStore> load(const std::filesystem::path& path);

 private:
  std::size_t dimension_;
  std::string embedder_id_;
  mutable std::shared_mutex mu_;
  std::vector<EmbeddingRecord> records_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
};

inline constexpr std::size_t kDefaultTopK = 4;

std::string principle_record_id(const Principle& principle);
/// "<name>: <description>\nCriteria:\n<numbered criteria>"
std::string principle_text(const Principle& principle);
/// Name and description, the per-principle retrieval query.
std::string principle_query(const Principle& principle);

/// Embeds and indexes every chunk of the transcript plus every principle of
/// the rubric into a fresh store.
std::unique_ptr<VectorStore> build_store(const Transcript& transcript, const Rubric& rubric, Embedder& embedder,
                                         ChunkParams chunking = {});

}  // namespace tutoreval
