#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace propgraph {

/// Dense embedding. Stored vectors are unit-normalized at write time so that
/// cosine similarity reduces to a dot product.
using Embedding = std::vector<float>;
using EmbeddingView = std::span<const float>;

inline constexpr double kUnitNormTolerance = 1e-6;

double l2_norm(EmbeddingView v) noexcept;
bool is_unit_norm(EmbeddingView v, double tolerance = kUnitNormTolerance) noexcept;

/// Returns v / ||v||. A zero vector is returned unchanged.
Embedding normalized(EmbeddingView v);
Embedding normalized(std::span<const double> v);

/// Dot product of two unit vectors, accumulated in double and clamped to [-1, 1].
/// Throws DimensionMismatch when sizes differ.
double cosine(EmbeddingView a, EmbeddingView b);

/// Row-major matrix of equally sized embeddings.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  explicit EmbeddingMatrix(std::size_t dimension) : dimension_(dimension) {}

  std::size_t rows() const noexcept { return dimension_ == 0 ? 0 : data_.size() / dimension_; }
  std::size_t dimension() const noexcept { return dimension_; }
  bool empty() const noexcept { return data_.empty(); }

  EmbeddingView row(std::size_t i) const {
    return {data_.data() + i * dimension_, dimension_};
  }

  /// Appends a row; fixes the dimension on first insertion.
  void push_back(EmbeddingView v);
  void reserve(std::size_t rows) { data_.reserve(rows * dimension_); }

  /// Keeps rows whose keep[i] is true, preserving order.
  void retain(const std::vector<bool>& keep);

  const std::vector<float>& data() const noexcept { return data_; }
  std::vector<float>& mutable_data() noexcept { return data_; }
  void set_dimension(std::size_t d) noexcept { dimension_ = d; }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t dimension_ = 0;
  std::vector<float> data_;
};

struct ScoredIndex {
  std::size_t index = 0;
  double score = 0.0;
  friend bool operator==(const ScoredIndex&, const ScoredIndex&) = default;
};

/// The k rows with the highest cosine to `query`, sorted by descending score and
/// ascending index on ties. Returns every row when fewer than k exist.
/// Throws EmptyCandidates for an empty matrix and InvalidArgument for k == 0.
std::vector<ScoredIndex> top_k_similar(EmbeddingView query, const EmbeddingMatrix& candidates,
                                       std::size_t k);

/// Text encoder contract shared by the live and mock realizations.
class EmbedBackend {
 public:
  virtual ~EmbedBackend() = default;
  /// One unit-norm vector per input, in input order.
  virtual std::vector<Embedding> embed(const std::vector<std::string>& texts) = 0;
  virtual std::size_t dimension() const = 0;

  Embedding embed_one(const std::string& text) { return std::move(embed({text}).front()); }
};

inline constexpr std::size_t kMockEmbeddingDimension = 256;

/// Hashed character 3-gram encoder. Lowercases the text, pads it with a space on
/// both sides and counts FNV-1a hashed trigrams into `dimension` buckets.
/// Byte-identical input yields byte-identical output.
Embedding mock_embed(std::string_view text, std::size_t dimension = kMockEmbeddingDimension);

class MockEmbedBackend final : public EmbedBackend {
 public:
  explicit MockEmbedBackend(std::size_t dimension = kMockEmbeddingDimension)
      : dimension_(dimension) {}

  std::vector<Embedding> embed(const std::vector<std::string>& texts) override;
  std::size_t dimension() const override { return dimension_; }

 private:
  std::size_t dimension_;
};

}  // namespace propgraph
