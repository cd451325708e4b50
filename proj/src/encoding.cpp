#include "propgraph/encoding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "propgraph/error.hpp"

namespace propgraph {

double l2_norm(EmbeddingView v) noexcept {
  double sum = 0.0;
  for (float x : v) sum += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(sum);
}

bool is_unit_norm(EmbeddingView v, double tolerance) noexcept {
  return std::abs(l2_norm(v) - 1.0) <= tolerance;
}

Embedding normalized(EmbeddingView v) {
  Embedding out(v.begin(), v.end());
  const double n = l2_norm(v);
  if (n == 0.0) return out;
  for (float& x : out) x = static_cast<float>(static_cast<double>(x) / n);
  return out;
}

Embedding normalized(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  const double n = std::sqrt(sum);
  Embedding out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<float>(n == 0.0 ? v[i] : v[i] / n);
  }
  return out;
}

double cosine(EmbeddingView a, EmbeddingView b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "cosine of vectors with dimensions " + std::to_string(a.size()) + " and " +
                    std::to_string(b.size()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return std::clamp(dot, -1.0, 1.0);
}

void EmbeddingMatrix::push_back(EmbeddingView v) {
  if (dimension_ == 0) dimension_ = v.size();
  if (v.size() != dimension_) {
    throw Error(ErrorCode::DimensionMismatch,
                "row of dimension " + std::to_string(v.size()) + " in matrix of dimension " +
                    std::to_string(dimension_));
  }
  data_.insert(data_.end(), v.begin(), v.end());
}

void EmbeddingMatrix::retain(const std::vector<bool>& keep) {
  std::size_t out = 0;
  const std::size_t n = rows();
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    if (out != i) {
      std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(i * dimension_), dimension_,
                  data_.begin() + static_cast<std::ptrdiff_t>(out * dimension_));
    }
    ++out;
  }
  data_.resize(out * dimension_);
}

std::vector<ScoredIndex> top_k_similar(EmbeddingView query, const EmbeddingMatrix& candidates,
                                       std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "top_k_similar requires k >= 1");
  if (candidates.rows() == 0) throw Error(ErrorCode::EmptyCandidates, "no candidate embeddings");

  std::vector<ScoredIndex> scored(candidates.rows());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    scored[i] = {i, cosine(query, candidates.row(i))};
  }
  const auto better = [](const ScoredIndex& a, const ScoredIndex& b) {
    return a.score != b.score ? a.score > b.score : a.index < b.index;
  };
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), better);
  scored.resize(take);
  return scored;
}

namespace {

std::uint64_t fnv1a(std::string_view bytes) noexcept {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

Embedding mock_embed(std::string_view text, std::size_t dimension) {
  std::string padded;
  padded.reserve(text.size() + 2);
  padded.push_back(' ');
  for (unsigned char c : text) padded.push_back(static_cast<char>(std::tolower(c)));
  padded.push_back(' ');
  // the empty string still maps to a unit vector
  while (padded.size() < 3) padded.push_back(' ');

  std::vector<double> counts(dimension, 0.0);
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    counts[fnv1a(std::string_view(padded).substr(i, 3)) % dimension] += 1.0;
  }
  return normalized(std::span<const double>(counts));
}

std::vector<Embedding> MockEmbedBackend::embed(const std::vector<std::string>& texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(mock_embed(t, dimension_));
  return out;
}

}  // namespace propgraph
