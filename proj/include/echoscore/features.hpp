#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "echoscore/graph.hpp"
#include "echoscore/matrix_io.hpp"

namespace echoscore {

enum class FeatureProvenance { kImported, kHashedTfidf, kIdentity };

std::string_view to_string(FeatureProvenance p);

/// Per-user content features X, rows aligned to graph node order.
///
/// The identity variant is never materialized: products against it reduce to
/// row selection, which is how the encoder consumes one-hot features.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;

  /// Takes ownership of `values` and L2-normalizes every nonzero row.
  static FeatureMatrix dense(Eigen::MatrixXd values, FeatureProvenance provenance);
  static FeatureMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return identity_ ? rows_ : static_cast<std::size_t>(values_.cols()); }
  bool is_identity() const noexcept { return identity_; }
  FeatureProvenance provenance() const noexcept { return provenance_; }

  /// Dense values; throws std::logic_error for the identity variant.
  const Eigen::MatrixXd& values() const;
  Eigen::MatrixXd to_dense() const;

  /// X * w
  Eigen::MatrixXd multiply(const Eigen::MatrixXd& w) const;
  /// X^T * g
  Eigen::MatrixXd transpose_multiply(const Eigen::MatrixXd& g) const;

  /// Row i moves to perm[i].
  FeatureMatrix permuted_rows(std::span<const NodeIndex> perm) const;

 private:
  std::size_t rows_ = 0;
  bool identity_ = false;
  FeatureProvenance provenance_ = FeatureProvenance::kImported;
  Eigen::MatrixXd values_;
};

/// A feature matrix plus what happened while building it.
struct FeatureBuild {
  FeatureMatrix features;
  double coverage = 0.0;  // fraction of graph users with a nonzero feature source
  std::vector<std::string> warnings;
};

/// L2-normalizes nonzero rows in place; all-zero rows stay zero.
void normalize_rows(Eigen::MatrixXd& m);

// ---------------------------------------------------------------------------
// Raw text
// ---------------------------------------------------------------------------

/// External user ID -> that user's posts, most recent first.
using UserDocuments = std::map<std::string, std::vector<std::string>>;

inline constexpr std::size_t kMaxPostsPerUser = 200;

/// Reads JSON Lines of {"user": "<id>", "texts": [...]}. Repeated users are merged.
UserDocuments read_documents(const std::filesystem::path& path);
UserDocuments parse_documents(std::istream& in, const std::string& source_name = "<stream>");

/// Lowercased unigrams. URLs and @mentions are dropped; '#' is stripped from
/// hashtags; splits on whitespace and punctuation.
std::vector<std::string> tokenize(std::string_view text);

struct HashedTfidfOptions {
  std::size_t dimension = 256;
  std::uint64_t hash_seed = 0x9e3779b97f4a7c15ULL;
};

/// Signed feature hashing of unigram counts with smoothed IDF
/// log((1 + N) / (1 + df)) + 1 over the tweet corpus; users are the mean of
/// their tweet vectors, then normalized.
FeatureBuild hashed_tfidf(const UserDocuments& docs, const InteractionGraph& g,
                          const HashedTfidfOptions& options = {});

/// Imports a per-user or per-tweet embedding file, mean-pooling per-tweet rows.
FeatureBuild mean_pool_import(const std::filesystem::path& path, const InteractionGraph& g);
FeatureBuild mean_pool(const LabeledMatrix& file, const InteractionGraph& g);

FeatureMatrix identity_features(const InteractionGraph& g);

}  // namespace echoscore
