#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace echoscore {

/// Rows of real values keyed by external user ID, as stored in embedding files.
///
/// Two on-disk forms share this model:
///   CSV     header `user,dim0,...,dim{f-1}` (per-user rows) or
///           `user,tweet_idx,dim0,...` (per-tweet rows).
///   binary  "EGAE" magic, u32 rows, u32 cols, u32 id count, then per id a
///           u32 byte length and UTF-8 bytes, then rows*cols float32 values
///           row-major. All integers and floats little-endian. Per-user only.
struct LabeledMatrix {
  std::vector<std::string> ids;
  std::vector<std::int64_t> tweet_index;  // empty for per-user files
  Eigen::MatrixXd values;

  bool per_tweet() const noexcept { return !tweet_index.empty(); }
};

enum class MatrixFormat { kCsv, kBinary };

inline constexpr char kBinaryMagic[4] = {'E', 'G', 'A', 'E'};

/// Sniffs the magic bytes to pick the decoder.
LabeledMatrix read_labeled_matrix(const std::filesystem::path& path);
LabeledMatrix read_labeled_matrix_csv(std::istream& in, const std::string& source_name);
LabeledMatrix read_labeled_matrix_binary(std::istream& in, const std::string& source_name);

void write_labeled_matrix_csv(std::ostream& out, const std::vector<std::string>& ids,
                              const Eigen::MatrixXd& values);
void write_labeled_matrix_binary(std::ostream& out, const std::vector<std::string>& ids,
                                 const Eigen::MatrixXd& values);
void write_labeled_matrix(const std::filesystem::path& path, const std::vector<std::string>& ids,
                          const Eigen::MatrixXd& values, MatrixFormat format);

/// Chooses binary for ".bin"/".egae" extensions, CSV otherwise.
MatrixFormat format_for_path(const std::filesystem::path& path);

}  // namespace echoscore
