#include "echoscore/matrix_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "echoscore/csv.hpp"
#include "echoscore/error.hpp"

namespace echoscore {
namespace {

static_assert(std::endian::native == std::endian::little, "binary matrix codec assumes little-endian host");

double parse_real(const std::string& text, const std::string& source, std::size_t line) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) throw ParseError(source, line, "not a number: '" + text + "'");
  if (!std::isfinite(value)) throw ParseError(source, line, "non-finite value");
  return value;
}

std::int64_t parse_integer(const std::string& text, const std::string& source, std::size_t line) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(source, line, "not an integer: '" + text + "'");
  }
  return value;
}

std::uint32_t read_u32(std::istream& in, const std::string& source, const char* what) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw DataError(source + ": truncated binary matrix (" + what + ")");
  }
  return v;
}

void write_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

}  // namespace

LabeledMatrix read_labeled_matrix_csv(std::istream& in, const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source_name + ": empty embedding file");
  const auto header = csv::split_line(line);
  if (header.empty() || header[0] != "user") throw ParseError(source_name, 1, "header must start with 'user'");
  const bool per_tweet = header.size() > 1 && header[1] == "tweet_idx";
  const std::size_t first_dim = per_tweet ? 2 : 1;
  const std::size_t dims = header.size() - first_dim;
  if (dims == 0) throw ParseError(source_name, 1, "no dimension columns");
  for (std::size_t j = 0; j < dims; ++j) {
    if (header[first_dim + j] != "dim" + std::to_string(j)) {
      throw ParseError(source_name, 1, "expected column 'dim" + std::to_string(j) + "'");
    }
  }

  LabeledMatrix out;
  std::vector<double> flat;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> fields;
    try {
      fields = csv::split_line(line);
    } catch (const std::invalid_argument& e) {
      throw ParseError(source_name, line_no, e.what());
    }
    if (fields.size() != header.size()) {
      throw ParseError(source_name, line_no,
                       "dimension mismatch: row has " + std::to_string(fields.size() - first_dim) +
                           " values, header declares " + std::to_string(dims));
    }
    if (fields[0].empty()) throw ParseError(source_name, line_no, "empty user ID");
    out.ids.push_back(fields[0]);
    if (per_tweet) out.tweet_index.push_back(parse_integer(fields[1], source_name, line_no));
    for (std::size_t j = 0; j < dims; ++j) flat.push_back(parse_real(fields[first_dim + j], source_name, line_no));
  }

  out.values.resize(static_cast<Eigen::Index>(out.ids.size()), static_cast<Eigen::Index>(dims));
  for (std::size_t i = 0; i < out.ids.size(); ++i) {
    for (std::size_t j = 0; j < dims; ++j) {
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = flat[i * dims + j];
    }
  }
  return out;
}

LabeledMatrix read_labeled_matrix_binary(std::istream& in, const std::string& source_name) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kBinaryMagic, 4) != 0) {
    throw DataError(source_name + ": missing EGAE magic");
  }
  const std::uint32_t rows = read_u32(in, source_name, "rows");
  const std::uint32_t cols = read_u32(in, source_name, "cols");
  const std::uint32_t count = read_u32(in, source_name, "id count");
  if (count != rows) {
    throw DataError(source_name + ": id table has " + std::to_string(count) + " entries for " +
                    std::to_string(rows) + " rows");
  }
  LabeledMatrix out;
  out.ids.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t len = read_u32(in, source_name, "id length");
    std::string id(len, '\0');
    if (!in.read(id.data(), len)) throw DataError(source_name + ": truncated id table");
    out.ids.push_back(std::move(id));
  }
  out.values.resize(rows, cols);
  std::vector<float> row(cols);
  for (std::uint32_t i = 0; i < rows; ++i) {
    if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(cols * sizeof(float)))) {
      throw DataError(source_name + ": truncated matrix values");
    }
    for (std::uint32_t j = 0; j < cols; ++j) {
      if (!std::isfinite(row[j])) throw DataError(source_name + ": non-finite value in row " + std::to_string(i));
      out.values(i, j) = row[j];
    }
  }
  return out;
}

LabeledMatrix read_labeled_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding file " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  const bool binary = in.gcount() == 4 && std::memcmp(magic, kBinaryMagic, 4) == 0;
  in.clear();
  in.seekg(0);
  return binary ? read_labeled_matrix_binary(in, path.string()) : read_labeled_matrix_csv(in, path.string());
}

void write_labeled_matrix_csv(std::ostream& out, const std::vector<std::string>& ids, const Eigen::MatrixXd& values) {
  if (ids.size() != static_cast<std::size_t>(values.rows())) throw std::invalid_argument("ids/rows mismatch");
  out << "user";
  for (Eigen::Index j = 0; j < values.cols(); ++j) out << ",dim" << j;
  out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    out << csv::quote(ids[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << ',' << csv::format_double(values(i, j));
    out << '\n';
  }
}

void write_labeled_matrix_binary(std::ostream& out, const std::vector<std::string>& ids,
                                 const Eigen::MatrixXd& values) {
  if (ids.size() != static_cast<std::size_t>(values.rows())) throw std::invalid_argument("ids/rows mismatch");
  out.write(kBinaryMagic, 4);
  write_u32(out, static_cast<std::uint32_t>(values.rows()));
  write_u32(out, static_cast<std::uint32_t>(values.cols()));
  write_u32(out, static_cast<std::uint32_t>(ids.size()));
  for (const auto& id : ids) {
    write_u32(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  std::vector<float> row(static_cast<std::size_t>(values.cols()));
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) row[static_cast<std::size_t>(j)] = static_cast<float>(values(i, j));
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
}

MatrixFormat format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".bin" || ext == ".egae") ? MatrixFormat::kBinary : MatrixFormat::kCsv;
}

void write_labeled_matrix(const std::filesystem::path& path, const std::vector<std::string>& ids,
                          const Eigen::MatrixXd& values, MatrixFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  if (format == MatrixFormat::kBinary) {
    write_labeled_matrix_binary(out, ids, values);
  } else {
    write_labeled_matrix_csv(out, ids, values);
  }
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace echoscore
