#include "echoscore/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "echoscore/error.hpp"
#include "echoscore/seed.hpp"

namespace echoscore {

std::string_view to_string(FeatureProvenance p) {
  switch (p) {
    case FeatureProvenance::kImported: return "imported";
    case FeatureProvenance::kHashedTfidf: return "hashed-tfidf";
    case FeatureProvenance::kIdentity: return "identity";
  }
  return "unknown";
}

void normalize_rows(Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double norm = m.row(i).norm();
    if (norm > 0.0) m.row(i) /= norm;
  }
}

FeatureMatrix FeatureMatrix::dense(Eigen::MatrixXd values, FeatureProvenance provenance) {
  FeatureMatrix x;
  normalize_rows(values);
  x.rows_ = static_cast<std::size_t>(values.rows());
  x.provenance_ = provenance;
  x.values_ = std::move(values);
  return x;
}

FeatureMatrix FeatureMatrix::identity(std::size_t n) {
  FeatureMatrix x;
  x.rows_ = n;
  x.identity_ = true;
  x.provenance_ = FeatureProvenance::kIdentity;
  return x;
}

const Eigen::MatrixXd& FeatureMatrix::values() const {
  if (identity_) throw std::logic_error("identity features are not materialized");
  return values_;
}

Eigen::MatrixXd FeatureMatrix::to_dense() const {
  if (identity_) return Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(rows_));
  return values_;
}

Eigen::MatrixXd FeatureMatrix::multiply(const Eigen::MatrixXd& w) const {
  if (static_cast<std::size_t>(w.rows()) != cols()) {
    throw DataError("feature/weight shape mismatch: X has " + std::to_string(cols()) + " columns, W has " +
                    std::to_string(w.rows()) + " rows");
  }
  if (identity_) return w;
  return values_ * w;
}

Eigen::MatrixXd FeatureMatrix::transpose_multiply(const Eigen::MatrixXd& g) const {
  if (static_cast<std::size_t>(g.rows()) != rows_) throw DataError("feature/gradient row mismatch");
  if (identity_) return g;
  return values_.transpose() * g;
}

FeatureMatrix FeatureMatrix::permuted_rows(std::span<const NodeIndex> perm) const {
  if (perm.size() != rows_) throw std::invalid_argument("permutation size mismatch");
  if (identity_) return identity(rows_);
  FeatureMatrix x = *this;
  for (std::size_t i = 0; i < rows_; ++i) x.values_.row(perm[i]) = values_.row(static_cast<Eigen::Index>(i));
  return x;
}

// ---------------------------------------------------------------------------

UserDocuments parse_documents(std::istream& in, const std::string& source_name) {
  UserDocuments docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source_name, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object() || !record.contains("user") || !record["user"].is_string()) {
      throw ParseError(source_name, line_no, "record needs a string \"user\" field");
    }
    if (!record.contains("texts") || !record["texts"].is_array()) {
      throw ParseError(source_name, line_no, "record needs a \"texts\" array");
    }
    auto& texts = docs[record["user"].get<std::string>()];
    for (const auto& t : record["texts"]) {
      if (!t.is_string()) throw ParseError(source_name, line_no, "\"texts\" entries must be strings");
      texts.push_back(t.get<std::string>());
    }
  }
  return docs;
}

UserDocuments read_documents(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open documents file " + path.string());
  return parse_documents(in, path.string());
}

namespace {

// Length in bytes of a UTF-8 separator (Unicode space or punctuation) starting at
// s[i], or 0 when s[i] starts a word character.
std::size_t separator_length(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  if (c < 0x80) {
    if (std::isalnum(c) || c == '_') return 0;
    return 1;
  }
  auto byte = [&](std::size_t k) -> unsigned char {
    return i + k < s.size() ? static_cast<unsigned char>(s[i + k]) : 0;
  };
  // U+00A0..U+00BF: no-break space and Latin-1 punctuation.
  if (c == 0xC2 && byte(1) >= 0xA0 && byte(1) <= 0xBF) return 2;
  // U+2000..U+206F: general punctuation (spaces, dashes, quotes, ellipsis).
  if (c == 0xE2 && (byte(1) == 0x80 || byte(1) == 0x81) && byte(2) >= 0x80) return 3;
  // U+3000..U+303F: CJK symbols and punctuation.
  if (c == 0xE3 && byte(1) == 0x80 && byte(2) >= 0x80) return 3;
  return 0;
}

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t chunk_begin = i;
    while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::string chunk(text.substr(chunk_begin, i - chunk_begin));
    for (auto& ch : chunk) {
      if (static_cast<unsigned char>(ch) < 0x80) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    const auto url_start = chunk.find_first_not_of("([{<\"'");
    if (url_start != std::string::npos) {
      std::string_view rest(chunk);
      rest.remove_prefix(url_start);
      if (starts_with(rest, "http://") || starts_with(rest, "https://") || starts_with(rest, "www.")) continue;
    }

    std::size_t j = 0;
    char prev = ' ';
    while (j < chunk.size()) {
      const std::size_t sep = separator_length(chunk, j);
      if (sep > 0) {
        prev = chunk[j];
        j += sep;
        continue;
      }
      const std::size_t word_begin = j;
      while (j < chunk.size() && separator_length(chunk, j) == 0) ++j;
      if (prev != '@') tokens.emplace_back(chunk.substr(word_begin, j - word_begin));
      prev = ' ';
    }
  }
  return tokens;
}

FeatureBuild hashed_tfidf(const UserDocuments& docs, const InteractionGraph& g, const HashedTfidfOptions& options) {
  if (options.dimension < 16) {
    throw ConfigError("hashed TF-IDF dimension must be at least 16 (got " + std::to_string(options.dimension) + ")");
  }
  const std::size_t n = g.num_nodes();
  const std::size_t f = options.dimension;
  FeatureBuild build;

  // Tokenized posts per graph node.
  std::vector<std::vector<std::vector<std::string>>> posts(n);
  std::size_t unknown = 0;
  std::string unknown_example;
  std::size_t truncated = 0;
  for (const auto& [user, texts] : docs) {
    const auto idx = g.index_of(user);
    if (!idx) {
      if (unknown++ == 0) unknown_example = user;
      continue;
    }
    const std::size_t keep = std::min(texts.size(), kMaxPostsPerUser);
    if (keep < texts.size()) ++truncated;
    for (std::size_t t = 0; t < keep; ++t) posts[*idx].push_back(tokenize(texts[t]));
  }
  if (unknown > 0) {
    build.warnings.push_back(std::to_string(unknown) + " document user(s) not in graph were skipped (e.g. '" +
                             unknown_example + "')");
  }
  if (truncated > 0) {
    build.warnings.push_back(std::to_string(truncated) + " user(s) had more than " +
                             std::to_string(kMaxPostsPerUser) + " posts; only the first were used");
  }

  std::unordered_map<std::string, std::size_t> df;
  std::size_t num_docs = 0;
  for (const auto& user_posts : posts) {
    for (const auto& tokens : user_posts) {
      ++num_docs;
      std::unordered_set<std::string_view> seen(tokens.begin(), tokens.end());
      for (auto tok : seen) ++df[std::string(tok)];
    }
  }

  const std::uint64_t basis = fnv1a64("", mix64(options.hash_seed));
  std::unordered_map<std::string, std::pair<std::size_t, double>> slot;  // token -> (bucket, signed idf)
  slot.reserve(df.size());
  for (const auto& [tok, count] : df) {
    const std::uint64_t h = fnv1a64(tok, basis);
    const double sign = (mix64(h) >> 63) ? -1.0 : 1.0;
    const double idf = std::log((1.0 + static_cast<double>(num_docs)) / (1.0 + static_cast<double>(count))) + 1.0;
    slot.emplace(tok, std::make_pair(static_cast<std::size_t>(h % f), sign * idf));
  }

  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(f));
  std::size_t covered = 0;
  for (std::size_t u = 0; u < n; ++u) {
    if (posts[u].empty()) continue;
    ++covered;
    for (const auto& tokens : posts[u]) {
      for (const auto& tok : tokens) {
        const auto& [bucket, weight] = slot.at(tok);
        values(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(bucket)) += weight;
      }
    }
    values.row(static_cast<Eigen::Index>(u)) /= static_cast<double>(posts[u].size());
  }
  build.coverage = n ? static_cast<double>(covered) / static_cast<double>(n) : 0.0;
  build.features = FeatureMatrix::dense(std::move(values), FeatureProvenance::kHashedTfidf);
  return build;
}

FeatureBuild mean_pool(const LabeledMatrix& file, const InteractionGraph& g) {
  const std::size_t n = g.num_nodes();
  const auto f = file.values.cols();
  FeatureBuild build;
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), f);
  std::vector<std::size_t> counts(n, 0);
  std::set<std::pair<NodeIndex, std::int64_t>> seen_tweets;
  std::size_t unknown = 0;

  for (std::size_t r = 0; r < file.ids.size(); ++r) {
    const auto idx = g.index_of(file.ids[r]);
    if (!idx) {
      ++unknown;
      continue;
    }
    if (file.per_tweet()) {
      if (!seen_tweets.emplace(*idx, file.tweet_index[r]).second) {
        throw DataError("duplicate row for user '" + file.ids[r] + "' tweet " + std::to_string(file.tweet_index[r]));
      }
    } else if (counts[*idx] > 0) {
      throw DataError("duplicate per-user rows for user '" + file.ids[r] + "'");
    }
    sums.row(*idx) += file.values.row(static_cast<Eigen::Index>(r));
    ++counts[*idx];
  }

  std::size_t covered = 0;
  for (std::size_t u = 0; u < n; ++u) {
    if (counts[u] == 0) continue;
    ++covered;
    sums.row(static_cast<Eigen::Index>(u)) /= static_cast<double>(counts[u]);
  }
  build.coverage = n ? static_cast<double>(covered) / static_cast<double>(n) : 0.0;
  if (unknown > 0) build.warnings.push_back(std::to_string(unknown) + " embedding row(s) for users not in graph were ignored");
  if (covered == 0) {
    build.warnings.push_back("embedding file covers no graph users; all feature rows are zero");
  } else if (covered < n) {
    build.warnings.push_back(std::to_string(n - covered) + " graph user(s) have no embedding and get zero rows");
  }
  build.features = FeatureMatrix::dense(std::move(sums), FeatureProvenance::kImported);
  return build;
}

FeatureBuild mean_pool_import(const std::filesystem::path& path, const InteractionGraph& g) {
  return mean_pool(read_labeled_matrix(path), g);
}

FeatureMatrix identity_features(const InteractionGraph& g) { return FeatureMatrix::identity(g.num_nodes()); }

}  // namespace echoscore
