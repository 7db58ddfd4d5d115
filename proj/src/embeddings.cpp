#include "crowdprop/embeddings.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>

#include "crowdprop/errors.hpp"

namespace crowdprop {

namespace {

std::string ascii_lower(std::string_view token) {
  std::string out(token);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

struct Header {
  std::size_t count = 0;
  std::size_t dimension = 0;
};

Header parse_header(const std::string& line, const std::string& path) {
  Header header;
  const char* begin = line.data();
  const char* end = line.data() + line.size();
  auto r1 = std::from_chars(begin, end, header.count);
  if (r1.ec != std::errc{} || r1.ptr == end || *r1.ptr != ' ') {
    throw ValidationError(path + ": malformed header line, expected '<count> <dim>'");
  }
  auto r2 = std::from_chars(r1.ptr + 1, end, header.dimension);
  if (r2.ec != std::errc{} || r2.ptr != end) {
    throw ValidationError(path + ": malformed header line, expected '<count> <dim>'");
  }
  if (header.dimension == 0) {
    throw ValidationError(path + ": vector dimension must be positive");
  }
  return header;
}

bool keep_token(const std::string& token,
                const std::unordered_set<std::string>* filter) {
  return filter == nullptr || filter->count(token) > 0;
}

}  // namespace

EmbeddingTable EmbeddingTable::from_pairs(
    std::size_t dimension,
    const std::vector<std::pair<std::string, std::vector<float>>>& entries) {
  EmbeddingTable table;
  table.dimension_ = dimension;
  for (const auto& [token, values] : entries) {
    if (values.size() != dimension) {
      throw ValidationError("vector for '" + token + "' has " +
                            std::to_string(values.size()) + " components, expected " +
                            std::to_string(dimension));
    }
    if (table.index_.count(token)) {
      throw ValidationError("duplicate token '" + token + "'");
    }
    table.insert(token, values.data());
  }
  table.stats_.declared_count = entries.size();
  table.stats_.parsed_count = entries.size();
  table.stats_.retained_count = table.size();
  return table;
}

void EmbeddingTable::insert(std::string token, const float* values) {
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
  data_.insert(data_.end(), values, values + dimension_);
}

std::optional<std::span<const float>> EmbeddingTable::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return std::span<const float>(data_.data() + it->second * dimension_, dimension_);
}

std::optional<std::span<const float>> EmbeddingTable::lookup(std::string_view token) const {
  if (auto exact = find(token)) return exact;
  const std::string lowered = ascii_lower(token);
  if (lowered != token) {
    if (auto fallback = find(lowered)) return fallback;
  }
  return std::nullopt;
}

struct EmbeddingTableLoader {
  static EmbeddingTable load_text(std::istream& in, const std::string& path,
                                  const std::unordered_set<std::string>* filter);
  static EmbeddingTable load_binary(std::istream& in, const std::string& path,
                                    const std::unordered_set<std::string>* filter);
};

EmbeddingTable EmbeddingTableLoader::load_text(
    std::istream& in, const std::string& path,
    const std::unordered_set<std::string>* filter) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty vector file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const Header header = parse_header(line, path);

  EmbeddingTable table;
  table.dimension_ = header.dimension;
  table.stats_.declared_count = header.count;

  std::vector<float> values(header.dimension);
  std::size_t entries = 0;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++entries;
    const std::size_t token_end = line.find(' ');
    if (token_end == std::string::npos || token_end == 0) {
      throw ValidationError(path + ":" + std::to_string(line_number) +
                            ": expected 'token v1 .. vdim'");
    }
    std::string token = line.substr(0, token_end);

    const char* cursor = line.data() + token_end;
    const char* end = line.data() + line.size();
    std::size_t parsed = 0;
    while (cursor != end) {
      while (cursor != end && *cursor == ' ') ++cursor;
      if (cursor == end) break;
      if (parsed == header.dimension) {
        throw ValidationError(path + ":" + std::to_string(line_number) +
                              ": vector for '" + token + "' has more than " +
                              std::to_string(header.dimension) + " components");
      }
      float v = 0.0f;
      auto r = std::from_chars(cursor, end, v);
      if (r.ec != std::errc{}) {
        throw ValidationError(path + ":" + std::to_string(line_number) +
                              ": malformed vector component");
      }
      values[parsed++] = v;
      cursor = r.ptr;
    }
    if (parsed != header.dimension) {
      throw ValidationError(path + ":" + std::to_string(line_number) + ": vector for '" +
                            token + "' has " + std::to_string(parsed) +
                            " components, header declares " +
                            std::to_string(header.dimension));
    }

    table.stats_.parsed_count += 1;
    if (!keep_token(token, filter)) continue;
    if (table.index_.count(token)) {
      table.stats_.duplicates_skipped += 1;
      std::cerr << "warning: duplicate token '" << token << "' in " << path
                << ", keeping the first vector\n";
      continue;
    }
    table.insert(std::move(token), values.data());
  }

  if (entries != header.count) {
    throw ValidationError(path + ": header declares " + std::to_string(header.count) +
                          " vectors, file contains " + std::to_string(entries));
  }
  table.stats_.retained_count = table.size();
  return table;
}

EmbeddingTable EmbeddingTableLoader::load_binary(
    std::istream& in, const std::string& path,
    const std::unordered_set<std::string>* filter) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty vector file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const Header header = parse_header(line, path);

  EmbeddingTable table;
  table.dimension_ = header.dimension;
  table.stats_.declared_count = header.count;

  std::vector<float> values(header.dimension);
  for (std::size_t i = 0; i < header.count; ++i) {
    std::string token;
    char c;
    // Token runs up to the separating space; newlines between records are
    // layout, not token content.
    while (in.get(c)) {
      if (c == ' ') break;
      if (c == '\n' || c == '\r') {
        if (token.empty()) continue;
        break;
      }
      token += c;
    }
    if (!in || token.empty()) {
      throw ValidationError(path + ": truncated file, expected " +
                            std::to_string(header.count) + " vectors, read " +
                            std::to_string(i));
    }
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(header.dimension * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(header.dimension * sizeof(float))) {
      throw ValidationError(path + ": truncated file, expected " +
                            std::to_string(header.count) + " vectors, read " +
                            std::to_string(i));
    }
    table.stats_.parsed_count += 1;
    if (!keep_token(token, filter)) continue;
    if (table.index_.count(token)) {
      table.stats_.duplicates_skipped += 1;
      std::cerr << "warning: duplicate token '" << token << "' in " << path
                << ", keeping the first vector\n";
      continue;
    }
    table.insert(std::move(token), values.data());
  }

  // Anything beyond trailing record separators means the header undercounts.
  char extra;
  while (in.get(extra)) {
    if (extra != '\n' && extra != '\r' && extra != ' ') {
      throw ValidationError(path + ": header declares " + std::to_string(header.count) +
                            " vectors, file contains more data");
    }
  }
  table.stats_.retained_count = table.size();
  return table;
}

EmbeddingTable load_embeddings(const std::string& path, EmbeddingFormat format,
                               const std::unordered_set<std::string>* vocabulary_filter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vector file: " + path);
  if (format == EmbeddingFormat::kText) {
    return EmbeddingTableLoader::load_text(in, path, vocabulary_filter);
  }
  return EmbeddingTableLoader::load_binary(in, path, vocabulary_filter);
}

EmbeddingFormat guess_embedding_format(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0
             ? EmbeddingFormat::kBinary
             : EmbeddingFormat::kText;
}

SentenceVector sentence_vector(const CorpusSentence& sentence,
                               const EmbeddingTable& table, SpanPolicy policy) {
  SentenceVector result;
  result.sentence_id = sentence.id;
  result.values.assign(table.dimension(), 0.0);

  std::size_t begin = 0;
  std::size_t end = sentence.tokens.size();  // exclusive
  if (policy == SpanPolicy::kBetweenTerms) {
    // Strictly between the two spans; the term tokens themselves are excluded.
    const TokenSpan& first =
        sentence.term1.begin <= sentence.term2.begin ? sentence.term1 : sentence.term2;
    const TokenSpan& second =
        sentence.term1.begin <= sentence.term2.begin ? sentence.term2 : sentence.term1;
    begin = first.end + 1;
    end = second.begin;
  }

  for (std::size_t i = begin; i < end; ++i) {
    const auto vec = table.lookup(sentence.tokens[i]);
    if (!vec) continue;
    for (std::size_t d = 0; d < table.dimension(); ++d) {
      result.values[d] += (*vec)[d];
    }
    result.in_vocab_count += 1;
  }

  if (result.in_vocab_count == 0) {
    result.empty = true;
    std::fill(result.values.begin(), result.values.end(), 0.0);
    return result;
  }
  const double inv = 1.0 / static_cast<double>(result.in_vocab_count);
  for (double& v : result.values) v *= inv;
  result.empty = false;
  return result;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("cosine_similarity: dimension mismatch (" +
                          std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                          ")");
  }
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    norm_a += a[i] * a[i];
    norm_b += b[i] * b[i];
  }
  if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
  return dot / std::sqrt(norm_a * norm_b);
}

}  // namespace crowdprop
