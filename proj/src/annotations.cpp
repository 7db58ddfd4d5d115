#include "crowdprop/annotations.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "crowdprop/errors.hpp"

namespace crowdprop {

namespace {

constexpr std::string_view kCsvHeader = "worker_id,sentence_id,choices";

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      return fields;
    }
    fields.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

void validate_choices(const std::vector<std::uint8_t>& choices,
                      const RelationInventory& inventory,
                      const std::string& context) {
  std::size_t total = 0;
  for (std::uint8_t c : choices) total += c;
  if (total == 0) {
    throw ValidationError(context + ": empty choice vector");
  }
  if (choices[inventory.none_index()] != 0 && total != 1) {
    throw ValidationError(context + ": '" + std::string(RelationInventory::kNoneLabel) +
                          "' cannot be combined with another relation");
  }
}

}  // namespace

std::size_t WorkerVector::choice_count() const {
  std::size_t total = 0;
  for (std::uint8_t c : choices) total += c;
  return total;
}

std::vector<std::uint8_t> encode_choices(const std::vector<std::string>& raw_choices,
                                         const RelationInventory& inventory) {
  if (raw_choices.empty()) {
    throw ValidationError("empty choice list");
  }
  std::vector<std::uint8_t> choices(inventory.size(), 0);
  for (const std::string& token : raw_choices) {
    const auto index = inventory.index_of(token);
    if (!index) {
      throw ValidationError("unknown relation identifier '" + token + "'");
    }
    choices[*index] = 1;
  }
  validate_choices(choices, inventory, "choice list");
  return choices;
}

AnnotationMatrix AnnotationMatrix::from_rows(std::vector<WorkerVector> rows,
                                             const RelationInventory& inventory) {
  AnnotationMatrix matrix;
  std::sort(rows.begin(), rows.end(), [](const WorkerVector& a, const WorkerVector& b) {
    if (a.sentence_id != b.sentence_id) return a.sentence_id < b.sentence_id;
    return a.worker_id < b.worker_id;
  });
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const WorkerVector& row = rows[i];
    if (row.worker_id.empty() || row.sentence_id.empty()) {
      throw ValidationError("worker and sentence ids must be non-empty");
    }
    if (row.choices.size() != inventory.size()) {
      throw ValidationError("row (" + row.worker_id + ", " + row.sentence_id +
                            "): choice vector length " +
                            std::to_string(row.choices.size()) + " != inventory size " +
                            std::to_string(inventory.size()));
    }
    validate_choices(row.choices, inventory,
                     "row (" + row.worker_id + ", " + row.sentence_id + ")");
    if (!seen.emplace(row.worker_id, row.sentence_id).second) {
      throw ValidationError("duplicate (worker, sentence) pair: (" + row.worker_id +
                            ", " + row.sentence_id + ")");
    }
    matrix.sentence_index_[row.sentence_id].push_back(i);
    matrix.worker_index_[row.worker_id].push_back(i);
  }
  matrix.rows_ = std::move(rows);
  // Rows are sorted by (sentence, worker), so sentence buckets are already in
  // worker order; worker buckets are already in sentence order.
  return matrix;
}

AnnotationMatrix parse_annotations(const std::string& path,
                                   const RelationInventory& inventory) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open annotation file: " + path);

  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError(path + ": empty file, expected header '" +
                          std::string(kCsvHeader) + "'");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) {
    throw ValidationError(path + ":1: expected header '" + std::string(kCsvHeader) +
                          "', got '" + line + "'");
  }

  std::vector<WorkerVector> rows;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string context = path + ":" + std::to_string(line_number);
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != 3) {
      throw ValidationError(context + ": expected 3 comma-separated fields, got " +
                            std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw ValidationError(context + ": worker_id and sentence_id must be non-empty");
    }
    WorkerVector row;
    row.worker_id = fields[0];
    row.sentence_id = fields[1];
    try {
      row.choices = encode_choices(split(fields[2], '|'), inventory);
    } catch (const ValidationError& e) {
      throw ValidationError(context + ": " + e.what());
    }
    rows.push_back(std::move(row));
  }

  try {
    return AnnotationMatrix::from_rows(std::move(rows), inventory);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::string annotations_to_csv(const AnnotationMatrix& matrix,
                               const RelationInventory& inventory) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const WorkerVector& row : matrix.rows()) {
    out += row.worker_id;
    out += ',';
    out += row.sentence_id;
    out += ',';
    bool first = true;
    for (std::size_t r = 0; r < row.choices.size(); ++r) {
      if (!row.choices[r]) continue;
      if (!first) out += '|';
      out += inventory.name(r);
      first = false;
    }
    out += '\n';
  }
  return out;
}

void write_annotations(const AnnotationMatrix& matrix,
                       const RelationInventory& inventory,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  out << annotations_to_csv(matrix, inventory);
  if (!out) throw IoError("failed writing annotation file: " + path);
}

}  // namespace crowdprop
