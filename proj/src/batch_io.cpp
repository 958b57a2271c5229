#include "keystone/batch_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "keystone/number_format.hpp"

namespace keystone {

using nlohmann::json;

BatchFormat parse_batch_format(std::string_view name) {
  if (name == "json" || name == "structured" || name == "structured-text") return BatchFormat::kStructuredText;
  if (name == "csv" || name == "delimited" || name == "delimiter-separated") return BatchFormat::kDelimited;
  throw Error(ErrorCode::kInvalidConfig, "unknown batch format '" + std::string(name) + "'");
}

BatchFormat guess_batch_format(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".csv" || ext == ".txt") ? BatchFormat::kDelimited : BatchFormat::kStructuredText;
}

namespace {

std::string at_line(std::size_t line, std::size_t column) {
  return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": ";
}

/// Splits on commas; `columns` receives the 1-based start column of each cell.
std::vector<std::string_view> split_cells(std::string_view line, std::vector<std::size_t>& columns) {
  std::vector<std::string_view> cells;
  columns.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    std::size_t col = start + 1;
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) {
      cell.remove_prefix(1);
      ++col;
    }
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) cell.remove_suffix(1);
    cells.push_back(cell);
    columns.push_back(col);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

CandidateBatch parse_delimited(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  // A trailing newline leaves one empty final entry.
  while (!lines.empty() && (lines.back().empty() || lines.back() == "\r")) lines.pop_back();
  if (lines.empty()) throw Error(ErrorCode::kParseError, at_line(1, 1) + "missing `K,T,A` header");

  std::vector<std::size_t> columns;
  const auto header = split_cells(lines[0], columns);
  if (header.size() != 3) {
    throw Error(ErrorCode::kParseError, at_line(1, 1) + "header must be `K,T,A`, found " +
                                            std::to_string(header.size()) + " fields");
  }
  std::size_t shape[3];
  for (std::size_t f = 0; f < 3; ++f) {
    const auto value = parse_double(header[f]);
    if (!value || *value < 0 || *value != static_cast<double>(static_cast<std::size_t>(*value))) {
      throw Error(ErrorCode::kParseError,
                  at_line(1, columns[f]) + "header field '" + std::string(header[f]) + "' is not a count");
    }
    shape[f] = static_cast<std::size_t>(*value);
  }
  const auto [count, steps, dims] = shape;
  if (count == 0) throw Error(ErrorCode::kEmptyBatch, at_line(1, 1) + "header declares zero candidates");
  if (steps == 0 || dims == 0) throw Error(ErrorCode::kParseError, at_line(1, 1) + "T and A must be positive");

  const std::size_t expected_rows = count * steps;
  const std::size_t found_rows = lines.size() - 1;
  if (found_rows != expected_rows) {
    throw Error(ErrorCode::kRowCountMismatch, "row count mismatch: expected " + std::to_string(expected_rows) +
                                                  " data rows, found " + std::to_string(found_rows));
  }
  std::vector<double> values;
  values.reserve(expected_rows * dims);
  for (std::size_t r = 0; r < expected_rows; ++r) {
    const std::size_t line_no = r + 2;
    const auto cells = split_cells(lines[r + 1], columns);
    if (cells.size() != dims) {
      throw Error(ErrorCode::kShapeMismatch, at_line(line_no, 1) + "expected " + std::to_string(dims) +
                                                 " values, found " + std::to_string(cells.size()),
                  r / steps);
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto value = parse_double(cells[c]);
      if (!value) {
        throw Error(ErrorCode::kParseError,
                    at_line(line_no, columns[c]) + "'" + std::string(cells[c]) + "' is not a number");
      }
      values.push_back(*value);
    }
  }
  return CandidateBatch(count, steps, dims, std::move(values));
}

CandidateBatch parse_structured(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("invalid structured batch: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("candidates")) {
    throw Error(ErrorCode::kParseError, "structured batch needs a 'candidates' array");
  }
  std::vector<std::vector<std::vector<double>>> nested;
  try {
    nested = doc["candidates"].get<std::vector<std::vector<std::vector<double>>>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("'candidates' must be a K x T x A numeric array: ") + e.what());
  }
  if (nested.empty()) throw Error(ErrorCode::kEmptyBatch, "candidate batch is empty");
  std::vector<ActionChunk> chunks;
  for (std::size_t i = 0; i < nested.size(); ++i) {
    try {
      chunks.push_back(ActionChunk::from_rows(nested[i]));
    } catch (const Error& e) {
      throw Error(e.code(), "candidate " + std::to_string(i) + ": " + e.what(), i);
    }
  }
  CandidateBatch batch(chunks);
  if (doc.contains("shape")) {
    const auto shape = doc["shape"].get<std::vector<std::size_t>>();
    if (shape != std::vector<std::size_t>{batch.size(), batch.steps(), batch.dims()}) {
      throw Error(ErrorCode::kShapeMismatch, "declared shape does not match the candidates");
    }
  }
  return batch;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

CandidateBatch parse_batch(std::string_view text, BatchFormat format) {
  return format == BatchFormat::kDelimited ? parse_delimited(text) : parse_structured(text);
}

CandidateBatch parse_batch_file(const std::filesystem::path& path, BatchFormat format) {
  return parse_batch(read_file(path), format);
}

std::string write_batch(const CandidateBatch& batch, BatchFormat format) {
  if (format == BatchFormat::kDelimited) {
    std::string out = std::to_string(batch.size()) + "," + std::to_string(batch.steps()) + "," +
                      std::to_string(batch.dims()) + "\n";
    const auto values = batch.values();
    for (std::size_t row = 0; row < batch.size() * batch.steps(); ++row) {
      for (std::size_t a = 0; a < batch.dims(); ++a) {
        if (a) out += ',';
        out += format_double(values[row * batch.dims() + a]);
      }
      out += '\n';
    }
    return out;
  }
  json candidates = json::array();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    json rows = json::array();
    const auto x = batch.flat(i);
    for (std::size_t t = 0; t < batch.steps(); ++t) {
      rows.push_back(std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(t * batch.dims()),
                                         x.begin() + static_cast<std::ptrdiff_t>((t + 1) * batch.dims())));
    }
    candidates.push_back(std::move(rows));
  }
  json doc = {{"shape", {batch.size(), batch.steps(), batch.dims()}}, {"candidates", candidates}};
  return doc.dump() + "\n";
}

void write_batch_file(const CandidateBatch& batch, const std::filesystem::path& path, BatchFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path.string() + "'");
  out << write_batch(batch, format);
}

}  // namespace keystone
