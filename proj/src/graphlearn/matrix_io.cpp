#include "graphlearn/matrix_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "graphlearn/error.hpp"

namespace graphlearn::io {

using nlohmann::json;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, fmt::format("cannot open '{}' for reading", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::Io, fmt::format("cannot open '{}' for writing", path.string()));
  out << text;
  require(static_cast<bool>(out), ErrorCode::Io, fmt::format("write to '{}' failed", path.string()));
}

namespace {

double parse_number(std::string_view field, std::size_t line) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
    field.remove_suffix(1);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  require(ec == std::errc() && end == field.data() + field.size(), ErrorCode::Parse,
          fmt::format("line {}: '{}' is not a number", line, field));
  return value;
}

}  // namespace

Matrix parse_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_number(rest.substr(0, comma), line_no));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      fail(ErrorCode::Parse, fmt::format("line {}: expected {} columns, got {}", line_no, rows.front().size(), row.size()));
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), ErrorCode::Parse, "CSV contains no rows");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

std::string format_csv(const Matrix& m) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += fmt::format("{:.17g}", m(i, j));
    }
    out += '\n';
  }
  return out;
}

Matrix read_csv(const std::filesystem::path& path) {
  try {
    return parse_csv(read_text(path));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Parse) throw;
    fail(ErrorCode::Parse, fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_csv(const Matrix& m, const std::filesystem::path& path) { write_text(path, format_csv(m)); }

Matrix read_json_matrix(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    const auto& data = j.at("data");
    require(rows >= 0 && cols >= 0 && data.is_array() && static_cast<Index>(data.size()) == rows * cols,
            ErrorCode::Parse, fmt::format("{}: data length does not match rows*cols", path.string()));
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index c = 0; c < cols; ++c) m(i, c) = data[static_cast<std::size_t>(i * cols + c)].get<double>();
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_json_matrix(const Matrix& m, const std::filesystem::path& path) {
  json data = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index c = 0; c < m.cols(); ++c) data.push_back(m(i, c));
  const json j = {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
  write_text(path, j.dump() + "\n");
}

Matrix load_matrix(const std::filesystem::path& path) {
  return path.extension() == ".json" ? read_json_matrix(path) : read_csv(path);
}

void save_matrix(const Matrix& m, const std::filesystem::path& path) {
  if (path.extension() == ".json")
    write_json_matrix(m, path);
  else
    write_csv(m, path);
}

}  // namespace graphlearn::io
