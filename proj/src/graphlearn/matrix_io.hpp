#pragma once

#include <filesystem>
#include <string>

#include "graphlearn/graph_core.hpp"

namespace graphlearn::io {

// CSV: comma separated, one row per line, no header.
Matrix read_csv(const std::filesystem::path& path);
void write_csv(const Matrix& m, const std::filesystem::path& path);
Matrix parse_csv(const std::string& text);
std::string format_csv(const Matrix& m);

// JSON: {"rows": R, "cols": C, "data": [row-major values]}.
Matrix read_json_matrix(const std::filesystem::path& path);
void write_json_matrix(const Matrix& m, const std::filesystem::path& path);

// Dispatch on extension: ".json" is JSON, anything else CSV.
Matrix load_matrix(const std::filesystem::path& path);
void save_matrix(const Matrix& m, const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace graphlearn::io
