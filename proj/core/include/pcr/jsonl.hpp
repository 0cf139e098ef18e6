#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace pcr::jsonl {

class LineError : public std::runtime_error {
 public:
  LineError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

using RecordFn = std::function<void(const nlohmann::json& record, std::size_t line)>;

// Parses each non-blank line as JSON and hands it to `on_record` with its
// 1-based line number. Any failure, parse or callback, becomes a LineError.
void for_each(std::istream& in, const RecordFn& on_record);

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

// Required-field accessors; throw std::invalid_argument naming the field.
const nlohmann::json& require(const nlohmann::json& record, std::string_view field);
std::string require_string(const nlohmann::json& record, std::string_view field);
int require_int(const nlohmann::json& record, std::string_view field);
bool require_bool(const nlohmann::json& record, std::string_view field);

// Compact single-line serialization shared by every writer.
std::string dump(const nlohmann::ordered_json& record);

}  // namespace pcr::jsonl
