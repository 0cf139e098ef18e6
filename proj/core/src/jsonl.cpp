#include "pcr/jsonl.hpp"

#include <istream>

namespace pcr::jsonl {

void for_each(std::istream& in, const RecordFn& on_record) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw LineError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!record.is_object()) throw LineError(line_no, "record is not a JSON object");
    try {
      on_record(record, line_no);
    } catch (const LineError&) {
      throw;
    } catch (const std::exception& e) {
      throw LineError(line_no, e.what());
    }
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

const nlohmann::json& require(const nlohmann::json& record, std::string_view field) {
  const auto it = record.find(field);
  if (it == record.end() || it->is_null()) {
    throw std::invalid_argument("missing required field \"" + std::string(field) + "\"");
  }
  return *it;
}

std::string require_string(const nlohmann::json& record, std::string_view field) {
  const auto& value = require(record, field);
  if (!value.is_string()) {
    throw std::invalid_argument("field \"" + std::string(field) + "\" must be a string");
  }
  return value.get<std::string>();
}

int require_int(const nlohmann::json& record, std::string_view field) {
  const auto& value = require(record, field);
  if (!value.is_number_integer()) {
    throw std::invalid_argument("field \"" + std::string(field) + "\" must be an integer");
  }
  return value.get<int>();
}

bool require_bool(const nlohmann::json& record, std::string_view field) {
  const auto& value = require(record, field);
  if (!value.is_boolean()) {
    throw std::invalid_argument("field \"" + std::string(field) + "\" must be a boolean");
  }
  return value.get<bool>();
}

std::string dump(const nlohmann::ordered_json& record) {
  return record.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

}  // namespace pcr::jsonl
