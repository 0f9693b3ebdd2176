#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cotcurate {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace jsonl {

// Compact single-line serialization. Invalid UTF-8 is replaced rather than thrown on,
// since model output is arbitrary bytes.
std::string dump(const ordered_json& value);
std::string dump(const json& value);

// Calls fn(record, line_number) for every non-blank line. line_number is 1-based.
// Throws IoError if the file cannot be opened and DataError on a malformed line.
void for_each_record(const std::filesystem::path& path,
                     const std::function<void(const json&, std::size_t)>& fn);

std::vector<json> read_all(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it into place.
void write_all(const std::filesystem::path& path, const std::vector<ordered_json>& records);

// Line-at-a-time appender that flushes after every record so an interrupted run keeps
// every completed line.
class Appender {
public:
    explicit Appender(const std::filesystem::path& path);
    void append(const ordered_json& record);

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace jsonl
}  // namespace cotcurate
