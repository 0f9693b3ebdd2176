#include "cotcurate/jsonl.hpp"

#include <sstream>
#include <system_error>

#include "cotcurate/error.hpp"

namespace cotcurate::jsonl {

std::string dump(const ordered_json& value) {
    return value.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

std::string dump(const json& value) { return value.dump(-1, ' ', false, json::error_handler_t::replace); }

void for_each_record(const std::filesystem::path& path,
                     const std::function<void(const json&, std::size_t)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed record");
        }
        fn(record, line_no);
    }
    if (in.bad()) throw IoError("read failed: " + path.string());
}

std::vector<json> read_all(const std::filesystem::path& path) {
    std::vector<json> out;
    for_each_record(path, [&](const json& r, std::size_t) { out.push_back(r); });
    return out;
}

void write_all(const std::filesystem::path& path, const std::vector<ordered_json>& records) {
    std::string text;
    for (const auto& r : records) {
        text += dump(r);
        text += '\n';
    }
    write_text(path, text);
}

Appender::Appender(const std::filesystem::path& path) : path_(path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    out_.open(path, std::ios::binary | std::ios::app);
    if (!out_) throw IoError("cannot open for append: " + path.string());
}

void Appender::append(const ordered_json& record) {
    out_ << dump(record) << '\n';
    out_.flush();
    if (!out_) throw IoError("write failed: " + path_.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

}  // namespace cotcurate::jsonl
