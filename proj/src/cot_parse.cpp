#include "cotcurate/cot_parse.hpp"

#include <charconv>

#include "cotcurate/error.hpp"
#include "cotcurate/sampling.hpp"

namespace cotcurate {
namespace {

bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::size_t skip_space(std::string_view s, std::size_t i) {
    while (i < s.size() && is_space(s[i])) ++i;
    return i;
}

bool is_hex(char c) noexcept { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F'); }

struct FieldMatch {
    std::size_t key_pos = 0;
    std::size_t value_end = 0;  // one past the closing quote
    std::string value;
};

// A quote closes the value only when followed by `}`, end of text, or a comma that is itself
// followed by another key, `}` or end of text. Any other quote is taken as an unescaped
// interior quote.
bool closes_value(std::string_view text, std::size_t quote) {
    std::size_t k = skip_space(text, quote + 1);
    if (k == text.size() || text[k] == '}') return true;
    if (text[k] != ',') return false;
    k = skip_space(text, k + 1);
    return k == text.size() || text[k] == '"' || text[k] == '}';
}

std::optional<std::string> scan_string_value(std::string_view text, std::size_t start, std::size_t& value_end) {
    std::string escaped;
    std::size_t j = start;
    while (j < text.size()) {
        const char c = text[j];
        if (c == '\\') {
            if (j + 1 < text.size()) {
                const char d = text[j + 1];
                if (d == '"' || d == '\\' || d == '/' || d == 'b' || d == 'f' || d == 'n' || d == 'r' || d == 't') {
                    escaped += c;
                    escaped += d;
                    j += 2;
                    continue;
                }
                if (d == 'u' && j + 5 < text.size() && is_hex(text[j + 2]) && is_hex(text[j + 3]) &&
                    is_hex(text[j + 4]) && is_hex(text[j + 5])) {
                    escaped.append(text.substr(j, 6));
                    j += 6;
                    continue;
                }
            }
            escaped += "\\\\";
            ++j;
            continue;
        }
        if (c == '"') {
            if (closes_value(text, j)) {
                value_end = j + 1;
                json decoded = json::parse("\"" + escaped + "\"", nullptr, false);
                if (decoded.is_discarded() || !decoded.is_string()) return std::nullopt;
                return decoded.get<std::string>();
            }
            escaped += "\\\"";
            ++j;
            continue;
        }
        const auto uc = static_cast<unsigned char>(c);
        if (uc < 0x20) {
            switch (c) {
                case '\n': escaped += "\\n"; break;
                case '\r': escaped += "\\r"; break;
                case '\t': escaped += "\\t"; break;
                default: {
                    static constexpr char kHex[] = "0123456789abcdef";
                    escaped += "\\u00";
                    escaped += kHex[uc >> 4];
                    escaped += kHex[uc & 0xF];
                }
            }
            ++j;
            continue;
        }
        escaped += c;
        ++j;
    }
    return std::nullopt;  // unterminated
}

std::optional<FieldMatch> find_string_field(std::string_view text, std::string_view key, std::size_t from,
                                            std::size_t to) {
    const std::string quoted = "\"" + std::string(key) + "\"";
    for (std::size_t p = text.find(quoted, from); p != std::string_view::npos && p < to;
         p = text.find(quoted, p + 1)) {
        if (p > 0 && text[p - 1] == '\\') continue;
        std::size_t i = skip_space(text, p + quoted.size());
        if (i >= text.size() || text[i] != ':') continue;
        i = skip_space(text, i + 1);
        if (i >= text.size() || text[i] != '"') continue;
        FieldMatch m;
        m.key_pos = p;
        if (auto v = scan_string_value(text, i + 1, m.value_end)) {
            m.value = std::move(*v);
            return m;
        }
    }
    return std::nullopt;
}

struct Fields {
    std::string reasoning;
    std::string answer;
};

std::optional<Fields> strict_fields(std::string_view trimmed) {
    if (trimmed.empty() || trimmed.front() != '{') return std::nullopt;
    json j = json::parse(trimmed, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    auto r = j.find("reasoning");
    auto a = j.find("answer");
    if (r == j.end() || a == j.end() || !r->is_string() || !a->is_string()) return std::nullopt;
    return Fields{r->get<std::string>(), a->get<std::string>()};
}

std::optional<Fields> lenient_fields(std::string_view text) {
    auto reasoning = find_string_field(text, "reasoning", 0, text.size());
    if (!reasoning) return std::nullopt;
    auto answer = find_string_field(text, "answer", reasoning->value_end, text.size());
    if (!answer) answer = find_string_field(text, "answer", 0, reasoning->key_pos);
    if (!answer) return std::nullopt;
    return Fields{std::move(reasoning->value), std::move(answer->value)};
}

bool usable(const Fields& f) { return !trim(f.reasoning).empty() && !trim(f.answer).empty(); }

void add_note(std::optional<std::string>& note, const std::string& text) {
    if (note) {
        *note += "; ";
        *note += text;
    } else {
        note = text;
    }
}

}  // namespace

std::string_view parse_status_name(ParseStatus status) noexcept {
    switch (status) {
        case ParseStatus::kOk: return "ok";
        case ParseStatus::kRepaired: return "repaired";
        case ParseStatus::kFailed: return "failed";
    }
    return "failed";
}

ParseStatus parse_status_from(std::string_view name) {
    if (name == "ok") return ParseStatus::kOk;
    if (name == "repaired") return ParseStatus::kRepaired;
    if (name == "failed") return ParseStatus::kFailed;
    throw DataError("unknown parse status: " + std::string(name));
}

ExcerptExtraction extract_excerpts(std::string_view reasoning) {
    static constexpr std::string_view kMarker = "[Excerpt ";
    ExcerptExtraction out;
    std::size_t pos = 0;
    while ((pos = reasoning.find(kMarker, pos)) != std::string_view::npos) {
        const std::size_t digits = pos + kMarker.size();
        std::size_t j = digits;
        while (j < reasoning.size() && reasoning[j] >= '0' && reasoning[j] <= '9') ++j;
        if (j == digits || j >= reasoning.size() || reasoning[j] != ']') {
            pos = digits;
            continue;
        }
        const std::string marker(reasoning.substr(pos, j + 1 - pos));
        int label = 0;
        auto [ptr, ec] = std::from_chars(reasoning.data() + digits, reasoning.data() + j, label);
        if (ec != std::errc{} || label <= 0) {
            out.notes.push_back(marker + " has an invalid label");
            pos = j + 1;
            continue;
        }
        std::size_t k = skip_space(reasoning, j + 1);
        if (k < reasoning.size() && reasoning[k] == '`') {
            std::size_t run = 0;
            while (k + run < reasoning.size() && reasoning[k + run] == '`') ++run;
            const std::size_t body = k + run;
            const auto close = reasoning.find(std::string(run, '`'), body);
            if (close != std::string_view::npos && close > body) {
                out.excerpts.push_back({label, std::string(reasoning.substr(body, close - body))});
                pos = close + run;
                continue;
            }
        }
        out.notes.push_back(marker + " has no backtick span");
        pos = j + 1;
    }
    return out;
}

ReasoningPath parse_response(std::string_view raw_text) {
    ReasoningPath path;
    std::optional<Fields> fields = strict_fields(trim(raw_text));
    if (fields && usable(*fields)) {
        path.parse_status = ParseStatus::kOk;
    } else {
        fields = lenient_fields(raw_text);
        if (fields && usable(*fields)) {
            path.parse_status = ParseStatus::kRepaired;
        } else {
            path.parse_status = ParseStatus::kFailed;
            path.parse_note = fields ? "empty reasoning or answer" : "no reasoning/answer object found";
            return path;
        }
    }
    path.reasoning = std::move(fields->reasoning);
    path.answer = std::move(fields->answer);
    auto extraction = extract_excerpts(path.reasoning);
    path.excerpts = std::move(extraction.excerpts);
    for (const auto& n : extraction.notes) add_note(path.parse_note, n);
    return path;
}

ReasoningPath parse_path(const RawSample& sample) {
    ReasoningPath path;
    if (sample.error) {
        path.parse_status = ParseStatus::kFailed;
        path.parse_note = "sample error: " + *sample.error;
    } else {
        path = parse_response(sample.raw_text);
    }
    path.example_id = sample.example_id;
    path.sample_index = sample.sample_index;
    return path;
}

ExcerptCount count_excerpts(const ReasoningPath& path) {
    if (path.parse_status == ParseStatus::kFailed) {
        throw DataError("count_excerpts on failed path " + path.example_id + "/" + std::to_string(path.sample_index));
    }
    return {path.excerpts.size(), path.excerpts.size() > kMaxExcerpts};
}

ordered_json path_to_json(const ReasoningPath& p) {
    ordered_json j;
    j["example_id"] = p.example_id;
    j["sample_index"] = p.sample_index;
    j["reasoning"] = p.reasoning;
    j["answer"] = p.answer;
    j["excerpts"] = ordered_json::array();
    for (const auto& e : p.excerpts) j["excerpts"].push_back({{"label", e.label}, {"text", e.text}});
    j["parse_status"] = parse_status_name(p.parse_status);
    if (p.parse_note) j["parse_note"] = *p.parse_note;
    return j;
}

ReasoningPath path_from_json(const json& j, std::size_t line) {
    try {
        ReasoningPath p;
        p.example_id = j.at("example_id").get<std::string>();
        p.sample_index = j.at("sample_index").get<int>();
        p.reasoning = j.at("reasoning").get<std::string>();
        p.answer = j.at("answer").get<std::string>();
        for (const auto& e : j.at("excerpts")) p.excerpts.push_back({e.at("label").get<int>(), e.at("text").get<std::string>()});
        p.parse_status = parse_status_from(j.at("parse_status").get<std::string>());
        if (auto it = j.find("parse_note"); it != j.end() && it->is_string()) p.parse_note = it->get<std::string>();
        return p;
    } catch (const json::exception& e) {
        throw DataError("line " + std::to_string(line) + ": malformed parsed path: " + e.what());
    }
}

std::vector<ReasoningPath> load_paths(const std::filesystem::path& path) {
    std::vector<ReasoningPath> out;
    jsonl::for_each_record(path, [&](const json& r, std::size_t line) { out.push_back(path_from_json(r, line)); });
    return out;
}

void save_paths(const std::filesystem::path& path, const std::vector<ReasoningPath>& paths) {
    std::vector<ordered_json> rows;
    rows.reserve(paths.size());
    for (const auto& p : paths) rows.push_back(path_to_json(p));
    jsonl::write_all(path, rows);
}

}  // namespace cotcurate
