#include "cotcurate/templates.hpp"

#include "template_data.hpp"

namespace cotcurate::templates {
namespace {

// Resource files end with a newline; the rendered prompt does not.
std::string_view strip_final_newline(std::string_view s) {
    if (!s.empty() && s.back() == '\n') s.remove_suffix(1);
    return s;
}

}  // namespace

std::string_view sampling_template() { return strip_final_newline(detail::kSamplingTemplateV1); }
std::string_view judge_template() { return strip_final_newline(detail::kJudgeTemplateV1); }
std::string_view direct_template() { return strip_final_newline(detail::kDirectTemplateV1); }

std::string render(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                auto it = values.find(tmpl.substr(i + 1, close - i - 1));
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

}  // namespace cotcurate::templates
