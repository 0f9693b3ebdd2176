#pragma once

#include <map>
#include <string>
#include <string_view>

namespace cotcurate::templates {

// Version identifiers recorded in every run manifest.
inline constexpr std::string_view kSamplingVersion = "sampling-v1";
inline constexpr std::string_view kJudgeVersion = "judge-v1";
inline constexpr std::string_view kDirectVersion = "direct-v1";

std::string_view sampling_template();
std::string_view judge_template();
std::string_view direct_template();

// Single-pass substitution of `{name}` placeholders. Substituted values are never rescanned,
// and braces that do not form a known placeholder are copied through unchanged.
std::string render(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& values);

}  // namespace cotcurate::templates
