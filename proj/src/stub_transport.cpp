#include "cotcurate/error.hpp"
#include "cotcurate/llm_client.hpp"

#include <thread>

namespace cotcurate {
namespace {

ScriptedReply reply_from_json(const json& j, std::size_t line) {
    if (!j.is_object()) throw DataError("stub fixture line " + std::to_string(line) + ": reply must be an object");
    ScriptedReply r;
    r.status = j.value("status", 200);
    r.content = j.value("content", std::string{});
    const auto finish = j.value("finish_reason", std::string("stop"));
    if (finish == "length") {
        r.finish_reason = FinishReason::kLength;
    } else if (finish != "stop") {
        throw DataError("stub fixture line " + std::to_string(line) + ": unknown finish_reason " + finish);
    }
    r.delay_ms = j.value("delay_ms", 0);
    return r;
}

}  // namespace

std::shared_ptr<StubTransport> StubTransport::from_file(const std::filesystem::path& path) {
    auto stub = std::make_shared<StubTransport>();
    jsonl::for_each_record(path, [&](const json& r, std::size_t line) {
        auto tag = r.find("tag");
        auto replies = r.find("replies");
        if (tag == r.end() || !tag->is_string() || replies == r.end() || !replies->is_array()) {
            throw DataError("stub fixture line " + std::to_string(line) + ": expected {\"tag\", \"replies\": [...]}");
        }
        std::vector<ScriptedReply> script;
        for (const auto& rep : *replies) script.push_back(reply_from_json(rep, line));
        stub->script(tag->get<std::string>(), std::move(script));
    });
    return stub;
}

void StubTransport::script(const std::string& tag, std::vector<ScriptedReply> replies) {
    std::lock_guard lock(mu_);
    scripts_[tag] = std::move(replies);
    cursor_.erase(tag);
}

const std::vector<ScriptedReply>* StubTransport::find_script(const std::string& tag) const {
    if (auto it = scripts_.find(tag); it != scripts_.end()) return &it->second;
    const std::vector<ScriptedReply>* best = nullptr;
    std::size_t best_len = 0;
    for (const auto& [pattern, replies] : scripts_) {
        if (pattern.empty() || pattern.back() != '*') continue;
        const std::string_view prefix(pattern.data(), pattern.size() - 1);
        if (tag.compare(0, prefix.size(), prefix) == 0 && (best == nullptr || prefix.size() >= best_len)) {
            best = &replies;
            best_len = prefix.size();
        }
    }
    return best;
}

TransportReply StubTransport::send(const ChatRequest& request) {
    ScriptedReply reply;
    bool found = false;
    {
        std::lock_guard lock(mu_);
        received_.push_back(request);
        const auto* script = find_script(request.request_tag);
        if (script != nullptr && !script->empty()) {
            const std::size_t cursor = cursor_[request.request_tag]++;
            reply = (*script)[std::min(cursor, script->size() - 1)];
            found = true;
        }
    }
    if (!found) {
        TransportReply missing;
        missing.status = 404;
        missing.error_body = "no scripted reply for tag " + request.request_tag;
        return missing;
    }

    const auto now = in_flight_.fetch_add(1) + 1;
    auto peak = peak_in_flight_.load();
    while (now > peak && !peak_in_flight_.compare_exchange_weak(peak, now)) {
    }
    if (reply.delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(reply.delay_ms));
    in_flight_.fetch_sub(1);

    TransportReply out;
    out.status = reply.status;
    if (reply.status == 200) {
        out.content = std::move(reply.content);
        out.finish_reason = reply.finish_reason;
    } else {
        out.error_body = std::move(reply.content);
    }
    return out;
}

std::size_t StubTransport::requests() const {
    std::lock_guard lock(mu_);
    return received_.size();
}

std::size_t StubTransport::requests_for(const std::string& tag) const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& r : received_) n += r.request_tag == tag;
    return n;
}

std::size_t StubTransport::requests_with_prefix(std::string_view prefix) const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& r : received_) n += r.request_tag.compare(0, prefix.size(), prefix) == 0;
    return n;
}

std::vector<ChatRequest> StubTransport::received() const {
    std::lock_guard lock(mu_);
    return received_;
}

void StubTransport::reset_counters() {
    std::lock_guard lock(mu_);
    received_.clear();
    cursor_.clear();
    peak_in_flight_.store(0);
}

}  // namespace cotcurate
