#include <cstdlib>
#include <regex>

#include <httplib.h>

#include "cotcurate/error.hpp"
#include "cotcurate/llm_client.hpp"

namespace cotcurate {

json chat_request_body(const ChatRequest& request) {
    json messages = json::array();
    for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    return {
        {"model", request.model},
        {"messages", std::move(messages)},
        {"temperature", request.temperature},
        {"max_tokens", request.max_output_tokens},
    };
}

TransportReply parse_chat_response_body(int status, const std::string& body) {
    TransportReply reply;
    reply.status = status;
    if (status != 200) {
        reply.error_body = body;
        return reply;
    }
    json j = json::parse(body, nullptr, false);
    const json* message = nullptr;
    const json* choice = nullptr;
    if (!j.is_discarded() && j.is_object()) {
        auto choices = j.find("choices");
        if (choices != j.end() && choices->is_array() && !choices->empty() && choices->front().is_object()) {
            choice = &choices->front();
            auto m = choice->find("message");
            if (m != choice->end() && m->is_object()) message = &*m;
        }
    }
    if (message == nullptr) {
        reply.status = 502;
        reply.error_body = "malformed completion body: " + body.substr(0, 200);
        return reply;
    }
    if (auto c = message->find("content"); c != message->end() && c->is_string()) reply.content = c->get<std::string>();
    if (auto f = choice->find("finish_reason"); f != choice->end() && f->is_string() && *f == "length") {
        reply.finish_reason = FinishReason::kLength;
    }
    if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
        reply.usage = TokenUsage{u->value("prompt_tokens", 0), u->value("completion_tokens", 0)};
    }
    return reply;
}

HttpTransport::HttpTransport(const EndpointConfig& cfg) : timeout_ms_(cfg.timeout_ms) {
    static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
    std::smatch m;
    if (!std::regex_match(cfg.base_url, m, kUrl)) throw UsageError("endpoint.base_url is not an http(s) URL: " + cfg.base_url);
    scheme_host_port_ = m[1].str();
    path_prefix_ = m[2].str();
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (scheme_host_port_.rfind("https", 0) == 0) throw UsageError("this build has no TLS support: " + cfg.base_url);
#endif
    if (cfg.api_key_env.empty()) throw UsageError("endpoint.api_key_env is required for " + cfg.base_url);
    const char* key = std::getenv(cfg.api_key_env.c_str());
    if (key == nullptr || *key == '\0') throw UsageError("missing credential: environment variable " + cfg.api_key_env + " is not set");
    api_key_ = key;
}

TransportReply HttpTransport::send(const ChatRequest& request) {
    httplib::Client client(scheme_host_port_);
    const auto sec = timeout_ms_ / 1000;
    const auto usec = (timeout_ms_ % 1000) * 1000;
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
    httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
    auto res = client.Post(path_prefix_ + "/chat/completions", headers, chat_request_body(request).dump(-1, ' ', false, json::error_handler_t::replace),
                           "application/json");
    if (!res) {
        TransportReply failed;
        failed.status = 0;
        failed.error_body = httplib::to_string(res.error());
        return failed;
    }
    return parse_chat_response_body(res->status, res->body);
}

}  // namespace cotcurate
