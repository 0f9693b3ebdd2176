#include "cotcurate/llm_client.hpp"

#include <cmath>
#include <thread>

#include "cotcurate/bounded_pool.hpp"
#include "cotcurate/error.hpp"

namespace cotcurate {

void ChatRequest::validate() const {
    if (messages.empty()) throw DataError("chat request " + request_tag + ": no messages");
    for (const auto& m : messages) {
        if (m.role != "system" && m.role != "user" && m.role != "assistant") {
            throw DataError("chat request " + request_tag + ": unknown role " + m.role);
        }
    }
    if (messages.back().role != "user") throw DataError("chat request " + request_tag + ": last message must be from the user");
    if (!(temperature >= 0.0 && temperature <= 2.0)) {
        throw DataError("chat request " + request_tag + ": temperature must be in [0, 2]");
    }
    if (max_output_tokens <= 0) throw DataError("chat request " + request_tag + ": max_output_tokens must be positive");
}

ChatRequest make_user_request(std::string model, std::string prompt, double temperature, int max_output_tokens,
                              std::string tag) {
    ChatRequest r;
    r.model = std::move(model);
    r.messages.push_back({"user", std::move(prompt)});
    r.temperature = temperature;
    r.max_output_tokens = max_output_tokens;
    r.request_tag = std::move(tag);
    return r;
}

std::string_view finish_reason_name(FinishReason reason) noexcept {
    switch (reason) {
        case FinishReason::kStop: return "stop";
        case FinishReason::kLength: return "length";
        case FinishReason::kError: return "error";
    }
    return "error";
}

void EndpointConfig::validate() const {
    if (base_url.empty()) throw UsageError("endpoint.base_url is required");
    if (max_concurrency < 1) throw UsageError("endpoint.max_concurrency must be >= 1");
    if (retry.max_attempts < 1) throw UsageError("endpoint.retry.max_attempts must be >= 1");
    if (retry.backoff_base_ms < 1) throw UsageError("endpoint.retry.backoff_base_ms must be positive");
    if (timeout_ms < 1) throw UsageError("endpoint.timeout_ms must be positive");
}

EndpointConfig endpoint_from_json(const json& j) {
    EndpointConfig cfg;
    try {
        cfg.base_url = j.value("base_url", cfg.base_url);
        cfg.api_key_env = j.value("api_key_env", cfg.api_key_env);
        cfg.max_concurrency = j.value("max_concurrency", cfg.max_concurrency);
        cfg.timeout_ms = j.value("timeout_ms", cfg.timeout_ms);
        if (auto it = j.find("retry"); it != j.end()) {
            cfg.retry.max_attempts = it->value("max_attempts", cfg.retry.max_attempts);
            cfg.retry.backoff_base_ms = it->value("backoff_base_ms", cfg.retry.backoff_base_ms);
        }
    } catch (const json::exception& e) {
        throw UsageError(std::string("invalid endpoint config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ordered_json endpoint_to_json(const EndpointConfig& cfg) {
    ordered_json j;
    j["base_url"] = cfg.base_url;
    j["api_key_env"] = cfg.api_key_env;
    j["max_concurrency"] = cfg.max_concurrency;
    j["retry"] = {{"max_attempts", cfg.retry.max_attempts}, {"backoff_base_ms", cfg.retry.backoff_base_ms}};
    j["timeout_ms"] = cfg.timeout_ms;
    return j;
}

bool is_retryable_status(int status) noexcept { return status == 0 || status == 429 || (status >= 500 && status <= 599); }

LlmClient::LlmClient(EndpointConfig cfg, std::shared_ptr<Transport> transport)
    : cfg_(std::move(cfg)),
      transport_(std::move(transport)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }),
      attempts_(std::make_shared<std::atomic<std::size_t>>(0)),
      jitter_mu_(std::make_shared<std::mutex>()),
      jitter_rng_(std::make_shared<std::mt19937_64>(0x5eed)) {
    cfg_.validate();
    if (!transport_) throw UsageError("LlmClient requires a transport");
}

LlmClient LlmClient::connect(const EndpointConfig& cfg) {
    cfg.validate();
    if (cfg.is_stub()) return LlmClient(cfg, StubTransport::from_file(cfg.base_url.substr(5)));
    return LlmClient(cfg, std::make_shared<HttpTransport>(cfg));
}

std::chrono::milliseconds LlmClient::backoff_delay(int retry) const {
    double jitter = 0.0;
    {
        std::lock_guard lock(*jitter_mu_);
        jitter = std::uniform_real_distribution<double>(-0.2, 0.2)(*jitter_rng_);
    }
    const double base = static_cast<double>(cfg_.retry.backoff_base_ms) * std::ldexp(1.0, retry);
    return std::chrono::milliseconds(static_cast<long long>(std::llround(base * (1.0 + jitter))));
}

ChatResponse LlmClient::complete(const ChatRequest& request) const {
    request.validate();
    TransportReply last;
    const int max_attempts = cfg_.retry.max_attempts;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        attempts_->fetch_add(1);
        try {
            last = transport_->send(request);
        } catch (const std::exception& e) {
            last = TransportReply{};
            last.error_body = e.what();
        }
        if (last.status == 200) {
            ChatResponse resp;
            resp.request_tag = request.request_tag;
            resp.content = std::move(last.content);
            resp.finish_reason = last.finish_reason;
            resp.usage = last.usage;
            resp.attempts = attempt;
            return resp;
        }
        if (!is_retryable_status(last.status)) {
            throw EndpointError("non-retryable status " + std::to_string(last.status) + " for " + request.request_tag +
                                    ": " + last.error_body,
                                last.status, attempt);
        }
        if (attempt < max_attempts) sleeper_(backoff_delay(attempt - 1));
    }
    throw EndpointError("retries exhausted after " + std::to_string(max_attempts) + " attempts for " +
                            request.request_tag + " (last status " + std::to_string(last.status) + ": " +
                            last.error_body + ")",
                        last.status, max_attempts);
}

std::vector<ChatResponse> LlmClient::complete_batch(const std::vector<ChatRequest>& requests,
                                                    const CompletionCallback& on_done) const {
    std::vector<ChatResponse> responses(requests.size());
    std::mutex callback_mu;
    std::atomic<bool> aborted{false};
    parallel_for_bounded(requests.size(), static_cast<std::size_t>(cfg_.max_concurrency), [&](std::size_t i) {
        if (aborted.load()) return;
        ChatResponse resp;
        try {
            resp = complete(requests[i]);
        } catch (const EndpointError& e) {
            resp.request_tag = requests[i].request_tag;
            resp.finish_reason = FinishReason::kError;
            resp.error = e.what();
            resp.attempts = e.attempts();
        } catch (const DataError& e) {
            resp.request_tag = requests[i].request_tag;
            resp.finish_reason = FinishReason::kError;
            resp.error = e.what();
        }
        responses[i] = resp;
        if (on_done) {
            std::lock_guard lock(callback_mu);
            try {
                on_done(i, responses[i]);
            } catch (...) {
                aborted.store(true);
                throw;
            }
        }
    });
    return responses;
}

}  // namespace cotcurate
