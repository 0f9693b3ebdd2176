#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "cotcurate/jsonl.hpp"

namespace cotcurate {

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_output_tokens = 1024;
    std::string request_tag;

    // Throws DataError unless messages is non-empty, ends with a user turn, every role is
    // known, temperature is in [0, 2] and max_output_tokens is positive.
    void validate() const;
};

ChatRequest make_user_request(std::string model, std::string prompt, double temperature,
                              int max_output_tokens, std::string tag);

enum class FinishReason { kStop, kLength, kError };
std::string_view finish_reason_name(FinishReason reason) noexcept;

struct TokenUsage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

struct ChatResponse {
    std::string request_tag;
    std::string content;
    FinishReason finish_reason = FinishReason::kStop;
    std::optional<TokenUsage> usage;
    std::optional<std::string> error;  // set on error-valued batch entries
    int attempts = 0;

    bool ok() const noexcept { return !error.has_value(); }
};

struct RetryPolicy {
    int max_attempts = 3;
    int backoff_base_ms = 500;
};

struct EndpointConfig {
    std::string base_url;       // http(s)://host[:port][/prefix], or stub:<fixture file>
    std::string api_key_env;    // name of the environment variable holding the key
    int max_concurrency = 4;
    RetryPolicy retry;
    int timeout_ms = 120'000;

    void validate() const;  // throws UsageError
    bool is_stub() const noexcept { return base_url.rfind("stub:", 0) == 0; }
};

EndpointConfig endpoint_from_json(const json& j);
ordered_json endpoint_to_json(const EndpointConfig& cfg);

// Outcome of one attempt. status 200 is success; 0 means the request never produced an
// HTTP status (timeout, connection failure).
struct TransportReply {
    int status = 0;
    std::string content;
    FinishReason finish_reason = FinishReason::kStop;
    std::optional<TokenUsage> usage;
    std::string error_body;
};

class Transport {
public:
    virtual ~Transport() = default;
    virtual TransportReply send(const ChatRequest& request) = 0;
};

bool is_retryable_status(int status) noexcept;

// Chat-completions wire format helpers.
json chat_request_body(const ChatRequest& request);
TransportReply parse_chat_response_body(int status, const std::string& body);

class HttpTransport final : public Transport {
public:
    // Reads the key from cfg.api_key_env; throws UsageError naming the variable if unset.
    explicit HttpTransport(const EndpointConfig& cfg);
    TransportReply send(const ChatRequest& request) override;

private:
    std::string scheme_host_port_;
    std::string path_prefix_;
    std::string api_key_;
    int timeout_ms_;
};

struct ScriptedReply {
    int status = 200;
    std::string content;
    FinishReason finish_reason = FinishReason::kStop;
    int delay_ms = 0;
};

// Offline endpoint driven by a fixture of tag -> reply sequence. Each request consumes the
// next reply for its tag; the last reply repeats once the sequence is exhausted. A tag
// ending in '*' matches any request tag with that prefix (longest prefix wins).
class StubTransport final : public Transport {
public:
    StubTransport() = default;
    // Fixture lines: {"tag", "replies": [{"status", "content", ["finish_reason"], ["delay_ms"]}]}
    static std::shared_ptr<StubTransport> from_file(const std::filesystem::path& path);

    void script(const std::string& tag, std::vector<ScriptedReply> replies);
    TransportReply send(const ChatRequest& request) override;

    std::size_t requests() const;
    std::size_t requests_for(const std::string& tag) const;
    std::size_t requests_with_prefix(std::string_view prefix) const;
    std::size_t peak_in_flight() const noexcept { return peak_in_flight_.load(); }
    std::vector<ChatRequest> received() const;
    void reset_counters();

private:
    const std::vector<ScriptedReply>* find_script(const std::string& tag) const;

    mutable std::mutex mu_;
    std::map<std::string, std::vector<ScriptedReply>, std::less<>> scripts_;
    std::map<std::string, std::size_t, std::less<>> cursor_;
    std::vector<ChatRequest> received_;
    std::atomic<std::size_t> in_flight_{0};
    std::atomic<std::size_t> peak_in_flight_{0};
};

class LlmClient {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;
    using CompletionCallback = std::function<void(std::size_t index, const ChatResponse&)>;

    LlmClient(EndpointConfig cfg, std::shared_ptr<Transport> transport);

    // Picks the stub transport for stub: URLs and HTTP otherwise.
    static LlmClient connect(const EndpointConfig& cfg);

    // Retries timeouts, 429 and 5xx with exponential backoff (base * 2^retry, +-20% jitter).
    // Throws EndpointError on a non-retryable status or once attempts are exhausted.
    ChatResponse complete(const ChatRequest& request) const;

    // Bounded by max_concurrency. Output is positionally aligned with the input; failures
    // become error-valued entries. on_done runs serialized as each request finishes.
    std::vector<ChatResponse> complete_batch(const std::vector<ChatRequest>& requests,
                                             const CompletionCallback& on_done = {}) const;

    const EndpointConfig& config() const noexcept { return cfg_; }
    std::size_t attempts_issued() const noexcept { return attempts_->load(); }
    void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }
    std::chrono::milliseconds backoff_delay(int retry) const;

private:
    EndpointConfig cfg_;
    std::shared_ptr<Transport> transport_;
    Sleeper sleeper_;
    std::shared_ptr<std::atomic<std::size_t>> attempts_;
    std::shared_ptr<std::mutex> jitter_mu_;
    std::shared_ptr<std::mt19937_64> jitter_rng_;
};

}  // namespace cotcurate
