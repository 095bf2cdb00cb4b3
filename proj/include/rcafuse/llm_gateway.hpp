#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

namespace rcafuse {

struct LlmRequest {
    std::string prompt;
    int max_output_tokens = 2048;
    double temperature = 0.0;  // deterministic by default
    std::string tag;           // "stage1", "stage2", "rca", ...
};

struct LlmConfig {
    std::string endpoint_url;  // base URL; requests POST to /v1/chat/completions
    std::string model_name;
    std::string api_key_env = "RCAFUSE_API_KEY";  // name of the env var holding the key
    int max_retries = 3;
    int backoff_base_ms = 500;
    int max_concurrent_requests = 4;
};

// Raw provider outcome before the gateway's retry classification.
struct ProviderResult {
    bool transport_error = false;
    int http_status = 0;  // meaningful when transport_error is false
    std::string text;     // response content, or error detail
};

class LlmProvider {
public:
    virtual ~LlmProvider() = default;
    virtual ProviderResult send(const LlmRequest& request, const LlmConfig& config) = 0;
};

// Chat-completions HTTP client (messages array, model name), key taken from
// the configured environment variable and never logged.
class HttpLlmProvider : public LlmProvider {
public:
    ProviderResult send(const LlmRequest& request, const LlmConfig& config) override;
};

// Deterministic scripted provider for offline runs and tests.
struct MockBehavior {
    enum class Mode {
        canned,            // fixed text; {DIGEST} interpolates an fnv1a hash of the prompt
        echo_payload,      // echoes the prompt's embedded JSON payload back
        heuristic_rca,     // JSON verdict naming the most frequent entity token in the prompt
        malformed_once,    // first call returns prose without JSON, then heuristic verdicts
        always_malformed,  // prose without JSON on every call
    };
    Mode mode = Mode::canned;
    std::string text;                   // canned template
    int fail_times = 0;                 // transport failures before any response
    std::vector<int> status_sequence;   // per-call HTTP statuses (then 200)
};

class MockLlmProvider : public LlmProvider {
public:
    explicit MockLlmProvider(std::map<std::string, MockBehavior> script, bool strict = false);

    ProviderResult send(const LlmRequest& request, const LlmConfig& config) override;

    int call_count(const std::string& tag) const;
    int max_in_flight_seen() const { return max_in_flight_.load(); }

private:
    std::map<std::string, MockBehavior> script_;
    bool strict_;
    mutable std::mutex mu_;
    std::map<std::string, int> calls_;
    std::atomic<int> in_flight_{0};
    std::atomic<int> max_in_flight_{0};
};

// Frequency heuristic shared by the mock's rca modes: the most frequent
// token shaped like "<name>-<digits>" (pods, nodes), ties to the smallest.
std::string most_frequent_entity_token(const std::string& text);

std::string fnv1a_hex(const std::string& text);

struct CallStats {
    int attempts = 0;
    double latency_ms = 0.0;
    std::vector<int> backoff_ms;  // delay before each retry
};

// Shared, thread-safe front end: bounded concurrency, exponential backoff on
// transport/5xx failures, JSONL metadata logging. 401/403 and 413 fail fast.
class LlmGateway {
public:
    using SleepFn = std::function<void(int /*ms*/)>;

    LlmGateway(LlmConfig config, std::shared_ptr<LlmProvider> provider, std::ostream* log = nullptr,
               SleepFn sleep = {});

    // Returns the response text. Throws Error{LlmExhausted|AuthError|
    // PayloadTooLarge}.
    std::string complete(const LlmRequest& request, CallStats* stats = nullptr);

    const LlmConfig& config() const { return config_; }

private:
    void acquire_slot();
    void release_slot();
    void log_line(const LlmRequest& request, const CallStats& stats, const std::string& outcome);

    LlmConfig config_;
    std::shared_ptr<LlmProvider> provider_;
    std::ostream* log_;
    SleepFn sleep_;
    std::mutex slot_mu_;
    std::condition_variable slot_cv_;
    int slots_in_use_ = 0;
    std::mutex log_mu_;
};

}  // namespace rcafuse
