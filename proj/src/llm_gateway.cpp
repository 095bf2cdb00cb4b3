#include "rcafuse/llm_gateway.hpp"

#include "rcafuse/errors.hpp"

#include "httplib.h"
#include "json.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

namespace rcafuse {

using nlohmann::json;

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string most_frequent_entity_token(const std::string& text) {
    auto is_token_char = [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
    };
    auto is_entity = [](const std::string& tok) {
        // <name>-<digits>: at least one letter start, a dash, trailing digits
        if (tok.size() < 3 || tok.front() < 'a' || tok.front() > 'z') return false;
        const auto dash = tok.find_last_of('-');
        if (dash == std::string::npos || dash == 0 || dash + 1 >= tok.size()) return false;
        for (std::size_t i = dash + 1; i < tok.size(); ++i) {
            if (tok[i] < '0' || tok[i] > '9') return false;
        }
        return true;
    };

    std::map<std::string, int> counts;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !is_token_char(text[i])) ++i;
        std::size_t start = i;
        while (i < text.size() && is_token_char(text[i])) ++i;
        if (i > start) {
            std::string tok = text.substr(start, i - start);
            if (is_entity(tok)) ++counts[tok];
        }
    }
    std::string best;
    int best_count = 0;
    for (const auto& [tok, count] : counts) {
        if (count > best_count) {  // map order makes ties lexicographic-smallest
            best = tok;
            best_count = count;
        }
    }
    return best;
}

ProviderResult HttpLlmProvider::send(const LlmRequest& request, const LlmConfig& config) {
    const char* key = config.api_key_env.empty() ? nullptr : std::getenv(config.api_key_env.c_str());

    json body;
    body["model"] = config.model_name;
    body["messages"] = json::array({json{{"role", "user"}, {"content", request.prompt}}});
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_output_tokens;

    httplib::Client client(config.endpoint_url);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);

    auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
        return ProviderResult{true, 0, httplib::to_string(res.error())};
    }
    if (res->status != 200) {
        return ProviderResult{false, res->status, res->body};
    }
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty() ||
        !reply["choices"][0].contains("message")) {
        return ProviderResult{false, 502, "unparseable completion body"};
    }
    return ProviderResult{false, 200, reply["choices"][0]["message"].value("content", "")};
}

MockLlmProvider::MockLlmProvider(std::map<std::string, MockBehavior> script, bool strict)
    : script_(std::move(script)), strict_(strict) {}

int MockLlmProvider::call_count(const std::string& tag) const {
    std::lock_guard lock(mu_);
    const auto it = calls_.find(tag);
    return it == calls_.end() ? 0 : it->second;
}

ProviderResult MockLlmProvider::send(const LlmRequest& request, const LlmConfig&) {
    const int now_in_flight = in_flight_.fetch_add(1) + 1;
    int seen = max_in_flight_.load();
    while (now_in_flight > seen && !max_in_flight_.compare_exchange_weak(seen, now_in_flight)) {
    }
    struct Release {
        std::atomic<int>& counter;
        ~Release() { counter.fetch_sub(1); }
    } release{in_flight_};

    MockBehavior behavior;
    int call_index = 0;
    {
        std::lock_guard lock(mu_);
        auto it = script_.find(request.tag);
        if (it == script_.end()) {
            if (strict_) {
                throw Error(ErrorCode::UnknownTag, "mock has no script for tag \"" + request.tag + "\"");
            }
            behavior = MockBehavior{};  // canned empty
        } else {
            behavior = it->second;
        }
        call_index = calls_[request.tag]++;
    }

    if (call_index < behavior.fail_times) {
        return ProviderResult{true, 0, "injected transport failure"};
    }
    const int post_fail_index = call_index - behavior.fail_times;
    if (post_fail_index < static_cast<int>(behavior.status_sequence.size())) {
        const int status = behavior.status_sequence[post_fail_index];
        if (status != 200) {
            return ProviderResult{false, status, "injected http status"};
        }
    }

    const std::string digest = fnv1a_hex(request.prompt);
    auto heuristic_verdict = [&]() {
        const std::string entity = most_frequent_entity_token(request.prompt);
        json verdict;
        verdict["component"] = entity.empty() ? "unknown" : entity;
        verdict["reason"] = entity.empty() ? "no dominant entity in evidence"
                                           : "highest evidence frequency across modalities";
        verdict["reasoning_trace"] =
            "mock heuristic: counted entity mentions across the supplied evidence (digest=" + digest + ")";
        return "Based on the evidence, here is the verdict:\n```json\n" + verdict.dump(2) + "\n```\n";
    };

    std::string text;
    switch (behavior.mode) {
        case MockBehavior::Mode::canned: {
            text = behavior.text;
            const std::string marker = "{DIGEST}";
            for (auto pos = text.find(marker); pos != std::string::npos; pos = text.find(marker)) {
                text.replace(pos, marker.size(), digest);
            }
            break;
        }
        case MockBehavior::Mode::echo_payload: {
            const auto first = request.prompt.find('{');
            const auto last = request.prompt.rfind('}');
            std::string payload = (first != std::string::npos && last != std::string::npos && last > first)
                                      ? request.prompt.substr(first, last - first + 1)
                                      : request.prompt;
            text = "MOCK SUMMARY [" + request.tag + "] digest=" + digest + "\n" + payload;
            break;
        }
        case MockBehavior::Mode::heuristic_rca:
            text = heuristic_verdict();
            break;
        case MockBehavior::Mode::malformed_once:
            text = post_fail_index == 0
                       ? "I am sorry, I cannot format that as requested right now."
                       : heuristic_verdict();
            break;
        case MockBehavior::Mode::always_malformed:
            text = "The fault is somewhere in the system; further analysis is required.";
            break;
    }
    return ProviderResult{false, 200, text};
}

LlmGateway::LlmGateway(LlmConfig config, std::shared_ptr<LlmProvider> provider, std::ostream* log,
                       SleepFn sleep)
    : config_(std::move(config)), provider_(std::move(provider)), log_(log), sleep_(std::move(sleep)) {
    if (config_.max_retries < 0 || config_.max_concurrent_requests < 1) {
        throw Error(ErrorCode::InvalidConfig, "gateway retries must be >= 0 and concurrency >= 1");
    }
    if (!sleep_) {
        sleep_ = [](int ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); };
    }
}

void LlmGateway::acquire_slot() {
    std::unique_lock lock(slot_mu_);
    slot_cv_.wait(lock, [&] { return slots_in_use_ < config_.max_concurrent_requests; });
    ++slots_in_use_;
}

void LlmGateway::release_slot() {
    {
        std::lock_guard lock(slot_mu_);
        --slots_in_use_;
    }
    slot_cv_.notify_one();
}

void LlmGateway::log_line(const LlmRequest& request, const CallStats& stats, const std::string& outcome) {
    if (!log_) return;
    json line;
    line["tag"] = request.tag;
    line["attempts"] = stats.attempts;
    line["latency_ms"] = stats.latency_ms;
    line["outcome"] = outcome;
    std::lock_guard lock(log_mu_);
    (*log_) << line.dump() << "\n";
}

std::string LlmGateway::complete(const LlmRequest& request, CallStats* stats_out) {
    if (request.prompt.empty()) {
        throw Error(ErrorCode::InvalidConfig, "empty prompt");
    }
    acquire_slot();
    struct SlotGuard {
        LlmGateway& gw;
        ~SlotGuard() { gw.release_slot(); }
    } guard{*this};

    CallStats stats;
    const auto start = std::chrono::steady_clock::now();
    auto finish = [&](const std::string& outcome) {
        stats.latency_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        log_line(request, stats, outcome);
        if (stats_out) *stats_out = stats;
    };

    std::string last_detail;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        stats.attempts = attempt + 1;
        const ProviderResult result = provider_->send(request, config_);
        if (!result.transport_error && result.http_status == 200) {
            finish("ok");
            return result.text;
        }
        if (!result.transport_error && (result.http_status == 401 || result.http_status == 403)) {
            finish("auth_error");
            throw Error(ErrorCode::AuthError, "http " + std::to_string(result.http_status));
        }
        if (!result.transport_error && result.http_status == 413) {
            finish("payload_too_large");
            throw Error(ErrorCode::PayloadTooLarge, "http 413 for tag " + request.tag);
        }
        const bool retryable =
            result.transport_error || result.http_status >= 500 || result.http_status == 408 ||
            result.http_status == 429;
        last_detail = result.transport_error ? "transport: " + result.text
                                             : "http " + std::to_string(result.http_status);
        if (!retryable) {
            finish("non_retryable");
            throw Error(ErrorCode::LlmExhausted, last_detail + " (non-retryable)");
        }
        if (attempt < config_.max_retries) {
            const int delay = config_.backoff_base_ms * (1 << attempt);
            stats.backoff_ms.push_back(delay);
            sleep_(delay);
        }
    }
    finish("exhausted");
    throw Error(ErrorCode::LlmExhausted,
                "tag " + request.tag + " failed after " + std::to_string(stats.attempts) +
                    " attempts; last: " + last_detail);
}

}  // namespace rcafuse
