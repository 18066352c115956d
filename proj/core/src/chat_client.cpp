#include "ledgerloop/chat_client.hpp"

#include <chrono>
#include <cstdlib>
#include <regex>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

namespace ledgerloop {

std::string redact(std::string text, const std::string& secret) {
    if (!secret.empty()) {
        for (auto pos = text.find(secret); pos != std::string::npos; pos = text.find(secret, pos))
            text.replace(pos, secret.size(), "[REDACTED]");
    }
    static const std::regex bearer(R"((Bearer\s+)[A-Za-z0-9._\-~+/=]+)");
    return std::regex_replace(text, bearer, "$1[REDACTED]");
}

void LlmLog::record(const std::string& direction, const std::string& body, const std::string& secret) {
    nlohmann::json line = {{"direction", direction}, {"body", redact(body, secret)}};
    std::lock_guard lock(mutex_);
    out_ << line.dump() << '\n';
    out_.flush();
}

void Semaphore::acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return permits_ > 0; });
    --permits_;
}

void Semaphore::release() {
    {
        std::lock_guard lock(mutex_);
        ++permits_;
    }
    cv_.notify_one();
}

namespace {

struct SlotGuard {
    Semaphore& s;
    explicit SlotGuard(Semaphore& sem) : s(sem) { s.acquire(); }
    ~SlotGuard() { s.release(); }
};

}  // namespace

HttpChatClient::HttpChatClient(ExternalConfig config, LlmLog* log)
    : config_(std::move(config)), log_(log), slots_(config_.max_concurrency) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr) api_key_ = key;
    static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(config_.endpoint, m, url))
        throw BackendError(fmt::format("endpoint '{}' is not an http(s) URL", config_.endpoint));
    base_ = m[1];
    path_ = m[2].matched ? std::string(m[2]) : "/";
}

std::string HttpChatClient::post_once(const std::string& body) {
    httplib::Client client(base_);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    client.set_write_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) throw BackendError(fmt::format("request to {} failed: {}", base_, httplib::to_string(res.error())));
    if (log_ != nullptr) log_->record("response", res->body, api_key_);
    if (res->status < 200 || res->status >= 300)
        throw BackendError(fmt::format("endpoint returned HTTP {}", res->status), res->body);
    return res->body;
}

std::string HttpChatClient::complete(const std::vector<ChatMessage>& messages) {
    nlohmann::json request = {{"model", config_.model}, {"temperature", config_.temperature}};
    request["messages"] = nlohmann::json::array();
    for (const auto& m : messages) request["messages"].push_back({{"role", m.role}, {"content", m.content}});
    const auto body = request.dump();

    SlotGuard slot(slots_);
    std::string raw;
    for (int attempt = 0;; ++attempt) {
        if (log_ != nullptr) log_->record("request", body, api_key_);
        try {
            raw = post_once(body);
            break;
        } catch (const BackendError&) {
            if (attempt >= config_.http_retries) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(100 * (attempt + 1)));
        }
    }
    auto j = nlohmann::json::parse(raw, nullptr, false);
    if (j.is_discarded()) throw BackendError("response body is not JSON", raw);
    try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw BackendError("response lacks choices[0].message.content", raw);
    }
}

std::string extract_json_object(const std::string& text) {
    auto start = text.find('{');
    while (start != std::string::npos) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (escaped)
                    escaped = false;
                else if (c == '\\')
                    escaped = true;
                else if (c == '"')
                    in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '{') ++depth;
            else if (c == '}' && --depth == 0) return text.substr(start, i - start + 1);
        }
        start = text.find('{', start + 1);
    }
    return text;
}

}  // namespace ledgerloop
