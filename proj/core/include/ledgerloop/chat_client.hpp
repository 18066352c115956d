#pragma once

#include <condition_variable>
#include <memory>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ledgerloop/config.hpp"

namespace ledgerloop {

struct ChatMessage {
    std::string role;  // "system", "user", "assistant"
    std::string content;
};

/// Transport failure: unreachable endpoint, non-2xx status, or a body
/// without a choices[0].message.content string.
class BackendError : public std::runtime_error {
public:
    BackendError(const std::string& message, std::string raw = {})
        : std::runtime_error(message), raw_(std::move(raw)) {}
    const std::string& raw() const { return raw_; }

private:
    std::string raw_;
};

class ChatClient {
public:
    virtual ~ChatClient() = default;
    /// Returns the assistant message text.
    virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

/// Serialized request/response log with credentials removed.
class LlmLog {
public:
    explicit LlmLog(std::ostream& out) : out_(out) {}
    void record(const std::string& direction, const std::string& body, const std::string& secret);

private:
    std::mutex mutex_;
    std::ostream& out_;
};

/// Replaces every occurrence of `secret` (when non-empty) and any bearer token.
std::string redact(std::string text, const std::string& secret);

class Semaphore {
public:
    explicit Semaphore(int permits) : permits_(permits) {}
    void acquire();
    void release();

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int permits_;
};

/// OpenAI-style chat-completions client over cpp-httplib.
class HttpChatClient : public ChatClient {
public:
    explicit HttpChatClient(ExternalConfig config, LlmLog* log = nullptr);
    std::string complete(const std::vector<ChatMessage>& messages) override;

    const ExternalConfig& config() const { return config_; }

private:
    std::string post_once(const std::string& body);

    ExternalConfig config_;
    LlmLog* log_;
    std::string api_key_;
    std::string base_;  // scheme://host[:port]
    std::string path_;
    Semaphore slots_;
};

/// Extracts the first balanced top-level JSON object from model output,
/// tolerating surrounding prose and ``` fences.
std::string extract_json_object(const std::string& text);

}  // namespace ledgerloop
