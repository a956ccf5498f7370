#pragma once

// Gateway to chat-completion and embedding endpoints: deterministic settings,
// content-addressed disk cache, retries with exponential backoff, and a
// scripted mock transport for fully offline runs.

#include <atomic>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace softmention::llm {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  std::optional<int> max_tokens;
};

struct Usage {
  long prompt_tokens = 0;
  long completion_tokens = 0;
};

struct ChatResponse {
  std::string content;
  std::string finish_reason;
  Usage usage;
  long latency_ms = 0;
  bool from_cache = false;
};

struct TransportReply {
  int status = 0;  // 0 = network failure / timeout
  std::string body;
};

class Transport {
 public:
  virtual ~Transport() = default;

  TransportReply post(const std::string& path, const std::string& body) {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return do_post(path, body);
  }

  long calls() const { return calls_.load(std::memory_order_relaxed); }

 private:
  virtual TransportReply do_post(const std::string& path,
                                 const std::string& body) = 0;
  std::atomic<long> calls_{0};
};

// HTTP transport against a chat-completions compatible endpoint; the base
// URL may carry a path prefix (e.g. https://host/v1).
std::unique_ptr<Transport> make_http_transport(const std::string& base_url,
                                               const std::string& api_key,
                                               int timeout_seconds = 120);

// Scripted transport: replies from a FIFO queue first, then from the handler.
class MockTransport : public Transport {
 public:
  using Handler =
      std::function<TransportReply(const std::string& path, const std::string& body)>;

  MockTransport() = default;
  explicit MockTransport(Handler handler) : handler_(std::move(handler)) {}

  void enqueue(TransportReply reply);
  std::vector<std::pair<std::string, std::string>> requests() const;

 private:
  TransportReply do_post(const std::string& path,
                         const std::string& body) override;

  mutable std::mutex mutex_;
  std::deque<TransportReply> scripted_;
  Handler handler_;
  std::vector<std::pair<std::string, std::string>> requests_;
};

// Wire-format helpers shared by the mock transports and tests.
std::string make_chat_completion_body(const std::string& content,
                                      const Usage& usage,
                                      const std::string& finish_reason = "stop");
std::string make_embeddings_body(const std::vector<std::vector<double>>& vectors);

// Content-addressed disk cache; one file per key holding the raw response
// body plus metadata. Writes are atomic (temp file + rename).
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& body,
           const std::string& model, const std::string& endpoint);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
};

struct RetryPolicy {
  int max_retries = 3;
  int base_delay_ms = 200;
};

class ChatClient {
 public:
  ChatClient(Transport& transport, ResponseCache* cache = nullptr,
             RetryPolicy retry = {});

  ChatResponse complete(const ChatRequest& request);
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts,
                                         const std::string& model);

  long cache_hits() const { return cache_hits_.load(); }
  long requests_made() const { return requests_made_.load(); }

 private:
  TransportReply post_with_retries(const std::string& path,
                                   const std::string& body);

  Transport& transport_;
  ResponseCache* cache_;
  RetryPolicy retry_;
  std::atomic<long> cache_hits_{0};
  std::atomic<long> requests_made_{0};
};

}  // namespace softmention::llm
