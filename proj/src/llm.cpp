#include "softmention/llm.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "softmention/digest.hpp"
#include "softmention/error.hpp"

namespace softmention::llm {

namespace {

using nlohmann::json;

class HttpTransport : public Transport {
 public:
  HttpTransport(std::string base_url, std::string api_key, int timeout_seconds)
      : api_key_(std::move(api_key)) {
    // Split a path prefix off the base URL; httplib wants scheme://host only.
    std::string url = std::move(base_url);
    while (!url.empty() && url.back() == '/') url.pop_back();
    size_t scheme = url.find("://");
    size_t path_start =
        scheme == std::string::npos ? url.find('/') : url.find('/', scheme + 3);
    if (path_start != std::string::npos) {
      prefix_ = url.substr(path_start);
      url = url.substr(0, path_start);
    }
    client_ = std::make_unique<httplib::Client>(url);
    client_->set_connection_timeout(timeout_seconds, 0);
    client_->set_read_timeout(timeout_seconds, 0);
    client_->set_write_timeout(timeout_seconds, 0);
  }

 private:
  TransportReply do_post(const std::string& path,
                         const std::string& body) override {
    httplib::Headers headers;
    if (!api_key_.empty())
      headers.emplace("Authorization", "Bearer " + api_key_);
    auto result =
        client_->Post(prefix_ + path, headers, body, "application/json");
    if (!result) return {0, httplib::to_string(result.error())};
    return {result->status, result->body};
  }

  std::string api_key_;
  std::string prefix_;
  std::unique_ptr<httplib::Client> client_;
};

bool retryable(int status) {
  return status == 0 || status == 408 || status == 429 || status >= 500;
}

std::string body_excerpt(const std::string& body) {
  constexpr size_t kMax = 240;
  if (body.size() <= kMax) return body;
  return body.substr(0, kMax) + "...";
}

ChatResponse parse_chat_body(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.contains("choices") || j["choices"].empty())
    raise(ErrorKind::Parse,
          "malformed chat completion response: " + body_excerpt(body));
  const json& choice = j["choices"][0];
  ChatResponse response;
  response.content = choice.value("message", json::object())
                         .value("content", std::string());
  response.finish_reason = choice.value("finish_reason", "stop");
  if (j.contains("usage")) {
    response.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0L);
    response.usage.completion_tokens =
        j["usage"].value("completion_tokens", 0L);
  }
  return response;
}

json request_to_json(const ChatRequest& request) {
  json messages = json::array();
  for (const ChatMessage& m : request.messages)
    messages.push_back({{"role", m.role}, {"content", m.content}});
  json j = {{"model", request.model},
            {"messages", messages},
            {"temperature", request.temperature}};
  if (request.max_tokens) j["max_tokens"] = *request.max_tokens;
  return j;
}

}  // namespace

void MockTransport::enqueue(TransportReply reply) {
  std::lock_guard<std::mutex> lock(mutex_);
  scripted_.push_back(std::move(reply));
}

std::vector<std::pair<std::string, std::string>> MockTransport::requests()
    const {
  std::lock_guard<std::mutex> lock(mutex_);
  return requests_;
}

TransportReply MockTransport::do_post(const std::string& path,
                                      const std::string& body) {
  std::lock_guard<std::mutex> lock(mutex_);
  requests_.emplace_back(path, body);
  if (!scripted_.empty()) {
    TransportReply reply = std::move(scripted_.front());
    scripted_.pop_front();
    return reply;
  }
  if (handler_) return handler_(path, body);
  raise(ErrorKind::Internal, "mock transport has no scripted reply for " + path);
}

std::unique_ptr<Transport> make_http_transport(const std::string& base_url,
                                               const std::string& api_key,
                                               int timeout_seconds) {
  return std::make_unique<HttpTransport>(base_url, api_key, timeout_seconds);
}

std::string make_chat_completion_body(const std::string& content,
                                      const Usage& usage,
                                      const std::string& finish_reason) {
  json j = {{"choices",
             {{{"index", 0},
               {"message", {{"role", "assistant"}, {"content", content}}},
               {"finish_reason", finish_reason}}}},
            {"usage",
             {{"prompt_tokens", usage.prompt_tokens},
              {"completion_tokens", usage.completion_tokens}}}};
  return j.dump();
}

std::string make_embeddings_body(
    const std::vector<std::vector<double>>& vectors) {
  json data = json::array();
  for (size_t i = 0; i < vectors.size(); ++i)
    data.push_back({{"index", i}, {"embedding", vectors[i]}});
  return json{{"data", data}}.dump();
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  std::filesystem::path path = dir_ / (key + ".json");
  std::string raw;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!std::filesystem::exists(path)) return std::nullopt;
    std::ifstream file(path);
    if (!file) return std::nullopt;
    raw.assign(std::istreambuf_iterator<char>(file),
               std::istreambuf_iterator<char>());
  }
  json j = json::parse(raw, nullptr, false);
  if (j.is_discarded() || !j.contains("body")) return std::nullopt;
  return j["body"].get<std::string>();
}

void ResponseCache::put(const std::string& key, const std::string& body,
                        const std::string& model, const std::string& endpoint) {
  json entry = {{"body", body},
                {"model", model},
                {"endpoint", endpoint},
                {"timestamp",
                 std::chrono::duration_cast<std::chrono::seconds>(
                     std::chrono::system_clock::now().time_since_epoch())
                     .count()}};
  std::filesystem::path path = dir_ / (key + ".json");
  std::filesystem::path tmp = dir_ / (key + ".tmp");
  std::lock_guard<std::mutex> lock(mutex_);
  {
    std::ofstream out(tmp);
    out << entry.dump();
  }
  std::filesystem::rename(tmp, path);
}

ChatClient::ChatClient(Transport& transport, ResponseCache* cache,
                       RetryPolicy retry)
    : transport_(transport), cache_(cache), retry_(retry) {}

TransportReply ChatClient::post_with_retries(const std::string& path,
                                             const std::string& body) {
  TransportReply reply;
  for (int attempt = 0; attempt <= retry_.max_retries; ++attempt) {
    if (attempt > 0 && retry_.base_delay_ms > 0) {
      int exponent = std::min(attempt - 1, 16);
      std::this_thread::sleep_for(std::chrono::milliseconds(
          static_cast<long>(retry_.base_delay_ms) * (1L << exponent)));
    }
    reply = transport_.post(path, body);
    if (reply.status == 200) return reply;
    if (!retryable(reply.status)) {
      raise(ErrorKind::Config, "request to " + path + " failed with status " +
                                   std::to_string(reply.status) + ": " +
                                   body_excerpt(reply.body));
    }
  }
  raise(ErrorKind::Transport,
        "request to " + path + " failed after " +
            std::to_string(retry_.max_retries + 1) + " attempts; last status " +
            std::to_string(reply.status) + ": " + body_excerpt(reply.body));
}

ChatResponse ChatClient::complete(const ChatRequest& request) {
  if (request.messages.empty())
    raise(ErrorKind::Config, "chat request without messages");
  const std::string body = request_to_json(request).dump();
  const std::string key = sha256_hex(
      json{{"endpoint", "/chat/completions"}, {"request", body}}.dump());

  if (cache_) {
    if (auto cached = cache_->get(key)) {
      cache_hits_.fetch_add(1);
      ChatResponse response = parse_chat_body(*cached);
      response.from_cache = true;
      return response;
    }
  }

  auto started = std::chrono::steady_clock::now();
  TransportReply reply = post_with_retries("/chat/completions", body);
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  requests_made_.fetch_add(1);
  ChatResponse response = parse_chat_body(reply.body);
  response.latency_ms = elapsed.count();
  if (cache_) cache_->put(key, reply.body, request.model, "/chat/completions");
  return response;
}

std::vector<std::vector<double>> ChatClient::embed(
    const std::vector<std::string>& texts, const std::string& model) {
  if (texts.empty()) raise(ErrorKind::Config, "embed called with no texts");

  auto key_for = [&](const std::string& text) {
    return sha256_hex(json{{"endpoint", "/embeddings"},
                           {"model", model},
                           {"text", text}}
                          .dump());
  };

  // Resolve unique texts first (cache, then one request for the rest), then
  // fan the vectors back out to every input position.
  std::map<std::string, std::vector<double>> by_text;
  std::vector<std::string> miss_texts;
  for (const std::string& text : texts) {
    if (by_text.count(text)) continue;
    if (cache_) {
      if (auto cached = cache_->get(key_for(text))) {
        json j = json::parse(*cached, nullptr, false);
        if (!j.is_discarded() && j.is_array()) {
          cache_hits_.fetch_add(1);
          by_text[text] = j.get<std::vector<double>>();
          continue;
        }
      }
    }
    by_text[text] = {};
    miss_texts.push_back(text);
  }

  if (!miss_texts.empty()) {
    json body = {{"model", model}, {"input", miss_texts}};
    TransportReply reply = post_with_retries("/embeddings", body.dump());
    requests_made_.fetch_add(1);
    json j = json::parse(reply.body, nullptr, false);
    if (j.is_discarded() || !j.contains("data") ||
        j["data"].size() != miss_texts.size())
      raise(ErrorKind::Parse,
            "malformed embeddings response: " + body_excerpt(reply.body));
    for (size_t k = 0; k < miss_texts.size(); ++k) {
      auto vec = j["data"][k]["embedding"].get<std::vector<double>>();
      by_text[miss_texts[k]] = vec;
      if (cache_)
        cache_->put(key_for(miss_texts[k]), json(vec).dump(), model,
                    "/embeddings");
    }
  }

  std::vector<std::vector<double>> out(texts.size());
  for (size_t i = 0; i < texts.size(); ++i) out[i] = by_text.at(texts[i]);
  return out;
}

}  // namespace softmention::llm
