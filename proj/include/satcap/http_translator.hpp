#pragma once

// Remote translator speaking the LibreTranslate-style contract:
//   POST {"q": text, "source": code, "target": code[, "api_key": key]}
//   ->   {"translatedText": text}
// Connection failures, 429 and 5xx are transient (retried by back_translate);
// other non-200 statuses and malformed replies are permanent.

#include <chrono>
#include <string>
#include <utility>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "satcap/augment.hpp"
#include "satcap/error.hpp"

namespace satcap {

struct HttpTranslatorConfig {
  /// Full URL, e.g. "http://localhost:5000/translate".
  std::string endpoint;
  std::string api_key;
  std::chrono::milliseconds timeout{10000};
};

class HttpTranslator : public Translator {
 public:
  explicit HttpTranslator(HttpTranslatorConfig cfg) : cfg_(std::move(cfg)) {
    const auto scheme_end = cfg_.endpoint.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("translation endpoint needs a scheme: " + cfg_.endpoint);
    const auto path_start = cfg_.endpoint.find('/', scheme_end + 3);
    origin_ = cfg_.endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : cfg_.endpoint.substr(path_start);
    if (origin_.size() <= scheme_end + 3) throw ConfigError("translation endpoint has no host: " + cfg_.endpoint);
  }

  std::string translate(const std::string& text, const std::string& source, const std::string& target) override {
    // A client per call keeps the translator safe to share across threads.
    httplib::Client cli(origin_);
    if (!cli.is_valid()) throw ConfigError("unsupported translation endpoint: " + cfg_.endpoint);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());

    nlohmann::json body{{"q", text}, {"source", source}, {"target", target}};
    if (!cfg_.api_key.empty()) body["api_key"] = cfg_.api_key;

    auto res = cli.Post(path_, body.dump(), "application/json");
    if (!res) throw TransientTranslationError("translation request failed: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
      throw TransientTranslationError("translation service returned " + std::to_string(res->status));
    if (res->status != 200)
      throw TranslationError("translation service returned " + std::to_string(res->status) + ": " + res->body);

    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
      throw TranslationError("translation reply is not JSON");
    }
    auto it = reply.find("translatedText");
    if (!reply.is_object() || it == reply.end() || !it->is_string())
      throw TranslationError("translation reply lacks 'translatedText'");
    return it->get<std::string>();
  }

 private:
  HttpTranslatorConfig cfg_;
  std::string origin_;
  std::string path_;
};

}  // namespace satcap
