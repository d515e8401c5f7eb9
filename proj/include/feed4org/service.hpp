#pragma once

// HTTP/1.1 surface of the platform. JSON bodies; errors as {code, message}
// with the module error code. Sessions are opaque bearer tokens; accounts
// re-open sessions with the secret handed out at registration.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "feed4org/config.hpp"
#include "feed4org/error.hpp"
#include "feed4org/platform.hpp"

namespace feed4org {

int http_status(Errc code);

struct Session {
  std::string account;
  std::string token;
  std::int64_t issued_at = 0;
  std::int64_t expires_at = 0;
};

/// Bearer sessions plus per-account login secrets (stored as SHA-256).
/// Secrets are credentials, not ledger state; with a path they persist to a
/// JSON file next to the ledger.
class SessionStore {
 public:
  explicit SessionStore(std::int64_t ttl_ms,
                        std::optional<std::filesystem::path> credentials_path = std::nullopt);

  Session issue(const std::string& account, std::int64_t now);
  /// Unknown and expired tokens resolve to nothing.
  std::optional<Session> resolve(const std::string& token, std::int64_t now) const;

  /// New random secret for the account; replaces any previous one.
  std::string create_secret(const std::string& account);
  void set_secret(const std::string& account, const std::string& secret);
  bool check_secret(const std::string& account, const std::string& secret) const;

 private:
  void persist() const;

  std::int64_t ttl_ms_;
  std::optional<std::filesystem::path> credentials_path_;
  mutable std::mutex mutex_;
  std::map<std::string, Session> sessions_;
  std::map<std::string, std::string> secret_hashes_;
};

std::string random_token(std::size_t bytes = 32);

class Service {
 public:
  Service(Platform& platform, ServiceConfig config,
          std::function<std::int64_t()> clock = system_clock_ms);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket; port 0 picks a free port. Returns the port.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Call after bind().
  void run();
  void stop();
  void wait_until_ready() const;

  SessionStore& sessions();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace feed4org
