#pragma once

// Append-only, hash-chained event log. Every state mutation of the platform
// is one LedgerEvent; application state is derived by replaying the log.
//
// Line format (one event per line, no insignificant whitespace):
//   {"seq":N,"timestamp":MS,"actor":"..","kind":"..","payload":{..},"prev_hash":"..","hash":".."}
// `hash` is SHA-256 over the same text without the trailing `,"hash":".."`
// member. Payload object keys are sorted lexicographically (byte order).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace feed4org {

using Json = nlohmann::json;

enum class EventKind {
  Register,
  CreateQuestion,
  Answer,
  Contextualize,
  MintToken,
  TransferToken,
  BurnToken,
  CreatePost,
  VotePost,
  CommentPost,
  DirectMessage,
  Navigate,
  ConfigChange,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

inline const std::string kGenesisHash(64, '0');

struct EventDraft {
  std::string actor;
  EventKind kind{};
  Json payload = Json::object();
};

struct LedgerEvent {
  std::uint64_t seq = 0;
  std::int64_t timestamp = 0;  // UTC milliseconds
  std::string actor;
  EventKind kind{};
  Json payload = Json::object();
  std::string prev_hash;
  std::string hash;

  bool operator==(const LedgerEvent&) const = default;
};

/// Canonical text of (seq, timestamp, actor, kind, payload, prev_hash); the
/// hash input.
std::string canonical_body(const LedgerEvent& event);
std::string compute_hash(const LedgerEvent& event);
/// Full persisted line without the trailing newline.
std::string serialize_line(const LedgerEvent& event);
/// Strict parse: the line must be byte-identical to the canonical
/// serialization of what it decodes to. Throws Error(malformed_record).
LedgerEvent parse_line(std::string_view line);

struct VerificationReport {
  bool ok = true;
  std::optional<std::uint64_t> first_bad_seq;
  std::string reason;
};

VerificationReport verify_chain(std::span<const LedgerEvent> log);
/// Verifies raw log lines; an unparseable line is reported at its position.
VerificationReport verify_chain(std::span<const std::string> lines);
VerificationReport verify_file(const std::filesystem::path& path);

std::vector<std::string> read_lines(const std::filesystem::path& path);
std::vector<LedgerEvent> load_log(const std::filesystem::path& path);

std::int64_t system_clock_ms();

enum class SyncMode {
  flush,  // write(2) per append; durable against process crash only
  fsync,  // fdatasync(2) before append returns
};

struct StoreOptions {
  std::function<std::int64_t()> clock = system_clock_ms;
  SyncMode sync = SyncMode::fsync;
};

/// Single-writer event log. Appends are serialized; readers see committed
/// prefixes only. A file-backed store holds an exclusive advisory lock on
/// `<log>.lock` for its lifetime so a second writer process is refused.
class EventStore {
 public:
  /// Volatile store (tests, dry runs).
  explicit EventStore(StoreOptions options = {});
  ~EventStore();

  EventStore(const EventStore&) = delete;
  EventStore& operator=(const EventStore&) = delete;

  /// Opens (creating if absent) a log file for writing. Existing content is
  /// loaded and chain-verified. Throws store_locked if another writer holds
  /// the lock, malformed_record if the existing log fails verification.
  static std::unique_ptr<EventStore> open(const std::filesystem::path& path,
                                          StoreOptions options = {});

  /// Seals and persists the draft. Throws storage_unavailable on I/O
  /// failure, in which case nothing is committed.
  LedgerEvent append(EventDraft draft);

  std::size_t size() const;
  std::vector<LedgerEvent> events() const;
  std::vector<LedgerEvent> prefix(std::size_t count) const;
  std::optional<LedgerEvent> back() const;

  /// Calls fn for each committed event while holding a read lock.
  void for_each(const std::function<void(const LedgerEvent&)>& fn) const;

  void sync();
  const std::optional<std::filesystem::path>& path() const { return path_; }

 private:
  struct FileHandle;

  StoreOptions options_;
  std::optional<std::filesystem::path> path_;
  std::unique_ptr<FileHandle> file_;
  mutable std::shared_mutex mutex_;
  std::mutex write_mutex_;
  std::vector<LedgerEvent> events_;
};

}  // namespace feed4org
