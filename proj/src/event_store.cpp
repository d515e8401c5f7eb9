#include "feed4org/event_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>

#include "feed4org/error.hpp"
#include "feed4org/sha256.hpp"

namespace feed4org {
namespace {

constexpr std::array<std::string_view, 13> kKindNames = {
    "Register",   "CreateQuestion", "Answer",     "Contextualize", "MintToken",
    "TransferToken", "BurnToken",   "CreatePost", "VotePost",      "CommentPost",
    "DirectMessage", "Navigate",    "ConfigChange",
};

std::string dump_strict(const Json& value) {
  return value.dump(-1, ' ', false, Json::error_handler_t::strict);
}

bool is_hex64(const std::string& s) {
  return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

std::string errno_text() { return std::strerror(errno); }

}  // namespace

std::string_view to_string(EventKind kind) {
  return kKindNames.at(static_cast<std::size_t>(kind));
}

std::optional<EventKind> parse_event_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

std::string canonical_body(const LedgerEvent& event) {
  std::string out;
  out.reserve(192);
  out += "{\"seq\":";
  out += std::to_string(event.seq);
  out += ",\"timestamp\":";
  out += std::to_string(event.timestamp);
  out += ",\"actor\":";
  out += dump_strict(Json(event.actor));
  out += ",\"kind\":\"";
  out += to_string(event.kind);
  out += "\",\"payload\":";
  out += dump_strict(event.payload);
  out += ",\"prev_hash\":\"";
  out += event.prev_hash;
  out += "\"}";
  return out;
}

std::string compute_hash(const LedgerEvent& event) { return sha256_hex(canonical_body(event)); }

std::string serialize_line(const LedgerEvent& event) {
  std::string body = canonical_body(event);
  body.pop_back();
  body += ",\"hash\":\"";
  body += event.hash;
  body += "\"}";
  return body;
}

LedgerEvent parse_line(std::string_view line) {
  Json doc;
  try {
    doc = Json::parse(line);
  } catch (const Json::exception& e) {
    fail(Errc::malformed_record, std::string("unparseable record: ") + e.what());
  }
  require(doc.is_object() && doc.size() == 7, Errc::malformed_record, "record is not a 7-field object");
  const auto field = [&](const char* name) -> const Json& {
    auto it = doc.find(name);
    require(it != doc.end(), Errc::malformed_record, std::string("missing field ") + name);
    return *it;
  };
  LedgerEvent event;
  const Json& seq = field("seq");
  const Json& ts = field("timestamp");
  const Json& actor = field("actor");
  const Json& kind = field("kind");
  const Json& payload = field("payload");
  const Json& prev = field("prev_hash");
  const Json& hash = field("hash");
  require(seq.is_number_unsigned(), Errc::malformed_record, "seq must be a non-negative integer");
  require(ts.is_number_integer(), Errc::malformed_record, "timestamp must be an integer");
  require(actor.is_string() && kind.is_string() && prev.is_string() && hash.is_string(),
          Errc::malformed_record, "string field has wrong type");
  require(payload.is_object(), Errc::malformed_record, "payload must be an object");
  auto parsed_kind = parse_event_kind(kind.get<std::string>());
  require(parsed_kind.has_value(), Errc::malformed_record, "unknown kind " + kind.get<std::string>());
  event.seq = seq.get<std::uint64_t>();
  event.timestamp = ts.get<std::int64_t>();
  event.actor = actor.get<std::string>();
  event.kind = *parsed_kind;
  event.payload = payload;
  event.prev_hash = prev.get<std::string>();
  event.hash = hash.get<std::string>();
  require(is_hex64(event.prev_hash) && is_hex64(event.hash), Errc::malformed_record,
          "hash fields must be 64 lowercase hex characters");
  std::string canonical;
  try {
    canonical = serialize_line(event);
  } catch (const Json::exception& e) {
    fail(Errc::malformed_record, std::string("unserializable record: ") + e.what());
  }
  require(canonical == line, Errc::malformed_record, "record is not in canonical form");
  return event;
}

VerificationReport verify_chain(std::span<const LedgerEvent> log) {
  std::string_view expected_prev = kGenesisHash;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const LedgerEvent& e = log[i];
    if (e.seq != i) return {false, i, "seq gap"};
    if (e.prev_hash != expected_prev) return {false, i, "prev_hash does not link"};
    std::string recomputed;
    try {
      recomputed = compute_hash(e);
    } catch (const Json::exception&) {
      return {false, i, "payload not serializable"};
    }
    if (recomputed != e.hash) return {false, i, "hash mismatch"};
    expected_prev = e.hash;
  }
  return {};
}

VerificationReport verify_chain(std::span<const std::string> lines) {
  std::vector<LedgerEvent> events;
  events.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      events.push_back(parse_line(lines[i]));
    } catch (const Error& e) {
      // Anything before a malformed line may itself be broken; report the
      // lowest violation.
      auto prefix = verify_chain(std::span<const LedgerEvent>(events));
      if (!prefix.ok) return prefix;
      return {false, i, e.what()};
    }
  }
  return verify_chain(std::span<const LedgerEvent>(events));
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), Errc::storage_unavailable, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    const std::size_t nl = content.find('\n', start);
    if (nl == std::string::npos) {
      lines.push_back(content.substr(start));
      break;
    }
    lines.push_back(content.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

VerificationReport verify_file(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  return verify_chain(std::span<const std::string>(lines));
}

std::vector<LedgerEvent> load_log(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  auto report = verify_chain(std::span<const std::string>(lines));
  require(report.ok, Errc::malformed_record,
          "ledger verification failed at seq " +
              std::to_string(report.first_bad_seq.value_or(0)) + ": " + report.reason);
  std::vector<LedgerEvent> events;
  events.reserve(lines.size());
  for (const auto& line : lines) events.push_back(parse_line(line));
  return events;
}

std::int64_t system_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

struct EventStore::FileHandle {
  int fd = -1;
  int lock_fd = -1;
  off_t size = 0;

  ~FileHandle() {
    if (fd >= 0) ::close(fd);
    if (lock_fd >= 0) ::close(lock_fd);  // releases the flock
  }
};

EventStore::EventStore(StoreOptions options) : options_(std::move(options)) {}

EventStore::~EventStore() = default;

std::unique_ptr<EventStore> EventStore::open(const std::filesystem::path& path,
                                             StoreOptions options) {
  auto store = std::make_unique<EventStore>(std::move(options));
  auto handle = std::make_unique<FileHandle>();

  const std::string lock_path = path.string() + ".lock";
  handle->lock_fd = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  require(handle->lock_fd >= 0, Errc::storage_unavailable,
          "cannot open " + lock_path + ": " + errno_text());
  if (::flock(handle->lock_fd, LOCK_EX | LOCK_NB) != 0) {
    fail(Errc::store_locked, "ledger " + path.string() + " is held by another writer");
  }

  handle->fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  require(handle->fd >= 0, Errc::storage_unavailable,
          "cannot open " + path.string() + ": " + errno_text());

  const auto file_size = std::filesystem::file_size(path);
  if (file_size > 0) store->events_ = load_log(path);
  handle->size = static_cast<off_t>(file_size);

  store->path_ = path;
  store->file_ = std::move(handle);
  return store;
}

LedgerEvent EventStore::append(EventDraft draft) {
  std::lock_guard writer(write_mutex_);

  LedgerEvent event;
  event.seq = events_.size();
  event.timestamp = options_.clock();
  if (!events_.empty()) {
    event.timestamp = std::max(event.timestamp, events_.back().timestamp);
    event.prev_hash = events_.back().hash;
  } else {
    event.prev_hash = kGenesisHash;
  }
  event.actor = std::move(draft.actor);
  event.kind = draft.kind;
  event.payload = std::move(draft.payload);
  require(event.payload.is_object(), Errc::bad_request, "payload must be an object");
  std::string line;
  try {
    event.hash = compute_hash(event);
    line = serialize_line(event);
  } catch (const Json::exception& e) {
    fail(Errc::bad_request, std::string("payload not serializable: ") + e.what());
  }
  line.push_back('\n');

  if (file_) {
    std::size_t written = 0;
    while (written < line.size()) {
      const ssize_t n = ::write(file_->fd, line.data() + written, line.size() - written);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        const std::string why = errno_text();
        // Drop any partial record so the file keeps ending at a boundary.
        if (::ftruncate(file_->fd, file_->size) != 0) {
          fail(Errc::storage_unavailable, "append failed (" + why + ") and truncate failed");
        }
        fail(Errc::storage_unavailable, "append failed: " + why);
      }
      written += static_cast<std::size_t>(n);
    }
    if (options_.sync == SyncMode::fsync && ::fdatasync(file_->fd) != 0) {
      const std::string why = errno_text();
      if (::ftruncate(file_->fd, file_->size) != 0) {
        fail(Errc::storage_unavailable, "fsync failed (" + why + ") and truncate failed");
      }
      fail(Errc::storage_unavailable, "fsync failed: " + why);
    }
    file_->size += static_cast<off_t>(line.size());
  }

  std::unique_lock readers(mutex_);
  events_.push_back(event);
  return event;
}

std::size_t EventStore::size() const {
  std::shared_lock lock(mutex_);
  return events_.size();
}

std::vector<LedgerEvent> EventStore::events() const {
  std::shared_lock lock(mutex_);
  return events_;
}

std::vector<LedgerEvent> EventStore::prefix(std::size_t count) const {
  std::shared_lock lock(mutex_);
  count = std::min(count, events_.size());
  return {events_.begin(), events_.begin() + static_cast<std::ptrdiff_t>(count)};
}

std::optional<LedgerEvent> EventStore::back() const {
  std::shared_lock lock(mutex_);
  if (events_.empty()) return std::nullopt;
  return events_.back();
}

void EventStore::for_each(const std::function<void(const LedgerEvent&)>& fn) const {
  std::shared_lock lock(mutex_);
  for (const auto& e : events_) fn(e);
}

void EventStore::sync() {
  std::lock_guard writer(write_mutex_);
  if (file_ && ::fdatasync(file_->fd) != 0) {
    fail(Errc::storage_unavailable, "fsync failed: " + errno_text());
  }
}

}  // namespace feed4org
