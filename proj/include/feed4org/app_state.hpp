#pragma once

// Application state derived from the ledger. `commit` is the only mutation
// path: live appends and replay both go through it, so a replayed log yields
// the same state as the live run that wrote it.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "feed4org/event_store.hpp"
#include "feed4org/feedback_model.hpp"
#include "feed4org/feedback_wall.hpp"
#include "feed4org/incentive_engine.hpp"
#include "feed4org/token_ledger.hpp"

namespace feed4org {

enum class View { question, statistics, open_feedback, about };
std::string_view to_string(View view);
View parse_view(std::string_view name);

struct ApplyResult {
  std::uint64_t id = 0;  // entity created or updated by the event, if any
  std::optional<RewardStatus> reward;
  std::int64_t tokens = 0;  // Context minted or burned by the event
};

class ApplicationState {
 public:
  /// Throws the domain error the event would raise; never mutates.
  void validate(const EventDraft& draft) const;
  /// Validates and applies. The event's seq must be the next expected one.
  ApplyResult commit(const LedgerEvent& event);

  std::uint64_t applied_events() const { return applied_; }

  const TokenLedger& tokens() const { return tokens_; }
  const FeedbackBook& feedback() const { return feedback_; }
  const IncentiveEngine& incentives() const { return incentives_; }
  const FeedbackWall& wall() const { return wall_; }
  bool allow_reanswer() const { return allow_reanswer_; }

  nlohmann::json to_json() const;
  static ApplicationState from_json(const nlohmann::json& doc);
  /// Canonical serialization and its SHA-256.
  std::string canonical() const;
  std::string digest() const;

 private:
  ApplyResult process(const std::string& actor, EventKind kind, const nlohmann::json& payload,
                      const LedgerEvent* event);

  std::uint64_t applied_ = 0;
  TokenLedger tokens_;
  FeedbackBook feedback_;
  IncentiveEngine incentives_;
  FeedbackWall wall_;
  bool allow_reanswer_ = true;
};

/// Rebuilds state from a verified log. Throws replay-divergence naming the
/// first event that does not apply.
ApplicationState replay(std::span<const LedgerEvent> log);

struct Snapshot {
  std::uint64_t covers = 0;  // number of events folded in (seq 0..covers-1)
  std::string last_hash;     // hash of event covers-1, empty when covers == 0
  ApplicationState state;
};

void write_snapshot(const std::filesystem::path& path, const ApplicationState& state,
                    const std::string& last_hash);
Snapshot read_snapshot(const std::filesystem::path& path);
/// Snapshot state advanced by the log suffix after it. Throws
/// replay-divergence if the snapshot does not belong to this log.
ApplicationState restore(const Snapshot& snapshot, std::span<const LedgerEvent> log);

}  // namespace feed4org
