#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>

#include "feed4org/app_state.hpp"
#include "feed4org/event_store.hpp"

namespace feed4org {

/// Pseudonyms are opaque: 1-128 characters from [A-Za-z0-9._:-].
bool valid_pseudonym(std::string_view pseudonym);

/// "0x" followed by 40 random lowercase hex digits.
std::string random_address();

struct PlatformOptions {
  std::function<std::string()> address_generator = random_address;
};

struct AnswerReceipt {
  std::uint64_t answer_id = 0;
  RewardStatus reward = RewardStatus::not_eligible;
};

struct ContextReceipt {
  std::uint64_t context_id = 0;
  std::int64_t minted = 0;
};

/// The one mutation path shared by the HTTP service, the admin CLI and the
/// load generator. Each call validates against current state, appends exactly
/// one ledger event and applies it, all under a single writer lock; a
/// rejected call appends nothing.
class Platform {
 public:
  /// Takes over the store and replays whatever it already holds.
  explicit Platform(std::unique_ptr<EventStore> store, PlatformOptions options = {});
  /// Same, but starting from a snapshot covering a prefix of the store.
  Platform(std::unique_ptr<EventStore> store, const Snapshot& snapshot,
           PlatformOptions options = {});

  static std::unique_ptr<Platform> in_memory(StoreOptions store_options = {},
                                             PlatformOptions options = {});

  struct Committed {
    LedgerEvent event;
    ApplyResult result;
  };
  Committed execute(EventDraft draft);
  /// Dry run of `execute`.
  void check(const EventDraft& draft) const;

  void genesis(std::int64_t money_supply);
  std::string register_account(std::optional<std::string> pseudonym = std::nullopt,
                               Role role = Role::user, UserClass user_class = UserClass::user);
  void transfer(TokenId token, const std::string& from, const std::string& to,
                std::int64_t amount);
  void burn_context(const std::string& from, std::int64_t amount);
  Money2 redeemable_value(const std::string& account) const;

  std::uint64_t create_question(const std::string& admin, const QuestionSpec& spec);
  void set_question_active(const std::string& admin, std::uint64_t question_id, bool active);
  AnswerReceipt submit_answer(const std::string& account, std::uint64_t question_id,
                              const AnswerBody& body);
  ContextReceipt contextualize(const std::string& account, std::uint64_t answer_id,
                               ContextType ctype, const ContextValue& value);

  void set_policy(const std::string& admin, const IncentivePolicy& policy);
  void assign_cohort(const std::string& admin, const std::string& account,
                     const std::string& cohort);
  void set_default_cohort(const std::string& admin, const std::string& cohort);
  void set_area_tags(const std::string& admin, const std::set<std::string>& tags);
  void set_reanswer(const std::string& admin, bool allowed);
  std::int64_t vote_cost(const std::string& account) const;

  std::uint64_t create_post(const std::string& account, const std::string& text,
                            const std::set<std::string>& tags);
  WallPost cast_vote(const std::string& account, std::uint64_t post_id, VoteDirection direction);
  std::uint64_t add_comment(const std::string& account, std::uint64_t post_id,
                            const std::string& text);
  std::uint64_t send_direct_message(const std::string& from, const std::string& to,
                                    const std::string& text);
  void navigate(const std::string& account, View view);

  /// Runs `fn(const ApplicationState&)` under a read lock. `fn` must return
  /// by value; references into the state do not outlive the lock.
  template <typename Fn>
  auto read(Fn&& fn) const {
    std::shared_lock lock(mutex_);
    return fn(static_cast<const ApplicationState&>(state_));
  }

  ApplicationState state() const;
  std::string state_digest() const;
  std::vector<LedgerEvent> events() const { return store_->events(); }
  std::size_t event_count() const { return store_->size(); }
  VerificationReport verify() const;
  /// Writes the current state plus the seq it covers.
  void snapshot(const std::filesystem::path& path) const;
  EventStore& store() { return *store_; }

 private:
  Committed execute_locked(EventDraft draft);

  std::unique_ptr<EventStore> store_;
  PlatformOptions options_;
  mutable std::shared_mutex mutex_;
  ApplicationState state_;
};

}  // namespace feed4org
