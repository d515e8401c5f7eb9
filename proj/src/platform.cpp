#include "feed4org/platform.hpp"

#include <random>

#include "feed4org/error.hpp"
#include "feed4org/sha256.hpp"

namespace feed4org {

bool valid_pseudonym(std::string_view pseudonym) {
  if (pseudonym.empty() || pseudonym.size() > 128) return false;
  for (unsigned char c : pseudonym) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '_' || c == ':' || c == '-';
    if (!ok) return false;
  }
  return true;
}

std::string random_address() {
  thread_local std::random_device device;
  std::array<std::uint8_t, 20> bytes{};
  for (auto& b : bytes) b = static_cast<std::uint8_t>(device() & 0xff);
  return "0x" + to_hex(bytes.data(), bytes.size());
}

Platform::Platform(std::unique_ptr<EventStore> store, PlatformOptions options)
    : store_(std::move(store)), options_(std::move(options)) {
  const auto log = store_->events();
  state_ = replay(log);
}

Platform::Platform(std::unique_ptr<EventStore> store, const Snapshot& snapshot,
                   PlatformOptions options)
    : store_(std::move(store)), options_(std::move(options)) {
  const auto log = store_->events();
  state_ = restore(snapshot, log);
}

std::unique_ptr<Platform> Platform::in_memory(StoreOptions store_options, PlatformOptions options) {
  return std::make_unique<Platform>(std::make_unique<EventStore>(std::move(store_options)),
                                    std::move(options));
}

Platform::Committed Platform::execute(EventDraft draft) {
  std::unique_lock lock(mutex_);
  return execute_locked(std::move(draft));
}

Platform::Committed Platform::execute_locked(EventDraft draft) {
  state_.validate(draft);
  LedgerEvent event = store_->append(std::move(draft));
  ApplyResult result = state_.commit(event);
  return {std::move(event), result};
}

void Platform::check(const EventDraft& draft) const {
  std::shared_lock lock(mutex_);
  state_.validate(draft);
}

void Platform::genesis(std::int64_t money_supply) {
  execute({std::string(kTreasury), EventKind::MintToken,
           {{"token", "Money"}, {"amount", money_supply}}});
}

std::string Platform::register_account(std::optional<std::string> pseudonym, Role role,
                                       UserClass user_class) {
  if (pseudonym) {
    require(valid_pseudonym(*pseudonym), Errc::invalid_value,
            "pseudonyms use 1-128 characters from [A-Za-z0-9._:-]");
  }
  Json payload = {{"role", to_string(role)}, {"user_class", to_string(user_class)}};
  if (pseudonym) return execute({*pseudonym, EventKind::Register, payload}).event.actor;
  // Generated addresses may collide in principle; retry a few times.
  for (int attempt = 0;; ++attempt) {
    try {
      return execute({options_.address_generator(), EventKind::Register, payload}).event.actor;
    } catch (const Error& e) {
      if (e.code() != Errc::pseudonym_taken || attempt >= 8) throw;
    }
  }
}

void Platform::transfer(TokenId token, const std::string& from, const std::string& to,
                        std::int64_t amount) {
  execute({from, EventKind::TransferToken,
           {{"token", to_string(token)}, {"to", to}, {"amount", amount}}});
}

void Platform::burn_context(const std::string& from, std::int64_t amount) {
  execute({from, EventKind::BurnToken, {{"token", "Context"}, {"amount", amount}}});
}

Money2 Platform::redeemable_value(const std::string& account) const {
  return read([&](const ApplicationState& s) { return s.tokens().redeemable_value(account); });
}

std::uint64_t Platform::create_question(const std::string& admin, const QuestionSpec& spec) {
  std::unique_lock lock(mutex_);
  Json payload = to_json(spec);
  payload["question_id"] = state_.feedback().next_question_id();
  EventDraft draft{admin, EventKind::CreateQuestion, std::move(payload)};
  return execute_locked(std::move(draft)).result.id;
}

void Platform::set_question_active(const std::string& admin, std::uint64_t question_id,
                                   bool active) {
  execute({admin, EventKind::ConfigChange,
           {{"op", "set_question_active"}, {"question_id", question_id}, {"active", active}}});
}

AnswerReceipt Platform::submit_answer(const std::string& account, std::uint64_t question_id,
                                      const AnswerBody& body) {
  std::unique_lock lock(mutex_);
  Json payload = to_json(body);
  payload["question_id"] = question_id;
  payload["answer_id"] = state_.feedback()
                             .find_answer(account, question_id)
                             .value_or(state_.feedback().next_answer_id());
  EventDraft draft{account, EventKind::Answer, std::move(payload)};
  auto result = execute_locked(std::move(draft)).result;
  return {result.id, result.reward.value_or(RewardStatus::not_eligible)};
}

ContextReceipt Platform::contextualize(const std::string& account, std::uint64_t answer_id,
                                       ContextType ctype, const ContextValue& value) {
  std::unique_lock lock(mutex_);
  Json payload = {{"answer_id", answer_id},
                  {"ctype", to_string(ctype)},
                  {"context_id", state_.feedback().next_context_id()}};
  if (value.rating) payload["rating"] = *value.rating;
  if (value.comment) payload["comment"] = *value.comment;
  EventDraft draft{account, EventKind::Contextualize, std::move(payload)};
  auto result = execute_locked(std::move(draft)).result;
  return {result.id, result.tokens};
}

void Platform::set_policy(const std::string& admin, const IncentivePolicy& policy) {
  execute({admin, EventKind::ConfigChange,
           {{"op", "set_policy"}, {"policy", to_json(normalize(policy))}}});
}

void Platform::assign_cohort(const std::string& admin, const std::string& account,
                             const std::string& cohort) {
  execute({admin, EventKind::ConfigChange,
           {{"op", "assign_cohort"}, {"account", account}, {"cohort", cohort}}});
}

void Platform::set_default_cohort(const std::string& admin, const std::string& cohort) {
  execute({admin, EventKind::ConfigChange, {{"op", "set_default_cohort"}, {"cohort", cohort}}});
}

void Platform::set_area_tags(const std::string& admin, const std::set<std::string>& tags) {
  execute({admin, EventKind::ConfigChange, {{"op", "set_area_tags"}, {"tags", tags}}});
}

void Platform::set_reanswer(const std::string& admin, bool allowed) {
  execute({admin, EventKind::ConfigChange, {{"op", "set_reanswer"}, {"allowed", allowed}}});
}

std::int64_t Platform::vote_cost(const std::string& account) const {
  return read([&](const ApplicationState& s) { return s.incentives().vote_cost(s.tokens(), account); });
}

std::uint64_t Platform::create_post(const std::string& account, const std::string& text,
                                    const std::set<std::string>& tags) {
  std::unique_lock lock(mutex_);
  EventDraft draft{account, EventKind::CreatePost,
                   {{"post_id", state_.wall().next_post_id()}, {"text", text}, {"tags", tags}}};
  return execute_locked(std::move(draft)).result.id;
}

WallPost Platform::cast_vote(const std::string& account, std::uint64_t post_id,
                             VoteDirection direction) {
  std::unique_lock lock(mutex_);
  require(state_.tokens().has_account(account), Errc::unknown_account, "unknown account " + account);
  const auto cost = state_.incentives().vote_cost(state_.tokens(), account);
  EventDraft draft{account, EventKind::VotePost,
                   {{"post_id", post_id}, {"direction", to_string(direction)}, {"cost_paid", cost}}};
  execute_locked(std::move(draft));
  return state_.wall().post(post_id);
}

std::uint64_t Platform::add_comment(const std::string& account, std::uint64_t post_id,
                                    const std::string& text) {
  std::unique_lock lock(mutex_);
  EventDraft draft{account, EventKind::CommentPost,
                   {{"comment_id", state_.wall().next_comment_id()},
                    {"post_id", post_id},
                    {"text", text}}};
  return execute_locked(std::move(draft)).result.id;
}

std::uint64_t Platform::send_direct_message(const std::string& from, const std::string& to,
                                            const std::string& text) {
  std::unique_lock lock(mutex_);
  EventDraft draft{from, EventKind::DirectMessage,
                   {{"message_id", state_.wall().next_message_id()}, {"to", to}, {"text", text}}};
  return execute_locked(std::move(draft)).result.id;
}

void Platform::navigate(const std::string& account, View view) {
  execute({account, EventKind::Navigate, {{"view", to_string(view)}}});
}

ApplicationState Platform::state() const {
  std::shared_lock lock(mutex_);
  return state_;
}

std::string Platform::state_digest() const {
  std::shared_lock lock(mutex_);
  return state_.digest();
}

VerificationReport Platform::verify() const {
  const auto log = store_->events();
  return verify_chain(std::span<const LedgerEvent>(log));
}

void Platform::snapshot(const std::filesystem::path& path) const {
  std::shared_lock lock(mutex_);
  const auto last = store_->back();
  write_snapshot(path, state_, last ? last->hash : "");
}

}  // namespace feed4org
