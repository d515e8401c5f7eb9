#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace feed4org {

/// Error codes surfaced by every module. The kebab-case names returned by
/// `to_string` are part of the wire contract (HTTP `{code, message}` bodies
/// and CLI diagnostics).
enum class Errc {
  // event store
  storage_unavailable,
  malformed_record,
  replay_divergence,
  store_locked,
  // token ledger
  already_initialized,
  not_initialized,
  invalid_supply,
  insufficient_balance,
  unknown_account,
  non_positive_amount,
  self_transfer,
  unknown_token,
  // feedback model
  invalid_spec,
  shape_mismatch,
  unknown_question,
  question_inactive,
  duplicate_answer,
  unknown_answer,
  duplicate_contextualization,
  foreign_answer,
  invalid_value,
  // incentives
  unknown_cohort,
  // wall
  empty_text,
  unknown_tag,
  insufficient_tokens,
  duplicate_vote,
  self_vote,
  unknown_post,
  access_denied,
  // identity / api
  pseudonym_taken,
  unauthorized,
  forbidden,
  not_found,
  bad_request,
  // cli
  config_not_found,
  invalid_command,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::storage_unavailable: return "storage-unavailable";
    case Errc::malformed_record: return "malformed-record";
    case Errc::replay_divergence: return "replay-divergence";
    case Errc::store_locked: return "store-locked";
    case Errc::already_initialized: return "already-initialized";
    case Errc::not_initialized: return "not-initialized";
    case Errc::invalid_supply: return "invalid-supply";
    case Errc::insufficient_balance: return "insufficient-balance";
    case Errc::unknown_account: return "unknown-account";
    case Errc::non_positive_amount: return "non-positive-amount";
    case Errc::self_transfer: return "self-transfer";
    case Errc::unknown_token: return "unknown-token";
    case Errc::invalid_spec: return "invalid-spec";
    case Errc::shape_mismatch: return "shape-mismatch";
    case Errc::unknown_question: return "unknown-question";
    case Errc::question_inactive: return "question-inactive";
    case Errc::duplicate_answer: return "duplicate-answer";
    case Errc::unknown_answer: return "unknown-answer";
    case Errc::duplicate_contextualization: return "duplicate-contextualization";
    case Errc::foreign_answer: return "foreign-answer";
    case Errc::invalid_value: return "invalid-value";
    case Errc::unknown_cohort: return "unknown-cohort";
    case Errc::empty_text: return "empty-text";
    case Errc::unknown_tag: return "unknown-tag";
    case Errc::insufficient_tokens: return "insufficient-tokens";
    case Errc::duplicate_vote: return "duplicate-vote";
    case Errc::self_vote: return "self-vote";
    case Errc::unknown_post: return "unknown-post";
    case Errc::access_denied: return "access-denied";
    case Errc::pseudonym_taken: return "pseudonym-taken";
    case Errc::unauthorized: return "unauthorized";
    case Errc::forbidden: return "forbidden";
    case Errc::not_found: return "not-found";
    case Errc::bad_request: return "bad-request";
    case Errc::config_not_found: return "config-not-found";
    case Errc::invalid_command: return "invalid-command";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, Errc code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace feed4org
