#pragma once

// Binds feedback actions to token flows, per cohort. Reward failures never
// reject the feedback action that triggered them.

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

#include "feed4org/feedback_model.hpp"
#include "feed4org/token_ledger.hpp"

namespace feed4org {

inline constexpr std::string_view kTreatment = "treatment";
inline constexpr std::string_view kControl = "control";

struct IncentivePolicy {
  std::string cohort_id;
  bool incentives_enabled = true;
  std::int64_t money_per_answer = 1;
  std::int64_t context_per_contextualization = 1;
  std::int64_t vote_cost_context = 1;
  /// Whether clients of this cohort display token counters.
  bool show_tokens = true;

  static IncentivePolicy treatment();
  static IncentivePolicy control();

  bool operator==(const IncentivePolicy&) const = default;
};

/// Rejects negative amounts and empty cohort ids (invalid-value); a disabled
/// policy has its reward amounts forced to zero.
IncentivePolicy normalize(IncentivePolicy policy);

nlohmann::json to_json(const IncentivePolicy& policy);
IncentivePolicy policy_from_json(const nlohmann::json& doc);

class IncentiveEngine {
 public:
  /// Starts with the treatment and control policies; new accounts join the
  /// treatment cohort.
  IncentiveEngine();

  void set_policy(const IncentivePolicy& policy);
  const IncentivePolicy& policy(const std::string& cohort) const;
  bool has_cohort(std::string_view cohort) const;
  const std::map<std::string, IncentivePolicy, std::less<>>& policies() const { return policies_; }

  void check_set_default_cohort(const std::string& cohort) const;
  void set_default_cohort(const std::string& cohort);
  const std::string& default_cohort() const { return default_cohort_; }

  void check_assign(const std::string& cohort) const;
  void assign(const std::string& account, const std::string& cohort);
  /// Cohort of the account, or the default cohort for unassigned accounts.
  const std::string& cohort_of(const std::string& account) const;
  const IncentivePolicy& policy_for(const std::string& account) const;

  /// Context spent per vote. Throws unknown-account.
  std::int64_t vote_cost(const TokenLedger& ledger, const std::string& account) const;

  /// Pays the answer reward from the treasury. Call once per first answer of
  /// (account, question).
  RewardStatus on_answer(TokenLedger& ledger, const std::string& account) const;
  /// Mints the contextualization reward; returns the amount minted.
  std::int64_t on_contextualize(TokenLedger& ledger, const std::string& account,
                                std::uint64_t seq) const;

  nlohmann::json to_json() const;
  static IncentiveEngine from_json(const nlohmann::json& doc);

 private:
  std::map<std::string, IncentivePolicy, std::less<>> policies_;
  std::map<std::string, std::string, std::less<>> assignments_;
  std::string default_cohort_;
};

}  // namespace feed4org
