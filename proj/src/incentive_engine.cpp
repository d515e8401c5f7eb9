#include "feed4org/incentive_engine.hpp"

#include "feed4org/error.hpp"

namespace feed4org {

using Json = nlohmann::json;

IncentivePolicy IncentivePolicy::treatment() {
  return {std::string(kTreatment), true, 1, 1, 1, true};
}

IncentivePolicy IncentivePolicy::control() {
  return {std::string(kControl), false, 0, 0, 0, false};
}

IncentivePolicy normalize(IncentivePolicy policy) {
  require(!policy.cohort_id.empty(), Errc::invalid_value, "cohort id must not be empty");
  require(policy.money_per_answer >= 0 && policy.context_per_contextualization >= 0 &&
              policy.vote_cost_context >= 0,
          Errc::invalid_value, "policy amounts must be non-negative");
  if (!policy.incentives_enabled) {
    policy.money_per_answer = 0;
    policy.context_per_contextualization = 0;
  }
  return policy;
}

Json to_json(const IncentivePolicy& p) {
  return {{"cohort_id", p.cohort_id},
          {"incentives_enabled", p.incentives_enabled},
          {"money_per_answer", p.money_per_answer},
          {"context_per_contextualization", p.context_per_contextualization},
          {"vote_cost_context", p.vote_cost_context},
          {"show_tokens", p.show_tokens}};
}

IncentivePolicy policy_from_json(const Json& doc) {
  require(doc.is_object(), Errc::invalid_value, "policy must be an object");
  try {
    IncentivePolicy p;
    p.cohort_id = doc.at("cohort_id").get<std::string>();
    p.incentives_enabled = doc.value("incentives_enabled", true);
    p.money_per_answer = doc.value("money_per_answer", std::int64_t{p.incentives_enabled ? 1 : 0});
    p.context_per_contextualization =
        doc.value("context_per_contextualization", std::int64_t{p.incentives_enabled ? 1 : 0});
    p.vote_cost_context = doc.value("vote_cost_context", std::int64_t{p.incentives_enabled ? 1 : 0});
    p.show_tokens = doc.value("show_tokens", p.incentives_enabled);
    return p;
  } catch (const Json::exception& e) {
    fail(Errc::invalid_value, std::string("malformed policy: ") + e.what());
  }
}

IncentiveEngine::IncentiveEngine() : default_cohort_(kTreatment) {
  for (auto p : {IncentivePolicy::treatment(), IncentivePolicy::control()}) {
    policies_.emplace(p.cohort_id, p);
  }
}

void IncentiveEngine::set_policy(const IncentivePolicy& policy) {
  auto normalized = normalize(policy);
  policies_.insert_or_assign(normalized.cohort_id, std::move(normalized));
}

const IncentivePolicy& IncentiveEngine::policy(const std::string& cohort) const {
  auto it = policies_.find(cohort);
  require(it != policies_.end(), Errc::unknown_cohort, "unknown cohort " + cohort);
  return it->second;
}

bool IncentiveEngine::has_cohort(std::string_view cohort) const {
  return policies_.find(cohort) != policies_.end();
}

void IncentiveEngine::check_set_default_cohort(const std::string& cohort) const {
  policy(cohort);
}

void IncentiveEngine::set_default_cohort(const std::string& cohort) {
  check_set_default_cohort(cohort);
  default_cohort_ = cohort;
}

void IncentiveEngine::check_assign(const std::string& cohort) const { policy(cohort); }

void IncentiveEngine::assign(const std::string& account, const std::string& cohort) {
  check_assign(cohort);
  assignments_.insert_or_assign(account, cohort);
}

const std::string& IncentiveEngine::cohort_of(const std::string& account) const {
  auto it = assignments_.find(account);
  return it == assignments_.end() ? default_cohort_ : it->second;
}

const IncentivePolicy& IncentiveEngine::policy_for(const std::string& account) const {
  return policy(cohort_of(account));
}

std::int64_t IncentiveEngine::vote_cost(const TokenLedger& ledger,
                                        const std::string& account) const {
  require(ledger.has_account(account), Errc::unknown_account, "unknown account " + account);
  return policy_for(account).vote_cost_context;
}

RewardStatus IncentiveEngine::on_answer(TokenLedger& ledger, const std::string& account) const {
  const auto& p = policy_for(account);
  if (!p.incentives_enabled || p.money_per_answer == 0) return RewardStatus::not_eligible;
  const std::string treasury(kTreasury);
  if (!ledger.initialized() || ledger.balance(treasury, TokenId::Money) < p.money_per_answer) {
    return RewardStatus::treasury_exhausted;
  }
  ledger.transfer(TokenId::Money, treasury, account, p.money_per_answer);
  return RewardStatus::rewarded;
}

std::int64_t IncentiveEngine::on_contextualize(TokenLedger& ledger, const std::string& account,
                                               std::uint64_t seq) const {
  const auto& p = policy_for(account);
  if (!p.incentives_enabled || p.context_per_contextualization == 0) return 0;
  ledger.mint_context(account, p.context_per_contextualization, seq);
  return p.context_per_contextualization;
}

Json IncentiveEngine::to_json() const {
  Json policies = Json::array();
  for (const auto& [_, p] : policies_) policies.push_back(feed4org::to_json(p));
  return {{"policies", policies},
          {"assignments", assignments_},
          {"default_cohort", default_cohort_}};
}

IncentiveEngine IncentiveEngine::from_json(const Json& doc) {
  IncentiveEngine engine;
  engine.policies_.clear();
  for (const auto& p : doc.at("policies")) {
    auto policy = policy_from_json(p);
    engine.policies_.emplace(policy.cohort_id, policy);
  }
  for (const auto& [account, cohort] : doc.at("assignments").items()) {
    engine.assignments_.emplace(account, cohort.get<std::string>());
  }
  engine.default_cohort_ = doc.at("default_cohort").get<std::string>();
  return engine;
}

}  // namespace feed4org
