#pragma once

// Dual-token economy. Money is pre-mined into the treasury at genesis and
// only ever transferred; Context is minted per contextualization and burned
// when spent on votes.
//
// Every mutating operation validates completely before touching state, so a
// rejected call leaves the ledger unchanged. The `check_*` members expose
// that validation on its own for callers composing several operations into
// one atomic step.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "feed4org/decimal.hpp"

namespace feed4org {

enum class TokenId { Money, Context };
enum class Role { user, treasury, admin };
enum class UserClass { user, unaware_user };

std::string_view to_string(TokenId id);
std::string_view to_string(Role role);
std::string_view to_string(UserClass user_class);
TokenId parse_token_id(std::string_view name);
Role parse_role(std::string_view name);
UserClass parse_user_class(std::string_view name);

struct PreMinedCapped {
  std::int64_t total = 0;
};
struct MintOnAction {};

struct Peg {
  std::string currency_code;
  Money2 rate_per_unit;
};

struct TokenDefinition {
  TokenId token_id{};
  std::variant<PreMinedCapped, MintOnAction> supply_policy;
  std::optional<Peg> peg;
};

/// Money: capped at `supply`, pegged at 0.20 CHF per unit.
TokenDefinition money_definition(std::int64_t supply);
TokenDefinition context_definition();

inline constexpr std::string_view kTreasury = "treasury";

struct AccountRecord {
  std::string address;
  Role role = Role::user;
  UserClass user_class = UserClass::user;
  std::uint64_t registered_seq = 0;
};

struct TokenBalance {
  std::int64_t money = 0;
  std::int64_t context = 0;

  std::int64_t of(TokenId id) const { return id == TokenId::Money ? money : context; }
  std::int64_t& of(TokenId id) { return id == TokenId::Money ? money : context; }
};

class TokenLedger {
 public:
  void check_register(const AccountRecord& account) const;
  void register_account(AccountRecord account);

  void check_genesis(std::int64_t money_supply) const;
  void genesis(std::int64_t money_supply);

  void check_transfer(TokenId token, const std::string& from, const std::string& to,
                      std::int64_t amount) const;
  void transfer(TokenId token, const std::string& from, const std::string& to,
                std::int64_t amount);

  void check_mint_context(const std::string& to, std::int64_t count) const;
  /// `seq` stamps when the tokens were earned (leaderboard tie-break).
  void mint_context(const std::string& to, std::int64_t count = 1, std::uint64_t seq = 0);

  void check_burn_context(const std::string& from, std::int64_t amount) const;
  void burn_context(const std::string& from, std::int64_t amount);

  /// Money balance at the peg rate; exact.
  Money2 redeemable_value(const std::string& address) const;

  bool initialized() const { return money_supply_.has_value(); }
  bool has_account(std::string_view address) const;
  const AccountRecord& account(const std::string& address) const;
  const std::map<std::string, AccountRecord, std::less<>>& accounts() const { return accounts_; }

  TokenBalance balance(const std::string& address) const;
  std::int64_t balance(const std::string& address, TokenId token) const {
    return balance(address).of(token);
  }

  std::int64_t money_supply() const { return money_supply_.value_or(0); }
  std::int64_t money_total() const;  // sum over all balances
  std::int64_t money_circulating() const;  // outside the treasury
  std::int64_t context_minted() const { return context_minted_; }
  std::int64_t context_burned() const { return context_burned_; }
  std::int64_t context_circulating() const { return context_minted_ - context_burned_; }

  std::int64_t context_earned(const std::string& address) const;
  std::optional<std::uint64_t> context_earned_seq(const std::string& address) const;

  nlohmann::json to_json() const;
  static TokenLedger from_json(const nlohmann::json& doc);

 private:
  void require_account(const std::string& address) const;

  std::optional<std::int64_t> money_supply_;
  std::map<std::string, AccountRecord, std::less<>> accounts_;
  std::map<std::string, TokenBalance, std::less<>> balances_;
  std::int64_t context_minted_ = 0;
  std::int64_t context_burned_ = 0;
  struct Earned {
    std::int64_t total = 0;
    std::uint64_t last_seq = 0;
  };
  std::map<std::string, Earned, std::less<>> earned_;
};

}  // namespace feed4org
