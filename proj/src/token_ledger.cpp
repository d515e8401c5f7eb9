#include "feed4org/token_ledger.hpp"

#include "feed4org/error.hpp"

namespace feed4org {

using Json = nlohmann::json;

std::string_view to_string(TokenId id) { return id == TokenId::Money ? "Money" : "Context"; }

std::string_view to_string(Role role) {
  switch (role) {
    case Role::user: return "user";
    case Role::treasury: return "treasury";
    case Role::admin: return "admin";
  }
  return "user";
}

std::string_view to_string(UserClass user_class) {
  return user_class == UserClass::user ? "user" : "unaware-user";
}

TokenId parse_token_id(std::string_view name) {
  if (name == "Money") return TokenId::Money;
  if (name == "Context") return TokenId::Context;
  fail(Errc::unknown_token, "unknown token " + std::string(name));
}

Role parse_role(std::string_view name) {
  if (name == "user") return Role::user;
  if (name == "treasury") return Role::treasury;
  if (name == "admin") return Role::admin;
  fail(Errc::invalid_value, "unknown role " + std::string(name));
}

UserClass parse_user_class(std::string_view name) {
  if (name == "user") return UserClass::user;
  if (name == "unaware-user") return UserClass::unaware_user;
  fail(Errc::invalid_value, "unknown user class " + std::string(name));
}

TokenDefinition money_definition(std::int64_t supply) {
  return {TokenId::Money, PreMinedCapped{supply}, Peg{"CHF", Money2::parse("0.20")}};
}

TokenDefinition context_definition() { return {TokenId::Context, MintOnAction{}, std::nullopt}; }

void TokenLedger::require_account(const std::string& address) const {
  require(accounts_.contains(address), Errc::unknown_account, "unknown account " + address);
}

void TokenLedger::check_register(const AccountRecord& account) const {
  require(!account.address.empty(), Errc::invalid_value, "address must not be empty");
  require(!accounts_.contains(account.address), Errc::pseudonym_taken,
          "address already registered: " + account.address);
  require(account.role != Role::treasury && account.address != kTreasury, Errc::invalid_value,
          "the treasury is created by genesis only");
}

void TokenLedger::register_account(AccountRecord account) {
  check_register(account);
  balances_[account.address];
  const std::string address = account.address;
  accounts_.emplace(address, std::move(account));
}

void TokenLedger::check_genesis(std::int64_t money_supply) const {
  require(!initialized(), Errc::already_initialized, "genesis already performed");
  require(money_supply > 0, Errc::invalid_supply, "money supply must be positive");
  require(!accounts_.contains(kTreasury), Errc::already_initialized, "treasury already exists");
}

void TokenLedger::genesis(std::int64_t money_supply) {
  check_genesis(money_supply);
  const std::string treasury(kTreasury);
  accounts_.emplace(treasury, AccountRecord{treasury, Role::treasury, UserClass::user, 0});
  balances_[treasury].money = money_supply;
  money_supply_ = money_supply;
}

void TokenLedger::check_transfer(TokenId token, const std::string& from, const std::string& to,
                                 std::int64_t amount) const {
  require(amount > 0, Errc::non_positive_amount, "transfer amount must be positive");
  require_account(from);
  require_account(to);
  require(from != to, Errc::self_transfer, "cannot transfer to the same account");
  require(balance(from, token) >= amount, Errc::insufficient_balance,
          from + " holds " + std::to_string(balance(from, token)) + " " +
              std::string(to_string(token)) + ", needs " + std::to_string(amount));
}

void TokenLedger::transfer(TokenId token, const std::string& from, const std::string& to,
                           std::int64_t amount) {
  check_transfer(token, from, to, amount);
  balances_.find(from)->second.of(token) -= amount;
  balances_.find(to)->second.of(token) += amount;
}

void TokenLedger::check_mint_context(const std::string& to, std::int64_t count) const {
  require(count > 0, Errc::non_positive_amount, "mint count must be positive");
  require_account(to);
}

void TokenLedger::mint_context(const std::string& to, std::int64_t count, std::uint64_t seq) {
  check_mint_context(to, count);
  balances_.find(to)->second.context += count;
  context_minted_ += count;
  auto& earned = earned_[to];
  earned.total += count;
  earned.last_seq = seq;
}

void TokenLedger::check_burn_context(const std::string& from, std::int64_t amount) const {
  require(amount > 0, Errc::non_positive_amount, "burn amount must be positive");
  require_account(from);
  require(balance(from, TokenId::Context) >= amount, Errc::insufficient_balance,
          from + " holds " + std::to_string(balance(from, TokenId::Context)) +
              " Context, needs " + std::to_string(amount));
}

void TokenLedger::burn_context(const std::string& from, std::int64_t amount) {
  check_burn_context(from, amount);
  balances_.find(from)->second.context -= amount;
  context_burned_ += amount;
}

Money2 TokenLedger::redeemable_value(const std::string& address) const {
  require_account(address);
  static const Peg peg = *money_definition(1).peg;
  return peg.rate_per_unit * balance(address, TokenId::Money);
}

bool TokenLedger::has_account(std::string_view address) const {
  return accounts_.find(address) != accounts_.end();
}

const AccountRecord& TokenLedger::account(const std::string& address) const {
  auto it = accounts_.find(address);
  require(it != accounts_.end(), Errc::unknown_account, "unknown account " + address);
  return it->second;
}

TokenBalance TokenLedger::balance(const std::string& address) const {
  auto it = balances_.find(address);
  return it == balances_.end() ? TokenBalance{} : it->second;
}

std::int64_t TokenLedger::money_total() const {
  std::int64_t sum = 0;
  for (const auto& [_, b] : balances_) sum += b.money;
  return sum;
}

std::int64_t TokenLedger::money_circulating() const {
  return money_total() - balance(std::string(kTreasury), TokenId::Money);
}

std::int64_t TokenLedger::context_earned(const std::string& address) const {
  auto it = earned_.find(address);
  return it == earned_.end() ? 0 : it->second.total;
}

std::optional<std::uint64_t> TokenLedger::context_earned_seq(const std::string& address) const {
  auto it = earned_.find(address);
  if (it == earned_.end()) return std::nullopt;
  return it->second.last_seq;
}

Json TokenLedger::to_json() const {
  Json accounts = Json::object();
  for (const auto& [address, a] : accounts_) {
    const auto b = balance(address);
    Json entry = {{"role", to_string(a.role)},
                  {"user_class", to_string(a.user_class)},
                  {"registered_seq", a.registered_seq},
                  {"money", b.money},
                  {"context", b.context}};
    if (auto it = earned_.find(address); it != earned_.end()) {
      entry["context_earned"] = it->second.total;
      entry["context_earned_seq"] = it->second.last_seq;
    }
    accounts[address] = std::move(entry);
  }
  Json doc = {{"accounts", std::move(accounts)},
              {"context_minted", context_minted_},
              {"context_burned", context_burned_}};
  doc["money_supply"] = money_supply_ ? Json(*money_supply_) : Json(nullptr);
  return doc;
}

TokenLedger TokenLedger::from_json(const Json& doc) {
  TokenLedger ledger;
  if (!doc.at("money_supply").is_null()) ledger.money_supply_ = doc.at("money_supply").get<std::int64_t>();
  ledger.context_minted_ = doc.at("context_minted").get<std::int64_t>();
  ledger.context_burned_ = doc.at("context_burned").get<std::int64_t>();
  for (const auto& [address, entry] : doc.at("accounts").items()) {
    ledger.accounts_.emplace(address, AccountRecord{address,
                                                    parse_role(entry.at("role").get<std::string>()),
                                                    parse_user_class(entry.at("user_class").get<std::string>()),
                                                    entry.at("registered_seq").get<std::uint64_t>()});
    ledger.balances_[address] = {entry.at("money").get<std::int64_t>(),
                                 entry.at("context").get<std::int64_t>()};
    if (entry.contains("context_earned")) {
      ledger.earned_[address] = {entry.at("context_earned").get<std::int64_t>(),
                                 entry.at("context_earned_seq").get<std::uint64_t>()};
    }
  }
  return ledger;
}

}  // namespace feed4org
