#include <gtest/gtest.h>

#include <map>
#include <random>

#include "feed4org/decimal.hpp"
#include "feed4org/token_ledger.hpp"
#include "support/expect.hpp"

using namespace feed4org;

namespace {

const std::string kTreasuryAddr(kTreasury);

TokenLedger funded(std::int64_t supply, std::initializer_list<const char*> users) {
  TokenLedger ledger;
  ledger.genesis(supply);
  for (const char* u : users) ledger.register_account({u});
  return ledger;
}

}  // namespace

TEST(Money2, ParsesAndFormatsExactly) {
  EXPECT_EQ(Money2::parse("37.80").minor_units(), 3780);
  EXPECT_EQ(Money2::parse("0.2").minor_units(), 20);
  EXPECT_EQ(Money2::parse("12").minor_units(), 1200);
  EXPECT_EQ(Money2::parse("-3.05").minor_units(), -305);
  EXPECT_EQ(Money2::from_minor(3780).to_string(), "37.80");
  EXPECT_EQ(Money2::from_minor(0).to_string(), "0.00");
  EXPECT_EQ(Money2::from_minor(-5).to_string(), "-0.05");
  EXPECT_EQ((Money2::parse("0.20") * 189).to_string(), "37.80");
  EXPECT_EQ(error_of([] { Money2::parse("0.201"); }), Errc::invalid_value);
  EXPECT_EQ(error_of([] { Money2::parse("1.2.3"); }), Errc::invalid_value);
  EXPECT_EQ(error_of([] { Money2::parse(""); }), Errc::invalid_value);
  EXPECT_EQ(error_of([] { Money2::parse("abc"); }), Errc::invalid_value);
}

TEST(Money2, FormatParseRoundTrip) {
  for (std::int64_t minor = -1005; minor <= 1005; ++minor) {
    const auto m = Money2::from_minor(minor);
    EXPECT_EQ(Money2::parse(m.to_string()), m);
  }
}

TEST(Permille, RoundsHalfUp) {
  EXPECT_EQ(ratio_permille(494, 1704), 290);
  EXPECT_EQ(ratio_permille(1, 8), 125);
  EXPECT_EQ(ratio_permille(1, 2000), 1);  // 0.0005 rounds up
  EXPECT_EQ(ratio_permille(1, 2001), 0);
  EXPECT_EQ(ratio_permille(5, 0), 0);
  EXPECT_EQ(format_permille(290), "0.290");
  EXPECT_EQ(format_permille(1000), "1.000");
  EXPECT_EQ(format_permille(7), "0.007");
  for (std::int64_t d = 1; d < 300; ++d) {
    for (std::int64_t n = 0; n <= d; ++n) {
      const auto expected = static_cast<std::int64_t>(std::floor(1000.0L * n / d + 0.5L));
      ASSERT_EQ(ratio_permille(n, d), expected) << n << "/" << d;
    }
  }
}

TEST(TokenDefinitions, MoneyIsCappedAndPegged) {
  const auto money = money_definition(1'000'000);
  ASSERT_TRUE(std::holds_alternative<PreMinedCapped>(money.supply_policy));
  EXPECT_EQ(std::get<PreMinedCapped>(money.supply_policy).total, 1'000'000);
  ASSERT_TRUE(money.peg.has_value());
  EXPECT_EQ(money.peg->currency_code, "CHF");
  EXPECT_EQ(money.peg->rate_per_unit.to_string(), "0.20");
  const auto context = context_definition();
  EXPECT_TRUE(std::holds_alternative<MintOnAction>(context.supply_policy));
  EXPECT_FALSE(context.peg.has_value());
}

TEST(TokenLedger, GenesisOnceWithPositiveSupply) {
  TokenLedger ledger;
  EXPECT_EQ(error_of([&] { ledger.genesis(0); }), Errc::invalid_supply);
  EXPECT_EQ(error_of([&] { ledger.genesis(-3); }), Errc::invalid_supply);
  ledger.genesis(1000);
  EXPECT_EQ(ledger.balance(kTreasuryAddr, TokenId::Money), 1000);
  EXPECT_EQ(error_of([&] { ledger.genesis(1000); }), Errc::already_initialized);
  EXPECT_EQ(ledger.money_total(), 1000);
}

TEST(TokenLedger, RegistrationRules) {
  auto ledger = funded(10, {"alice"});
  EXPECT_EQ(error_of([&] { ledger.register_account({"alice"}); }), Errc::pseudonym_taken);
  EXPECT_EQ(error_of([&] { ledger.register_account({""}); }), Errc::invalid_value);
  EXPECT_EQ(error_of([&] { ledger.register_account({"treasury"}); }), Errc::pseudonym_taken);
  TokenLedger fresh;
  EXPECT_EQ(error_of([&] { fresh.register_account({"treasury"}); }), Errc::invalid_value);
  EXPECT_EQ(error_of([&] { ledger.register_account({"x", Role::treasury}); }), Errc::invalid_value);
  ledger.register_account({"bob", Role::user, UserClass::unaware_user});
  EXPECT_EQ(ledger.account("bob").user_class, UserClass::unaware_user);
  EXPECT_EQ(ledger.balance("bob").money, 0);
}

TEST(TokenLedger, TransferRules) {
  auto ledger = funded(100, {"alice", "bob"});
  ledger.transfer(TokenId::Money, kTreasuryAddr, "alice", 10);
  EXPECT_EQ(error_of([&] { ledger.transfer(TokenId::Money, "alice", "bob", 0); }),
            Errc::non_positive_amount);
  EXPECT_EQ(error_of([&] { ledger.transfer(TokenId::Money, "alice", "bob", -1); }),
            Errc::non_positive_amount);
  EXPECT_EQ(error_of([&] { ledger.transfer(TokenId::Money, "alice", "alice", 1); }),
            Errc::self_transfer);
  EXPECT_EQ(error_of([&] { ledger.transfer(TokenId::Money, "alice", "bob", 11); }),
            Errc::insufficient_balance);
  EXPECT_EQ(error_of([&] { ledger.transfer(TokenId::Money, "alice", "carol", 1); }),
            Errc::unknown_account);
  EXPECT_EQ(error_of([&] { ledger.transfer(TokenId::Context, "alice", "bob", 1); }),
            Errc::insufficient_balance);
  ledger.transfer(TokenId::Money, "alice", "bob", 4);
  EXPECT_EQ(ledger.balance("alice").money, 6);
  EXPECT_EQ(ledger.balance("bob").money, 4);
  EXPECT_EQ(ledger.money_total(), 100);
  EXPECT_EQ(ledger.money_circulating(), 10);
  EXPECT_EQ(error_of([] { parse_token_id("Gold"); }), Errc::unknown_token);
}

TEST(TokenLedger, ContextMintBurnAndEarnedTracking) {
  auto ledger = funded(100, {"alice", "bob"});
  ledger.mint_context("alice", 1, 5);
  ledger.mint_context("alice", 2, 9);
  ledger.mint_context("bob", 1, 7);
  EXPECT_EQ(ledger.context_minted(), 4);
  EXPECT_EQ(ledger.context_earned("alice"), 3);
  EXPECT_EQ(ledger.context_earned_seq("alice"), 9u);
  ledger.transfer(TokenId::Context, "alice", "bob", 1);
  EXPECT_EQ(ledger.context_earned("bob"), 1);
  ledger.burn_context("bob", 2);
  EXPECT_EQ(ledger.context_burned(), 2);
  EXPECT_EQ(ledger.context_circulating(), 2);
  EXPECT_EQ(error_of([&] { ledger.burn_context("bob", 1); }), Errc::insufficient_balance);
  EXPECT_EQ(error_of([&] { ledger.burn_context("alice", 0); }), Errc::non_positive_amount);
  EXPECT_EQ(error_of([&] { ledger.mint_context("alice", 0); }), Errc::non_positive_amount);
  EXPECT_EQ(error_of([&] { ledger.mint_context("nobody", 1); }), Errc::unknown_account);
}

TEST(TokenLedger, RedeemableValueIsExact) {
  auto ledger = funded(1000, {"alice"});
  ledger.transfer(TokenId::Money, kTreasuryAddr, "alice", 189);
  EXPECT_EQ(ledger.redeemable_value("alice").to_string(), "37.80");
  EXPECT_EQ(ledger.redeemable_value("alice"), Money2::parse("0.20") * 189);
}

TEST(TokenLedger, JsonRoundTrip) {
  auto ledger = funded(500, {"alice", "bob"});
  ledger.transfer(TokenId::Money, kTreasuryAddr, "alice", 30);
  ledger.mint_context("bob", 3, 11);
  ledger.burn_context("bob", 1);
  const auto copy = TokenLedger::from_json(ledger.to_json());
  EXPECT_EQ(copy.to_json(), ledger.to_json());
  EXPECT_EQ(copy.context_earned_seq("bob"), 11u);
}

TEST(TokenLedgerProperty, RandomTransfersConserveMoneyAndMatchModel) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    const std::int64_t supply = 10'000;
    std::vector<std::string> users = {"treasury", "a", "b", "c", "d", "e"};
    TokenLedger ledger;
    ledger.genesis(supply);
    std::map<std::string, std::int64_t> model = {{"treasury", supply}};
    for (std::size_t i = 1; i < users.size(); ++i) ledger.register_account({users[i]});
    for (int step = 0; step < 500; ++step) {
      const auto& from = users[rng() % users.size()];
      const auto& to = users[rng() % users.size()];
      const auto amount = static_cast<std::int64_t>(rng() % 50) - 5;
      const bool valid = from != to && amount > 0 && model[from] >= amount;
      const auto err = error_of([&] { ledger.transfer(TokenId::Money, from, to, amount); });
      ASSERT_EQ(!err.has_value(), valid) << "seed " << seed << " step " << step;
      if (valid) {
        model[from] -= amount;
        model[to] += amount;
      }
      ASSERT_EQ(ledger.money_total(), supply);
    }
    for (const auto& u : users) EXPECT_EQ(ledger.balance(u).money, model[u]);
  }
}
