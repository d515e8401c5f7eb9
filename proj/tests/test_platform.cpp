#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <thread>

#include "feed4org/platform.hpp"
#include "support/expect.hpp"
#include "support/temp_dir.hpp"
#include "support/workload.hpp"

using namespace feed4org;

namespace {

std::function<std::int64_t()> step_clock() {
  auto now = std::make_shared<std::int64_t>(1'620'028'800'000);
  return [now] { return *now += 1000; };
}

std::unique_ptr<Platform> fresh() { return Platform::in_memory({step_clock()}); }

}  // namespace

TEST(Pseudonyms, CharacterSetAndLength) {
  EXPECT_TRUE(valid_pseudonym("reader-42"));
  EXPECT_TRUE(valid_pseudonym("a.b:c_d"));
  EXPECT_TRUE(valid_pseudonym(std::string(128, 'x')));
  EXPECT_FALSE(valid_pseudonym(""));
  EXPECT_FALSE(valid_pseudonym(std::string(129, 'x')));
  EXPECT_FALSE(valid_pseudonym("jane doe"));
  EXPECT_FALSE(valid_pseudonym("jane@example.org"));
  const auto address = random_address();
  EXPECT_EQ(address.size(), 42u);
  EXPECT_EQ(address.substr(0, 2), "0x");
  EXPECT_TRUE(valid_pseudonym(address));
}

TEST(Platform, EachCallAppendsOneEventAndRejectionsAppendNone) {
  auto p = fresh();
  p->genesis(100);
  const auto admin = p->register_account("admin", Role::admin);
  const auto alice = p->register_account("alice");
  const auto q = p->create_question(admin, workload::sample_spec(QuestionType::likert));
  const auto before = p->event_count();
  p->submit_answer(alice, q, AnswerBody{{}, 1, {}});
  EXPECT_EQ(p->event_count(), before + 1);

  const auto digest = p->state_digest();
  const auto count = p->event_count();
  EXPECT_EQ(error_of([&] { p->submit_answer(alice, q, AnswerBody{{0}, {}, {}}); }), Errc::shape_mismatch);
  EXPECT_EQ(error_of([&] { p->submit_answer("ghost", q, AnswerBody{{}, 1, {}}); }), Errc::unknown_account);
  EXPECT_EQ(error_of([&] { p->create_question(alice, workload::sample_spec(QuestionType::likert)); }),
            Errc::forbidden);
  EXPECT_EQ(error_of([&] { p->transfer(TokenId::Money, alice, admin, 5); }), Errc::insufficient_balance);
  EXPECT_EQ(error_of([&] { p->register_account("alice"); }), Errc::pseudonym_taken);
  EXPECT_EQ(error_of([&] { p->register_account("has space"); }), Errc::invalid_value);
  EXPECT_EQ(error_of([&] { p->genesis(5); }), Errc::already_initialized);
  EXPECT_EQ(p->event_count(), count);
  EXPECT_EQ(p->state_digest(), digest);
}

TEST(Platform, GeneratedAddressesRetryOnCollision) {
  auto calls = std::make_shared<int>(0);
  PlatformOptions options;
  options.address_generator = [calls] { return (*calls)++ < 2 ? std::string("0xsame") : "0xother"; };
  auto p = Platform::in_memory({step_clock()}, options);
  p->genesis(10);
  EXPECT_EQ(p->register_account(), "0xsame");
  EXPECT_EQ(p->register_account(), "0xother");
  EXPECT_EQ(p->event_count(), 3u);
}

TEST(Platform, AnswerRewardsAndReanswerRules) {
  auto p = fresh();
  p->genesis(1000);
  const auto admin = p->register_account("admin", Role::admin);
  const auto t = p->register_account("t");
  const auto c = p->register_account("c");
  p->assign_cohort(admin, c, std::string(kControl));
  const auto q = p->create_question(admin, workload::sample_spec(QuestionType::choice_single));

  auto r = p->submit_answer(t, q, AnswerBody{{0}, {}, {}});
  EXPECT_EQ(r.reward, RewardStatus::rewarded);
  r = p->submit_answer(t, q, AnswerBody{{1}, {}, {}});
  EXPECT_EQ(r.reward, RewardStatus::repeat_answer);
  EXPECT_EQ(r.answer_id, 1u);
  EXPECT_EQ(p->submit_answer(c, q, AnswerBody{{0}, {}, {}}).reward, RewardStatus::not_eligible);
  EXPECT_EQ(p->read([&](const ApplicationState& s) { return s.tokens().balance(t).money; }), 1);
  EXPECT_EQ(p->redeemable_value(t).to_string(), "0.20");

  p->set_reanswer(admin, false);
  EXPECT_EQ(error_of([&] { p->submit_answer(t, q, AnswerBody{{2}, {}, {}}); }), Errc::duplicate_answer);
  p->set_question_active(admin, q, false);
  EXPECT_EQ(error_of([&] { p->submit_answer(admin, q, AnswerBody{{2}, {}, {}}); }),
            Errc::question_inactive);
}

TEST(Platform, TreasuryCannotParticipate) {
  auto p = fresh();
  p->genesis(10);
  const auto admin = p->register_account("admin", Role::admin);
  const auto q = p->create_question(admin, workload::sample_spec(QuestionType::likert));
  EXPECT_EQ(error_of([&] { p->submit_answer(std::string(kTreasury), q, AnswerBody{{}, 1, {}}); }),
            Errc::forbidden);
}

TEST(Platform, ContextualizeMintsAndVoteBurns) {
  auto p = fresh();
  p->genesis(1000);
  const auto admin = p->register_account("admin", Role::admin);
  const auto alice = p->register_account("alice");
  const auto bob = p->register_account("bob");
  p->set_area_tags(admin, {"events"});
  const auto q = p->create_question(admin, workload::sample_spec(QuestionType::likert));
  const auto a = p->submit_answer(alice, q, AnswerBody{{}, 3, {}}).answer_id;
  EXPECT_EQ(p->contextualize(alice, a, ContextType::Importance, {4, {}}).minted, 1);
  EXPECT_EQ(error_of([&] { p->contextualize(bob, a, ContextType::Satisfaction, {1, {}}); }),
            Errc::foreign_answer);

  const auto post = p->create_post(bob, "Open on Sundays", {"events"});
  EXPECT_EQ(error_of([&] { p->cast_vote(bob, post, VoteDirection::up); }), Errc::self_vote);
  EXPECT_EQ(p->vote_cost(alice), 1);
  const auto voted = p->cast_vote(alice, post, VoteDirection::up);
  EXPECT_EQ(voted.net_score(), 1);
  EXPECT_EQ(error_of([&] { p->cast_vote(alice, post, VoteDirection::down); }), Errc::duplicate_vote);
  const auto carol = p->register_account("carol");
  EXPECT_EQ(error_of([&] { p->cast_vote(carol, post, VoteDirection::up); }), Errc::insufficient_tokens);
  p->read([&](const ApplicationState& s) {
    EXPECT_EQ(s.tokens().balance(alice).context, 0);
    EXPECT_EQ(s.tokens().context_burned(), 1);
    return 0;
  });
}

TEST(Platform, ControlCohortVotesFree) {
  auto p = fresh();
  p->genesis(1000);
  const auto admin = p->register_account("admin", Role::admin);
  const auto alice = p->register_account("alice");
  const auto bob = p->register_account("bob");
  p->assign_cohort(admin, bob, std::string(kControl));
  const auto post = p->create_post(alice, "More plugs", {});
  EXPECT_EQ(p->cast_vote(bob, post, VoteDirection::up).up_votes, 1);
  EXPECT_EQ(p->read([](const ApplicationState& s) { return s.tokens().context_burned(); }), 0);
}

TEST(Platform, DirectMessagesAndNavigation) {
  auto p = fresh();
  p->genesis(10);
  const auto alice = p->register_account("alice");
  const auto bob = p->register_account("bob");
  EXPECT_EQ(p->send_direct_message(alice, bob, "hi"), 1u);
  EXPECT_EQ(error_of([&] { p->send_direct_message(alice, "ghost", "hi"); }), Errc::unknown_account);
  p->navigate(alice, View::statistics);
  const auto events = p->events();
  EXPECT_EQ(events.back().kind, EventKind::Navigate);
  EXPECT_EQ(events.back().payload.at("view"), "statistics");
  EXPECT_EQ(error_of([] { parse_view("settings"); }), Errc::invalid_value);
}

TEST(PlatformProperty, WorkloadMatchesIndependentModelAndReplays) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto p = fresh();
    workload::Options options;
    options.mixed_cohorts = seed % 2 == 0;
    auto tally = workload::setup(*p, options);
    workload::Rng rng(seed);
    workload::run(*p, tally, rng, 400, options);

    const auto state = p->state();
    for (const auto& [account, model] : tally.balances) {
      EXPECT_EQ(state.tokens().balance(account).money, model.money) << account << " seed " << seed;
      EXPECT_EQ(state.tokens().balance(account).context, model.context) << account << " seed " << seed;
    }
    EXPECT_EQ(state.tokens().money_total(), options.supply);
    EXPECT_EQ(state.tokens().context_minted(), tally.context_minted);
    EXPECT_EQ(state.tokens().context_burned(), tally.vote_burned + tally.explicit_burned);

    const auto log = p->events();
    EXPECT_EQ(replay(log).digest(), p->state_digest());
    EXPECT_TRUE(p->verify().ok);
  }
}

TEST(Platform, ReplayRejectsForgedButChainedEvents) {
  auto p = fresh();
  p->genesis(10);
  p->register_account("alice");
  auto log = p->events();
  EventStore forged({step_clock()});
  forged.append({log[0].actor, log[0].kind, log[0].payload});
  forged.append({"alice", EventKind::TransferToken, {{"token", "Money"}, {"to", "treasury"}, {"amount", 5}}});
  const auto events = forged.events();
  EXPECT_TRUE(verify_chain(std::span<const LedgerEvent>(events)).ok);
  EXPECT_EQ(error_of([&] { replay(events); }), Errc::replay_divergence);
}

TEST(Platform, FileBackedReopenAndSnapshotRestore) {
  TempDir dir;
  const auto log_path = dir / "ledger.log";
  const auto snap_path = dir / "snapshot.json";
  std::string digest;
  {
    auto p = std::make_unique<Platform>(EventStore::open(log_path, {step_clock(), SyncMode::flush}));
    workload::Options options;
    auto tally = workload::setup(*p, options);
    workload::Rng rng(11);
    workload::run(*p, tally, rng, 150, options);
    p->snapshot(snap_path);
    workload::run(*p, tally, rng, 50, options);
    digest = p->state_digest();
  }
  {
    Platform replayed(EventStore::open(log_path, {step_clock(), SyncMode::flush}));
    EXPECT_EQ(replayed.state_digest(), digest);
  }
  const auto snapshot = read_snapshot(snap_path);
  Platform restored(EventStore::open(log_path, {step_clock(), SyncMode::flush}), snapshot);
  EXPECT_EQ(restored.state_digest(), digest);
  EXPECT_LT(snapshot.covers, restored.event_count());

  const auto foreign_log = Platform::in_memory({step_clock()});
  foreign_log->genesis(5);
  const auto foreign = foreign_log->events();
  EXPECT_EQ(error_of([&] { restore(snapshot, foreign); }), Errc::replay_divergence);
}

TEST(Platform, SnapshotDigestMismatchIsMalformed) {
  TempDir dir;
  auto p = fresh();
  p->genesis(10);
  p->snapshot(dir / "s.json");
  auto doc = nlohmann::json::parse(std::ifstream(dir / "s.json"));
  doc["state_digest"] = std::string(64, 'f');
  std::ofstream(dir / "s.json") << doc.dump();
  EXPECT_EQ(error_of([&] { read_snapshot(dir / "s.json"); }), Errc::malformed_record);
}

TEST(PlatformConcurrency, DuplicateVoteRaceHasOneWinner) {
  for (int round = 0; round < 20; ++round) {
    auto p = fresh();
    p->genesis(100);
    const auto author = p->register_account("author");
    const auto voter = p->register_account("voter");
    const auto admin = p->register_account("admin", Role::admin);
    const auto q = p->create_question(admin, workload::sample_spec(QuestionType::likert));
    const auto a = p->submit_answer(voter, q, AnswerBody{{}, 1, {}}).answer_id;
    for (auto ctype : kAllContextTypes) {
      p->contextualize(voter, a, ctype,
                       ctype == ContextType::Comment ? ContextValue{{}, "x"} : ContextValue{1, {}});
    }
    const auto post = p->create_post(author, "contested", {});
    std::atomic<int> successes = 0;
    std::atomic<int> duplicates = 0;
    std::atomic<bool> go = false;
    std::vector<std::thread> threads;
    for (int i = 0; i < 50; ++i) {
      threads.emplace_back([&] {
        while (!go) std::this_thread::yield();
        const auto err = error_of([&] { p->cast_vote(voter, post, VoteDirection::up); });
        if (!err) ++successes;
        if (err == Errc::duplicate_vote) ++duplicates;
      });
    }
    go = true;
    for (auto& t : threads) t.join();
    EXPECT_EQ(successes, 1);
    EXPECT_EQ(duplicates, 49);
    p->read([&](const ApplicationState& s) {
      EXPECT_EQ(s.tokens().context_burned(), 1);
      EXPECT_EQ(s.tokens().balance(voter).context, 2);
      EXPECT_EQ(s.wall().post(post).up_votes, 1);
      return 0;
    });
  }
}
