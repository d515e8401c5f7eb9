#include <gtest/gtest.h>

#include <csignal>
#include <fstream>
#include <sys/resource.h>

#include "feed4org/error.hpp"
#include "feed4org/event_store.hpp"
#include "feed4org/sha256.hpp"
#include "support/oracle_sha256.hpp"
#include "support/temp_dir.hpp"

using namespace feed4org;

namespace {

std::function<std::int64_t()> counting_clock(std::int64_t start = 1000) {
  auto now = std::make_shared<std::int64_t>(start);
  return [now] { return (*now)++; };
}

EventDraft draft(int i) {
  return {"acct-" + std::to_string(i % 3), EventKind::Navigate,
          Json{{"view", "about"}, {"n", i}}};
}

std::vector<std::string> serialized(const EventStore& store) {
  std::vector<std::string> lines;
  for (const auto& e : store.events()) lines.push_back(serialize_line(e));
  return lines;
}

}  // namespace

TEST(Sha256, MatchesReferenceVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(oracle::sha256_hex("abc"), sha256_hex("abc"));
}

TEST(Sha256, AgreesWithOracleAcrossBlockBoundaries) {
  std::string text;
  for (int length = 0; length < 300; ++length) {
    EXPECT_EQ(sha256_hex(text), oracle::sha256_hex(text)) << "length " << length;
    text.push_back(static_cast<char>('a' + length % 26));
  }
}

TEST(EventKinds, RoundTripNames) {
  for (int i = 0; i <= static_cast<int>(EventKind::ConfigChange); ++i) {
    const auto kind = static_cast<EventKind>(i);
    EXPECT_EQ(parse_event_kind(to_string(kind)), kind);
  }
  EXPECT_FALSE(parse_event_kind("Teleport").has_value());
}

TEST(CanonicalLine, FrozenFormat) {
  LedgerEvent e;
  e.seq = 0;
  e.timestamp = 1620028800000;
  e.actor = "treasury";
  e.kind = EventKind::MintToken;
  e.payload = Json{{"token", "Money"}, {"amount", 1000000}};
  e.prev_hash = kGenesisHash;
  const std::string body =
      R"({"seq":0,"timestamp":1620028800000,"actor":"treasury","kind":"MintToken",)"
      R"("payload":{"amount":1000000,"token":"Money"},"prev_hash":")" +
      kGenesisHash + R"("})";
  EXPECT_EQ(canonical_body(e), body);
  EXPECT_EQ(compute_hash(e), oracle::sha256_hex(body));
  EXPECT_EQ(compute_hash(e), "3c7d0ce1866d1d98f5fcc63e90be699063eb39c56428d3b75116551dab100d59");
  e.hash = compute_hash(e);
  EXPECT_EQ(serialize_line(e), body.substr(0, body.size() - 1) + R"(,"hash":")" + e.hash + "\"}");
}

TEST(CanonicalLine, NestedKeysSortedAndUnicodeKept) {
  LedgerEvent e;
  e.actor = "zoë";
  e.kind = EventKind::CreatePost;
  e.payload = Json{{"z", 1}, {"a", Json{{"y", true}, {"b", nullptr}}}, {"text", "grüezi \"du\""}};
  e.prev_hash = kGenesisHash;
  const auto body = canonical_body(e);
  EXPECT_NE(body.find(R"("payload":{"a":{"b":null,"y":true},"text":"grüezi \"du\"","z":1})"),
            std::string::npos)
      << body;
  EXPECT_NE(body.find(R"("actor":"zoë")"), std::string::npos);
}

TEST(ParseLine, RoundTripsAndRejectsNonCanonicalText) {
  EventStore store({counting_clock()});
  for (int i = 0; i < 5; ++i) store.append(draft(i));
  for (const auto& e : store.events()) {
    const auto line = serialize_line(e);
    EXPECT_EQ(parse_line(line), e);
  }
  const auto line = serialize_line(store.events()[2]);
  auto spaced = line;
  spaced.insert(1, " ");
  EXPECT_THROW(parse_line(spaced), Error);
  EXPECT_THROW(parse_line(line + " "), Error);
  EXPECT_THROW(parse_line("{}"), Error);
  EXPECT_THROW(parse_line("not json"), Error);
  EXPECT_THROW(parse_line(R"({"timestamp":0,)" + line.substr(1)), Error);
}

TEST(EventStore, ChainsHashesFromGenesis) {
  EventStore store({counting_clock()});
  for (int i = 0; i < 20; ++i) store.append(draft(i));
  const auto events = store.events();
  ASSERT_EQ(events.size(), 20u);
  EXPECT_EQ(events[0].prev_hash, kGenesisHash);
  for (std::size_t i = 0; i < events.size(); ++i) {
    EXPECT_EQ(events[i].seq, i);
    EXPECT_EQ(events[i].hash, oracle::sha256_hex(canonical_body(events[i])));
    if (i > 0) EXPECT_EQ(events[i].prev_hash, events[i - 1].hash);
  }
  EXPECT_TRUE(verify_chain(std::span<const LedgerEvent>(events)).ok);
}

TEST(EventStore, TimestampsNeverDecrease) {
  auto now = std::make_shared<std::int64_t>(5000);
  EventStore store({[now] { return *now -= 7; }});
  for (int i = 0; i < 10; ++i) store.append(draft(i));
  const auto events = store.events();
  for (std::size_t i = 1; i < events.size(); ++i) {
    EXPECT_GE(events[i].timestamp, events[i - 1].timestamp);
  }
}

TEST(EventStore, RejectsNonObjectPayload) {
  EventStore store;
  EXPECT_THROW(store.append({"a", EventKind::Navigate, Json::array()}), Error);
  EXPECT_EQ(store.size(), 0u);
}

TEST(VerifyChain, ReportsFirstBadSeqForEachTamperKind) {
  EventStore store({counting_clock()});
  for (int i = 0; i < 10; ++i) store.append(draft(i));

  auto payload_edit = store.events();
  payload_edit[4].payload["n"] = 99;
  auto report = verify_chain(std::span<const LedgerEvent>(payload_edit));
  EXPECT_FALSE(report.ok);
  EXPECT_EQ(report.first_bad_seq, 4u);

  auto rehashed = store.events();
  rehashed[6].actor = "mallory";
  rehashed[6].hash = compute_hash(rehashed[6]);
  report = verify_chain(std::span<const LedgerEvent>(rehashed));
  EXPECT_EQ(report.first_bad_seq, 7u);

  auto deleted = store.events();
  deleted.erase(deleted.begin() + 3);
  report = verify_chain(std::span<const LedgerEvent>(deleted));
  EXPECT_EQ(report.first_bad_seq, 3u);

  auto swapped = store.events();
  std::swap(swapped[1], swapped[2]);
  report = verify_chain(std::span<const LedgerEvent>(swapped));
  EXPECT_EQ(report.first_bad_seq, 1u);
}

TEST(VerifyChain, MalformedLineReportedAtItsPosition) {
  EventStore store({counting_clock()});
  for (int i = 0; i < 6; ++i) store.append(draft(i));
  auto lines = serialized(store);
  EXPECT_TRUE(verify_chain(std::span<const std::string>(lines)).ok);
  lines[5] = lines[5].substr(0, lines[5].size() / 2);
  const auto report = verify_chain(std::span<const std::string>(lines));
  EXPECT_FALSE(report.ok);
  EXPECT_EQ(report.first_bad_seq, 5u);
}

TEST(FileStore, PersistsAndReloads) {
  TempDir dir;
  const auto path = dir / "ledger.log";
  std::vector<LedgerEvent> written;
  {
    auto store = EventStore::open(path, {counting_clock(), SyncMode::fsync});
    for (int i = 0; i < 8; ++i) written.push_back(store->append(draft(i)));
  }
  EXPECT_TRUE(verify_file(path).ok);
  EXPECT_EQ(load_log(path), written);
  auto store = EventStore::open(path, {counting_clock(1)});
  EXPECT_EQ(store->size(), 8u);
  const auto next = store->append(draft(8));
  EXPECT_EQ(next.seq, 8u);
  EXPECT_EQ(next.prev_hash, written.back().hash);
  EXPECT_GE(next.timestamp, written.back().timestamp);
}

TEST(FileStore, SecondWriterIsRefused) {
  TempDir dir;
  auto first = EventStore::open(dir / "ledger.log");
  try {
    EventStore::open(dir / "ledger.log");
    FAIL() << "second open succeeded";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::store_locked);
  }
  first.reset();
  EXPECT_NO_THROW(EventStore::open(dir / "ledger.log"));
}

TEST(FileStore, RefusesTamperedLog) {
  TempDir dir;
  const auto path = dir / "ledger.log";
  {
    auto store = EventStore::open(path, {counting_clock(), SyncMode::flush});
    for (int i = 0; i < 5; ++i) store->append(draft(i));
  }
  auto lines = read_lines(path);
  lines[2][lines[2].find("\"n\":2") + 4] = '7';
  {
    std::ofstream out(path, std::ios::trunc);
    for (const auto& l : lines) out << l << '\n';
  }
  const auto report = verify_file(path);
  EXPECT_EQ(report.first_bad_seq, 2u);
  try {
    EventStore::open(path);
    FAIL() << "tampered log opened";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::malformed_record);
  }
}

TEST(FileStore, WriteFailureCommitsNothing) {
  TempDir dir;
  const auto path = dir / "ledger.log";
  auto store = EventStore::open(path, {counting_clock(), SyncMode::flush});
  for (int i = 0; i < 3; ++i) store->append(draft(i));
  const auto size_before = std::filesystem::file_size(path);

  rlimit saved{};
  ASSERT_EQ(getrlimit(RLIMIT_FSIZE, &saved), 0);
  auto previous = std::signal(SIGXFSZ, SIG_IGN);
  rlimit tight = saved;
  tight.rlim_cur = size_before + 10;
  ASSERT_EQ(setrlimit(RLIMIT_FSIZE, &tight), 0);
  Errc code{};
  try {
    store->append(draft(3));
  } catch (const Error& e) {
    code = e.code();
  }
  setrlimit(RLIMIT_FSIZE, &saved);
  std::signal(SIGXFSZ, previous);

  EXPECT_EQ(code, Errc::storage_unavailable);
  EXPECT_EQ(store->size(), 3u);
  EXPECT_EQ(std::filesystem::file_size(path), size_before);
  EXPECT_TRUE(verify_file(path).ok);
  const auto recovered = store->append(draft(3));
  EXPECT_EQ(recovered.seq, 3u);
  EXPECT_TRUE(verify_file(path).ok);
}

TEST(FileStore, MissingDirectoryIsStorageUnavailable) {
  try {
    EventStore::open("/nonexistent-dir/for/ledger.log");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::storage_unavailable);
  }
}
