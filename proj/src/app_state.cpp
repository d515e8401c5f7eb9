#include "feed4org/app_state.hpp"

#include <fstream>
#include <sstream>

#include "feed4org/error.hpp"
#include "feed4org/sha256.hpp"

namespace feed4org {
namespace {

template <typename T>
T field(const Json& payload, const char* key) {
  auto it = payload.find(key);
  require(it != payload.end(), Errc::bad_request, std::string("payload lacks ") + key);
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    fail(Errc::bad_request, std::string("payload field ") + key + " has the wrong type");
  }
}

template <typename T>
std::optional<T> optional_field(const Json& payload, const char* key) {
  auto it = payload.find(key);
  if (it == payload.end() || it->is_null()) return std::nullopt;
  return field<T>(payload, key);
}

void expect_id(std::uint64_t given, std::uint64_t expected, const char* what) {
  require(given == expected, Errc::invalid_value,
          std::string(what) + " id " + std::to_string(given) + " out of sequence (expected " +
              std::to_string(expected) + ")");
}

}  // namespace

std::string_view to_string(View view) {
  switch (view) {
    case View::question: return "question";
    case View::statistics: return "statistics";
    case View::open_feedback: return "open_feedback";
    case View::about: return "about";
  }
  return "question";
}

View parse_view(std::string_view name) {
  for (auto v : {View::question, View::statistics, View::open_feedback, View::about}) {
    if (to_string(v) == name) return v;
  }
  fail(Errc::invalid_value, "unknown view " + std::string(name));
}

void ApplicationState::validate(const EventDraft& draft) const {
  // process() with no event only runs the checks.
  const_cast<ApplicationState*>(this)->process(draft.actor, draft.kind, draft.payload, nullptr);
}

ApplyResult ApplicationState::commit(const LedgerEvent& event) {
  require(event.seq == applied_, Errc::replay_divergence,
          "event seq " + std::to_string(event.seq) + " applied out of order");
  auto result = process(event.actor, event.kind, event.payload, &event);
  ++applied_;
  return result;
}

ApplyResult ApplicationState::process(const std::string& actor, EventKind kind, const Json& p,
                                      const LedgerEvent* event) {
  require(p.is_object(), Errc::bad_request, "payload must be an object");
  const bool apply = event != nullptr;
  const std::int64_t now = apply ? event->timestamp : 0;
  const std::uint64_t seq = apply ? event->seq : 0;

  if (kind != EventKind::Register && kind != EventKind::MintToken) {
    require(tokens_.has_account(actor), Errc::unknown_account, "unknown account " + actor);
  }
  const auto require_admin = [&] {
    require(tokens_.account(actor).role == Role::admin, Errc::forbidden,
            actor + " is not an administrator");
  };
  const auto require_participant = [&] {
    require(tokens_.account(actor).role != Role::treasury, Errc::forbidden,
            "the treasury cannot take part in feedback");
  };

  ApplyResult result;
  switch (kind) {
    case EventKind::Register: {
      AccountRecord record{actor, parse_role(field<std::string>(p, "role")),
                           parse_user_class(field<std::string>(p, "user_class")), seq};
      tokens_.check_register(record);
      if (!apply) return result;
      tokens_.register_account(record);
      incentives_.assign(actor, incentives_.default_cohort());
      return result;
    }
    case EventKind::MintToken: {
      require(actor == kTreasury, Errc::forbidden, "only the treasury mints");
      require(parse_token_id(field<std::string>(p, "token")) == TokenId::Money,
              Errc::invalid_value, "Context is minted by contextualization only");
      const auto amount = field<std::int64_t>(p, "amount");
      tokens_.check_genesis(amount);
      if (!apply) return result;
      tokens_.genesis(amount);
      return result;
    }
    case EventKind::TransferToken: {
      const auto token = parse_token_id(field<std::string>(p, "token"));
      const auto to = field<std::string>(p, "to");
      const auto amount = field<std::int64_t>(p, "amount");
      tokens_.check_transfer(token, actor, to, amount);
      if (!apply) return result;
      tokens_.transfer(token, actor, to, amount);
      return result;
    }
    case EventKind::BurnToken: {
      require(parse_token_id(field<std::string>(p, "token")) == TokenId::Context,
              Errc::invalid_value, "Money is never burned");
      const auto amount = field<std::int64_t>(p, "amount");
      tokens_.check_burn_context(actor, amount);
      if (!apply) return result;
      tokens_.burn_context(actor, amount);
      result.tokens = amount;
      return result;
    }
    case EventKind::CreateQuestion: {
      require_admin();
      expect_id(field<std::uint64_t>(p, "question_id"), feedback_.next_question_id(), "question");
      const auto spec = question_spec_from_json(p);
      feedback_.check_create_question(spec);
      if (!apply) return result;
      result.id = feedback_.create_question(spec, now).question_id;
      return result;
    }
    case EventKind::Answer: {
      require_participant();
      const auto question_id = field<std::uint64_t>(p, "question_id");
      auto body = feedback_.check_answer(actor, question_id, answer_body_from_json(p),
                                         allow_reanswer_);
      const auto existing = feedback_.find_answer(actor, question_id);
      expect_id(field<std::uint64_t>(p, "answer_id"),
                existing.value_or(feedback_.next_answer_id()), "answer");
      if (!apply) return result;
      Answer& answer = feedback_.record_answer(actor, question_id, std::move(body), now);
      result.id = answer.answer_id;
      if (existing) {
        result.reward = RewardStatus::repeat_answer;
      } else {
        answer.reward = incentives_.on_answer(tokens_, actor);
        result.reward = answer.reward;
      }
      return result;
    }
    case EventKind::Contextualize: {
      require_participant();
      expect_id(field<std::uint64_t>(p, "context_id"), feedback_.next_context_id(),
                "contextualization");
      const auto answer_id = field<std::uint64_t>(p, "answer_id");
      const auto ctype = parse_context_type(field<std::string>(p, "ctype"));
      ContextValue value{optional_field<std::int64_t>(p, "rating"),
                         optional_field<std::string>(p, "comment")};
      feedback_.check_contextualize(actor, answer_id, ctype, value);
      if (!apply) return result;
      result.id =
          feedback_.record_contextualization(answer_id, ctype, std::move(value), now).context_id;
      result.tokens = incentives_.on_contextualize(tokens_, actor, seq);
      return result;
    }
    case EventKind::CreatePost: {
      require_participant();
      expect_id(field<std::uint64_t>(p, "post_id"), wall_.next_post_id(), "post");
      auto text = field<std::string>(p, "text");
      auto tags = field<std::set<std::string>>(p, "tags");
      wall_.check_post(text, tags);
      if (!apply) return result;
      result.id = wall_.create_post(actor, std::move(text), std::move(tags), now).post_id;
      return result;
    }
    case EventKind::VotePost: {
      require_participant();
      const auto post_id = field<std::uint64_t>(p, "post_id");
      const auto direction = parse_vote_direction(field<std::string>(p, "direction"));
      const auto cost_paid = field<std::int64_t>(p, "cost_paid");
      wall_.check_vote(actor, post_id);
      const auto cost = incentives_.vote_cost(tokens_, actor);
      require(cost_paid == cost, Errc::invalid_value,
              "vote cost is " + std::to_string(cost) + ", payload says " +
                  std::to_string(cost_paid));
      require(tokens_.balance(actor, TokenId::Context) >= cost, Errc::insufficient_tokens,
              "voting costs " + std::to_string(cost) + " Context, balance is " +
                  std::to_string(tokens_.balance(actor, TokenId::Context)));
      if (!apply) return result;
      if (cost > 0) tokens_.burn_context(actor, cost);
      result.id = wall_.record_vote(actor, post_id, direction, cost).post_id;
      result.tokens = cost;
      return result;
    }
    case EventKind::CommentPost: {
      require_participant();
      expect_id(field<std::uint64_t>(p, "comment_id"), wall_.next_comment_id(), "comment");
      const auto post_id = field<std::uint64_t>(p, "post_id");
      auto text = field<std::string>(p, "text");
      wall_.check_comment(post_id, text);
      if (!apply) return result;
      result.id = wall_.add_comment(actor, post_id, std::move(text), now).comment_id;
      return result;
    }
    case EventKind::DirectMessage: {
      require_participant();
      expect_id(field<std::uint64_t>(p, "message_id"), wall_.next_message_id(), "message");
      const auto to = field<std::string>(p, "to");
      auto text = field<std::string>(p, "text");
      require(tokens_.has_account(to), Errc::unknown_account, "unknown account " + to);
      wall_.check_message(text);
      if (!apply) return result;
      result.id = wall_.send_message(actor, to, std::move(text), now).message_id;
      return result;
    }
    case EventKind::Navigate: {
      require_participant();
      parse_view(field<std::string>(p, "view"));
      return result;
    }
    case EventKind::ConfigChange: {
      require_admin();
      const auto op = field<std::string>(p, "op");
      if (op == "set_policy") {
        const auto policy = normalize(policy_from_json(field<Json>(p, "policy")));
        if (apply) incentives_.set_policy(policy);
      } else if (op == "assign_cohort") {
        const auto account = field<std::string>(p, "account");
        const auto cohort = field<std::string>(p, "cohort");
        require(tokens_.has_account(account), Errc::unknown_account, "unknown account " + account);
        incentives_.check_assign(cohort);
        if (apply) incentives_.assign(account, cohort);
      } else if (op == "set_default_cohort") {
        const auto cohort = field<std::string>(p, "cohort");
        incentives_.check_set_default_cohort(cohort);
        if (apply) incentives_.set_default_cohort(cohort);
      } else if (op == "set_area_tags") {
        auto tags = field<std::set<std::string>>(p, "tags");
        for (const auto& tag : tags) {
          require(!is_blank(tag), Errc::invalid_value, "area tags must not be empty");
        }
        if (apply) wall_.set_vocabulary(std::move(tags));
      } else if (op == "set_question_active") {
        const auto question_id = field<std::uint64_t>(p, "question_id");
        const auto active = field<bool>(p, "active");
        feedback_.check_set_active(question_id);
        if (apply) feedback_.set_active(question_id, active);
      } else if (op == "set_reanswer") {
        const auto allowed = field<bool>(p, "allowed");
        if (apply) allow_reanswer_ = allowed;
      } else {
        fail(Errc::invalid_value, "unknown config operation " + op);
      }
      return result;
    }
  }
  fail(Errc::bad_request, "unhandled event kind");
}

Json ApplicationState::to_json() const {
  return {{"applied", applied_},
          {"tokens", tokens_.to_json()},
          {"feedback", feedback_.to_json()},
          {"incentives", incentives_.to_json()},
          {"wall", wall_.to_json()},
          {"allow_reanswer", allow_reanswer_}};
}

ApplicationState ApplicationState::from_json(const Json& doc) {
  ApplicationState state;
  state.applied_ = doc.at("applied").get<std::uint64_t>();
  state.tokens_ = TokenLedger::from_json(doc.at("tokens"));
  state.feedback_ = FeedbackBook::from_json(doc.at("feedback"));
  state.incentives_ = IncentiveEngine::from_json(doc.at("incentives"));
  state.wall_ = FeedbackWall::from_json(doc.at("wall"));
  state.allow_reanswer_ = doc.at("allow_reanswer").get<bool>();
  return state;
}

std::string ApplicationState::canonical() const {
  return to_json().dump(-1, ' ', false, Json::error_handler_t::strict);
}

std::string ApplicationState::digest() const { return sha256_hex(canonical()); }

ApplicationState replay(std::span<const LedgerEvent> log) {
  ApplicationState state;
  for (const auto& event : log) {
    try {
      state.commit(event);
    } catch (const Error& e) {
      fail(Errc::replay_divergence, "event " + std::to_string(event.seq) + " (" +
                                        std::string(to_string(event.kind)) +
                                        ") does not apply: " + e.what());
    }
  }
  return state;
}

void write_snapshot(const std::filesystem::path& path, const ApplicationState& state,
                    const std::string& last_hash) {
  const Json doc = {{"covers", state.applied_events()},
                    {"last_hash", last_hash},
                    {"state_digest", state.digest()},
                    {"state", state.to_json()}};
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << doc.dump() << '\n';
    require(static_cast<bool>(out), Errc::storage_unavailable, "cannot write " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, Errc::storage_unavailable, "cannot move snapshot into place: " + ec.message());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), Errc::storage_unavailable, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    const Json doc = Json::parse(buffer.str());
    Snapshot snapshot{doc.at("covers").get<std::uint64_t>(),
                      doc.at("last_hash").get<std::string>(),
                      ApplicationState::from_json(doc.at("state"))};
    require(snapshot.state.applied_events() == snapshot.covers, Errc::malformed_record,
            "snapshot covers disagrees with its state");
    require(snapshot.state.digest() == doc.at("state_digest").get<std::string>(),
            Errc::malformed_record, "snapshot digest mismatch");
    return snapshot;
  } catch (const Json::exception& e) {
    fail(Errc::malformed_record, std::string("malformed snapshot: ") + e.what());
  }
}

ApplicationState restore(const Snapshot& snapshot, std::span<const LedgerEvent> log) {
  require(snapshot.covers <= log.size(), Errc::replay_divergence,
          "snapshot covers more events than the log holds");
  const std::string expected = snapshot.covers == 0 ? "" : log[snapshot.covers - 1].hash;
  require(snapshot.last_hash == expected, Errc::replay_divergence,
          "snapshot does not belong to this log");
  ApplicationState state = snapshot.state;
  for (std::size_t i = snapshot.covers; i < log.size(); ++i) {
    try {
      state.commit(log[i]);
    } catch (const Error& e) {
      fail(Errc::replay_divergence,
           "event " + std::to_string(i) + " does not apply: " + std::string(e.what()));
    }
  }
  return state;
}

}  // namespace feed4org
