#include "feed4org/service.hpp"

#include <fstream>
#include <random>

#include <httplib.h>

#include "feed4org/analytics.hpp"
#include "feed4org/sha256.hpp"

namespace feed4org {
namespace {

using httplib::Request;
using httplib::Response;

Json parse_body(const Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    Json doc = Json::parse(req.body);
    require(doc.is_object(), Errc::bad_request, "request body must be a JSON object");
    return doc;
  } catch (const Json::parse_error& e) {
    fail(Errc::bad_request, std::string("request body is not valid JSON: ") + e.what());
  }
}

template <typename T>
T body_field(const Json& body, const char* key) {
  auto it = body.find(key);
  require(it != body.end(), Errc::bad_request, std::string("missing field ") + key);
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    fail(Errc::bad_request, std::string("field ") + key + " has the wrong type");
  }
}

template <typename T>
std::optional<T> optional_body_field(const Json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return std::nullopt;
  return body_field<T>(body, key);
}

std::int64_t query_int(const Request& req, const char* key, std::int64_t fallback) {
  if (!req.has_param(key)) return fallback;
  const auto text = req.get_param_value(key);
  try {
    std::size_t used = 0;
    const auto value = std::stoll(text, &used);
    require(used == text.size(), Errc::bad_request, std::string("bad integer for ") + key);
    return value;
  } catch (const std::logic_error&) {
    fail(Errc::bad_request, std::string("bad integer for ") + key);
  }
}

std::string query_string(const Request& req, const char* key, std::string fallback) {
  return req.has_param(key) ? req.get_param_value(key) : fallback;
}

std::uint64_t path_id(const Request& req) {
  try {
    return std::stoull(req.matches[1].str());
  } catch (const std::logic_error&) {
    fail(Errc::not_found, "bad id in path");
  }
}

Json question_json(const Question& q) {
  Json doc = to_json(q.spec);
  doc["question_id"] = q.question_id;
  doc["active"] = q.active;
  return doc;
}

Json post_json(const ApplicationState& s, const WallPost& p) {
  Json comments = Json::array();
  for (const auto& c : s.wall().comments_of(p.post_id)) {
    comments.push_back({{"comment_id", c.comment_id},
                        {"author", c.author},
                        {"text", c.text},
                        {"created_at", c.created_at}});
  }
  return {{"post_id", p.post_id},     {"author", p.author},
          {"text", p.text},           {"tags", p.area_tags},
          {"created_at", p.created_at}, {"up_votes", p.up_votes},
          {"down_votes", p.down_votes}, {"net_score", p.net_score()},
          {"comments", comments}};
}

Json message_json(const DirectMessage& m) {
  return {{"message_id", m.message_id},
          {"from", m.from},
          {"to", m.to},
          {"text", m.text},
          {"created_at", m.created_at}};
}

Json balances_json(const ApplicationState& s, const std::string& account) {
  const auto b = s.tokens().balance(account);
  return {{"money", b.money}, {"context", b.context}};
}

Json me_json(const ApplicationState& s, const std::string& account) {
  const auto& record = s.tokens().account(account);
  const auto& policy = s.incentives().policy_for(account);
  const auto b = s.tokens().balance(account);
  return {{"address", account},
          {"role", to_string(record.role)},
          {"user_class", to_string(record.user_class)},
          {"cohort", s.incentives().cohort_of(account)},
          {"show_tokens", policy.show_tokens},
          {"money", b.money},
          {"context", b.context},
          {"context_earned", s.tokens().context_earned(account)},
          {"redeemable_chf", s.tokens().redeemable_value(account).to_string()},
          {"vote_cost", policy.vote_cost_context}};
}

Json verification_json(const VerificationReport& r, std::size_t events) {
  Json doc = {{"ok", r.ok}, {"events", events}};
  doc["first_bad_seq"] = r.first_bad_seq ? Json(*r.first_bad_seq) : Json(nullptr);
  if (!r.ok) doc["reason"] = r.reason;
  return doc;
}

}  // namespace

int http_status(Errc code) {
  switch (code) {
    case Errc::unauthorized: return 401;
    case Errc::forbidden:
    case Errc::access_denied: return 403;
    case Errc::not_found:
    case Errc::unknown_question:
    case Errc::unknown_answer:
    case Errc::unknown_post:
    case Errc::unknown_account:
    case Errc::unknown_cohort: return 404;
    case Errc::pseudonym_taken:
    case Errc::duplicate_answer:
    case Errc::duplicate_contextualization:
    case Errc::duplicate_vote:
    case Errc::already_initialized: return 409;
    case Errc::storage_unavailable:
    case Errc::store_locked: return 503;
    case Errc::malformed_record:
    case Errc::replay_divergence: return 500;
    default: return 400;
  }
}

std::string random_token(std::size_t bytes) {
  thread_local std::random_device device;
  std::vector<std::uint8_t> raw(bytes);
  for (auto& b : raw) b = static_cast<std::uint8_t>(device() & 0xff);
  return to_hex(raw.data(), raw.size());
}

SessionStore::SessionStore(std::int64_t ttl_ms, std::optional<std::filesystem::path> credentials_path)
    : ttl_ms_(ttl_ms), credentials_path_(std::move(credentials_path)) {
  if (credentials_path_ && std::filesystem::exists(*credentials_path_)) {
    std::ifstream in(*credentials_path_);
    try {
      secret_hashes_ = Json::parse(in).get<std::map<std::string, std::string>>();
    } catch (const Json::exception& e) {
      fail(Errc::malformed_record, "unreadable credentials file: " + std::string(e.what()));
    }
  }
}

Session SessionStore::issue(const std::string& account, std::int64_t now) {
  Session session{account, random_token(), now, now + ttl_ms_};
  std::lock_guard lock(mutex_);
  sessions_[session.token] = session;
  return session;
}

std::optional<Session> SessionStore::resolve(const std::string& token, std::int64_t now) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(token);
  if (it == sessions_.end() || now >= it->second.expires_at) return std::nullopt;
  return it->second;
}

std::string SessionStore::create_secret(const std::string& account) {
  auto secret = random_token();
  set_secret(account, secret);
  return secret;
}

void SessionStore::set_secret(const std::string& account, const std::string& secret) {
  std::lock_guard lock(mutex_);
  secret_hashes_[account] = sha256_hex(secret);
  persist();
}

bool SessionStore::check_secret(const std::string& account, const std::string& secret) const {
  std::lock_guard lock(mutex_);
  auto it = secret_hashes_.find(account);
  return it != secret_hashes_.end() && it->second == sha256_hex(secret);
}

void SessionStore::persist() const {
  if (!credentials_path_) return;
  const auto tmp = credentials_path_->string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << Json(secret_hashes_).dump() << '\n';
    require(static_cast<bool>(out), Errc::storage_unavailable, "cannot write " + tmp);
  }
  std::filesystem::rename(tmp, *credentials_path_);
}

struct Service::Impl {
  Platform& platform;
  ServiceConfig config;
  std::function<std::int64_t()> clock;
  SessionStore sessions;
  httplib::Server server;

  Impl(Platform& p, ServiceConfig c, std::function<std::int64_t()> clk)
      : platform(p),
        config(std::move(c)),
        clock(std::move(clk)),
        sessions(config.session_ttl_seconds * 1000,
                 std::filesystem::exists(config.data_dir)
                     ? std::optional(config.credentials_path())
                     : std::nullopt) {
    for (const auto& admin : config.admins) sessions.set_secret(admin.pseudonym, admin.key);
    routes();
  }

  std::string authenticate(const Request& req) const {
    const auto header = req.get_header_value("Authorization");
    constexpr std::string_view kBearer = "Bearer ";
    require(header.rfind(kBearer, 0) == 0, Errc::unauthorized, "missing bearer token");
    auto session = sessions.resolve(header.substr(kBearer.size()), clock());
    require(session.has_value(), Errc::unauthorized, "unknown or expired session");
    return session->account;
  }

  std::optional<std::string> maybe_authenticate(const Request& req) const {
    if (!req.has_header("Authorization")) return std::nullopt;
    return authenticate(req);
  }

  std::string authenticate_admin(const Request& req) const {
    auto account = authenticate(req);
    const bool admin = platform.read([&](const ApplicationState& s) {
      return s.tokens().has_account(account) && s.tokens().account(account).role == Role::admin;
    });
    require(admin, Errc::forbidden, "administrator session required");
    return account;
  }

  using Handler = std::function<void(const Request&, Response&)>;

  template <typename Fn>
  Handler json(Fn fn) {
    return [fn](const Request& req, Response& res) {
      try {
        res.set_content(fn(req).dump(), "application/json");
      } catch (const Error& e) {
        res.status = http_status(e.code());
        res.set_content(Json{{"code", to_string(e.code())}, {"message", e.what()}}.dump(),
                        "application/json");
      } catch (const Json::exception& e) {
        res.status = 400;
        res.set_content(Json{{"code", "bad-request"}, {"message", e.what()}}.dump(),
                        "application/json");
      } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(Json{{"code", "internal"}, {"message", e.what()}}.dump(),
                        "application/json");
      }
    };
  }

  void routes() {
    server.Post("/register", json([this](const Request& req) {
      const Json body = parse_body(req);
      for (const auto& [key, _] : body.items()) {
        require(key == "pseudonym" || key == "user_class", Errc::bad_request,
                "registration accepts only pseudonym and user_class");
      }
      const auto user_class =
          parse_user_class(optional_body_field<std::string>(body, "user_class").value_or("user"));
      const auto address = platform.register_account(
          optional_body_field<std::string>(body, "pseudonym"), Role::user, user_class);
      const auto secret = sessions.create_secret(address);
      const auto session = sessions.issue(address, clock());
      return Json{{"address", address},
                  {"secret", secret},
                  {"token", session.token},
                  {"expires_at", session.expires_at}};
    }));

    server.Post("/session", json([this](const Request& req) {
      const Json body = parse_body(req);
      const auto address = body_field<std::string>(body, "address");
      require(sessions.check_secret(address, body_field<std::string>(body, "secret")),
              Errc::unauthorized, "unknown address or wrong secret");
      const auto session = sessions.issue(address, clock());
      return Json{{"address", address}, {"token", session.token}, {"expires_at", session.expires_at}};
    }));

    server.Get("/questions", json([this](const Request& req) {
      const auto me = maybe_authenticate(req);
      return platform.read([&](const ApplicationState& s) {
        Json out = Json::array();
        for (const auto& [id, q] : s.feedback().questions()) {
          if (!q.active) continue;
          Json doc = question_json(q);
          if (me) {
            const auto mine = s.feedback().find_answer(*me, id);
            doc["my_answer_id"] = mine ? Json(*mine) : Json(nullptr);
          }
          out.push_back(std::move(doc));
        }
        return out;
      });
    }));

    server.Post(R"(/questions/(\d+)/answer)", json([this](const Request& req) {
      const auto me = authenticate(req);
      const auto receipt =
          platform.submit_answer(me, path_id(req), answer_body_from_json(parse_body(req)));
      Json out = {{"answer_id", receipt.answer_id}, {"reward", to_string(receipt.reward)}};
      out["balances"] = platform.read([&](const ApplicationState& s) { return balances_json(s, me); });
      return out;
    }));

    server.Post(R"(/answers/(\d+)/context)", json([this](const Request& req) {
      const auto me = authenticate(req);
      const Json body = parse_body(req);
      const auto ctype = parse_context_type(body_field<std::string>(body, "ctype"));
      const ContextValue value{optional_body_field<std::int64_t>(body, "rating"),
                               optional_body_field<std::string>(body, "comment")};
      const auto receipt = platform.contextualize(me, path_id(req), ctype, value);
      Json out = {{"context_id", receipt.context_id}, {"minted", receipt.minted}};
      out["balances"] = platform.read([&](const ApplicationState& s) { return balances_json(s, me); });
      return out;
    }));

    server.Get("/wall", json([this](const Request&) {
      return platform.read([&](const ApplicationState& s) {
        Json out = Json::array();
        for (const auto& p : s.wall().ranked()) out.push_back(post_json(s, p));
        return out;
      });
    }));

    server.Post("/wall", json([this](const Request& req) {
      const auto me = authenticate(req);
      const Json body = parse_body(req);
      const auto tags =
          optional_body_field<std::set<std::string>>(body, "tags").value_or(std::set<std::string>{});
      const auto id = platform.create_post(me, body_field<std::string>(body, "text"), tags);
      return platform.read([&](const ApplicationState& s) { return post_json(s, s.wall().post(id)); });
    }));

    server.Post(R"(/wall/(\d+)/vote)", json([this](const Request& req) {
      const auto me = authenticate(req);
      const Json body = parse_body(req);
      const auto post = platform.cast_vote(
          me, path_id(req), parse_vote_direction(body_field<std::string>(body, "direction")));
      return platform.read([&](const ApplicationState& s) {
        Json out = post_json(s, post);
        out["balances"] = balances_json(s, me);
        return out;
      });
    }));

    server.Post(R"(/wall/(\d+)/comment)", json([this](const Request& req) {
      const auto me = authenticate(req);
      const Json body = parse_body(req);
      const auto id = platform.add_comment(me, path_id(req), body_field<std::string>(body, "text"));
      return Json{{"comment_id", id}};
    }));

    server.Post("/messages", json([this](const Request& req) {
      const auto me = authenticate(req);
      const Json body = parse_body(req);
      const auto id = platform.send_direct_message(me, body_field<std::string>(body, "to"),
                                                   body_field<std::string>(body, "text"));
      return Json{{"message_id", id}, {"delivered", true}};
    }));

    server.Get("/messages", json([this](const Request& req) {
      const auto me = authenticate(req);
      return platform.read([&](const ApplicationState& s) {
        Json out = Json::array();
        const auto messages = req.has_param("with")
                                  ? s.wall().thread(me, me, req.get_param_value("with"))
                                  : s.wall().inbox(me);
        for (const auto& m : messages) out.push_back(message_json(m));
        return out;
      });
    }));

    server.Post("/tokens/transfer", json([this](const Request& req) {
      const auto me = authenticate(req);
      const Json body = parse_body(req);
      platform.transfer(parse_token_id(body_field<std::string>(body, "token")), me,
                        body_field<std::string>(body, "to"), body_field<std::int64_t>(body, "amount"));
      return platform.read([&](const ApplicationState& s) { return balances_json(s, me); });
    }));

    server.Get("/stats/me", json([this](const Request& req) {
      const auto me = authenticate(req);
      return platform.read([&](const ApplicationState& s) { return me_json(s, me); });
    }));

    server.Get("/stats/leaderboard", json([this](const Request& req) {
      const auto top = query_int(req, "top", 10);
      require(top >= 0, Errc::bad_request, "top must be non-negative");
      return platform.read([&](const ApplicationState& s) {
        Json out = Json::array();
        for (const auto& e : leaderboard(s, static_cast<std::size_t>(top))) {
          out.push_back({{"rank", e.rank},
                         {"account", e.account},
                         {"context_tokens_earned", e.context_tokens_earned}});
        }
        return out;
      });
    }));

    server.Get("/stats/reports/interactions", json([this](const Request& req) {
      const SliceFilter filter{query_string(req, "cohort", std::string(kAll)),
                               query_string(req, "user_class", std::string(kAll))};
      const auto log = platform.events();
      Json out = Json::array();
      for (const auto& a : interaction_report(log, filter)) {
        out.push_back({{"category", to_string(a.category)},
                       {"cohort", a.cohort},
                       {"user_class", a.user_class},
                       {"participants", a.participants},
                       {"total", a.total},
                       {"mean_per_participant", a.mean_per_participant()}});
      }
      return out;
    }));

    server.Get("/stats/reports/context-percentage", json([this](const Request&) {
      const auto log = platform.events();
      Json out = Json::array();
      for (const auto& r : contextualization_percentage(log)) {
        out.push_back({{"qtype", to_string(r.qtype)},
                       {"answers", r.answers},
                       {"pct_satisfaction", format_permille(r.permille(ContextType::Satisfaction))},
                       {"pct_importance", format_permille(r.permille(ContextType::Importance))},
                       {"pct_comment", format_permille(r.permille(ContextType::Comment))}});
      }
      return out;
    }));

    server.Get("/stats/reports/differentiated", json([this](const Request& req) {
      const auto question_id = query_int(req, "question_id", 0);
      const auto min_importance = query_int(req, "min_importance", 0);
      return platform.read([&](const ApplicationState& s) {
        const auto d = differentiated_answers(s, static_cast<std::uint64_t>(question_id),
                                              min_importance);
        return Json{{"question_id", d.question_id},
                    {"qtype", to_string(d.qtype)},
                    {"answers_considered", d.answers_considered},
                    {"counts", d.counts}};
      });
    }));

    server.Get("/about", json([this](const Request&) {
      return Json{{"about", config.about}, {"netiquette", config.netiquette}};
    }));

    server.Post("/events/navigate", json([this](const Request& req) {
      const auto me = authenticate(req);
      platform.navigate(me, parse_view(body_field<std::string>(parse_body(req), "view")));
      return Json{{"recorded", true}};
    }));

    server.Post("/admin/questions", json([this](const Request& req) {
      const auto admin = authenticate_admin(req);
      const auto id = platform.create_question(admin, question_spec_from_json(parse_body(req)));
      return platform.read(
          [&](const ApplicationState& s) { return question_json(s.feedback().question(id)); });
    }));

    server.Post("/admin/policy", json([this](const Request& req) {
      const auto admin = authenticate_admin(req);
      const auto policy = normalize(policy_from_json(parse_body(req)));
      platform.set_policy(admin, policy);
      return to_json(policy);
    }));

    server.Post("/admin/cohort", json([this](const Request& req) {
      const auto admin = authenticate_admin(req);
      const Json body = parse_body(req);
      platform.assign_cohort(admin, body_field<std::string>(body, "account"),
                             body_field<std::string>(body, "cohort"));
      return Json{{"assigned", true}};
    }));

    server.Post("/admin/tags", json([this](const Request& req) {
      const auto admin = authenticate_admin(req);
      const auto tags = body_field<std::set<std::string>>(parse_body(req), "tags");
      platform.set_area_tags(admin, tags);
      return Json{{"tags", tags}};
    }));

    server.Get("/admin/ledger/verify", json([this](const Request& req) {
      authenticate_admin(req);
      return verification_json(platform.verify(), platform.event_count());
    }));

    server.Get("/admin/export", [this](const Request& req, Response& res) {
      try {
        authenticate_admin(req);
        const auto report = query_string(req, "report", "");
        std::string csv;
        if (report == "interactions") {
          const auto log = platform.events();
          const auto rows = interaction_report(
              log, {query_string(req, "cohort", std::string(kAll)),
                    query_string(req, "user_class", std::string(kAll))});
          csv = to_csv(std::span<const InteractionAggregate>(rows));
        } else if (report == "context-percentage") {
          const auto log = platform.events();
          const auto rows = contextualization_percentage(log);
          csv = to_csv(std::span<const ContextPercentageRow>(rows));
        } else if (report == "leaderboard") {
          const auto top = static_cast<std::size_t>(query_int(req, "top", 1000000));
          const auto rows = platform.read([&](const ApplicationState& s) { return leaderboard(s, top); });
          csv = to_csv(std::span<const LeaderboardEntry>(rows));
        } else {
          fail(Errc::not_found, "unknown report " + report);
        }
        res.set_content(csv, "text/csv; charset=utf-8");
      } catch (const Error& e) {
        res.status = http_status(e.code());
        res.set_content(Json{{"code", to_string(e.code())}, {"message", e.what()}}.dump(),
                        "application/json");
      }
    });
  }
};

Service::Service(Platform& platform, ServiceConfig config, std::function<std::int64_t()> clock)
    : impl_(std::make_unique<Impl>(platform, std::move(config), std::move(clock))) {}

Service::~Service() = default;

int Service::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    require(bound > 0, Errc::storage_unavailable, "cannot bind " + host);
    return bound;
  }
  require(impl_->server.bind_to_port(host, port), Errc::storage_unavailable,
          "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

SessionStore& Service::sessions() { return impl_->sessions; }

}  // namespace feed4org
