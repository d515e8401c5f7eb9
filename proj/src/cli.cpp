#include "feed4org/cli.hpp"

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "feed4org/analytics.hpp"
#include "feed4org/config.hpp"
#include "feed4org/platform.hpp"
#include "feed4org/service.hpp"
#include "feed4org/simulator.hpp"

namespace feed4org {
namespace {

using Json = nlohmann::json;

struct Options {
  std::string config_path;
  std::int64_t supply = 0;
  std::string questions_file;
  std::string cohort;
  std::string incentives;
  std::optional<std::int64_t> vote_cost;
  std::optional<std::int64_t> money_per_answer;
  std::optional<std::int64_t> context_reward;
  std::string show_tokens;
  std::string account;
  std::string report;
  std::string out_path;
  std::string slice_cohort{kAll};
  std::string slice_user_class{kAll};
  std::size_t users = 132;
  std::uint64_t seed = 7;
  std::string profile = "random";
};

ServiceConfig config_for(const Options& o) {
  const auto path = resolve_config_path(o.config_path);
  const bool explicit_path = !o.config_path.empty() || std::getenv(kConfigEnv) != nullptr;
  if (!explicit_path && !std::filesystem::exists(path)) return ServiceConfig{};
  return load_config(path);
}

std::unique_ptr<Platform> open_platform(const ServiceConfig& config, bool create) {
  if (!create) {
    require(std::filesystem::exists(config.ledger_path()), Errc::not_initialized,
            "no ledger at " + config.ledger_path().string() + "; run init first");
  }
  std::filesystem::create_directories(config.data_dir);
  auto store = EventStore::open(config.ledger_path(), {system_clock_ms, config.sync});
  if (std::filesystem::exists(config.snapshot_path())) {
    try {
      auto snapshot = read_snapshot(config.snapshot_path());
      return std::make_unique<Platform>(std::move(store), snapshot);
    } catch (const Error&) {
      // Stale or foreign snapshot: the ledger alone is authoritative.
    }
  }
  return std::make_unique<Platform>(std::move(store));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), Errc::not_found, "cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.close();
  require(static_cast<bool>(out), Errc::storage_unavailable, "cannot write " + path);
}

// A JSON array of specs, or one spec object per non-blank line.
std::vector<QuestionSpec> parse_question_file(const std::string& text) {
  std::vector<Json> docs;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    try {
      for (auto& doc : Json::parse(text)) docs.push_back(doc);
    } catch (const Json::parse_error& e) {
      fail(Errc::invalid_spec, std::string("question file is not valid JSON: ") + e.what());
    }
  } else {
    std::istringstream lines(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(lines, line)) {
      ++number;
      if (is_blank(line)) continue;
      try {
        docs.push_back(Json::parse(line));
      } catch (const Json::parse_error& e) {
        fail(Errc::invalid_spec, "line " + std::to_string(number) + ": " + e.what());
      }
    }
  }
  std::vector<QuestionSpec> specs;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    try {
      auto spec = question_spec_from_json(docs[i]);
      validate_question_spec(spec);
      specs.push_back(std::move(spec));
    } catch (const Error& e) {
      fail(e.code(), "question " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  require(!specs.empty(), Errc::invalid_spec, "question file holds no specs");
  return specs;
}

bool on_off(const std::string& value, const char* flag) {
  if (value == "on") return true;
  if (value == "off") return false;
  fail(Errc::invalid_command, std::string(flag) + " takes on or off");
}

std::string report_csv(const Platform& platform, const Options& o) {
  if (o.report == "interactions") {
    const auto log = platform.events();
    const auto rows = interaction_report(log, {o.slice_cohort, o.slice_user_class});
    return to_csv(std::span<const InteractionAggregate>(rows));
  }
  if (o.report == "context-percentage") {
    const auto log = platform.events();
    const auto rows = contextualization_percentage(log);
    return to_csv(std::span<const ContextPercentageRow>(rows));
  }
  if (o.report == "leaderboard") {
    const auto rows = platform.read([](const ApplicationState& s) {
      return leaderboard(s, s.tokens().accounts().size());
    });
    return to_csv(std::span<const LeaderboardEntry>(rows));
  }
  fail(Errc::invalid_command, "unknown report " + o.report +
                                  " (interactions, context-percentage, leaderboard)");
}

int serve(const ServiceConfig& config, std::ostream& out) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  auto platform = open_platform(config, false);
  ensure_admins(*platform, config);
  Service service(*platform, config);
  const int port = service.bind(config.host, config.port);
  out << "listening on " << config.host << ':' << port << std::endl;

  std::atomic<bool> signalled = false;
  std::thread waiter([&] {
    int received = 0;
    sigwait(&signals, &received);
    signalled = true;
    service.stop();
  });
  service.run();
  if (!signalled) pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  platform->snapshot(config.snapshot_path());
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"feed4org operator tool", "feed4org"};
  app.require_subcommand(1);
  app.add_option("--config", o.config_path, "config file (else $FEED4ORG_CONFIG, else ./feed4org.json)");

  auto* init = app.add_subcommand("init", "create the ledger and seed accounts and policies");
  init->add_option("--supply", o.supply, "Money supply pre-mined into the treasury");

  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP service");
  serve_cmd->add_option("--config", o.config_path, "config file");

  auto* questions = app.add_subcommand("questions", "question authoring");
  questions->require_subcommand(1);
  auto* load = questions->add_subcommand("load", "load question specs, all or nothing");
  load->add_option("file", o.questions_file)->required();

  auto* policy = app.add_subcommand("policy", "incentive policies");
  policy->require_subcommand(1);
  auto* policy_set = policy->add_subcommand("set", "create or replace a cohort policy");
  policy_set->add_option("--cohort", o.cohort)->required();
  policy_set->add_option("--incentives", o.incentives)->required();
  policy_set->add_option("--vote-cost", o.vote_cost);
  policy_set->add_option("--money-per-answer", o.money_per_answer);
  policy_set->add_option("--context-per-contextualization", o.context_reward);
  policy_set->add_option("--show-tokens", o.show_tokens);

  auto* cohort = app.add_subcommand("cohort", "cohort membership");
  cohort->require_subcommand(1);
  auto* assign = cohort->add_subcommand("assign", "move an account to a cohort");
  assign->add_option("--account", o.account)->required();
  assign->add_option("--cohort", o.cohort)->required();

  auto* verify = app.add_subcommand("verify", "check the hash chain of the ledger file");

  auto* export_cmd = app.add_subcommand("export", "write an analytics report as CSV");
  export_cmd->add_option("--report", o.report)->required();
  export_cmd->add_option("--out", o.out_path)->required();
  export_cmd->add_option("--cohort", o.slice_cohort);
  export_cmd->add_option("--user-class", o.slice_user_class);

  auto* simulate_cmd = app.add_subcommand("simulate", "generate a deterministic synthetic ledger");
  simulate_cmd->add_option("--users", o.users);
  simulate_cmd->add_option("--seed", o.seed);
  simulate_cmd->add_option("--profile", o.profile)
      ->check(CLI::IsMember({"random", "interactions", "percentages"}));
  simulate_cmd->add_option("--out", o.out_path, "ledger file to create (default: the configured ledger)");

  auto* snapshot = app.add_subcommand("snapshot", "write a state snapshot next to the ledger");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "feed4org: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const auto config = config_for(o);
    if (*init) {
      auto platform = open_platform(config, true);
      initialize(*platform, config, o.supply > 0 ? o.supply : config.genesis_supply);
      out << "initialized " << config.ledger_path().string() << " with "
          << platform->event_count() << " events\n";
    } else if (*serve_cmd) {
      return serve(config, out);
    } else if (*load) {
      const auto specs = parse_question_file(read_file(o.questions_file));
      auto platform = open_platform(config, false);
      const std::string op(kOperator);
      platform->read([&](const ApplicationState& s) {
        for (const auto& spec : specs) s.feedback().check_create_question(spec);
      });
      for (const auto& spec : specs) {
        out << "question " << platform->create_question(op, spec) << '\n';
      }
    } else if (*policy_set) {
      IncentivePolicy p = on_off(o.incentives, "--incentives") ? IncentivePolicy::treatment()
                                                               : IncentivePolicy::control();
      p.cohort_id = o.cohort;
      if (o.vote_cost) p.vote_cost_context = *o.vote_cost;
      if (o.money_per_answer) p.money_per_answer = *o.money_per_answer;
      if (o.context_reward) p.context_per_contextualization = *o.context_reward;
      if (!o.show_tokens.empty()) p.show_tokens = on_off(o.show_tokens, "--show-tokens");
      p = normalize(p);
      auto platform = open_platform(config, false);
      platform->set_policy(std::string(kOperator), p);
      out << to_json(p).dump() << '\n';
    } else if (*assign) {
      auto platform = open_platform(config, false);
      platform->assign_cohort(std::string(kOperator), o.account, o.cohort);
      out << o.account << " -> " << o.cohort << '\n';
    } else if (*verify) {
      require(std::filesystem::exists(config.ledger_path()), Errc::not_initialized,
              "no ledger at " + config.ledger_path().string());
      const auto report = verify_file(config.ledger_path());
      if (!report.ok) {
        err << "feed4org: ledger broken at seq " << report.first_bad_seq.value_or(0) << ": "
            << report.reason << '\n';
        return kExitError;
      }
      out << "ok " << read_lines(config.ledger_path()).size() << " events\n";
    } else if (*export_cmd) {
      auto platform = open_platform(config, false);
      write_file(o.out_path, report_csv(*platform, o));
      out << "wrote " << o.out_path << '\n';
    } else if (*simulate_cmd) {
      const std::filesystem::path target =
          o.out_path.empty() ? config.ledger_path() : std::filesystem::path(o.out_path);
      require(!std::filesystem::exists(target) || std::filesystem::file_size(target) == 0,
              Errc::already_initialized, target.string() + " already exists");
      if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
      SimulationConfig sim;
      sim.users = o.users;
      sim.seed = o.seed;
      sim.money_supply = config.genesis_supply;
      if (o.profile == "interactions") sim.targets = app_interactions_fixture();
      if (o.profile == "percentages") sim.targets = rounded_percentage_fixture();
      Platform platform(EventStore::open(target, {simulation_clock(), SyncMode::flush}));
      const auto summary = simulate(platform, sim);
      platform.store().sync();
      out << Json{{"ledger", target.string()},
                  {"users", summary.users},
                  {"questions", summary.questions},
                  {"answers", summary.answers},
                  {"contextualizations", summary.contextualizations},
                  {"posts", summary.posts},
                  {"votes", summary.votes},
                  {"comments", summary.comments},
                  {"navigations", summary.navigations},
                  {"events", summary.events},
                  {"state_digest", platform.state_digest()}}
                 .dump()
          << '\n';
    } else if (*snapshot) {
      auto platform = open_platform(config, false);
      platform->snapshot(config.snapshot_path());
      out << "snapshot covers " << platform->event_count() << " events\n";
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "feed4org: " << to_string(e.code()) << ": " << e.what() << '\n';
    return e.code() == Errc::invalid_command ? kExitUsage : kExitError;
  } catch (const std::exception& e) {
    err << "feed4org: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace feed4org
