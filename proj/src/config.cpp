#include "feed4org/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "feed4org/error.hpp"
#include "feed4org/platform.hpp"

namespace feed4org {

std::set<std::string> default_area_tags() {
  return {"collections", "digital-services", "events", "opening-hours", "study-spaces",
          "support"};
}

namespace {

const char* const kDefaultAbout =
    "Tell the library what matters to you. Answer questions, add context to your answers "
    "and post your own ideas on the feedback wall. Every answered question earns one Money "
    "token (worth 0.20 CHF); every contextualization earns one Context token, which you can "
    "spend to vote on wall posts.";

const char* const kDefaultNetiquette =
    "Be respectful. Criticise ideas, not people. No personal data, advertising or offensive "
    "content. Stay on topic so the library can act on your feedback.";

}  // namespace

ServiceConfig parse_config(const Json& doc, const std::filesystem::path& base_dir) {
  require(doc.is_object(), Errc::invalid_value, "config must be a JSON object");
  ServiceConfig c;
  c.about = kDefaultAbout;
  c.netiquette = kDefaultNetiquette;
  try {
    if (auto it = doc.find("listen"); it != doc.end()) {
      c.host = it->value("host", c.host);
      c.port = it->value("port", c.port);
    }
    if (auto it = doc.find("data_dir"); it != doc.end()) {
      std::filesystem::path dir = it->get<std::string>();
      c.data_dir = dir.is_relative() && !base_dir.empty() ? base_dir / dir : dir;
    } else if (!base_dir.empty()) {
      c.data_dir = base_dir / c.data_dir;
    }
    c.genesis_supply = doc.value("genesis_supply", c.genesis_supply);
    c.default_cohort = doc.value("default_cohort", c.default_cohort);
    if (auto it = doc.find("policies"); it != doc.end()) {
      c.policies.clear();
      for (const auto& p : *it) c.policies.push_back(normalize(policy_from_json(p)));
    }
    if (auto it = doc.find("area_tags"); it != doc.end()) {
      c.area_tags = it->get<std::set<std::string>>();
    }
    c.about = doc.value("about", c.about);
    c.netiquette = doc.value("netiquette", c.netiquette);
    if (auto it = doc.find("admins"); it != doc.end()) {
      for (const auto& a : *it) {
        c.admins.push_back({a.at("pseudonym").get<std::string>(), a.at("key").get<std::string>()});
      }
    }
    c.session_ttl_seconds = doc.value("session_ttl_seconds", c.session_ttl_seconds);
    c.allow_reanswer = doc.value("allow_reanswer", c.allow_reanswer);
    const auto sync = doc.value("sync", std::string("fsync"));
    require(sync == "fsync" || sync == "flush", Errc::invalid_value,
            "sync must be fsync or flush");
    c.sync = sync == "fsync" ? SyncMode::fsync : SyncMode::flush;
  } catch (const Json::exception& e) {
    fail(Errc::invalid_value, std::string("malformed config: ") + e.what());
  }
  require(c.port >= 0 && c.port <= 65535, Errc::invalid_value, "port out of range");
  require(c.genesis_supply > 0, Errc::invalid_supply, "genesis_supply must be positive");
  require(c.session_ttl_seconds > 0, Errc::invalid_value, "session_ttl_seconds must be positive");
  for (const auto& admin : c.admins) {
    require(valid_pseudonym(admin.pseudonym) && !admin.key.empty(), Errc::invalid_value,
            "admins need a valid pseudonym and a non-empty key");
  }
  return c;
}

ServiceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), Errc::config_not_found, "config not found: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  Json doc;
  try {
    doc = Json::parse(buffer.str());
  } catch (const Json::exception& e) {
    fail(Errc::invalid_value, "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

std::filesystem::path resolve_config_path(const std::optional<std::string>& explicit_path) {
  if (explicit_path && !explicit_path->empty()) return *explicit_path;
  if (const char* env = std::getenv(kConfigEnv); env != nullptr && *env != '\0') return env;
  return kDefaultConfigFile;
}

Json to_json(const ServiceConfig& c) {
  Json policies = Json::array();
  for (const auto& p : c.policies) policies.push_back(to_json(p));
  Json admins = Json::array();
  for (const auto& a : c.admins) admins.push_back({{"pseudonym", a.pseudonym}, {"key", a.key}});
  return {{"listen", {{"host", c.host}, {"port", c.port}}},
          {"data_dir", c.data_dir.string()},
          {"genesis_supply", c.genesis_supply},
          {"default_cohort", c.default_cohort},
          {"policies", policies},
          {"area_tags", c.area_tags},
          {"about", c.about},
          {"netiquette", c.netiquette},
          {"admins", admins},
          {"session_ttl_seconds", c.session_ttl_seconds},
          {"allow_reanswer", c.allow_reanswer},
          {"sync", c.sync == SyncMode::fsync ? "fsync" : "flush"}};
}

void initialize(Platform& platform, const ServiceConfig& config, std::int64_t money_supply) {
  require(platform.event_count() == 0, Errc::already_initialized,
          "ledger already holds " + std::to_string(platform.event_count()) + " events");
  const std::string op(kOperator);
  platform.genesis(money_supply);
  platform.register_account(op, Role::admin);
  for (const auto& admin : config.admins) {
    if (admin.pseudonym != op) platform.register_account(admin.pseudonym, Role::admin);
  }
  for (const auto& policy : config.policies) platform.set_policy(op, policy);
  if (config.default_cohort != kTreatment) platform.set_default_cohort(op, config.default_cohort);
  platform.set_area_tags(op, config.area_tags);
  if (!config.allow_reanswer) platform.set_reanswer(op, false);
}

void ensure_admins(Platform& platform, const ServiceConfig& config) {
  for (const auto& admin : config.admins) {
    const auto role = platform.read([&](const ApplicationState& s) -> std::optional<Role> {
      if (!s.tokens().has_account(admin.pseudonym)) return std::nullopt;
      return s.tokens().account(admin.pseudonym).role;
    });
    if (!role) {
      platform.register_account(admin.pseudonym, Role::admin);
    } else {
      require(*role == Role::admin, Errc::forbidden,
              admin.pseudonym + " is registered but is not an administrator");
    }
  }
}

}  // namespace feed4org
