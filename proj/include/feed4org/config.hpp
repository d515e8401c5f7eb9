#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "feed4org/event_store.hpp"
#include "feed4org/incentive_engine.hpp"

namespace feed4org {

inline constexpr const char* kConfigEnv = "FEED4ORG_CONFIG";
inline constexpr const char* kDefaultConfigFile = "feed4org.json";
/// Admin account the CLI acts as; registered by `initialize`.
inline constexpr std::string_view kOperator = "operator";

struct AdminCredential {
  std::string pseudonym;
  std::string key;
};

std::set<std::string> default_area_tags();

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "data";
  std::int64_t genesis_supply = 1'000'000;
  std::string default_cohort{kTreatment};
  std::vector<IncentivePolicy> policies = {IncentivePolicy::treatment(),
                                           IncentivePolicy::control()};
  std::set<std::string> area_tags = default_area_tags();
  std::string about;
  std::string netiquette;
  std::vector<AdminCredential> admins;
  std::int64_t session_ttl_seconds = 24 * 3600;
  bool allow_reanswer = true;
  SyncMode sync = SyncMode::fsync;

  std::filesystem::path ledger_path() const { return data_dir / "ledger.log"; }
  std::filesystem::path snapshot_path() const { return data_dir / "snapshot.json"; }
  std::filesystem::path credentials_path() const { return data_dir / "credentials.json"; }
};

/// Missing keys keep their defaults. A relative data_dir is resolved against
/// `base_dir`.
ServiceConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
/// Throws config-not-found when the file does not exist.
ServiceConfig load_config(const std::filesystem::path& path);
/// Explicit path, else $FEED4ORG_CONFIG, else ./feed4org.json.
std::filesystem::path resolve_config_path(const std::optional<std::string>& explicit_path);

nlohmann::json to_json(const ServiceConfig& config);

class Platform;

/// Seeds an empty ledger: Money genesis, the operator and configured admin
/// accounts, cohort policies, default cohort, area tags and the re-answer
/// switch. Throws already-initialized on a non-empty ledger.
void initialize(Platform& platform, const ServiceConfig& config, std::int64_t money_supply);

/// Registers configured admin pseudonyms missing from the ledger. Throws
/// forbidden if one of them exists as a non-admin account.
void ensure_admins(Platform& platform, const ServiceConfig& config);

}  // namespace feed4org
