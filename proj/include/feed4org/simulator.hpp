#pragma once

// Deterministic synthetic load. Given a seed, produces the same ledger
// byte for byte: addresses, bodies and timestamps are all derived from the
// seed, and every event goes through the regular Platform mutation path.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "feed4org/config.hpp"
#include "feed4org/platform.hpp"

namespace feed4org {

/// Exact event counts the generator must hit.
struct FixtureTargets {
  /// Indexed like kAllQuestionTypes.
  std::array<std::int64_t, 8> answers{};
  /// [qtype][ctype], ctype indexed like kAllContextTypes
  /// (Importance, Satisfaction, Comment).
  std::array<std::array<std::int64_t, 3>, 8> contexts{};
  std::int64_t posts = 0;
  /// question, statistics, open_feedback, about
  std::array<std::int64_t, 4> navigations{};
};

/// Per-qtype answer counts and contextualization rates of the library
/// field study (rates in permille, [qtype][Importance, Satisfaction, Comment]).
extern const std::array<std::int64_t, 8> kStudyAnswers;
extern const std::array<std::array<std::int64_t, 3>, 8> kStudyContextPermille;

/// Contextualization counts of round(rate x answers) per cell, study answer
/// counts, no posts or navigation.
FixtureTargets rounded_percentage_fixture();

/// Study totals: 21286 answers, 55 posts, 6018 Importance, 5692
/// Satisfaction and 2107 Comment contextualizations, navigation 6990 / 3605
/// / 3094 / 549. Per-cell contextualization counts stay within one permille
/// of the study rates.
FixtureTargets app_interactions_fixture();

enum class Segment { control_user, treatment_user, control_unaware, treatment_unaware };

struct SimulationConfig {
  std::size_t users = 132;
  std::uint64_t seed = 7;
  /// Empty: random load scaled by `users`.
  std::optional<FixtureTargets> targets;
  std::int64_t money_supply = 1'000'000;
  /// Extra activity that does not count towards any target.
  bool votes_and_comments = true;
};

struct SimulationSummary {
  std::size_t users = 0;
  std::size_t questions = 0;
  std::size_t answers = 0;
  std::size_t contextualizations = 0;
  std::size_t posts = 0;
  std::size_t votes = 0;
  std::size_t comments = 0;
  std::size_t navigations = 0;
  std::size_t events = 0;
};

/// Logical clock for simulated ledgers: starts 2021-05-03T08:00:00Z and
/// advances 1.5 s per reading.
std::function<std::int64_t()> simulation_clock();

/// Populates an empty platform (initializing it first).
SimulationSummary simulate(Platform& platform, const SimulationConfig& config);

/// Small portable RNG helpers (std distributions are implementation-defined).
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  bool chance(std::uint64_t numerator, std::uint64_t denominator) {
    return below(denominator) < numerator;
  }
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

/// Largest-remainder apportionment of `total` by non-negative integer
/// weights; ties in the remainder go to the lower index.
std::vector<std::int64_t> apportion(std::int64_t total, const std::vector<std::int64_t>& weights);

}  // namespace feed4org
