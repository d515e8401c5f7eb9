#pragma once

// Statistics over the ledger: leaderboard, interaction aggregates,
// contextualization percentages per question type, the importance-filtered
// answer view, and CSV export of those reports.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "feed4org/app_state.hpp"
#include "feed4org/event_store.hpp"

namespace feed4org {

struct LeaderboardEntry {
  std::int64_t rank = 0;
  std::string account;
  std::int64_t context_tokens_earned = 0;

  bool operator==(const LeaderboardEntry&) const = default;
};

/// Accounts that earned Context, by earned total descending; ties go to the
/// account that reached its total first. Spending never lowers a rank.
std::vector<LeaderboardEntry> leaderboard(const ApplicationState& state, std::size_t top_n);

enum class Category {
  solicited,
  unsolicited,
  importance,
  satisfaction,
  comments,
  nav_question,
  nav_statistics,
  nav_open_feedback,
  nav_about,
};
inline constexpr std::array<Category, 9> kAllCategories = {
    Category::solicited,      Category::unsolicited,       Category::importance,
    Category::satisfaction,   Category::comments,          Category::nav_question,
    Category::nav_statistics, Category::nav_open_feedback, Category::nav_about,
};
std::string_view to_string(Category category);
Category parse_category(std::string_view name);

inline constexpr std::string_view kAll = "all";

struct SliceFilter {
  std::string cohort{kAll};      // cohort id or "all"
  std::string user_class{kAll};  // "user", "unaware-user" or "all"
};

struct InteractionAggregate {
  Category category{};
  std::string cohort;
  std::string user_class;
  std::int64_t participants = 0;
  std::int64_t total = 0;

  /// total / participants, three decimals; "0.000" for an empty slice.
  std::string mean_per_participant() const;
  bool operator==(const InteractionAggregate&) const = default;
};

/// Nine aggregates (one per category) for the slice. Participants are
/// accounts with the user role; a participant's slice is given by its
/// user class and its latest cohort assignment. Throws unknown-cohort.
std::vector<InteractionAggregate> interaction_report(std::span<const LedgerEvent> log,
                                                     const SliceFilter& filter);

struct ContextPercentageRow {
  QuestionType qtype{};
  std::int64_t answers = 0;
  std::int64_t satisfaction = 0;
  std::int64_t importance = 0;
  std::int64_t comment = 0;

  std::int64_t permille(ContextType ctype) const;
  double pct(ContextType ctype) const { return static_cast<double>(permille(ctype)) / 1000.0; }
  bool operator==(const ContextPercentageRow&) const = default;
};

/// One row per question type, in kAllQuestionTypes order. `answers` counts
/// distinct answers (a re-answer is the same answer).
std::vector<ContextPercentageRow> contextualization_percentage(std::span<const LedgerEvent> log);

struct AnswerDistribution {
  std::uint64_t question_id = 0;
  QuestionType qtype{};
  std::int64_t answers_considered = 0;
  /// Per option index for choice types, per scale point for likert, empty
  /// for text-input.
  std::vector<std::int64_t> counts;
};

/// Answers to the question whose Importance rating is at least
/// `min_importance`. Zero means no filter at all, so unrated answers count
/// too. Throws unknown-question, invalid-value for a negative threshold.
AnswerDistribution differentiated_answers(const ApplicationState& state,
                                          std::uint64_t question_id,
                                          std::int64_t min_importance);

// CSV (RFC 4180, UTF-8, header row, LF line ends).
std::string to_csv(std::span<const InteractionAggregate> report);
std::string to_csv(std::span<const ContextPercentageRow> report);
std::string to_csv(std::span<const LeaderboardEntry> report);
std::vector<InteractionAggregate> parse_interaction_csv(std::string_view csv);
std::vector<ContextPercentageRow> parse_context_percentage_csv(std::string_view csv);
std::vector<LeaderboardEntry> parse_leaderboard_csv(std::string_view csv);

std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::string csv_escape(std::string_view field);

}  // namespace feed4org
