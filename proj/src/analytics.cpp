#include "feed4org/analytics.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "feed4org/decimal.hpp"
#include "feed4org/error.hpp"

namespace feed4org {
namespace {

constexpr std::array<std::string_view, 9> kCategoryNames = {
    "solicited",      "unsolicited",       "importance", "satisfaction", "comments",
    "nav_question",   "nav_statistics",    "nav_open_feedback", "nav_about",
};

std::optional<Category> categorize(const LedgerEvent& e) {
  switch (e.kind) {
    case EventKind::Answer: return Category::solicited;
    case EventKind::CreatePost: return Category::unsolicited;
    case EventKind::Contextualize: {
      switch (parse_context_type(e.payload.at("ctype").get<std::string>())) {
        case ContextType::Importance: return Category::importance;
        case ContextType::Satisfaction: return Category::satisfaction;
        case ContextType::Comment: return Category::comments;
      }
      break;
    }
    case EventKind::Navigate: {
      switch (parse_view(e.payload.at("view").get<std::string>())) {
        case View::question: return Category::nav_question;
        case View::statistics: return Category::nav_statistics;
        case View::open_feedback: return Category::nav_open_feedback;
        case View::about: return Category::nav_about;
      }
      break;
    }
    default:
      break;
  }
  return std::nullopt;
}

std::int64_t to_int(const std::string& field, const char* what) {
  try {
    std::size_t used = 0;
    const auto value = std::stoll(field, &used);
    require(used == field.size(), Errc::malformed_record, std::string("bad ") + what);
    return value;
  } catch (const std::logic_error&) {
    fail(Errc::malformed_record, std::string("bad ") + what + ": " + field);
  }
}

std::string join_row(const std::vector<std::string>& fields) {
  std::string line;
  bool first = true;
  for (const auto& f : fields) {
    if (!first) line.push_back(',');
    line += csv_escape(f);
    first = false;
  }
  line.push_back('\n');
  return line;
}

std::vector<std::vector<std::string>> body_rows(std::string_view csv,
                                                const std::vector<std::string>& header) {
  auto rows = parse_csv(csv);
  require(!rows.empty() && rows.front() == header, Errc::malformed_record,
          "unexpected CSV header");
  rows.erase(rows.begin());
  for (const auto& row : rows) {
    require(row.size() == header.size(), Errc::malformed_record, "CSV row has wrong width");
  }
  return rows;
}

const std::vector<std::string> kInteractionHeader = {
    "category", "cohort", "user_class", "participants", "total", "mean_per_participant"};
const std::vector<std::string> kPercentageHeader = {
    "qtype",     "answers",          "satisfaction", "importance",
    "comment",   "pct_satisfaction", "pct_importance", "pct_comment"};
const std::vector<std::string> kLeaderboardHeader = {"rank", "account", "context_tokens_earned"};

}  // namespace

std::vector<LeaderboardEntry> leaderboard(const ApplicationState& state, std::size_t top_n) {
  struct Row {
    std::int64_t earned;
    std::uint64_t seq;
    std::string account;
  };
  std::vector<Row> rows;
  for (const auto& [address, _] : state.tokens().accounts()) {
    const auto earned = state.tokens().context_earned(address);
    if (earned > 0) rows.push_back({earned, *state.tokens().context_earned_seq(address), address});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.earned != b.earned) return a.earned > b.earned;
    if (a.seq != b.seq) return a.seq < b.seq;
    return a.account < b.account;
  });
  std::vector<LeaderboardEntry> out;
  for (std::size_t i = 0; i < rows.size() && i < top_n; ++i) {
    out.push_back({static_cast<std::int64_t>(i + 1), rows[i].account, rows[i].earned});
  }
  return out;
}

std::string_view to_string(Category category) {
  return kCategoryNames.at(static_cast<std::size_t>(category));
}

Category parse_category(std::string_view name) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    if (kCategoryNames[i] == name) return static_cast<Category>(i);
  }
  fail(Errc::malformed_record, "unknown category " + std::string(name));
}

std::string InteractionAggregate::mean_per_participant() const {
  return format_permille(ratio_permille(total, participants));
}

std::vector<InteractionAggregate> interaction_report(std::span<const LedgerEvent> log,
                                                     const SliceFilter& filter) {
  require(filter.user_class == kAll || filter.user_class == "user" ||
              filter.user_class == "unaware-user",
          Errc::invalid_value, "unknown user class " + filter.user_class);

  struct Participant {
    std::string user_class;
    std::string cohort;
    std::array<std::int64_t, kAllCategories.size()> counts{};
  };
  std::set<std::string, std::less<>> cohorts = {std::string(kTreatment), std::string(kControl)};
  std::string default_cohort(kTreatment);
  std::map<std::string, Participant, std::less<>> participants;

  for (const auto& e : log) {
    switch (e.kind) {
      case EventKind::Register:
        if (e.payload.at("role") == "user") {
          participants[e.actor] = {e.payload.at("user_class").get<std::string>(), default_cohort, {}};
        }
        break;
      case EventKind::ConfigChange: {
        const auto op = e.payload.at("op").get<std::string>();
        if (op == "set_policy") {
          cohorts.insert(e.payload.at("policy").at("cohort_id").get<std::string>());
        } else if (op == "set_default_cohort") {
          default_cohort = e.payload.at("cohort").get<std::string>();
        } else if (op == "assign_cohort") {
          auto it = participants.find(e.payload.at("account").get<std::string>());
          if (it != participants.end()) it->second.cohort = e.payload.at("cohort").get<std::string>();
        }
        break;
      }
      default:
        if (auto category = categorize(e)) {
          auto it = participants.find(e.actor);
          if (it != participants.end()) ++it->second.counts[static_cast<std::size_t>(*category)];
        }
        break;
    }
  }
  require(filter.cohort == kAll || cohorts.contains(filter.cohort), Errc::unknown_cohort,
          "unknown cohort " + filter.cohort);

  std::vector<InteractionAggregate> report;
  for (auto category : kAllCategories) {
    report.push_back({category, filter.cohort, filter.user_class, 0, 0});
  }
  std::int64_t members = 0;
  for (const auto& [_, p] : participants) {
    if (filter.cohort != kAll && p.cohort != filter.cohort) continue;
    if (filter.user_class != kAll && p.user_class != filter.user_class) continue;
    ++members;
    for (std::size_t i = 0; i < report.size(); ++i) report[i].total += p.counts[i];
  }
  for (auto& row : report) row.participants = members;
  return report;
}

std::int64_t ContextPercentageRow::permille(ContextType ctype) const {
  switch (ctype) {
    case ContextType::Satisfaction: return ratio_permille(satisfaction, answers);
    case ContextType::Importance: return ratio_permille(importance, answers);
    case ContextType::Comment: return ratio_permille(comment, answers);
  }
  return 0;
}

std::vector<ContextPercentageRow> contextualization_percentage(std::span<const LedgerEvent> log) {
  std::map<std::uint64_t, QuestionType> question_types;
  std::map<std::uint64_t, QuestionType> answer_types;
  std::vector<ContextPercentageRow> rows;
  for (auto qtype : kAllQuestionTypes) rows.push_back({qtype, 0, 0, 0, 0});
  const auto row_of = [&](QuestionType t) -> ContextPercentageRow& {
    return rows[static_cast<std::size_t>(t)];
  };

  for (const auto& e : log) {
    if (e.kind == EventKind::CreateQuestion) {
      question_types[e.payload.at("question_id").get<std::uint64_t>()] =
          parse_question_type(e.payload.at("qtype").get<std::string>());
    } else if (e.kind == EventKind::Answer) {
      const auto answer_id = e.payload.at("answer_id").get<std::uint64_t>();
      const auto qtype = question_types.at(e.payload.at("question_id").get<std::uint64_t>());
      if (answer_types.emplace(answer_id, qtype).second) ++row_of(qtype).answers;
    } else if (e.kind == EventKind::Contextualize) {
      auto& row = row_of(answer_types.at(e.payload.at("answer_id").get<std::uint64_t>()));
      switch (parse_context_type(e.payload.at("ctype").get<std::string>())) {
        case ContextType::Satisfaction: ++row.satisfaction; break;
        case ContextType::Importance: ++row.importance; break;
        case ContextType::Comment: ++row.comment; break;
      }
    }
  }
  return rows;
}

AnswerDistribution differentiated_answers(const ApplicationState& state,
                                          std::uint64_t question_id,
                                          std::int64_t min_importance) {
  require(min_importance >= 0, Errc::invalid_value, "min_importance must be non-negative");
  const auto& book = state.feedback();
  const Question& q = book.question(question_id);
  AnswerDistribution dist{question_id, q.spec.qtype, 0, {}};
  if (is_choice(q.spec.qtype)) {
    dist.counts.assign(q.spec.options.size(), 0);
  } else if (q.spec.qtype == QuestionType::likert) {
    dist.counts.assign(static_cast<std::size_t>(q.spec.likert_points), 0);
  }

  for (const auto& [answer_id, a] : book.answers()) {
    if (a.question_id != question_id) continue;
    if (min_importance > 0) {
      const auto ctx = book.find_contextualization(answer_id, ContextType::Importance);
      if (!ctx) continue;
      const auto& rating = book.contextualizations().at(*ctx).rating;
      if (!rating || *rating < min_importance) continue;
    }
    ++dist.answers_considered;
    for (auto s : a.body.selections) ++dist.counts.at(static_cast<std::size_t>(s));
    if (a.body.likert_value) ++dist.counts.at(static_cast<std::size_t>(*a.body.likert_value));
  }
  return dist;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      rows.push_back(std::move(row));
      row.clear();
      field.clear();
      field_started = false;
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  require(!quoted, Errc::malformed_record, "unterminated quoted CSV field");
  if (field_started || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string to_csv(std::span<const InteractionAggregate> report) {
  std::string out = join_row(kInteractionHeader);
  for (const auto& r : report) {
    out += join_row({std::string(to_string(r.category)), r.cohort, r.user_class,
                     std::to_string(r.participants), std::to_string(r.total),
                     r.mean_per_participant()});
  }
  return out;
}

std::string to_csv(std::span<const ContextPercentageRow> report) {
  std::string out = join_row(kPercentageHeader);
  for (const auto& r : report) {
    out += join_row({std::string(to_string(r.qtype)), std::to_string(r.answers),
                     std::to_string(r.satisfaction), std::to_string(r.importance),
                     std::to_string(r.comment),
                     format_permille(r.permille(ContextType::Satisfaction)),
                     format_permille(r.permille(ContextType::Importance)),
                     format_permille(r.permille(ContextType::Comment))});
  }
  return out;
}

std::string to_csv(std::span<const LeaderboardEntry> report) {
  std::string out = join_row(kLeaderboardHeader);
  for (const auto& r : report) {
    out += join_row({std::to_string(r.rank), r.account, std::to_string(r.context_tokens_earned)});
  }
  return out;
}

std::vector<InteractionAggregate> parse_interaction_csv(std::string_view csv) {
  std::vector<InteractionAggregate> out;
  for (const auto& row : body_rows(csv, kInteractionHeader)) {
    InteractionAggregate r{parse_category(row[0]), row[1], row[2],
                           to_int(row[3], "participants"), to_int(row[4], "total")};
    require(r.mean_per_participant() == row[5], Errc::malformed_record,
            "mean does not match total / participants");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ContextPercentageRow> parse_context_percentage_csv(std::string_view csv) {
  std::vector<ContextPercentageRow> out;
  for (const auto& row : body_rows(csv, kPercentageHeader)) {
    ContextPercentageRow r{parse_question_type(row[0]), to_int(row[1], "answers"),
                           to_int(row[2], "satisfaction"), to_int(row[3], "importance"),
                           to_int(row[4], "comment")};
    require(format_permille(r.permille(ContextType::Satisfaction)) == row[5] &&
                format_permille(r.permille(ContextType::Importance)) == row[6] &&
                format_permille(r.permille(ContextType::Comment)) == row[7],
            Errc::malformed_record, "percentages do not match counts");
    out.push_back(r);
  }
  return out;
}

std::vector<LeaderboardEntry> parse_leaderboard_csv(std::string_view csv) {
  std::vector<LeaderboardEntry> out;
  for (const auto& row : body_rows(csv, kLeaderboardHeader)) {
    out.push_back({to_int(row[0], "rank"), row[1], to_int(row[2], "context_tokens_earned")});
  }
  return out;
}

}  // namespace feed4org
