#pragma once

// Solicited feedback: typed questions, shape-validated answers and the three
// contextualization dimensions attached to an answer.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace feed4org {

enum class QuestionType {
  choice_multiple,
  choice_multiple_single,
  choice_multiple_single_text,
  choice_multiple_text,
  choice_single,
  choice_single_text,
  likert,
  text_input,
};

inline constexpr std::array<QuestionType, 8> kAllQuestionTypes = {
    QuestionType::choice_multiple,      QuestionType::choice_multiple_single,
    QuestionType::choice_multiple_single_text, QuestionType::choice_multiple_text,
    QuestionType::choice_single,        QuestionType::choice_single_text,
    QuestionType::likert,               QuestionType::text_input,
};

std::string_view to_string(QuestionType qtype);
QuestionType parse_question_type(std::string_view name);

bool is_choice(QuestionType qtype);
bool allows_free_text(QuestionType qtype);
/// The two "choice-multiple-single" variants: a multi-select group plus a
/// group of mutually exclusive single-select options.
bool has_exclusive_group(QuestionType qtype);

/// True when the text has no non-whitespace character.
bool is_blank(std::string_view text);

/// Authoring form of a question (also its CreateQuestion payload).
struct QuestionSpec {
  std::string prompt;
  QuestionType qtype = QuestionType::choice_single;
  std::vector<std::string> options;
  /// Indices of options forming the single-select group. Only for
  /// choice-multiple-single(-text); empty otherwise.
  std::vector<std::int64_t> exclusive_options;
  std::int64_t likert_points = 5;

  bool operator==(const QuestionSpec&) const = default;
};

/// Throws invalid-spec.
void validate_question_spec(const QuestionSpec& spec);

nlohmann::json to_json(const QuestionSpec& spec);
/// Throws invalid-spec on a structurally broken document.
QuestionSpec question_spec_from_json(const nlohmann::json& doc);

struct Question {
  std::uint64_t question_id = 0;
  QuestionSpec spec;
  bool active = true;
  std::int64_t created_at = 0;
};

struct AnswerBody {
  std::vector<std::int64_t> selections;
  std::optional<std::int64_t> likert_value;
  std::optional<std::string> free_text;

  bool operator==(const AnswerBody&) const = default;
};

nlohmann::json to_json(const AnswerBody& body);
AnswerBody answer_body_from_json(const nlohmann::json& doc);

/// Throws shape-mismatch. Returns the body with selections sorted.
AnswerBody validate_answer_shape(const QuestionSpec& question, AnswerBody body);

enum class RewardStatus { rewarded, not_eligible, repeat_answer, treasury_exhausted };
std::string_view to_string(RewardStatus status);

struct Answer {
  std::uint64_t answer_id = 0;
  std::uint64_t question_id = 0;
  std::string account;
  AnswerBody body;
  std::int64_t timestamp = 0;
  std::int64_t revisions = 0;
  RewardStatus reward = RewardStatus::not_eligible;
};

enum class ContextType { Importance, Satisfaction, Comment };
inline constexpr std::array<ContextType, 3> kAllContextTypes = {
    ContextType::Importance, ContextType::Satisfaction, ContextType::Comment};

std::string_view to_string(ContextType ctype);
ContextType parse_context_type(std::string_view name);

inline constexpr std::int64_t kMaxRating = 4;

struct ContextValue {
  std::optional<std::int64_t> rating;
  std::optional<std::string> comment;
};

/// Throws invalid-value.
void validate_context_value(ContextType ctype, const ContextValue& value);

struct Contextualization {
  std::uint64_t context_id = 0;
  std::uint64_t answer_id = 0;
  ContextType ctype{};
  std::optional<std::int64_t> rating;
  std::optional<std::string> comment_text;
  std::int64_t timestamp = 0;
};

/// All solicited feedback state. Ids are assigned sequentially from 1 in
/// order of creation.
class FeedbackBook {
 public:
  std::uint64_t next_question_id() const { return questions_.size() + 1; }
  std::uint64_t next_answer_id() const { return answers_.size() + 1; }
  std::uint64_t next_context_id() const { return contexts_.size() + 1; }

  void check_create_question(const QuestionSpec& spec) const;
  const Question& create_question(const QuestionSpec& spec, std::int64_t timestamp);

  void check_set_active(std::uint64_t question_id) const;
  void set_active(std::uint64_t question_id, bool active);

  /// Existing answer id of (account, question) if any.
  std::optional<std::uint64_t> find_answer(const std::string& account,
                                           std::uint64_t question_id) const;

  /// Validates an answer submission. Returns the normalized body.
  AnswerBody check_answer(const std::string& account, std::uint64_t question_id,
                          const AnswerBody& body, bool allow_reanswer) const;
  /// First answers get a fresh id; re-answers overwrite the stored body.
  Answer& record_answer(const std::string& account, std::uint64_t question_id,
                        AnswerBody body, std::int64_t timestamp);

  void check_contextualize(const std::string& account, std::uint64_t answer_id,
                           ContextType ctype, const ContextValue& value) const;
  const Contextualization& record_contextualization(std::uint64_t answer_id, ContextType ctype,
                                                    ContextValue value, std::int64_t timestamp);

  const Question& question(std::uint64_t id) const;
  const Answer& answer(std::uint64_t id) const;
  Answer& answer_mut(std::uint64_t id);
  const std::map<std::uint64_t, Question>& questions() const { return questions_; }
  const std::map<std::uint64_t, Answer>& answers() const { return answers_; }
  const std::map<std::uint64_t, Contextualization>& contextualizations() const { return contexts_; }
  std::optional<std::uint64_t> find_contextualization(std::uint64_t answer_id,
                                                      ContextType ctype) const;

  nlohmann::json to_json() const;
  static FeedbackBook from_json(const nlohmann::json& doc);

 private:
  std::map<std::uint64_t, Question> questions_;
  std::map<std::uint64_t, Answer> answers_;
  std::map<std::pair<std::string, std::uint64_t>, std::uint64_t> answer_index_;
  std::map<std::uint64_t, Contextualization> contexts_;
  std::map<std::pair<std::uint64_t, ContextType>, std::uint64_t> context_index_;
};

}  // namespace feed4org
