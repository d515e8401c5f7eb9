#include "feed4org/feedback_model.hpp"

#include <algorithm>
#include <cctype>

#include "feed4org/error.hpp"

namespace feed4org {

using Json = nlohmann::json;

namespace {

constexpr std::array<std::string_view, 8> kTypeNames = {
    "choice-multiple",      "choice-multiple-single", "choice-multiple-single-text",
    "choice-multiple-text", "choice-single",          "choice-single-text",
    "likert",               "text-input",
};

constexpr std::int64_t kMaxLikertPoints = 100;

bool has_duplicates(std::vector<std::int64_t> values) {
  std::sort(values.begin(), values.end());
  return std::adjacent_find(values.begin(), values.end()) != values.end();
}

template <typename T>
T get_as(const Json& doc, const char* key, Errc code, T fallback) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    fail(code, std::string("field ") + key + " has the wrong type");
  }
}

}  // namespace

std::string_view to_string(QuestionType qtype) {
  return kTypeNames.at(static_cast<std::size_t>(qtype));
}

QuestionType parse_question_type(std::string_view name) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
    if (kTypeNames[i] == name) return static_cast<QuestionType>(i);
  }
  fail(Errc::invalid_spec, "unknown question type " + std::string(name));
}

bool is_choice(QuestionType qtype) {
  return qtype != QuestionType::likert && qtype != QuestionType::text_input;
}

bool allows_free_text(QuestionType qtype) {
  switch (qtype) {
    case QuestionType::choice_multiple_single_text:
    case QuestionType::choice_multiple_text:
    case QuestionType::choice_single_text:
    case QuestionType::text_input:
      return true;
    default:
      return false;
  }
}

bool has_exclusive_group(QuestionType qtype) {
  return qtype == QuestionType::choice_multiple_single ||
         qtype == QuestionType::choice_multiple_single_text;
}

bool is_blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

void validate_question_spec(const QuestionSpec& spec) {
  require(!is_blank(spec.prompt), Errc::invalid_spec, "prompt must not be empty");
  for (const auto& option : spec.options) {
    require(!is_blank(option), Errc::invalid_spec, "option labels must not be empty");
  }
  const auto option_count = static_cast<std::int64_t>(spec.options.size());

  if (is_choice(spec.qtype)) {
    require(option_count >= 2, Errc::invalid_spec,
            std::string(to_string(spec.qtype)) + " needs at least 2 options");
  } else if (spec.qtype == QuestionType::likert) {
    require(spec.likert_points >= 2 && spec.likert_points <= kMaxLikertPoints,
            Errc::invalid_spec, "likert_points must be in [2, 100]");
    require(spec.options.empty() || option_count == spec.likert_points, Errc::invalid_spec,
            "likert labels must match likert_points");
  } else {
    require(spec.options.empty(), Errc::invalid_spec, "text-input takes no options");
  }

  if (has_exclusive_group(spec.qtype)) {
    require(!spec.exclusive_options.empty(), Errc::invalid_spec,
            "choice-multiple-single needs at least one exclusive option");
    require(!has_duplicates(spec.exclusive_options), Errc::invalid_spec,
            "exclusive options repeat");
    for (auto index : spec.exclusive_options) {
      require(index >= 0 && index < option_count, Errc::invalid_spec,
              "exclusive option index out of range");
    }
    require(static_cast<std::int64_t>(spec.exclusive_options.size()) < option_count,
            Errc::invalid_spec, "choice-multiple-single needs a multi-select option");
  } else {
    require(spec.exclusive_options.empty(), Errc::invalid_spec,
            "exclusive options only apply to choice-multiple-single types");
  }
}

Json to_json(const QuestionSpec& spec) {
  return {{"prompt", spec.prompt},
          {"qtype", to_string(spec.qtype)},
          {"options", spec.options},
          {"exclusive_options", spec.exclusive_options},
          {"likert_points", spec.likert_points}};
}

QuestionSpec question_spec_from_json(const Json& doc) {
  require(doc.is_object(), Errc::invalid_spec, "question spec must be an object");
  QuestionSpec spec;
  spec.prompt = get_as<std::string>(doc, "prompt", Errc::invalid_spec, "");
  spec.qtype = parse_question_type(get_as<std::string>(doc, "qtype", Errc::invalid_spec, ""));
  spec.options = get_as<std::vector<std::string>>(doc, "options", Errc::invalid_spec, {});
  spec.exclusive_options =
      get_as<std::vector<std::int64_t>>(doc, "exclusive_options", Errc::invalid_spec, {});
  spec.likert_points = get_as<std::int64_t>(doc, "likert_points", Errc::invalid_spec, 5);
  return spec;
}

Json to_json(const AnswerBody& body) {
  Json doc = {{"selections", body.selections}};
  if (body.likert_value) doc["likert_value"] = *body.likert_value;
  if (body.free_text) doc["free_text"] = *body.free_text;
  return doc;
}

AnswerBody answer_body_from_json(const Json& doc) {
  require(doc.is_object(), Errc::shape_mismatch, "answer body must be an object");
  AnswerBody body;
  body.selections = get_as<std::vector<std::int64_t>>(doc, "selections", Errc::shape_mismatch, {});
  if (doc.contains("likert_value") && !doc["likert_value"].is_null()) {
    body.likert_value = get_as<std::int64_t>(doc, "likert_value", Errc::shape_mismatch, 0);
  }
  if (doc.contains("free_text") && !doc["free_text"].is_null()) {
    body.free_text = get_as<std::string>(doc, "free_text", Errc::shape_mismatch, "");
  }
  return body;
}

AnswerBody validate_answer_shape(const QuestionSpec& question, AnswerBody body) {
  const auto qtype = question.qtype;
  const std::string name(to_string(qtype));
  const auto option_count = static_cast<std::int64_t>(question.options.size());

  if (body.free_text) {
    require(allows_free_text(qtype), Errc::shape_mismatch, name + " takes no free text");
    require(!is_blank(*body.free_text), Errc::shape_mismatch, "free text must not be empty");
  }

  if (qtype == QuestionType::likert) {
    require(body.selections.empty(), Errc::shape_mismatch, "likert takes no selections");
    require(body.likert_value.has_value(), Errc::shape_mismatch, "likert needs likert_value");
    require(*body.likert_value >= 0 && *body.likert_value < question.likert_points,
            Errc::shape_mismatch,
            "likert_value must be in [0, " + std::to_string(question.likert_points - 1) + "]");
    return body;
  }
  require(!body.likert_value, Errc::shape_mismatch, name + " takes no likert_value");

  if (qtype == QuestionType::text_input) {
    require(body.selections.empty(), Errc::shape_mismatch, "text-input takes no selections");
    require(body.free_text.has_value(), Errc::shape_mismatch, "text-input needs free text");
    return body;
  }

  std::sort(body.selections.begin(), body.selections.end());
  require(std::adjacent_find(body.selections.begin(), body.selections.end()) ==
              body.selections.end(),
          Errc::shape_mismatch, "selections repeat");
  for (auto index : body.selections) {
    require(index >= 0 && index < option_count, Errc::shape_mismatch,
            "selection " + std::to_string(index) + " out of range");
  }

  switch (qtype) {
    case QuestionType::choice_single:
    case QuestionType::choice_single_text:
      require(body.selections.size() == 1, Errc::shape_mismatch,
              name + " needs exactly one selection");
      break;
    case QuestionType::choice_multiple:
    case QuestionType::choice_multiple_text:
      require(!body.selections.empty(), Errc::shape_mismatch,
              name + " needs at least one selection");
      break;
    case QuestionType::choice_multiple_single:
    case QuestionType::choice_multiple_single_text: {
      require(!body.selections.empty(), Errc::shape_mismatch,
              name + " needs at least one selection");
      const auto& exclusive = question.exclusive_options;
      const auto exclusive_picked = std::count_if(
          body.selections.begin(), body.selections.end(), [&](std::int64_t s) {
            return std::find(exclusive.begin(), exclusive.end(), s) != exclusive.end();
          });
      require(exclusive_picked == 0 || body.selections.size() == 1, Errc::shape_mismatch,
              "an exclusive option must be selected alone");
      break;
    }
    default:
      break;
  }
  return body;
}

std::string_view to_string(RewardStatus status) {
  switch (status) {
    case RewardStatus::rewarded: return "rewarded";
    case RewardStatus::not_eligible: return "not-eligible";
    case RewardStatus::repeat_answer: return "repeat-answer";
    case RewardStatus::treasury_exhausted: return "treasury-exhausted";
  }
  return "not-eligible";
}

namespace {
RewardStatus parse_reward_status(std::string_view name) {
  for (auto s : {RewardStatus::rewarded, RewardStatus::not_eligible, RewardStatus::repeat_answer,
                 RewardStatus::treasury_exhausted}) {
    if (to_string(s) == name) return s;
  }
  fail(Errc::invalid_value, "unknown reward status " + std::string(name));
}
}  // namespace

std::string_view to_string(ContextType ctype) {
  switch (ctype) {
    case ContextType::Importance: return "Importance";
    case ContextType::Satisfaction: return "Satisfaction";
    case ContextType::Comment: return "Comment";
  }
  return "Importance";
}

ContextType parse_context_type(std::string_view name) {
  for (auto ctype : kAllContextTypes) {
    if (to_string(ctype) == name) return ctype;
  }
  fail(Errc::invalid_value, "unknown contextualization type " + std::string(name));
}

void validate_context_value(ContextType ctype, const ContextValue& value) {
  if (ctype == ContextType::Comment) {
    require(!value.rating, Errc::invalid_value, "Comment takes no rating");
    require(value.comment && !is_blank(*value.comment), Errc::invalid_value,
            "Comment needs non-empty text");
  } else {
    require(!value.comment, Errc::invalid_value,
            std::string(to_string(ctype)) + " takes no comment text");
    require(value.rating && *value.rating >= 0 && *value.rating <= kMaxRating,
            Errc::invalid_value, std::string(to_string(ctype)) + " needs a rating in [0, 4]");
  }
}

void FeedbackBook::check_create_question(const QuestionSpec& spec) const {
  validate_question_spec(spec);
}

const Question& FeedbackBook::create_question(const QuestionSpec& spec, std::int64_t timestamp) {
  check_create_question(spec);
  const auto id = next_question_id();
  return questions_.emplace(id, Question{id, spec, true, timestamp}).first->second;
}

void FeedbackBook::check_set_active(std::uint64_t question_id) const { question(question_id); }

void FeedbackBook::set_active(std::uint64_t question_id, bool active) {
  check_set_active(question_id);
  questions_.at(question_id).active = active;
}

std::optional<std::uint64_t> FeedbackBook::find_answer(const std::string& account,
                                                       std::uint64_t question_id) const {
  auto it = answer_index_.find({account, question_id});
  if (it == answer_index_.end()) return std::nullopt;
  return it->second;
}

AnswerBody FeedbackBook::check_answer(const std::string& account, std::uint64_t question_id,
                                      const AnswerBody& body, bool allow_reanswer) const {
  const Question& q = question(question_id);
  require(q.active, Errc::question_inactive,
          "question " + std::to_string(question_id) + " is not active");
  AnswerBody normalized = validate_answer_shape(q.spec, body);
  require(allow_reanswer || !find_answer(account, question_id), Errc::duplicate_answer,
          account + " already answered question " + std::to_string(question_id));
  return normalized;
}

Answer& FeedbackBook::record_answer(const std::string& account, std::uint64_t question_id,
                                    AnswerBody body, std::int64_t timestamp) {
  if (auto existing = find_answer(account, question_id)) {
    Answer& a = answers_.at(*existing);
    a.body = std::move(body);
    a.timestamp = timestamp;
    ++a.revisions;
    return a;
  }
  const auto id = next_answer_id();
  answer_index_.emplace(std::make_pair(account, question_id), id);
  Answer a{id, question_id, account, std::move(body), timestamp, 0, RewardStatus::not_eligible};
  return answers_.emplace(id, std::move(a)).first->second;
}

void FeedbackBook::check_contextualize(const std::string& account, std::uint64_t answer_id,
                                       ContextType ctype, const ContextValue& value) const {
  const Answer& a = answer(answer_id);
  require(a.account == account, Errc::foreign_answer,
          "answer " + std::to_string(answer_id) + " belongs to another account");
  require(!context_index_.contains({answer_id, ctype}), Errc::duplicate_contextualization,
          "answer " + std::to_string(answer_id) + " already has " +
              std::string(to_string(ctype)));
  validate_context_value(ctype, value);
}

const Contextualization& FeedbackBook::record_contextualization(std::uint64_t answer_id,
                                                                ContextType ctype,
                                                                ContextValue value,
                                                                std::int64_t timestamp) {
  const auto id = next_context_id();
  context_index_.emplace(std::make_pair(answer_id, ctype), id);
  Contextualization c{id, answer_id, ctype, value.rating, std::move(value.comment), timestamp};
  return contexts_.emplace(id, std::move(c)).first->second;
}

const Question& FeedbackBook::question(std::uint64_t id) const {
  auto it = questions_.find(id);
  require(it != questions_.end(), Errc::unknown_question, "unknown question " + std::to_string(id));
  return it->second;
}

const Answer& FeedbackBook::answer(std::uint64_t id) const {
  auto it = answers_.find(id);
  require(it != answers_.end(), Errc::unknown_answer, "unknown answer " + std::to_string(id));
  return it->second;
}

Answer& FeedbackBook::answer_mut(std::uint64_t id) {
  auto it = answers_.find(id);
  require(it != answers_.end(), Errc::unknown_answer, "unknown answer " + std::to_string(id));
  return it->second;
}

std::optional<std::uint64_t> FeedbackBook::find_contextualization(std::uint64_t answer_id,
                                                                  ContextType ctype) const {
  auto it = context_index_.find({answer_id, ctype});
  if (it == context_index_.end()) return std::nullopt;
  return it->second;
}

Json FeedbackBook::to_json() const {
  Json questions = Json::array();
  for (const auto& [id, q] : questions_) {
    Json entry = feed4org::to_json(q.spec);
    entry["question_id"] = id;
    entry["active"] = q.active;
    entry["created_at"] = q.created_at;
    questions.push_back(std::move(entry));
  }
  Json answers = Json::array();
  for (const auto& [id, a] : answers_) {
    Json entry = feed4org::to_json(a.body);
    entry["answer_id"] = id;
    entry["question_id"] = a.question_id;
    entry["account"] = a.account;
    entry["timestamp"] = a.timestamp;
    entry["revisions"] = a.revisions;
    entry["reward"] = to_string(a.reward);
    answers.push_back(std::move(entry));
  }
  Json contexts = Json::array();
  for (const auto& [id, c] : contexts_) {
    Json entry = {{"context_id", id},
                  {"answer_id", c.answer_id},
                  {"ctype", to_string(c.ctype)},
                  {"timestamp", c.timestamp}};
    if (c.rating) entry["rating"] = *c.rating;
    if (c.comment_text) entry["comment"] = *c.comment_text;
    contexts.push_back(std::move(entry));
  }
  return {{"questions", questions}, {"answers", answers}, {"contextualizations", contexts}};
}

FeedbackBook FeedbackBook::from_json(const Json& doc) {
  FeedbackBook book;
  for (const auto& entry : doc.at("questions")) {
    const auto id = entry.at("question_id").get<std::uint64_t>();
    book.questions_.emplace(id, Question{id, question_spec_from_json(entry),
                                         entry.at("active").get<bool>(),
                                         entry.at("created_at").get<std::int64_t>()});
  }
  for (const auto& entry : doc.at("answers")) {
    Answer a;
    a.answer_id = entry.at("answer_id").get<std::uint64_t>();
    a.question_id = entry.at("question_id").get<std::uint64_t>();
    a.account = entry.at("account").get<std::string>();
    a.body = answer_body_from_json(entry);
    a.timestamp = entry.at("timestamp").get<std::int64_t>();
    a.revisions = entry.at("revisions").get<std::int64_t>();
    a.reward = parse_reward_status(entry.at("reward").get<std::string>());
    book.answer_index_.emplace(std::make_pair(a.account, a.question_id), a.answer_id);
    book.answers_.emplace(a.answer_id, std::move(a));
  }
  for (const auto& entry : doc.at("contextualizations")) {
    Contextualization c;
    c.context_id = entry.at("context_id").get<std::uint64_t>();
    c.answer_id = entry.at("answer_id").get<std::uint64_t>();
    c.ctype = parse_context_type(entry.at("ctype").get<std::string>());
    c.timestamp = entry.at("timestamp").get<std::int64_t>();
    if (entry.contains("rating")) c.rating = entry.at("rating").get<std::int64_t>();
    if (entry.contains("comment")) c.comment_text = entry.at("comment").get<std::string>();
    book.context_index_.emplace(std::make_pair(c.answer_id, c.ctype), c.context_id);
    book.contexts_.emplace(c.context_id, std::move(c));
  }
  return book;
}

}  // namespace feed4org
