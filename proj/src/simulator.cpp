#include "feed4org/simulator.hpp"

#include <algorithm>
#include <memory>
#include <numeric>
#include <variant>

#include "feed4org/decimal.hpp"
#include "feed4org/error.hpp"

namespace feed4org {

// Table order: choice-multiple, choice-multiple-single,
// choice-multiple-single-text, choice-multiple-text, choice-single,
// choice-single-text, likert, text-input.
const std::array<std::int64_t, 8> kStudyAnswers = {1704, 1324, 918, 952, 8363, 668, 3531, 3826};
const std::array<std::array<std::int64_t, 3>, 8> kStudyContextPermille = {{
    {301, 290, 124},
    {286, 272, 88},
    {291, 258, 73},
    {268, 257, 68},
    {276, 263, 91},
    {270, 271, 96},
    {287, 270, 127},
    {290, 267, 97},
}};

namespace {

constexpr std::int64_t kStudyPosts = 55;
constexpr std::array<std::int64_t, 3> kStudyContextTotals = {6018, 5692, 2107};
constexpr std::array<std::int64_t, 4> kStudyNavigations = {6990, 3605, 3094, 549};
constexpr std::int64_t kStudyParticipants = 132;

// Participants per segment and per-segment means (x10) from the study.
constexpr std::array<std::int64_t, 4> kSegmentSizes = {18, 54, 15, 45};
constexpr std::array<std::int64_t, 4> kAnswerMeans = {715, 1897, 639, 1955};
constexpr std::array<std::int64_t, 4> kPostMeans = {8, 5, 2, 2};
constexpr std::array<std::array<std::int64_t, 4>, 4> kNavMeans = {{
    {199, 656, 158, 633},  // question
    {110, 359, 103, 292},  // statistics
    {146, 303, 78, 239},   // open feedback
    {30, 50, 14, 45},      // about
}};

constexpr std::array<View, 4> kViews = {View::question, View::statistics, View::open_feedback,
                                        View::about};

std::int64_t round_permille(std::int64_t permille, std::int64_t n) {
  return (2 * permille * n + 1000) / 2000;
}

bool is_treatment(Segment s) {
  return s == Segment::treatment_user || s == Segment::treatment_unaware;
}

bool is_unaware(Segment s) {
  return s == Segment::control_unaware || s == Segment::treatment_unaware;
}

QuestionSpec simulated_question(QuestionType qtype, std::size_t index) {
  QuestionSpec spec;
  spec.qtype = qtype;
  spec.prompt = "Simulated " + std::string(to_string(qtype)) + " question " +
                std::to_string(index + 1);
  if (is_choice(qtype)) {
    spec.options = {"Option A", "Option B", "Option C", "Option D"};
    if (has_exclusive_group(qtype)) {
      spec.options.back() = "None of these";
      spec.exclusive_options = {3};
    }
  }
  return spec;
}

const std::array<const char*, 6> kPhrases = {
    "Longer opening hours on weekends would help.",
    "The quiet zone is often noisy.",
    "More power outlets near the desks, please.",
    "E-book access from home is great.",
    "The search interface is hard to use.",
    "Staff at the info desk were very helpful.",
};

AnswerBody simulated_body(const QuestionSpec& spec, SeededRng& rng) {
  AnswerBody body;
  const auto n = static_cast<std::int64_t>(spec.options.size());
  switch (spec.qtype) {
    case QuestionType::choice_single:
    case QuestionType::choice_single_text:
      body.selections = {static_cast<std::int64_t>(rng.below(n))};
      break;
    case QuestionType::choice_multiple:
    case QuestionType::choice_multiple_text:
    case QuestionType::choice_multiple_single:
    case QuestionType::choice_multiple_single_text: {
      std::vector<std::int64_t> pool;
      for (std::int64_t i = 0; i < n; ++i) {
        const bool exclusive = std::find(spec.exclusive_options.begin(),
                                         spec.exclusive_options.end(),
                                         i) != spec.exclusive_options.end();
        if (!exclusive) pool.push_back(i);
      }
      if (!spec.exclusive_options.empty() && rng.chance(1, 5)) {
        body.selections = {spec.exclusive_options.front()};
        break;
      }
      rng.shuffle(pool);
      const auto take = 1 + rng.below(pool.size());
      body.selections.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
      std::sort(body.selections.begin(), body.selections.end());
      break;
    }
    case QuestionType::likert:
      body.likert_value = static_cast<std::int64_t>(rng.below(spec.likert_points));
      break;
    case QuestionType::text_input:
      body.free_text = kPhrases[rng.below(kPhrases.size())];
      break;
  }
  if (spec.qtype != QuestionType::text_input && allows_free_text(spec.qtype) && rng.chance(3, 10)) {
    body.free_text = kPhrases[rng.below(kPhrases.size())];
  }
  return body;
}

struct AnswerAction {
  std::size_t user;
  std::uint64_t question_id;
  std::size_t qtype_index;
  std::vector<ContextType> contexts;
};
struct PostAction {
  std::size_t user;
};
struct NavAction {
  std::size_t user;
  View view;
};
using Action = std::variant<AnswerAction, PostAction, NavAction>;

FixtureTargets random_targets(std::size_t users, SeededRng& rng) {
  FixtureTargets t;
  const auto scale = static_cast<std::int64_t>(users);
  const std::int64_t total_answers = scale * static_cast<std::int64_t>(30 + rng.below(21));
  const auto per_type = apportion(total_answers, {kStudyAnswers.begin(), kStudyAnswers.end()});
  for (std::size_t q = 0; q < 8; ++q) {
    t.answers[q] = per_type[q];
    for (std::size_t c = 0; c < 3; ++c) {
      t.contexts[q][c] = round_permille(kStudyContextPermille[q][c], per_type[q]);
    }
  }
  t.posts = std::max<std::int64_t>(1, kStudyPosts * scale / kStudyParticipants);
  for (std::size_t v = 0; v < 4; ++v) {
    t.navigations[v] = kStudyNavigations[v] * scale / kStudyParticipants;
  }
  return t;
}

}  // namespace

FixtureTargets rounded_percentage_fixture() {
  FixtureTargets t;
  t.answers = kStudyAnswers;
  for (std::size_t q = 0; q < 8; ++q) {
    for (std::size_t c = 0; c < 3; ++c) {
      t.contexts[q][c] = round_permille(kStudyContextPermille[q][c], kStudyAnswers[q]);
    }
  }
  return t;
}

FixtureTargets app_interactions_fixture() {
  FixtureTargets t = rounded_percentage_fixture();
  t.posts = kStudyPosts;
  t.navigations = kStudyNavigations;
  // Move per-cell counts towards the column totals while every cell keeps
  // reporting within one permille of its study rate.
  for (std::size_t c = 0; c < 3; ++c) {
    auto sum = [&] {
      std::int64_t s = 0;
      for (std::size_t q = 0; q < 8; ++q) s += t.contexts[q][c];
      return s;
    };
    while (sum() != kStudyContextTotals[c]) {
      const std::int64_t step = sum() < kStudyContextTotals[c] ? 1 : -1;
      std::optional<std::size_t> best;
      for (std::size_t q = 0; q < 8; ++q) {
        const auto moved = ratio_permille(t.contexts[q][c] + step, t.answers[q]);
        if (std::abs(moved - kStudyContextPermille[q][c]) > 1) continue;
        if (!best || t.answers[q] > t.answers[*best]) best = q;
      }
      require(best.has_value(), Errc::invalid_value, "context totals unreachable");
      t.contexts[*best][c] += step;
    }
  }
  return t;
}

std::uint64_t SeededRng::below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  // Rejection sampling keeps the result uniform and portable.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

std::vector<std::int64_t> apportion(std::int64_t total, const std::vector<std::int64_t>& weights) {
  std::vector<std::int64_t> out(weights.size(), 0);
  const std::int64_t sum = std::accumulate(weights.begin(), weights.end(), std::int64_t{0});
  if (sum <= 0 || total <= 0) return out;
  std::vector<std::pair<std::int64_t, std::size_t>> remainders;
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out[i] = total * weights[i] / sum;
    assigned += out[i];
    remainders.emplace_back(total * weights[i] % sum, i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++out[remainders[k].second];
  return out;
}

std::function<std::int64_t()> simulation_clock() {
  auto now = std::make_shared<std::int64_t>(1'620'028'800'000);
  return [now] {
    const auto t = *now;
    *now += 1500;
    return t;
  };
}

SimulationSummary simulate(Platform& platform, const SimulationConfig& config) {
  require(config.users > 0, Errc::invalid_value, "simulation needs at least one user");
  SeededRng rng(config.seed);
  const FixtureTargets targets = config.targets ? *config.targets : random_targets(config.users, rng);

  ServiceConfig service_config;
  service_config.area_tags = default_area_tags();
  initialize(platform, service_config, config.money_supply);
  const std::string op(kOperator);
  const std::vector<std::string> tags(service_config.area_tags.begin(),
                                      service_config.area_tags.end());

  SimulationSummary summary;

  // Participants, split into the four study segments.
  const auto sizes = apportion(static_cast<std::int64_t>(config.users),
                               {kSegmentSizes.begin(), kSegmentSizes.end()});
  std::vector<std::string> users;
  std::vector<Segment> segments;
  std::vector<std::int64_t> jitter;
  for (std::size_t s = 0; s < 4; ++s) {
    const auto segment = static_cast<Segment>(s);
    for (std::int64_t i = 0; i < sizes[s]; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "sim-u%04zu", users.size() + 1);
      users.emplace_back(name);
      segments.push_back(segment);
      jitter.push_back(50 + static_cast<std::int64_t>(rng.below(101)));
      platform.register_account(users.back(), Role::user,
                                is_unaware(segment) ? UserClass::unaware_user : UserClass::user);
      platform.assign_cohort(op, users.back(),
                             std::string(is_treatment(segment) ? kTreatment : kControl));
    }
  }
  summary.users = users.size();
  const auto weights = [&](const std::array<std::int64_t, 4>& means) {
    std::vector<std::int64_t> w;
    for (std::size_t u = 0; u < users.size(); ++u) {
      w.push_back(means[static_cast<std::size_t>(segments[u])] * jitter[u]);
    }
    return w;
  };

  // Questions: enough of each type that every user can answer its quota
  // without repeating a question.
  const auto answer_weights = weights(kAnswerMeans);
  std::vector<Action> actions;
  for (std::size_t q = 0; q < 8; ++q) {
    const auto qtype = kAllQuestionTypes[q];
    const auto quota = apportion(targets.answers[q], answer_weights);
    const auto needed = std::max<std::int64_t>(1, *std::max_element(quota.begin(), quota.end()));
    std::vector<std::uint64_t> ids;
    for (std::int64_t i = 0; i < needed; ++i) {
      ids.push_back(platform.create_question(op, simulated_question(qtype, static_cast<std::size_t>(i))));
    }
    summary.questions += ids.size();

    std::vector<std::size_t> typed_actions;
    for (std::size_t u = 0; u < users.size(); ++u) {
      auto pool = ids;
      rng.shuffle(pool);
      for (std::int64_t k = 0; k < quota[u]; ++k) {
        typed_actions.push_back(actions.size());
        actions.emplace_back(AnswerAction{u, pool[static_cast<std::size_t>(k)], q, {}});
      }
    }
    for (std::size_t c = 0; c < 3; ++c) {
      require(targets.contexts[q][c] <= targets.answers[q], Errc::invalid_value,
              "more contextualizations than answers");
      auto picks = typed_actions;
      rng.shuffle(picks);
      for (std::int64_t k = 0; k < targets.contexts[q][c]; ++k) {
        std::get<AnswerAction>(actions[picks[static_cast<std::size_t>(k)]])
            .contexts.push_back(kAllContextTypes[c]);
      }
    }
  }

  const auto post_quota = apportion(targets.posts, weights(kPostMeans));
  for (std::size_t u = 0; u < users.size(); ++u) {
    for (std::int64_t k = 0; k < post_quota[u]; ++k) actions.emplace_back(PostAction{u});
  }
  for (std::size_t v = 0; v < 4; ++v) {
    const auto nav_quota = apportion(targets.navigations[v], weights(kNavMeans[v]));
    for (std::size_t u = 0; u < users.size(); ++u) {
      for (std::int64_t k = 0; k < nav_quota[u]; ++k) actions.emplace_back(NavAction{u, kViews[v]});
    }
  }
  rng.shuffle(actions);

  std::vector<std::uint64_t> posts;
  for (const auto& action : actions) {
    if (const auto* a = std::get_if<AnswerAction>(&action)) {
      const auto spec = platform.read([&](const ApplicationState& s) {
        return s.feedback().question(a->question_id).spec;
      });
      const auto receipt =
          platform.submit_answer(users[a->user], a->question_id, simulated_body(spec, rng));
      ++summary.answers;
      auto contexts = a->contexts;
      rng.shuffle(contexts);
      for (auto ctype : contexts) {
        ContextValue value;
        if (ctype == ContextType::Comment) {
          value.comment = kPhrases[rng.below(kPhrases.size())];
        } else {
          value.rating = static_cast<std::int64_t>(rng.below(kMaxRating + 1));
        }
        platform.contextualize(users[a->user], receipt.answer_id, ctype, value);
        ++summary.contextualizations;
      }
    } else if (const auto* p = std::get_if<PostAction>(&action)) {
      std::set<std::string> post_tags = {tags[rng.below(tags.size())]};
      if (rng.chance(1, 3)) post_tags.insert(tags[rng.below(tags.size())]);
      posts.push_back(
          platform.create_post(users[p->user], kPhrases[rng.below(kPhrases.size())], post_tags));
      ++summary.posts;
    } else {
      const auto& n = std::get<NavAction>(action);
      platform.navigate(users[n.user], n.view);
      ++summary.navigations;
    }
  }

  if (config.votes_and_comments) {
    for (auto post_id : posts) {
      const auto author = platform.read(
          [&](const ApplicationState& s) { return s.wall().post(post_id).author; });
      for (std::size_t u = 0; u < users.size(); ++u) {
        if (users[u] == author || !rng.chance(1, 6)) continue;
        const auto affordable = platform.read([&](const ApplicationState& s) {
          return s.tokens().balance(users[u], TokenId::Context) >=
                 s.incentives().vote_cost(s.tokens(), users[u]);
        });
        if (!affordable) continue;
        platform.cast_vote(users[u], post_id,
                           rng.chance(3, 4) ? VoteDirection::up : VoteDirection::down);
        ++summary.votes;
      }
      const auto replies = rng.below(3);
      for (std::uint64_t k = 0; k < replies; ++k) {
        platform.add_comment(users[rng.below(users.size())], post_id,
                             kPhrases[rng.below(kPhrases.size())]);
        ++summary.comments;
      }
    }
  }

  summary.events = platform.event_count();
  return summary;
}

}  // namespace feed4org
