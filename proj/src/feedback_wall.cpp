#include "feed4org/feedback_wall.hpp"

#include <algorithm>

#include "feed4org/error.hpp"
#include "feed4org/feedback_model.hpp"

namespace feed4org {

using Json = nlohmann::json;

std::string_view to_string(VoteDirection direction) {
  return direction == VoteDirection::up ? "up" : "down";
}

VoteDirection parse_vote_direction(std::string_view name) {
  if (name == "up") return VoteDirection::up;
  if (name == "down") return VoteDirection::down;
  fail(Errc::invalid_value, "vote direction must be up or down");
}

bool ranks_before(const RankItem& a, const RankItem& b) {
  const auto net_a = a.up - a.down;
  const auto net_b = b.up - b.down;
  if (net_a != net_b) return net_a > net_b;
  if (a.created_at != b.created_at) return a.created_at > b.created_at;
  return a.id > b.id;
}

void rank_in_place(std::span<RankItem> items) {
  std::sort(items.begin(), items.end(), ranks_before);
}

void FeedbackWall::check_post(const std::string& text, const std::set<std::string>& tags) const {
  require(!is_blank(text), Errc::empty_text, "post text must not be empty");
  for (const auto& tag : tags) {
    require(vocabulary_.contains(tag), Errc::unknown_tag, "unknown area tag " + tag);
  }
}

const WallPost& FeedbackWall::create_post(const std::string& author, std::string text,
                                          std::set<std::string> tags, std::int64_t created_at) {
  check_post(text, tags);
  const auto id = next_post_id();
  WallPost post{id, author, std::move(text), std::move(tags), created_at, 0, 0, {}};
  return posts_.emplace(id, std::move(post)).first->second;
}

void FeedbackWall::check_vote(const std::string& voter, std::uint64_t post_id) const {
  const WallPost& p = post(post_id);
  require(p.author != voter, Errc::self_vote, "cannot vote on your own post");
  require(!votes_.contains({voter, post_id}), Errc::duplicate_vote,
          voter + " already voted on post " + std::to_string(post_id));
}

const WallPost& FeedbackWall::record_vote(const std::string& voter, std::uint64_t post_id,
                                          VoteDirection direction, std::int64_t cost_paid) {
  check_vote(voter, post_id);
  WallPost& p = posts_.at(post_id);
  (direction == VoteDirection::up ? p.up_votes : p.down_votes) += 1;
  votes_.emplace(std::make_pair(voter, post_id), Vote{voter, post_id, direction, cost_paid});
  return p;
}

void FeedbackWall::check_comment(std::uint64_t post_id, const std::string& text) const {
  post(post_id);
  require(!is_blank(text), Errc::empty_text, "comment text must not be empty");
}

const PostComment& FeedbackWall::add_comment(const std::string& author, std::uint64_t post_id,
                                             std::string text, std::int64_t created_at) {
  check_comment(post_id, text);
  const auto id = next_comment_id();
  posts_.at(post_id).comment_ids.push_back(id);
  return comments_.emplace(id, PostComment{id, post_id, author, std::move(text), created_at})
      .first->second;
}

void FeedbackWall::check_message(const std::string& text) const {
  require(!is_blank(text), Errc::empty_text, "message text must not be empty");
}

const DirectMessage& FeedbackWall::send_message(const std::string& from, const std::string& to,
                                                std::string text, std::int64_t created_at) {
  check_message(text);
  const auto id = next_message_id();
  return messages_.emplace(id, DirectMessage{id, from, to, std::move(text), created_at})
      .first->second;
}

std::vector<DirectMessage> FeedbackWall::inbox(const std::string& account) const {
  std::vector<DirectMessage> out;
  for (const auto& [_, m] : messages_) {
    if (m.to == account) out.push_back(m);
  }
  return out;
}

std::vector<DirectMessage> FeedbackWall::thread(const std::string& viewer, const std::string& a,
                                                const std::string& b) const {
  require(viewer == a || viewer == b, Errc::access_denied,
          "messages are readable only by their two parties");
  std::vector<DirectMessage> out;
  for (const auto& [_, m] : messages_) {
    if ((m.from == a && m.to == b) || (m.from == b && m.to == a)) out.push_back(m);
  }
  return out;
}

const WallPost& FeedbackWall::post(std::uint64_t id) const {
  auto it = posts_.find(id);
  require(it != posts_.end(), Errc::unknown_post, "unknown post " + std::to_string(id));
  return it->second;
}

std::vector<PostComment> FeedbackWall::comments_of(std::uint64_t post_id) const {
  std::vector<PostComment> out;
  for (auto id : post(post_id).comment_ids) out.push_back(comments_.at(id));
  return out;
}

std::vector<WallPost> FeedbackWall::ranked() const {
  std::vector<RankItem> items;
  items.reserve(posts_.size());
  for (const auto& [id, p] : posts_) items.push_back({id, p.up_votes, p.down_votes, p.created_at});
  rank_in_place(items);
  std::vector<WallPost> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(posts_.at(item.id));
  return out;
}

Json FeedbackWall::to_json() const {
  Json posts = Json::array();
  for (const auto& [id, p] : posts_) {
    posts.push_back({{"post_id", id},
                     {"author", p.author},
                     {"text", p.text},
                     {"tags", p.area_tags},
                     {"created_at", p.created_at},
                     {"up_votes", p.up_votes},
                     {"down_votes", p.down_votes},
                     {"comment_ids", p.comment_ids}});
  }
  Json votes = Json::array();
  for (const auto& [_, v] : votes_) {
    votes.push_back({{"voter", v.voter},
                     {"post_id", v.post_id},
                     {"direction", to_string(v.direction)},
                     {"cost_paid", v.cost_paid}});
  }
  Json comments = Json::array();
  for (const auto& [id, c] : comments_) {
    comments.push_back({{"comment_id", id},
                        {"post_id", c.post_id},
                        {"author", c.author},
                        {"text", c.text},
                        {"created_at", c.created_at}});
  }
  Json messages = Json::array();
  for (const auto& [id, m] : messages_) {
    messages.push_back({{"message_id", id},
                        {"from", m.from},
                        {"to", m.to},
                        {"text", m.text},
                        {"created_at", m.created_at}});
  }
  return {{"vocabulary", vocabulary_},
          {"posts", posts},
          {"votes", votes},
          {"comments", comments},
          {"messages", messages}};
}

FeedbackWall FeedbackWall::from_json(const Json& doc) {
  FeedbackWall wall;
  wall.vocabulary_ = doc.at("vocabulary").get<std::set<std::string>>();
  for (const auto& e : doc.at("posts")) {
    WallPost p;
    p.post_id = e.at("post_id").get<std::uint64_t>();
    p.author = e.at("author").get<std::string>();
    p.text = e.at("text").get<std::string>();
    p.area_tags = e.at("tags").get<std::set<std::string>>();
    p.created_at = e.at("created_at").get<std::int64_t>();
    p.up_votes = e.at("up_votes").get<std::int64_t>();
    p.down_votes = e.at("down_votes").get<std::int64_t>();
    p.comment_ids = e.at("comment_ids").get<std::vector<std::uint64_t>>();
    wall.posts_.emplace(p.post_id, std::move(p));
  }
  for (const auto& e : doc.at("votes")) {
    Vote v{e.at("voter").get<std::string>(), e.at("post_id").get<std::uint64_t>(),
           parse_vote_direction(e.at("direction").get<std::string>()),
           e.at("cost_paid").get<std::int64_t>()};
    wall.votes_.emplace(std::make_pair(v.voter, v.post_id), std::move(v));
  }
  for (const auto& e : doc.at("comments")) {
    PostComment c{e.at("comment_id").get<std::uint64_t>(), e.at("post_id").get<std::uint64_t>(),
                  e.at("author").get<std::string>(), e.at("text").get<std::string>(),
                  e.at("created_at").get<std::int64_t>()};
    wall.comments_.emplace(c.comment_id, std::move(c));
  }
  for (const auto& e : doc.at("messages")) {
    DirectMessage m{e.at("message_id").get<std::uint64_t>(), e.at("from").get<std::string>(),
                    e.at("to").get<std::string>(), e.at("text").get<std::string>(),
                    e.at("created_at").get<std::int64_t>()};
    wall.messages_.emplace(m.message_id, std::move(m));
  }
  return wall;
}

}  // namespace feed4org
