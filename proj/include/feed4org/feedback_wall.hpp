#pragma once

// Unsolicited feedback: posts with area tags, token-funded votes, comments
// and private messages between users.

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace feed4org {

enum class VoteDirection { up, down };
std::string_view to_string(VoteDirection direction);
VoteDirection parse_vote_direction(std::string_view name);

struct WallPost {
  std::uint64_t post_id = 0;
  std::string author;
  std::string text;
  std::set<std::string> area_tags;
  std::int64_t created_at = 0;
  std::int64_t up_votes = 0;
  std::int64_t down_votes = 0;
  std::vector<std::uint64_t> comment_ids;

  std::int64_t net_score() const { return up_votes - down_votes; }
};

struct Vote {
  std::string voter;
  std::uint64_t post_id = 0;
  VoteDirection direction = VoteDirection::up;
  std::int64_t cost_paid = 0;
};

struct PostComment {
  std::uint64_t comment_id = 0;
  std::uint64_t post_id = 0;
  std::string author;
  std::string text;
  std::int64_t created_at = 0;
};

struct DirectMessage {
  std::uint64_t message_id = 0;
  std::string from;
  std::string to;
  std::string text;
  std::int64_t created_at = 0;
};

/// Minimal ranking input: the wall ranks by (net score desc, created_at desc)
/// and falls back to the higher (later) id so the order is total.
struct RankItem {
  std::uint64_t id = 0;
  std::int64_t up = 0;
  std::int64_t down = 0;
  std::int64_t created_at = 0;
};

bool ranks_before(const RankItem& a, const RankItem& b);
void rank_in_place(std::span<RankItem> items);

class FeedbackWall {
 public:
  void set_vocabulary(std::set<std::string> tags) { vocabulary_ = std::move(tags); }
  const std::set<std::string>& vocabulary() const { return vocabulary_; }

  std::uint64_t next_post_id() const { return posts_.size() + 1; }
  std::uint64_t next_comment_id() const { return comments_.size() + 1; }
  std::uint64_t next_message_id() const { return messages_.size() + 1; }

  void check_post(const std::string& text, const std::set<std::string>& tags) const;
  const WallPost& create_post(const std::string& author, std::string text,
                              std::set<std::string> tags, std::int64_t created_at);

  /// Checks post existence, duplicate and self votes. Token sufficiency is
  /// the caller's concern.
  void check_vote(const std::string& voter, std::uint64_t post_id) const;
  const WallPost& record_vote(const std::string& voter, std::uint64_t post_id,
                              VoteDirection direction, std::int64_t cost_paid);

  void check_comment(std::uint64_t post_id, const std::string& text) const;
  const PostComment& add_comment(const std::string& author, std::uint64_t post_id,
                                 std::string text, std::int64_t created_at);

  void check_message(const std::string& text) const;
  const DirectMessage& send_message(const std::string& from, const std::string& to,
                                    std::string text, std::int64_t created_at);

  /// Messages addressed to `account`, oldest first.
  std::vector<DirectMessage> inbox(const std::string& account) const;
  /// Conversation between a and b. Throws access-denied unless the viewer is
  /// one of them.
  std::vector<DirectMessage> thread(const std::string& viewer, const std::string& a,
                                    const std::string& b) const;

  const WallPost& post(std::uint64_t id) const;
  std::vector<PostComment> comments_of(std::uint64_t post_id) const;
  std::vector<WallPost> ranked() const;

  const std::map<std::uint64_t, WallPost>& posts() const { return posts_; }
  const std::map<std::pair<std::string, std::uint64_t>, Vote>& votes() const { return votes_; }

  nlohmann::json to_json() const;
  static FeedbackWall from_json(const nlohmann::json& doc);

 private:
  std::set<std::string> vocabulary_;
  std::map<std::uint64_t, WallPost> posts_;
  std::map<std::pair<std::string, std::uint64_t>, Vote> votes_;
  std::map<std::uint64_t, PostComment> comments_;
  std::map<std::uint64_t, DirectMessage> messages_;
};

}  // namespace feed4org
