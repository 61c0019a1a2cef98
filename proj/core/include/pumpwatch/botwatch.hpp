#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pumpwatch/corex.hpp"
#include "pumpwatch/corpus.hpp"
#include "pumpwatch/graph.hpp"

namespace pumpwatch::bots {

inline constexpr double kBotScoreThreshold = 0.55;

// True when the text holds a t.me/<handle> link, scheme optional, any case.
bool has_telegram_link(std::string_view text);

std::set<std::string> label_telegram_active(std::span<const Tweet> tweets);

// Suspended, or a score strictly above 0.55.
bool is_bot(const AccountStatus& status);

// Source of account status records.
class StatusProvider {
 public:
  virtual ~StatusProvider() = default;
  virtual std::optional<AccountStatus> lookup(std::string_view user_id) const = 0;
};

// Status records loaded from a statuses CSV.
class FileStatusProvider final : public StatusProvider {
 public:
  explicit FileStatusProvider(StatusMap statuses) : statuses_(std::move(statuses)) {}
  static FileStatusProvider load(const std::filesystem::path& path) { return FileStatusProvider(load_statuses(path)); }
  std::optional<AccountStatus> lookup(std::string_view user_id) const override;

 private:
  StatusMap statuses_;
};

// Client for a remote bot-scoring service. No network client ships with the
// library; callers plug in their own.
class RemoteScorer {
 public:
  virtual ~RemoteScorer() = default;
  // nullopt when the service does not know the account.
  virtual std::optional<AccountState> account_state(std::string_view user_id) = 0;
  // nullopt when the account cannot be scored.
  virtual std::optional<double> bot_score(std::string_view user_id) = 0;
};

// Queries each user at most once and caches the answer.
class RemoteStatusProvider final : public StatusProvider {
 public:
  explicit RemoteStatusProvider(RemoteScorer& scorer) : scorer_(scorer) {}
  std::optional<AccountStatus> lookup(std::string_view user_id) const override;
  std::size_t queries() const { return cache_.size(); }

 private:
  RemoteScorer& scorer_;
  mutable std::map<std::string, std::optional<AccountStatus>, std::less<>> cache_;
};

struct UserBotProfile {
  std::string user_id;
  double degree = 0.0;
  bool telegram_active = false;
  bool has_status = false;
  bool suspended = false;
  std::optional<double> botometer_score;
  bool is_bot = false;
};

// One profile per matrix column, in column order. Users without a status
// record keep has_status = false and count as neither suspended nor bot.
std::vector<UserBotProfile> build_profiles(const graph::AffiliationMatrix& matrix, const StatusMap& statuses,
                                           const std::set<std::string>& telegram_active);
std::vector<UserBotProfile> build_profiles(const graph::AffiliationMatrix& matrix, const StatusProvider& statuses,
                                           const std::set<std::string>& telegram_active);

inline const std::vector<double> kDefaultDegreeThresholds = {50, 100, 500, 1000, 5000, 10000};

// Cumulative rows: users with degree >= D.
struct DegreeRow {
  double threshold = 0.0;
  std::size_t users = 0;
  std::size_t missing_status = 0;
  double suspended_ratio = 0.0;
  double telegram_active_ratio = 0.0;
  double botometer_ratio = 0.0;  // score > 0.55
};

std::vector<DegreeRow> degree_table(std::span<const UserBotProfile> profiles,
                                    std::span<const double> thresholds = kDefaultDegreeThresholds);

// user -> 1-based cluster: argmax_j |W_uj|, lowest index on ties.
std::map<std::string, std::size_t> cluster_users(const corex::CorexModel& model);

struct ClusterStats {
  std::size_t cluster = 0;
  std::size_t size = 0;
  double bot_ratio = 0.0;
  double telegram_active_ratio = 0.0;
  double both_ratio = 0.0;
};

// Sorted by cluster id; empty clusters are omitted. Users without a profile
// count in the size only.
std::vector<ClusterStats> cluster_report(const std::map<std::string, std::size_t>& clusters,
                                         std::span<const UserBotProfile> profiles);

// degree_at_least,users,missing_status,suspended_ratio,telegram_active_ratio,botometer_ratio
void write_degree_csv(std::ostream& out, std::span<const DegreeRow> rows);
// cluster,size,bot_ratio,telegram_active_ratio,both_ratio
void write_cluster_csv(std::ostream& out, std::span<const ClusterStats> rows);

}  // namespace pumpwatch::bots
