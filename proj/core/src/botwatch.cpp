#include "pumpwatch/botwatch.hpp"

#include <cmath>
#include <ostream>
#include <regex>

#include "pumpwatch/csv.hpp"

namespace pumpwatch::bots {

bool has_telegram_link(std::string_view text) {
  static const std::regex pattern(R"((^|[^a-z0-9.])(https?://)?(www\.)?t\.me/[a-z0-9_+]+)",
                                  std::regex::icase | std::regex::ECMAScript);
  return std::regex_search(text.begin(), text.end(), pattern);
}

std::set<std::string> label_telegram_active(std::span<const Tweet> tweets) {
  std::set<std::string> out;
  for (const auto& t : tweets) {
    if (!out.count(t.user_id) && has_telegram_link(t.text)) out.insert(t.user_id);
  }
  return out;
}

bool is_bot(const AccountStatus& status) {
  return status.status == AccountState::suspended ||
         (status.botometer_score && *status.botometer_score > kBotScoreThreshold);
}

std::optional<AccountStatus> FileStatusProvider::lookup(std::string_view user_id) const {
  auto it = statuses_.find(user_id);
  if (it == statuses_.end()) return std::nullopt;
  return it->second;
}

std::optional<AccountStatus> RemoteStatusProvider::lookup(std::string_view user_id) const {
  auto it = cache_.find(user_id);
  if (it != cache_.end()) return it->second;
  std::optional<AccountStatus> result;
  if (auto state = scorer_.account_state(user_id)) {
    AccountStatus s;
    s.user_id = std::string(user_id);
    s.status = *state;
    s.botometer_score = scorer_.bot_score(user_id);
    result = std::move(s);
  }
  cache_.emplace(std::string(user_id), result);
  return result;
}

std::vector<UserBotProfile> build_profiles(const graph::AffiliationMatrix& matrix, const StatusProvider& statuses,
                                           const std::set<std::string>& telegram_active) {
  const auto degrees = matrix.column_sums();
  std::vector<UserBotProfile> out;
  out.reserve(matrix.col_count());
  for (std::size_t j = 0; j < matrix.col_count(); ++j) {
    UserBotProfile p;
    p.user_id = matrix.col_ids[j];
    p.degree = degrees[j];
    p.telegram_active = telegram_active.count(p.user_id) > 0;
    if (auto status = statuses.lookup(p.user_id)) {
      p.has_status = true;
      p.suspended = status->status == AccountState::suspended;
      p.botometer_score = status->botometer_score;
      p.is_bot = is_bot(*status);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<UserBotProfile> build_profiles(const graph::AffiliationMatrix& matrix, const StatusMap& statuses,
                                           const std::set<std::string>& telegram_active) {
  return build_profiles(matrix, FileStatusProvider(statuses), telegram_active);
}

std::vector<DegreeRow> degree_table(std::span<const UserBotProfile> profiles, std::span<const double> thresholds) {
  std::vector<DegreeRow> out;
  for (double d : thresholds) {
    DegreeRow row;
    row.threshold = d;
    std::size_t suspended = 0;
    std::size_t telegram = 0;
    std::size_t scored = 0;
    for (const auto& p : profiles) {
      if (p.degree < d) continue;
      ++row.users;
      if (!p.has_status) ++row.missing_status;
      suspended += p.suspended ? 1 : 0;
      telegram += p.telegram_active ? 1 : 0;
      scored += (p.botometer_score && *p.botometer_score > kBotScoreThreshold) ? 1 : 0;
    }
    if (row.users > 0) {
      const double n = static_cast<double>(row.users);
      row.suspended_ratio = static_cast<double>(suspended) / n;
      row.telegram_active_ratio = static_cast<double>(telegram) / n;
      row.botometer_ratio = static_cast<double>(scored) / n;
    }
    out.push_back(row);
  }
  return out;
}

std::map<std::string, std::size_t> cluster_users(const corex::CorexModel& model) {
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < model.variables.size(); ++i) {
    const auto w = model.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < w.size(); ++j) {
      if (std::abs(w[j]) > std::abs(w[best])) best = j;
    }
    out[model.variables[i]] = best + 1;
  }
  return out;
}

std::vector<ClusterStats> cluster_report(const std::map<std::string, std::size_t>& clusters,
                                         std::span<const UserBotProfile> profiles) {
  std::map<std::string_view, const UserBotProfile*> lookup;
  for (const auto& p : profiles) lookup[p.user_id] = &p;

  struct Counts {
    std::size_t size = 0, bots = 0, telegram = 0, both = 0;
  };
  std::map<std::size_t, Counts> counts;
  for (const auto& [user, cluster] : clusters) {
    auto& c = counts[cluster];
    ++c.size;
    auto it = lookup.find(user);
    if (it == lookup.end()) continue;
    const auto& p = *it->second;
    c.bots += p.is_bot ? 1 : 0;
    c.telegram += p.telegram_active ? 1 : 0;
    c.both += (p.is_bot && p.telegram_active) ? 1 : 0;
  }
  std::vector<ClusterStats> out;
  for (const auto& [cluster, c] : counts) {
    const double n = static_cast<double>(c.size);
    out.push_back({cluster, c.size, static_cast<double>(c.bots) / n, static_cast<double>(c.telegram) / n,
                   static_cast<double>(c.both) / n});
  }
  return out;
}

void write_degree_csv(std::ostream& out, std::span<const DegreeRow> rows) {
  out << "degree_at_least,users,missing_status,suspended_ratio,telegram_active_ratio,botometer_ratio\n";
  for (const auto& r : rows) {
    out << csv::format_double(r.threshold) << ',' << r.users << ',' << r.missing_status << ','
        << csv::format_double(r.suspended_ratio) << ',' << csv::format_double(r.telegram_active_ratio) << ','
        << csv::format_double(r.botometer_ratio) << '\n';
  }
}

void write_cluster_csv(std::ostream& out, std::span<const ClusterStats> rows) {
  out << "cluster,size,bot_ratio,telegram_active_ratio,both_ratio\n";
  for (const auto& r : rows) {
    out << r.cluster << ',' << r.size << ',' << csv::format_double(r.bot_ratio) << ','
        << csv::format_double(r.telegram_active_ratio) << ',' << csv::format_double(r.both_ratio) << '\n';
  }
}

}  // namespace pumpwatch::bots
