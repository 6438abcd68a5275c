#include "stca/harness/synthetic.hpp"

#include <algorithm>
#include <random>

namespace stca::harness {

void SyntheticTaskConfig::validate() const {
  const auto [hmin, hmax] = history_len_range;
  const auto [lmin, lmax] = signal_lag_range;
  if (hmin == 0 || hmin > hmax) throw ConfigError("history_len_range must satisfy 1 <= min <= max");
  if (lmin == 0 || lmin > lmax || lmax > hmin) {
    throw ConfigError("signal_lag_range must satisfy 1 <= min <= max <= history min");
  }
  if (!(noise >= 0 && noise <= 0.5)) throw ConfigError("noise must lie in [0, 0.5]");
  if (!(plant_prob >= 0 && plant_prob <= 1)) throw ConfigError("plant_prob must lie in [0, 1]");
  if (n_clusters < 2 || vocab < n_clusters) throw ConfigError("need 2 <= n_clusters <= vocab");
  if (m == 0 || action_vocab == 0 || plant_copies == 0) {
    throw ConfigError("m, action_vocab and plant_copies must be positive");
  }
  if (m >= n_clusters) throw ConfigError("m must be smaller than n_clusters");
}

std::size_t cluster_of(Id video_id, std::size_t n_clusters) {
  return static_cast<std::size_t>(video_id) % n_clusters;
}

int rescan_label(const rlb::Request& request, std::size_t k, const SyntheticTaskConfig& config) {
  const std::size_t n = request.history.size();
  const std::size_t target = cluster_of(request.targets[k].video_id, config.n_clusters);
  const auto [lmin, lmax] = config.signal_lag_range;
  for (std::size_t lag = lmin; lag <= std::min(lmax, n); ++lag) {
    if (cluster_of(request.history[n - lag].video_id, config.n_clusters) == target) return 1;
  }
  return 0;
}

namespace {

Id item_in_cluster(std::size_t cluster, const SyntheticTaskConfig& c, std::mt19937_64& rng) {
  const std::size_t per_cluster = (c.vocab - cluster + c.n_clusters - 1) / c.n_clusters;
  std::uniform_int_distribution<std::size_t> pick(0, per_cluster - 1);
  return static_cast<Id>(cluster + c.n_clusters * pick(rng));
}

}  // namespace

std::vector<rlb::Request> generate(const SyntheticTaskConfig& c) {
  c.validate();
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> len_dist(c.history_len_range.first, c.history_len_range.second);
  std::uniform_int_distribution<std::size_t> lag_dist(c.signal_lag_range.first, c.signal_lag_range.second);
  std::uniform_int_distribution<Id> action_dist(0, static_cast<Id>(c.action_vocab) - 1);
  std::uniform_int_distribution<Seconds> gap_dist(1, 600);

  std::vector<std::size_t> clusters(c.n_clusters);
  std::vector<rlb::Request> out;
  out.reserve(c.num_requests);
  for (std::size_t i = 0; i < c.num_requests; ++i) {
    rlb::Request r;
    r.user_id = static_cast<Id>(i);
    const std::size_t n = len_dist(rng);

    for (std::size_t k = 0; k < c.n_clusters; ++k) clusters[k] = k;
    std::shuffle(clusters.begin(), clusters.end(), rng);
    const std::vector<std::size_t> target_clusters(clusters.begin(), clusters.begin() + static_cast<std::ptrdiff_t>(c.m));
    std::uniform_int_distribution<std::size_t> background(c.m, c.n_clusters - 1);

    Seconds t = 1'700'000'000 + static_cast<Seconds>(i) * 86'400;
    for (std::size_t j = 0; j < n; ++j) {
      t += gap_dist(rng);
      r.history.push_back({item_in_cluster(clusters[background(rng)], c, rng), action_dist(rng),
                           static_cast<std::int64_t>(j), t});
    }
    for (std::size_t k = 0; k < c.m; ++k) {
      const std::size_t cl = target_clusters[k];
      if (unit(rng) < c.plant_prob) {
        for (std::size_t q = 0; q < c.plant_copies; ++q) {
          r.history[n - lag_dist(rng)].video_id = item_in_cluster(cl, c, rng);
        }
      }
      const std::size_t oldest_lag = c.signal_lag_range.second + 1;
      if (c.decoys > 0 && n >= oldest_lag) {
        std::uniform_int_distribution<std::size_t> decoy_lag(oldest_lag, n);
        for (std::size_t q = 0; q < c.decoys; ++q) r.history[n - decoy_lag(rng)].video_id = item_in_cluster(cl, c, rng);
      }
    }
    const Seconds request_time = t + gap_dist(rng);
    for (std::size_t k = 0; k < c.m; ++k) {
      r.targets.push_back({item_in_cluster(target_clusters[k], c, rng), request_time, {}});
    }
    for (std::size_t k = 0; k < c.m; ++k) {
      int y = rescan_label(r, k, c);
      if (unit(rng) < c.noise) y = 1 - y;
      r.labels.push_back(y);
    }
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Split split_by_user(std::vector<rlb::Request> requests, double eval_fraction) {
  Split s;
  const auto threshold = static_cast<std::uint64_t>(eval_fraction * 10000.0);
  for (auto& r : requests) {
    const bool eval = mix64(static_cast<std::uint64_t>(r.user_id)) % 10000 < threshold;
    (eval ? s.eval : s.train).push_back(std::move(r));
  }
  return s;
}

}  // namespace stca::harness
