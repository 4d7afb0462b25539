#include "pure/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

#include <nlohmann/json.hpp>

namespace pure {

RankedList rank_items(const TrainedModel& model, int user, std::span<const int> candidates) {
  if (candidates.empty()) throw Error("rank_items: empty candidate list");
  if (user < 0 || user >= model.num_users) throw Error("rank_items: unknown user index");
  std::vector<std::pair<double, int>> scored;
  scored.reserve(candidates.size());
  for (int item : candidates) {
    if (item < 0 || item >= model.num_items)
      throw Error("rank_items: unknown item index " + std::to_string(item));
    scored.emplace_back(model.score(user, item), item);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  RankedList out;
  out.user = user;
  out.items.reserve(scored.size());
  for (const auto& [s, item] : scored) out.items.push_back(item);
  out.relevance.assign(out.items.size(), 0);
  return out;
}

void apply_relevance(RankedList& ranked, const Interactions& test) {
  ranked.relevance.assign(ranked.items.size(), 0);
  for (std::size_t j = 0; j < ranked.items.size(); ++j)
    if (test.has_positive(ranked.user, ranked.items[j])) ranked.relevance[j] = 1;
}

double precision_at_k(const RankedList& ranked, int k) {
  if (k <= 0) throw Error("precision_at_k: k must be positive");
  const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.items.size());
  int hits = 0;
  for (std::size_t j = 0; j < top; ++j) hits += ranked.relevance[j];
  return static_cast<double>(hits) / static_cast<double>(k);
}

namespace {

int total_relevant(const RankedList& ranked) {
  int r = 0;
  for (int f : ranked.relevance) r += f;
  return r;
}

}  // namespace

std::optional<double> ndcg_at_k(const RankedList& ranked, int k) {
  if (k <= 0) throw Error("ndcg_at_k: k must be positive");
  const int rel = total_relevant(ranked);
  if (rel == 0) return std::nullopt;
  const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.items.size());
  double dcg = 0.0;
  for (std::size_t j = 0; j < top; ++j)
    if (ranked.relevance[j]) dcg += 1.0 / std::log2(static_cast<double>(j) + 2.0);
  double idcg = 0.0;
  const std::size_t ideal = std::min<std::size_t>(top, static_cast<std::size_t>(rel));
  for (std::size_t j = 0; j < ideal; ++j) idcg += 1.0 / std::log2(static_cast<double>(j) + 2.0);
  return dcg / idcg;
}

std::optional<double> average_precision(const RankedList& ranked) {
  const int rel = total_relevant(ranked);
  if (rel == 0) return std::nullopt;
  double sum = 0.0;
  int hits = 0;
  for (std::size_t j = 0; j < ranked.items.size(); ++j) {
    if (ranked.relevance[j]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(j + 1);
    }
  }
  return sum / static_cast<double>(rel);
}

std::optional<double> reciprocal_rank(const RankedList& ranked) {
  for (std::size_t j = 0; j < ranked.items.size(); ++j)
    if (ranked.relevance[j]) return 1.0 / static_cast<double>(j + 1);
  return std::nullopt;
}

namespace {

struct UserMetrics {
  double p3, p5, p10, ndcg3, ndcg5, ndcg10, ap, rr;
  bool counted = false;
};

UserMetrics evaluate_user(const TrainedModel& model, const DatasetSplit& split, Protocol protocol,
                          int pool_size, const RngStream& pool_rng, int user) {
  UserMetrics um{};
  const auto& test_row = split.test.per_user_items[static_cast<std::size_t>(user)];
  if (test_row.empty()) return um;

  std::vector<int> candidates;
  if (protocol == Protocol::Full) {
    const auto& train_row = split.train.per_user_items[static_cast<std::size_t>(user)];
    candidates.reserve(static_cast<std::size_t>(split.train.num_items) - train_row.size());
    std::size_t t = 0;
    for (int i = 0; i < split.train.num_items; ++i) {
      if (t < train_row.size() && train_row[t] == i) {
        ++t;
        continue;
      }
      candidates.push_back(i);
    }
  } else {
    RngStream rng = pool_rng.derive(static_cast<std::uint64_t>(user));
    candidates = build_candidate_pool(split.train, split.test, user, pool_size, rng);
  }
  if (candidates.empty()) return um;

  RankedList ranked = rank_items(model, user, candidates);
  apply_relevance(ranked, split.test);
  const auto n3 = ndcg_at_k(ranked, 3);
  if (!n3) return um;  // no relevant candidate: skip
  um.p3 = precision_at_k(ranked, 3);
  um.p5 = precision_at_k(ranked, 5);
  um.p10 = precision_at_k(ranked, 10);
  um.ndcg3 = *n3;
  um.ndcg5 = *ndcg_at_k(ranked, 5);
  um.ndcg10 = *ndcg_at_k(ranked, 10);
  um.ap = *average_precision(ranked);
  um.rr = *reciprocal_rank(ranked);
  um.counted = true;
  return um;
}

}  // namespace

MetricsReport evaluate(const TrainedModel& model, const DatasetSplit& split, Protocol protocol,
                       int pool_size, const RngStream& pool_rng, int workers) {
  split.check();
  if (model.num_users != split.train.num_users || model.num_items != split.train.num_items)
    throw Error("evaluate: model/split shape mismatch");
  const int M = split.train.num_users;
  std::vector<UserMetrics> per_user(static_cast<std::size_t>(M));

  const int n_workers = std::max(1, std::min(workers, M));
  if (n_workers == 1) {
    for (int u = 0; u < M; ++u)
      per_user[static_cast<std::size_t>(u)] =
          evaluate_user(model, split, protocol, pool_size, pool_rng, u);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w]() {
        for (int u = w; u < M; u += n_workers)
          per_user[static_cast<std::size_t>(u)] =
              evaluate_user(model, split, protocol, pool_size, pool_rng, u);
      });
    }
    for (auto& th : pool) th.join();
  }

  MetricsReport report;
  for (int u = 0; u < M; ++u) {  // aggregate in user order regardless of schedule
    const UserMetrics& um = per_user[static_cast<std::size_t>(u)];
    if (!um.counted) continue;
    report.p3 += um.p3;
    report.p5 += um.p5;
    report.p10 += um.p10;
    report.ndcg3 += um.ndcg3;
    report.ndcg5 += um.ndcg5;
    report.ndcg10 += um.ndcg10;
    report.map += um.ap;
    report.mrr += um.rr;
    ++report.num_users;
  }
  if (report.num_users == 0) throw Error("evaluate: no test users to evaluate");
  const double inv = 1.0 / report.num_users;
  report.p3 *= inv;
  report.p5 *= inv;
  report.p10 *= inv;
  report.ndcg3 *= inv;
  report.ndcg5 *= inv;
  report.ndcg10 *= inv;
  report.map *= inv;
  report.mrr *= inv;
  return report;
}

std::string metrics_csv_header() { return "p3,p5,p10,ndcg3,ndcg5,ndcg10,map,mrr,num_users"; }

std::string metrics_csv_row(const MetricsReport& m) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%d", m.p3, m.p5,
                m.p10, m.ndcg3, m.ndcg5, m.ndcg10, m.map, m.mrr, m.num_users);
  return buf;
}

std::string metrics_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["p3"] = m.p3;
  j["p5"] = m.p5;
  j["p10"] = m.p10;
  j["ndcg3"] = m.ndcg3;
  j["ndcg5"] = m.ndcg5;
  j["ndcg10"] = m.ndcg10;
  j["map"] = m.map;
  j["mrr"] = m.mrr;
  j["num_users"] = m.num_users;
  return j.dump(2) + "\n";
}

}  // namespace pure
