#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pure/interactions.hpp"
#include "pure/trained_model.hpp"

namespace pure {

// Candidates of one user sorted by descending score, score ties broken by
// ascending item index. relevance is a parallel 0/1 vector (1 = test positive).
struct RankedList {
  int user = -1;
  std::vector<int> items;
  std::vector<int> relevance;
};

RankedList rank_items(const TrainedModel& model, int user, std::span<const int> candidates);
void apply_relevance(RankedList& ranked, const Interactions& test);

// (# relevant in the top min(k, len)) / k.
double precision_at_k(const RankedList& ranked, int k);
// DCG with gains 1/log2(1 + position), positions 1-based; ideal places all
// relevant first. nullopt when the list has no relevant item (user skipped).
std::optional<double> ndcg_at_k(const RankedList& ranked, int k);
// Uncut average precision over the whole list.
std::optional<double> average_precision(const RankedList& ranked);
std::optional<double> reciprocal_rank(const RankedList& ranked);

enum class Protocol { Full, Sampled };

struct MetricsReport {
  double p3 = 0, p5 = 0, p10 = 0;
  double ndcg3 = 0, ndcg5 = 0, ndcg10 = 0;
  double map = 0, mrr = 0;
  int num_users = 0;  // users that entered the averages
};

// Averages the metrics over all users with at least one test positive. Full
// protocol ranks every item except the user's train positives; Sampled ranks
// the user's test positives plus pool_size drawn items (per-user streams
// derived from pool_rng, so the result is independent of workers).
MetricsReport evaluate(const TrainedModel& model, const DatasetSplit& split, Protocol protocol,
                       int pool_size, const RngStream& pool_rng, int workers = 1);

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& m);
std::string metrics_json(const MetricsReport& m);

}  // namespace pure
