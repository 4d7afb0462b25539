#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pure/rng.hpp"

namespace pure {

// Implicit-feedback matrix: the set of observed positive (user, item) tuples
// over a dense index space [0, num_users) x [0, num_items).
struct Interactions {
  int num_users = 0;
  int num_items = 0;
  std::vector<std::pair<int, int>> positives;      // sorted, unique
  std::vector<std::vector<int>> per_user_items;    // size num_users, each sorted

  std::int64_t num_positives() const { return static_cast<std::int64_t>(positives.size()); }
  bool has_positive(int user, int item) const;
  double sparsity() const;  // |positives| / (num_users * num_items)

  // Builds the row grouping and enforces the invariants (dedup, sort, bounds).
  static Interactions from_tuples(int num_users, int num_items,
                                  std::vector<std::pair<int, int>> tuples);
  void check() const;
};

struct DatasetSplit {
  Interactions train;
  Interactions test;
  std::uint64_t seed = 0;
  void check() const;  // same shape, disjoint, every test user has a train positive
};

enum class RatingFormat { Tsv, DoubleColon };

// Parses (user, item, rating[, timestamp]) lines, densely re-indexes users and
// items over everything observed in the file, and keeps tuples with
// rating >= threshold as positives (duplicates collapsed).
Interactions load_ratings(const std::string& path, RatingFormat format, double threshold);

// Drops users with fewer than min_count positives and re-densifies user
// indices; the item universe is untouched. min_count == 0 is the identity.
Interactions filter_min_interactions(const Interactions& data, int min_count);

// Random tuple-level split. |train| lands within one tuple of
// round(fraction * |positives|) before repair; any user left with test tuples
// but no train tuple gets its smallest test tuple promoted back to train.
DatasetSplit split_random(const Interactions& data, double train_fraction, RngStream& rng);

// Holds out exactly n positives per user. Every user must have more than n
// positives (n == 0 returns an empty test side).
DatasetSplit split_leave_n_out(const Interactions& data, int n, RngStream& rng);

// n draws (with replacement) uniform over the complement of the positive set.
std::vector<std::pair<int, int>> sample_unlabeled(const Interactions& data, std::int64_t n,
                                                  RngStream& rng);

// Test positives plus pool_size sampled items that are neither train nor test
// positives of the user; total size pool_size + |test positives|.
std::vector<int> build_candidate_pool(const Interactions& train, const Interactions& test,
                                      int user, int pool_size, RngStream& rng);

}  // namespace pure
