#include "pure/interactions.hpp"

#include <algorithm>
#include <cmath>

namespace pure {

bool Interactions::has_positive(int user, int item) const {
  if (user < 0 || user >= num_users) return false;
  const auto& row = per_user_items[static_cast<std::size_t>(user)];
  return std::binary_search(row.begin(), row.end(), item);
}

double Interactions::sparsity() const {
  if (num_users == 0 || num_items == 0) return 0.0;
  return static_cast<double>(positives.size()) /
         (static_cast<double>(num_users) * static_cast<double>(num_items));
}

Interactions Interactions::from_tuples(int num_users, int num_items,
                                       std::vector<std::pair<int, int>> tuples) {
  std::sort(tuples.begin(), tuples.end());
  tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
  Interactions out;
  out.num_users = num_users;
  out.num_items = num_items;
  out.positives = std::move(tuples);
  out.per_user_items.assign(static_cast<std::size_t>(num_users), {});
  for (const auto& [u, i] : out.positives) {
    if (u < 0 || u >= num_users || i < 0 || i >= num_items)
      throw Error("interactions: tuple (" + std::to_string(u) + ", " + std::to_string(i) +
                  ") outside " + std::to_string(num_users) + "x" + std::to_string(num_items));
    out.per_user_items[static_cast<std::size_t>(u)].push_back(i);
  }
  return out;
}

void Interactions::check() const {
  if (num_users < 0 || num_items < 0) throw Error("interactions: negative shape");
  if (per_user_items.size() != static_cast<std::size_t>(num_users))
    throw Error("interactions: row grouping size mismatch");
  std::size_t total = 0;
  for (int u = 0; u < num_users; ++u) {
    const auto& row = per_user_items[static_cast<std::size_t>(u)];
    total += row.size();
    for (std::size_t j = 0; j + 1 < row.size(); ++j)
      if (row[j] >= row[j + 1]) throw Error("interactions: row not sorted/unique");
  }
  if (total != positives.size()) throw Error("interactions: row grouping does not cover tuples");
  if (!std::is_sorted(positives.begin(), positives.end()))
    throw Error("interactions: tuple list not sorted");
  for (const auto& [u, i] : positives)
    if (u < 0 || u >= num_users || i < 0 || i >= num_items)
      throw Error("interactions: tuple out of bounds");
}

Interactions filter_min_interactions(const Interactions& data, int min_count) {
  if (min_count <= 0) return data;
  std::vector<int> remap(static_cast<std::size_t>(data.num_users), -1);
  int kept = 0;
  for (int u = 0; u < data.num_users; ++u)
    if (data.per_user_items[static_cast<std::size_t>(u)].size() >=
        static_cast<std::size_t>(min_count))
      remap[static_cast<std::size_t>(u)] = kept++;
  if (kept == 0)
    throw Error("filter_min_interactions: no user has " + std::to_string(min_count) +
                " or more positives");
  std::vector<std::pair<int, int>> tuples;
  tuples.reserve(data.positives.size());
  for (const auto& [u, i] : data.positives) {
    const int nu = remap[static_cast<std::size_t>(u)];
    if (nu >= 0) tuples.emplace_back(nu, i);
  }
  return Interactions::from_tuples(kept, data.num_items, std::move(tuples));
}

void DatasetSplit::check() const {
  train.check();
  test.check();
  if (train.num_users != test.num_users || train.num_items != test.num_items)
    throw Error("split: train/test shape mismatch");
  for (const auto& [u, i] : test.positives) {
    if (train.has_positive(u, i)) throw Error("split: tuple present in both sides");
    if (train.per_user_items[static_cast<std::size_t>(u)].empty())
      throw Error("split: test user " + std::to_string(u) + " has no train positive");
  }
}

DatasetSplit split_random(const Interactions& data, double train_fraction, RngStream& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error("split_random: train_fraction must be in (0, 1)");
  const std::int64_t n = data.num_positives();
  if (n == 0) throw Error("split_random: no positives");
  std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
  for (std::int64_t j = 0; j < n; ++j) idx[static_cast<std::size_t>(j)] = j;
  rng.shuffle(idx);
  const std::int64_t n_train = std::llround(train_fraction * static_cast<double>(n));

  std::vector<std::pair<int, int>> train_t, test_t;
  train_t.reserve(static_cast<std::size_t>(n_train));
  for (std::int64_t j = 0; j < n; ++j) {
    const auto& t = data.positives[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
    (j < n_train ? train_t : test_t).push_back(t);
  }

  // Repair: a user must not appear only on the test side.
  std::vector<char> has_train(static_cast<std::size_t>(data.num_users), 0);
  for (const auto& t : train_t) has_train[static_cast<std::size_t>(t.first)] = 1;
  std::sort(test_t.begin(), test_t.end());
  std::vector<std::pair<int, int>> kept;
  kept.reserve(test_t.size());
  for (const auto& t : test_t) {
    if (!has_train[static_cast<std::size_t>(t.first)]) {
      train_t.push_back(t);  // smallest test tuple of that user (test_t sorted)
      has_train[static_cast<std::size_t>(t.first)] = 1;
    } else {
      kept.push_back(t);
    }
  }

  DatasetSplit split;
  split.train = Interactions::from_tuples(data.num_users, data.num_items, std::move(train_t));
  split.test = Interactions::from_tuples(data.num_users, data.num_items, std::move(kept));
  split.seed = rng.seed();
  return split;
}

DatasetSplit split_leave_n_out(const Interactions& data, int n, RngStream& rng) {
  if (n < 0) throw Error("split_leave_n_out: n must be >= 0");
  if (n == 0) {
    DatasetSplit split;
    split.train = data;
    split.test = Interactions::from_tuples(data.num_users, data.num_items, {});
    split.seed = rng.seed();
    return split;
  }
  std::vector<std::pair<int, int>> train_t, test_t;
  for (int u = 0; u < data.num_users; ++u) {
    auto row = data.per_user_items[static_cast<std::size_t>(u)];
    if (row.size() <= static_cast<std::size_t>(n))
      throw Error("split_leave_n_out: user " + std::to_string(u) + " has " +
                  std::to_string(row.size()) + " positives, needs more than " + std::to_string(n));
    // Partial Fisher-Yates: the first n entries become the held-out set.
    for (int j = 0; j < n; ++j) {
      const auto pick = static_cast<std::size_t>(j) +
                        static_cast<std::size_t>(rng.uniform_int(
                            static_cast<std::int64_t>(row.size() - static_cast<std::size_t>(j))));
      std::swap(row[static_cast<std::size_t>(j)], row[pick]);
    }
    for (std::size_t j = 0; j < row.size(); ++j)
      (j < static_cast<std::size_t>(n) ? test_t : train_t).emplace_back(u, row[j]);
  }
  DatasetSplit split;
  split.train = Interactions::from_tuples(data.num_users, data.num_items, std::move(train_t));
  split.test = Interactions::from_tuples(data.num_users, data.num_items, std::move(test_t));
  split.seed = rng.seed();
  return split;
}

std::vector<std::pair<int, int>> sample_unlabeled(const Interactions& data, std::int64_t n,
                                                  RngStream& rng) {
  const std::int64_t cells =
      static_cast<std::int64_t>(data.num_users) * static_cast<std::int64_t>(data.num_items);
  if (cells - data.num_positives() < 1)
    throw Error("sample_unlabeled: no unobserved tuples to sample from");
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t j = 0; j < n; ++j) {
    int u, i;
    do {
      u = static_cast<int>(rng.uniform_int(data.num_users));
      i = static_cast<int>(rng.uniform_int(data.num_items));
    } while (data.has_positive(u, i));
    out.emplace_back(u, i);
  }
  return out;
}

std::vector<int> build_candidate_pool(const Interactions& train, const Interactions& test,
                                      int user, int pool_size, RngStream& rng) {
  if (user < 0 || user >= train.num_users) throw Error("build_candidate_pool: unknown user");
  if (pool_size < 0) throw Error("build_candidate_pool: negative pool_size");
  const auto& tr = train.per_user_items[static_cast<std::size_t>(user)];
  const auto& te = test.per_user_items[static_cast<std::size_t>(user)];
  const std::int64_t avail = static_cast<std::int64_t>(train.num_items) -
                             static_cast<std::int64_t>(tr.size()) -
                             static_cast<std::int64_t>(te.size());
  if (pool_size > avail)
    throw Error("build_candidate_pool: pool_size " + std::to_string(pool_size) + " exceeds " +
                std::to_string(avail) + " available items for user " + std::to_string(user));
  std::vector<char> taken(static_cast<std::size_t>(train.num_items), 0);
  for (int i : tr) taken[static_cast<std::size_t>(i)] = 1;
  std::vector<int> pool(te.begin(), te.end());
  for (int i : te) taken[static_cast<std::size_t>(i)] = 1;
  int added = 0;
  while (added < pool_size) {
    const int i = static_cast<int>(rng.uniform_int(train.num_items));
    if (taken[static_cast<std::size_t>(i)]) continue;
    taken[static_cast<std::size_t>(i)] = 1;
    pool.push_back(i);
    ++added;
  }
  return pool;
}

}  // namespace pure
