#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pure/objective.hpp"

namespace pure {

// Flat key = value run configuration. Resolution order (later wins):
// built-in defaults < per-dataset defaults < config file < command line.
struct RunConfig {
  std::string dataset;            // ratings file path
  std::string dataset_name;       // ml-100k | ml-1m | yelp | "" (keys the defaults)
  std::string format = "tsv";     // tsv | colon
  double positive_threshold = 4.0;
  std::string split = "random";   // random | leave-n-out
  double train_fraction = 0.8;
  int leave_n = 10;
  int min_interactions = 0;
  std::string model = "pure";     // item-pop | pn-gmf | pu-gmf | pure
  bool pretrain = false;
  int pretrain_epochs = 0;        // 0 = same as epochs
  std::string protocol = "full";  // full | sampled
  int pool_size = 500;
  std::uint64_t seed = 1;
  int workers = 1;
  int checkpoint_every = 0;       // 0 = only the final checkpoint
  int validate_every = 0;         // 0 = no mid-training evaluation
  std::string out_dir = "runs/out";
  HyperParams hyper;              // hyper.k == 0 means "auto" (2 * d)

  void apply_kv(const std::string& key, const std::string& value);
  void apply_file(const std::string& path);
  // Per-dataset defaults; unknown names are left untouched.
  void apply_dataset_defaults(const std::string& name);
  // Fills derived values (k = 2d when auto) and validates everything.
  void finalize();
  void save(const std::string& path) const;
  std::vector<std::pair<std::string, std::string>> items() const;
};

// Infers a defaults key from a ratings path ("data/ml-100k/u.data" -> "ml-100k").
std::string infer_dataset_name(const std::string& path);

}  // namespace pure
