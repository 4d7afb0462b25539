#include "pure/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pure/trained_model.hpp"

namespace pure {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

double to_real(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error("config: bad real for " + key + ": '" + v + "'");
  }
}

int to_int(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error("config: bad integer for " + key + ": '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error("config: bad unsigned for " + key + ": '" + v + "'");
  }
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error("config: bad boolean for " + key + ": '" + v + "'");
}

std::string fmt_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void RunConfig::apply_kv(const std::string& key, const std::string& value) {
  if (key == "dataset") dataset = value;
  else if (key == "dataset_name") dataset_name = value;
  else if (key == "format") format = value;
  else if (key == "positive_threshold") positive_threshold = to_real(value, key);
  else if (key == "split") split = value;
  else if (key == "train_fraction") train_fraction = to_real(value, key);
  else if (key == "leave_n") leave_n = to_int(value, key);
  else if (key == "min_interactions") min_interactions = to_int(value, key);
  else if (key == "model") model = value;
  else if (key == "pretrain") pretrain = to_bool(value, key);
  else if (key == "pretrain_epochs") pretrain_epochs = to_int(value, key);
  else if (key == "protocol") protocol = value;
  else if (key == "pool_size") pool_size = to_int(value, key);
  else if (key == "seed") seed = to_u64(value, key);
  else if (key == "workers") workers = to_int(value, key);
  else if (key == "checkpoint_every") checkpoint_every = to_int(value, key);
  else if (key == "validate_every") validate_every = to_int(value, key);
  else if (key == "out_dir") out_dir = value;
  else if (key == "pi_p") hyper.pi_p = to_real(value, key);
  else if (key == "delta") hyper.delta = to_real(value, key);
  else if (key == "d") hyper.d = to_int(value, key);
  else if (key == "k") hyper.k = to_int(value, key);
  else if (key == "lr") hyper.lr = to_real(value, key);
  else if (key == "epochs") hyper.epochs = to_int(value, key);
  else if (key == "batch_size") hyper.batch_size = to_int(value, key);
  else if (key == "C") hyper.C = to_real(value, key);
  else if (key == "d_steps") hyper.d_steps = to_int(value, key);
  else if (key == "g_steps") hyper.g_steps = to_int(value, key);
  else if (key == "gen_ratio") hyper.gen_ratio = to_real(value, key);
  else if (key == "loss_reduction") {
    if (value == "sum") hyper.reduction = LossReduction::Sum;
    else if (value == "mean") hyper.reduction = LossReduction::Mean;
    else throw Error("config: loss_reduction must be sum or mean, got '" + value + "'");
  } else if (key == "alternation") {
    if (value == "epoch") hyper.alternation = Alternation::Epoch;
    else if (value == "batch") hyper.alternation = Alternation::Batch;
    else throw Error("config: alternation must be epoch or batch, got '" + value + "'");
  } else {
    throw Error("config: unknown key '" + key + "'");
  }
}

void RunConfig::apply_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error("config: line " + std::to_string(line_no) + " of " + path +
                  " is not 'key = value'");
    apply_kv(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

void RunConfig::apply_dataset_defaults(const std::string& name) {
  if (name.empty()) return;
  dataset_name = name;
  if (name == "ml-100k") {
    hyper.d = 5;
    hyper.k = 0;
    hyper.batch_size = 128;
    hyper.lr = 1e-3;
    hyper.epochs = 100;
    hyper.pi_p = 1e-4;
    hyper.delta = 0.01;
    format = "tsv";
    // The published interaction counts equal the full rating files, so for the
    // named datasets every rating counts as an implicit interaction.
    positive_threshold = 1.0;
    split = "random";
    train_fraction = 0.8;
    min_interactions = 0;
    protocol = "full";
  } else if (name == "ml-1m") {
    hyper.d = 8;
    hyper.k = 0;
    hyper.batch_size = 128;
    hyper.lr = 1e-3;
    hyper.epochs = 100;
    hyper.pi_p = 1e-5;
    hyper.delta = 0.01;
    format = "colon";
    positive_threshold = 1.0;
    split = "leave-n-out";
    leave_n = 10;
    min_interactions = 20;
    protocol = "sampled";
    pool_size = 500;
  } else if (name == "yelp") {
    hyper.d = 16;
    hyper.k = 0;
    hyper.batch_size = 512;
    hyper.lr = 1e-3;
    hyper.epochs = 200;
    hyper.pi_p = 1e-6;
    hyper.delta = 0.01;
    format = "tsv";
    positive_threshold = 1.0;
    split = "leave-n-out";
    leave_n = 5;
    min_interactions = 10;
    protocol = "sampled";
    pool_size = 500;
  }
}

void RunConfig::finalize() {
  if (hyper.k == 0) hyper.k = 2 * hyper.d;
  if (format != "tsv" && format != "colon")
    throw Error("config: format must be tsv or colon, got '" + format + "'");
  if (split != "random" && split != "leave-n-out")
    throw Error("config: split must be random or leave-n-out, got '" + split + "'");
  if (protocol != "full" && protocol != "sampled")
    throw Error("config: protocol must be full or sampled, got '" + protocol + "'");
  model_kind_from_name(model);  // validates
  if (split == "random" && !(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error("config: train_fraction must lie in (0, 1)");
  if (leave_n < 0) throw Error("config: leave_n must be >= 0");
  if (min_interactions < 0) throw Error("config: min_interactions must be >= 0");
  if (pool_size < 0) throw Error("config: pool_size must be >= 0");
  if (workers < 1) throw Error("config: workers must be >= 1");
  if (checkpoint_every < 0 || validate_every < 0)
    throw Error("config: *_every must be >= 0");
  if (pretrain_epochs < 0) throw Error("config: pretrain_epochs must be >= 0");
  hyper.validate();
}

std::vector<std::pair<std::string, std::string>> RunConfig::items() const {
  return {
      {"dataset", dataset},
      {"dataset_name", dataset_name},
      {"format", format},
      {"positive_threshold", fmt_real(positive_threshold)},
      {"split", split},
      {"train_fraction", fmt_real(train_fraction)},
      {"leave_n", std::to_string(leave_n)},
      {"min_interactions", std::to_string(min_interactions)},
      {"model", model},
      {"pretrain", pretrain ? "true" : "false"},
      {"pretrain_epochs", std::to_string(pretrain_epochs)},
      {"protocol", protocol},
      {"pool_size", std::to_string(pool_size)},
      {"seed", std::to_string(seed)},
      {"workers", std::to_string(workers)},
      {"checkpoint_every", std::to_string(checkpoint_every)},
      {"validate_every", std::to_string(validate_every)},
      {"out_dir", out_dir},
      {"pi_p", fmt_real(hyper.pi_p)},
      {"delta", fmt_real(hyper.delta)},
      {"d", std::to_string(hyper.d)},
      {"k", std::to_string(hyper.k)},
      {"lr", fmt_real(hyper.lr)},
      {"epochs", std::to_string(hyper.epochs)},
      {"batch_size", std::to_string(hyper.batch_size)},
      {"C", fmt_real(hyper.C)},
      {"d_steps", std::to_string(hyper.d_steps)},
      {"g_steps", std::to_string(hyper.g_steps)},
      {"gen_ratio", fmt_real(hyper.gen_ratio)},
      {"loss_reduction", hyper.reduction == LossReduction::Mean ? "mean" : "sum"},
      {"alternation", hyper.alternation == Alternation::Batch ? "batch" : "epoch"},
  };
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("config: cannot write " + path);
  for (const auto& [k, v] : items()) out << k << " = " << v << "\n";
  if (!out) throw Error("config: write failed for " + path);
}

std::string infer_dataset_name(const std::string& path) {
  for (const char* name : {"ml-100k", "ml-1m", "yelp"})
    if (path.find(name) != std::string::npos) return name;
  return "";
}

}  // namespace pure
