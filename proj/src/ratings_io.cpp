#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "pure/interactions.hpp"
#include "pure/ratings_io.hpp"

namespace pure {
namespace {

// Splits one raw line into fields for the given format. Tsv accepts tabs or
// runs of spaces; DoubleColon is the "u::i::r::ts" layout.
std::vector<std::string> split_fields(const std::string& line, RatingFormat format) {
  std::vector<std::string> fields;
  if (format == RatingFormat::DoubleColon) {
    std::size_t pos = 0;
    while (true) {
      const std::size_t next = line.find("::", pos);
      if (next == std::string::npos) {
        fields.push_back(line.substr(pos));
        break;
      }
      fields.push_back(line.substr(pos, next - pos));
      pos = next + 2;
    }
  } else {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) fields.push_back(tok);
  }
  return fields;
}

std::int64_t parse_int(const std::string& s, const char* what, std::size_t line_no) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw Error("parse error at line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  return v;
}

double parse_real(const std::string& s, const char* what, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error("parse error at line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
}

}  // namespace

Interactions load_ratings(const std::string& path, RatingFormat format, double threshold) {
  std::ifstream in(path);
  if (!in) throw Error("load_ratings: cannot open " + path);

  struct Row {
    std::int64_t user, item;
    double rating;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line, format);
    if (fields.size() < 3)
      throw Error("parse error at line " + std::to_string(line_no) + ": expected at least 3 fields");
    rows.push_back({parse_int(fields[0], "user id", line_no), parse_int(fields[1], "item id", line_no),
                    parse_real(fields[2], "rating", line_no)});
  }
  if (rows.empty()) throw Error("load_ratings: " + path + " holds no ratings");

  // Dense re-index in ascending raw-id order, over every id seen in the file.
  std::map<std::int64_t, int> users, items;
  for (const auto& r : rows) {
    users.emplace(r.user, 0);
    items.emplace(r.item, 0);
  }
  int next = 0;
  for (auto& [raw, dense] : users) dense = next++;
  next = 0;
  for (auto& [raw, dense] : items) dense = next++;

  std::vector<std::pair<int, int>> tuples;
  for (const auto& r : rows)
    if (r.rating >= threshold) tuples.emplace_back(users.at(r.user), items.at(r.item));
  if (tuples.empty())
    throw Error("load_ratings: " + path + " yields an empty dataset at threshold " +
                std::to_string(threshold));
  return Interactions::from_tuples(static_cast<int>(users.size()), static_cast<int>(items.size()),
                                   std::move(tuples));
}

void save_split_side(const Interactions& side, std::uint64_t seed, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("save_split: cannot write " + path);
  out << "# seed=" << seed << " users=" << side.num_users << " items=" << side.num_items << "\n";
  for (const auto& [u, i] : side.positives) out << u << "\t" << i << "\n";
  if (!out) throw Error("save_split: write failed for " + path);
}

void save_split(const DatasetSplit& split, const std::string& train_path,
                const std::string& test_path) {
  save_split_side(split.train, split.seed, train_path);
  save_split_side(split.test, split.seed, test_path);
}

namespace {

Interactions load_split_side(const std::string& path, std::uint64_t& seed_out) {
  std::ifstream in(path);
  if (!in) throw Error("load_split: cannot open " + path);
  std::string header;
  if (!std::getline(in, header) || header.rfind("# seed=", 0) != 0)
    throw Error("load_split: " + path + " is missing the seed header");
  std::uint64_t seed = 0;
  int users = 0, items = 0;
  if (std::sscanf(header.c_str(), "# seed=%llu users=%d items=%d",
                  reinterpret_cast<unsigned long long*>(&seed), &users, &items) != 3)
    throw Error("load_split: malformed header in " + path);
  seed_out = seed;
  std::vector<std::pair<int, int>> tuples;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    int u = 0, i = 0;
    if (std::sscanf(line.c_str(), "%d\t%d", &u, &i) != 2)
      throw Error("parse error at line " + std::to_string(line_no) + " of " + path);
    tuples.emplace_back(u, i);
  }
  return Interactions::from_tuples(users, items, std::move(tuples));
}

}  // namespace

DatasetSplit load_split(const std::string& train_path, const std::string& test_path) {
  DatasetSplit split;
  std::uint64_t seed_train = 0, seed_test = 0;
  split.train = load_split_side(train_path, seed_train);
  split.test = load_split_side(test_path, seed_test);
  if (seed_train != seed_test) throw Error("load_split: train/test seed headers disagree");
  split.seed = seed_train;
  split.check();
  return split;
}

}  // namespace pure
