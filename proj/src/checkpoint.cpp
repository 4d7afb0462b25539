#include "pure/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <memory>

namespace pure {

namespace {

constexpr char kMagic[8] = {'P', 'U', 'R', 'E', 'C', 'K', 'V', '1'};
constexpr std::uint64_t kHasDiscriminator = 1;
constexpr std::uint64_t kHasGenerators = 2;
constexpr std::uint64_t kHasPopularity = 4;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_bytes(std::FILE* f, const void* p, std::size_t n, const std::string& path) {
  if (std::fwrite(p, 1, n, f) != n) throw Error("checkpoint: write failed for " + path);
}

void read_bytes(std::FILE* f, void* p, std::size_t n, const std::string& path) {
  if (std::fread(p, 1, n, f) != n) throw Error("checkpoint: " + path + " is truncated");
}

void write_u64(std::FILE* f, std::uint64_t v, const std::string& path) {
  unsigned char b[8];
  for (int j = 0; j < 8; ++j) b[j] = static_cast<unsigned char>(v >> (8 * j));
  write_bytes(f, b, 8, path);
}

std::uint64_t read_u64(std::FILE* f, const std::string& path) {
  unsigned char b[8];
  read_bytes(f, b, 8, path);
  std::uint64_t v = 0;
  for (int j = 0; j < 8; ++j) v |= static_cast<std::uint64_t>(b[j]) << (8 * j);
  return v;
}

void write_f64s(std::FILE* f, const double* p, std::size_t n, const std::string& path) {
  for (std::size_t j = 0; j < n; ++j) {
    std::uint64_t bits;
    std::memcpy(&bits, p + j, 8);
    write_u64(f, bits, path);
  }
}

void read_f64s(std::FILE* f, double* p, std::size_t n, const std::string& path) {
  for (std::size_t j = 0; j < n; ++j) {
    const std::uint64_t bits = read_u64(f, path);
    std::memcpy(p + j, &bits, 8);
  }
}

void write_mat(std::FILE* f, const Mat& m, const std::string& path) {
  write_f64s(f, m.data(), static_cast<std::size_t>(m.size()), path);  // row-major storage
}

void write_vec(std::FILE* f, const Vec& v, const std::string& path) {
  write_f64s(f, v.data(), static_cast<std::size_t>(v.size()), path);
}

Mat read_mat(std::FILE* f, std::int64_t rows, std::int64_t cols, const std::string& path) {
  Mat m(rows, cols);
  read_f64s(f, m.data(), static_cast<std::size_t>(m.size()), path);
  return m;
}

Vec read_vec(std::FILE* f, std::int64_t n, const std::string& path) {
  Vec v(n);
  read_f64s(f, v.data(), static_cast<std::size_t>(n), path);
  return v;
}

void write_generator(std::FILE* f, const GeneratorParams& g, const std::string& path) {
  write_mat(f, g.w1, path);
  write_vec(f, g.b1, path);
  write_mat(f, g.w2, path);
  write_vec(f, g.b2, path);
}

GeneratorParams read_generator(std::FILE* f, std::int64_t d, std::int64_t k,
                               const std::string& path) {
  GeneratorParams g;
  g.w1 = read_mat(f, k, d, path);
  g.b1 = read_vec(f, k, path);
  g.w2 = read_mat(f, d, k, path);
  g.b2 = read_vec(f, d, path);
  return g;
}

}  // namespace

void save_checkpoint(const TrainedModel& model, const std::string& path) {
  model.check();
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw Error("checkpoint: cannot write " + path);

  std::uint64_t flags = 0;
  if (model.discriminator) flags |= kHasDiscriminator;
  if (model.gen_user) flags |= kHasGenerators;
  if (!model.popularity.empty()) flags |= kHasPopularity;
  const std::uint64_t d_user = model.discriminator ? model.discriminator->dim_user() : 0;
  const std::uint64_t d_item = model.discriminator ? model.discriminator->dim_item() : 0;
  const std::uint64_t k = model.gen_user ? model.gen_user->hidden() : 0;
  const std::uint64_t mode =
      model.discriminator && model.discriminator->mode == RelationMode::Matrix ? 1 : 0;

  write_bytes(f.get(), kMagic, 8, path);
  write_u64(f.get(), static_cast<std::uint64_t>(model.kind), path);
  write_u64(f.get(), mode, path);
  write_u64(f.get(), static_cast<std::uint64_t>(model.num_users), path);
  write_u64(f.get(), static_cast<std::uint64_t>(model.num_items), path);
  write_u64(f.get(), d_user, path);
  write_u64(f.get(), d_item, path);
  write_u64(f.get(), k, path);
  write_u64(f.get(), flags, path);

  if (model.discriminator) {
    write_mat(f.get(), model.discriminator->user_embeddings, path);
    write_mat(f.get(), model.discriminator->item_embeddings, path);
    write_mat(f.get(), model.discriminator->relation, path);
  }
  if (model.gen_user) {
    write_generator(f.get(), *model.gen_user, path);
    write_generator(f.get(), *model.gen_item, path);
  }
  if (!model.popularity.empty())
    for (std::int64_t c : model.popularity)
      write_u64(f.get(), static_cast<std::uint64_t>(c), path);
  if (std::fflush(f.get()) != 0) throw Error("checkpoint: write failed for " + path);
}

TrainedModel load_checkpoint(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw Error("checkpoint: cannot open " + path);

  char magic[8];
  read_bytes(f.get(), magic, 8, path);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw Error("checkpoint: " + path + " has a bad magic header");

  TrainedModel model;
  const std::uint64_t kind = read_u64(f.get(), path);
  if (kind > 3) throw Error("checkpoint: unknown model kind in " + path);
  model.kind = static_cast<ModelKind>(kind);
  const std::uint64_t mode = read_u64(f.get(), path);
  if (mode > 1) throw Error("checkpoint: unknown relation mode in " + path);
  const auto M = static_cast<std::int64_t>(read_u64(f.get(), path));
  const auto N = static_cast<std::int64_t>(read_u64(f.get(), path));
  const auto d_user = static_cast<std::int64_t>(read_u64(f.get(), path));
  const auto d_item = static_cast<std::int64_t>(read_u64(f.get(), path));
  const auto k = static_cast<std::int64_t>(read_u64(f.get(), path));
  const std::uint64_t flags = read_u64(f.get(), path);
  if (M < 0 || N < 0 || M > (1LL << 32) || N > (1LL << 32) || d_user < 0 || d_item < 0 ||
      d_user > (1 << 20) || d_item > (1 << 20) || k < 0 || k > (1 << 20))
    throw Error("checkpoint: implausible shape in " + path);
  model.num_users = static_cast<int>(M);
  model.num_items = static_cast<int>(N);

  if (flags & kHasDiscriminator) {
    DiscriminatorParams disc;
    disc.mode = mode == 1 ? RelationMode::Matrix : RelationMode::Vector;
    disc.user_embeddings = read_mat(f.get(), M, d_user, path);
    disc.item_embeddings = read_mat(f.get(), N, d_item, path);
    disc.relation = mode == 1 ? read_mat(f.get(), d_user, d_item, path)
                              : read_mat(f.get(), d_user, 1, path);
    model.discriminator = std::move(disc);
  }
  if (flags & kHasGenerators) {
    model.gen_user = read_generator(f.get(), d_user, k, path);
    model.gen_item = read_generator(f.get(), d_user, k, path);
  }
  if (flags & kHasPopularity) {
    model.popularity.resize(static_cast<std::size_t>(N));
    for (auto& c : model.popularity) c = static_cast<std::int64_t>(read_u64(f.get(), path));
  }
  // Must be at end of file now.
  unsigned char extra;
  if (std::fread(&extra, 1, 1, f.get()) != 0)
    throw Error("checkpoint: trailing bytes in " + path);
  model.check();
  return model;
}

}  // namespace pure
