#include "pure/training.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstring>

#include "pure/adam.hpp"

namespace pure {

void TrainedModel::check() const {
  if (kind == ModelKind::ItemPop) {
    if (discriminator || gen_user || gen_item) throw Error("model: item-pop carries no parameters");
    if (popularity.size() != static_cast<std::size_t>(num_items))
      throw Error("model: popularity table size mismatch");
    return;
  }
  if (!discriminator) throw Error("model: missing discriminator");
  discriminator->check();
  if (discriminator->num_users() != num_users || discriminator->num_items() != num_items)
    throw Error("model: discriminator shape mismatch");
  const bool gens = gen_user.has_value() && gen_item.has_value();
  if (kind == ModelKind::Pure && !gens) throw Error("model: pure requires both generators");
  if (kind != ModelKind::Pure && (gen_user || gen_item))
    throw Error("model: only pure carries generators");
  if (gens) {
    gen_user->check();
    gen_item->check();
  }
  if (!popularity.empty()) throw Error("model: popularity only belongs to item-pop");
}

double TrainedModel::score(int user, int item) const {
  if (kind == ModelKind::ItemPop) {
    if (item < 0 || item >= num_items) throw Error("score: unknown item index");
    if (user < 0 || user >= num_users) throw Error("score: unknown user index");
    return static_cast<double>(popularity[static_cast<std::size_t>(item)]);
  }
  return disc_score_ui(*discriminator, user, item);
}

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::ItemPop: return "item-pop";
    case ModelKind::PnGmf: return "pn-gmf";
    case ModelKind::PuGmf: return "pu-gmf";
    case ModelKind::Pure: return "pure";
  }
  throw Error("model_kind_name: bad kind");
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "item-pop") return ModelKind::ItemPop;
  if (name == "pn-gmf") return ModelKind::PnGmf;
  if (name == "pu-gmf") return ModelKind::PuGmf;
  if (name == "pure") return ModelKind::Pure;
  throw Error("unknown model kind '" + name + "'");
}

TrainedModel train_item_pop(const Interactions& train) {
  TrainedModel model;
  model.kind = ModelKind::ItemPop;
  model.num_users = train.num_users;
  model.num_items = train.num_items;
  model.popularity.assign(static_cast<std::size_t>(train.num_items), 0);
  for (const auto& [u, i] : train.positives) ++model.popularity[static_cast<std::size_t>(i)];
  return model;
}

std::string training_log_header() {
  return "epoch,pos_term,neg_corr,unl_term,gen_term,total,gen_loss,wall_ms";
}

std::string training_log_line(int epoch, const EpochStats& s) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g", epoch,
                s.disc.positive_term, s.disc.negative_correction, s.disc.unlabeled_term,
                s.disc.generated_term, s.disc.total, s.gen_loss, s.wall_ms);
  return buf;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Proportional allocation: how many of `total` draws belong to the batch
// covering positives [a, b) out of n.
std::int64_t prorated(std::int64_t a, std::int64_t b, std::int64_t n, std::int64_t total) {
  return (b * total) / n - (a * total) / n;
}

double group_weight(LossReduction red, std::int64_t count) {
  if (count <= 0) return 0.0;
  return red == LossReduction::Mean ? 1.0 / static_cast<double>(count) : 1.0;
}

std::uint64_t fnv1a(const double* p, std::size_t n) {
  std::uint64_t h = 1469598103934665603ULL;
  const unsigned char* bytes = reinterpret_cast<const unsigned char*>(p);
  for (std::size_t j = 0; j < n * sizeof(double); ++j) {
    h ^= bytes[j];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t checksum(const DiscriminatorParams& d) {
  return fnv1a(d.user_embeddings.data(), static_cast<std::size_t>(d.user_embeddings.size())) ^
         (fnv1a(d.item_embeddings.data(), static_cast<std::size_t>(d.item_embeddings.size())) << 1) ^
         (fnv1a(d.relation.data(), static_cast<std::size_t>(d.relation.size())) << 2);
}

std::uint64_t checksum(const GeneratorParams& g) {
  return fnv1a(g.w1.data(), static_cast<std::size_t>(g.w1.size())) ^
         (fnv1a(g.b1.data(), static_cast<std::size_t>(g.b1.size())) << 1) ^
         (fnv1a(g.w2.data(), static_cast<std::size_t>(g.w2.size())) << 2) ^
         (fnv1a(g.b2.data(), static_cast<std::size_t>(g.b2.size())) << 3);
}

struct DiscAdam {
  AdamState<Mat> user, item, rel;
  explicit DiscAdam(const DiscriminatorParams& d)
      : user(d.user_embeddings), item(d.item_embeddings), rel(d.relation) {}
  // The objective is maximized, so step along the negated gradient.
  void ascend(DiscriminatorParams& d, DiscGrads& g, double lr) {
    g.user_embeddings *= -1.0;
    g.item_embeddings *= -1.0;
    g.relation *= -1.0;
    user.step(d.user_embeddings, g.user_embeddings, lr);
    item.step(d.item_embeddings, g.item_embeddings, lr);
    rel.step(d.relation, g.relation, lr);
  }
};

struct GenAdam {
  AdamState<Mat> w1, w2;
  AdamState<Vec> b1, b2;
  explicit GenAdam(const GeneratorParams& g) : w1(g.w1), w2(g.w2), b1(g.b1), b2(g.b2) {}
  void descend(GeneratorParams& g, const GenGrads& grads, double lr) {
    w1.step(g.w1, grads.w1, lr);
    b1.step(g.b1, grads.b1, lr);
    w2.step(g.w2, grads.w2, lr);
    b2.step(g.b2, grads.b2, lr);
  }
};

void check_finite_or_throw(const TrainedModel& model, int epoch) {
  const auto& d = *model.discriminator;
  bool ok = d.user_embeddings.allFinite() && d.item_embeddings.allFinite() && d.relation.allFinite();
  if (ok && model.gen_user)
    ok = model.gen_user->w1.allFinite() && model.gen_user->b1.allFinite() &&
         model.gen_user->w2.allFinite() && model.gen_user->b2.allFinite() &&
         model.gen_item->w1.allFinite() && model.gen_item->b1.allFinite() &&
         model.gen_item->w2.allFinite() && model.gen_item->b2.allFinite();
  if (!ok) throw Error("training diverged (non-finite parameter) at epoch " + std::to_string(epoch));
}

// Non-finite values are caught where they first appear (forward scores or
// per-term gradients); this tags the failure with the epoch it happened in.
template <typename Fn>
void run_epoch_body(int epoch, Fn&& body) {
  try {
    body();
  } catch (const Error& e) {
    throw Error(std::string(e.what()) + " (epoch " + std::to_string(epoch) + ")");
  }
}

void emit_info(const TrainHooks* hooks, const std::string& msg) {
  if (hooks && hooks->info) {
    hooks->info(msg);
  } else {
    std::fprintf(stderr, "%s\n", msg.c_str());
  }
}

void report_negative_risk(const TrainHooks* hooks, int epoch, double risk) {
  if (risk < 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "epoch %d: empirical risk estimate R_u - pi_p*R_p = %.6g went negative "
                  "(kept uncorrected)",
                  epoch, risk);
    emit_info(hooks, buf);
  }
}

}  // namespace

TrainedModel train_gmf(const Interactions& train, const HyperParams& hp, GmfMode mode,
                       std::uint64_t seed, const TrainHooks* hooks) {
  hp.validate();
  train.check();
  const std::int64_t n_p = train.num_positives();
  if (n_p == 0) throw Error("train_gmf: no positives");

  RngStream init_rng(seed, Stream::Init);
  RngStream uns_rng(seed, Stream::UnlabeledSampling);

  TrainedModel model;
  model.kind = mode == GmfMode::Pn ? ModelKind::PnGmf : ModelKind::PuGmf;
  model.num_users = train.num_users;
  model.num_items = train.num_items;
  model.hyper = hp;
  model.discriminator = init_discriminator(train.num_users, train.num_items, hp.d, init_rng);
  DiscriminatorParams& disc = *model.discriminator;
  DiscAdam adam(disc);
  DiscGrads grads = make_disc_grads(disc);

  const std::int64_t draws_per_epoch =
      mode == GmfMode::Pn ? std::llround(hp.C * static_cast<double>(n_p))
                          : unlabeled_sample_size(n_p, hp.pi_p, hp.C);

  std::vector<std::int64_t> order(static_cast<std::size_t>(n_p));
  for (std::int64_t j = 0; j < n_p; ++j) order[static_cast<std::size_t>(j)] = j;

  std::vector<DiscTerm> terms;
  std::vector<double> pos_scores, other_scores;

  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    const auto t0 = Clock::now();
    uns_rng.shuffle(order);
    LossReport epoch_report;
    int batches = 0;
    double sum_log1m_pos = 0.0, sum_log1m_unl = 0.0;

    run_epoch_body(epoch, [&] {
    for (std::int64_t a = 0; a < n_p; a += hp.batch_size) {
      const std::int64_t b = std::min<std::int64_t>(a + hp.batch_size, n_p);
      const std::int64_t n_other = prorated(a, b, n_p, draws_per_epoch);
      const double w_pos = group_weight(hp.reduction, b - a);
      const double w_other = group_weight(hp.reduction, n_other);

      terms.clear();
      pos_scores.clear();
      other_scores.clear();
      for (std::int64_t j = a; j < b; ++j) {
        const auto& [u, i] = train.positives[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])];
        pos_scores.push_back(disc_score_ui(disc, u, i));
        if (mode == GmfMode::Pn) {
          terms.push_back({u, i, {}, {}, w_pos, false});
        } else {
          terms.push_back({u, i, {}, {}, hp.pi_p * w_pos, false});
          terms.push_back({u, i, {}, {}, -hp.pi_p * w_pos, true});
        }
      }
      for (const auto& [u, i] : sample_unlabeled(train, n_other, uns_rng)) {
        other_scores.push_back(disc_score_ui(disc, u, i));
        terms.push_back({u, i, {}, {}, w_other, true});
      }

      LossReport batch_report;
      if (mode == GmfMode::Pn) {
        for (double s : pos_scores) batch_report.positive_term += w_pos * log_prob(clamp_prob(s));
        for (double s : other_scores)
          batch_report.unlabeled_term += w_other * log_prob(1.0 - clamp_prob(s));
        batch_report.total = batch_report.positive_term + batch_report.unlabeled_term;
      } else {
        for (double s : pos_scores) {
          const double lp = log_prob(clamp_prob(s));
          const double l1m = log_prob(1.0 - clamp_prob(s));
          batch_report.positive_term += hp.pi_p * w_pos * lp;
          batch_report.negative_correction -= hp.pi_p * w_pos * l1m;
          sum_log1m_pos += l1m;
        }
        for (double s : other_scores) {
          const double l1m = log_prob(1.0 - clamp_prob(s));
          batch_report.unlabeled_term += w_other * l1m;
          sum_log1m_unl += l1m;
        }
        batch_report.total = batch_report.positive_term + batch_report.negative_correction +
                             batch_report.unlabeled_term;
      }

      disc_backward(disc, terms, grads);
      adam.ascend(disc, grads, hp.lr);

      epoch_report.positive_term += batch_report.positive_term;
      epoch_report.negative_correction += batch_report.negative_correction;
      epoch_report.unlabeled_term += batch_report.unlabeled_term;
      epoch_report.total += batch_report.total;
      ++batches;
    }
    });

    if (batches > 0) {
      const double inv = 1.0 / batches;
      epoch_report.positive_term *= inv;
      epoch_report.negative_correction *= inv;
      epoch_report.unlabeled_term *= inv;
      epoch_report.total *= inv;
    }
    check_finite_or_throw(model, epoch);

    EpochStats stats;
    stats.disc = epoch_report;
    stats.wall_ms = ms_since(t0);
    if (mode == GmfMode::Pu && draws_per_epoch > 0) {
      stats.negative_risk = -sum_log1m_unl / static_cast<double>(draws_per_epoch) +
                            hp.pi_p * sum_log1m_pos / static_cast<double>(n_p);
      report_negative_risk(hooks, epoch, stats.negative_risk);
    }
    model.history.push_back(stats);
    if (hooks && hooks->on_epoch) hooks->on_epoch(epoch, model);
  }
  return model;
}

DiscriminatorParams pretrain_handoff(const TrainedModel& pu_gmf) {
  if (pu_gmf.kind != ModelKind::PuGmf)
    throw Error("pretrain_handoff: expected a pu-gmf model, got " +
                std::string(model_kind_name(pu_gmf.kind)));
  if (!pu_gmf.discriminator) throw Error("pretrain_handoff: model has no discriminator");
  return *pu_gmf.discriminator;  // deep copy; optimizer state is never reused
}

TrainedModel train_pure(const Interactions& train, const HyperParams& hp,
                        const DiscriminatorParams* pretrained, std::uint64_t seed,
                        const TrainHooks* hooks) {
  hp.validate();
  train.check();
  const std::int64_t n_p = train.num_positives();
  if (n_p == 0) throw Error("train_pure: no positives");

  RngStream init_rng(seed, Stream::Init);
  RngStream uns_rng(seed, Stream::UnlabeledSampling);
  RngStream noise_rng(seed, Stream::Noise);

  TrainedModel model;
  model.kind = ModelKind::Pure;
  model.num_users = train.num_users;
  model.num_items = train.num_items;
  model.hyper = hp;
  if (pretrained) {
    if (pretrained->num_users() != train.num_users || pretrained->num_items() != train.num_items ||
        pretrained->dim_user() != hp.d)
      throw Error("train_pure: pretrained discriminator shape mismatch");
    model.discriminator = *pretrained;
  } else {
    model.discriminator = init_discriminator(train.num_users, train.num_items, hp.d, init_rng);
  }
  model.gen_user = init_generator(hp.d, hp.k, init_rng);
  model.gen_item = init_generator(hp.d, hp.k, init_rng);

  DiscriminatorParams& disc = *model.discriminator;
  GeneratorParams& gen_u = *model.gen_user;
  GeneratorParams& gen_i = *model.gen_item;
  DiscAdam disc_adam(disc);
  GenAdam gen_u_adam(gen_u), gen_i_adam(gen_i);
  DiscGrads dgrads = make_disc_grads(disc);
  GenGrads ugrads = make_gen_grads(gen_u), igrads = make_gen_grads(gen_i);

  const std::int64_t n_u = unlabeled_sample_size(n_p, hp.pi_p, 1.0);
  const std::int64_t n_gen = std::llround(hp.gen_ratio * static_cast<double>(n_u));

  std::vector<std::int64_t> order(static_cast<std::size_t>(n_p));
  for (std::int64_t j = 0; j < n_p; ++j) order[static_cast<std::size_t>(j)] = j;

  std::vector<DiscTerm> terms;
  std::vector<GenTerm> uterms, iterms;

  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    const auto t0 = Clock::now();

    LossReport epoch_report;
    int d_batches = 0, g_batches = 0;
    double sum_log1m_pos = 0.0, sum_log1m_unl = 0.0, gen_loss_sum = 0.0;
    std::int64_t pos_seen = 0, unl_seen = 0;

    // One discriminator update: positives [a, b) of the shuffled order plus
    // the prorated share of resampled positives, unlabeled draws and fakes.
    const auto disc_update = [&](std::int64_t a, std::int64_t b) {
      const std::int64_t batch_pos = b - a;
      const std::int64_t batch_unl = prorated(a, b, n_p, n_u);
      const std::int64_t batch_gen = prorated(a, b, n_p, n_gen);
      const double w_pos = group_weight(hp.reduction, batch_pos);
      const double w_unl = group_weight(hp.reduction, batch_unl);
      // The generated group holds a fake-item and a fake-user term per draw.
      const double w_gen = group_weight(hp.reduction, 2 * batch_gen);

      LossReport br;
      terms.clear();

      // Positives, label 1, weighted by the class prior.
      for (std::int64_t j = a; j < b; ++j) {
        const auto& [u, i] =
            train.positives[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])];
        terms.push_back({u, i, {}, {}, hp.pi_p * w_pos, false});
        br.positive_term += hp.pi_p * w_pos * log_prob(clamp_prob(disc_score_ui(disc, u, i)));
      }
      // Independently resampled positives, label 0 (the prior correction).
      for (std::int64_t j = 0; j < batch_pos; ++j) {
        const auto& [u, i] =
            train.positives[static_cast<std::size_t>(uns_rng.uniform_int(n_p))];
        terms.push_back({u, i, {}, {}, -hp.pi_p * w_pos, true});
        const double l1m = log_prob(1.0 - clamp_prob(disc_score_ui(disc, u, i)));
        br.negative_correction -= hp.pi_p * w_pos * l1m;
        sum_log1m_pos += l1m;
      }
      // Fresh unlabeled draws, label 0.
      const auto unl = sample_unlabeled(train, batch_unl, uns_rng);
      for (const auto& [u, i] : unl) {
        terms.push_back({u, i, {}, {}, w_unl, true});
        const double l1m = log_prob(1.0 - clamp_prob(disc_score_ui(disc, u, i)));
        br.unlabeled_term += w_unl * l1m;
        sum_log1m_unl += l1m;
      }
      // Generated pairs, label 0: fake items against the unlabeled users and
      // fake users against the unlabeled items.
      for (std::int64_t j = 0; j < batch_gen; ++j) {
        int pu, pi;
        if (!unl.empty()) {
          const auto& partner = unl[static_cast<std::size_t>(j % static_cast<std::int64_t>(unl.size()))];
          pu = partner.first;
          pi = partner.second;
        } else {
          const auto one = sample_unlabeled(train, 1, uns_rng);
          pu = one[0].first;
          pi = one[0].second;
        }
        DiscTerm fake_item{pu, -1, {}, gen_forward(gen_i, sample_noise(hp.d, hp.delta, noise_rng)),
                           w_gen, true};
        DiscTerm fake_user{-1, pi, gen_forward(gen_u, sample_noise(hp.d, hp.delta, noise_rng)),
                           {}, w_gen, true};
        br.generated_term +=
            w_gen * log_prob(1.0 - clamp_prob(disc_score(
                        disc, disc.user_embeddings.row(pu).transpose(), fake_item.fake_item)));
        br.generated_term +=
            w_gen * log_prob(1.0 - clamp_prob(disc_score(
                        disc, fake_user.fake_user, disc.item_embeddings.row(pi).transpose())));
        terms.push_back(std::move(fake_item));
        terms.push_back(std::move(fake_user));
      }
      pos_seen += batch_pos;
      unl_seen += batch_unl;

      disc_backward(disc, terms, dgrads);
      disc_adam.ascend(disc, dgrads, hp.lr);

      br.total = br.positive_term + br.negative_correction + br.unlabeled_term + br.generated_term;
      epoch_report.positive_term += br.positive_term;
      epoch_report.negative_correction += br.negative_correction;
      epoch_report.unlabeled_term += br.unlabeled_term;
      epoch_report.generated_term += br.generated_term;
      epoch_report.total += br.total;
      ++d_batches;
    };

    // One update of each generator from n fresh draws.
    const auto gen_update = [&](std::int64_t n) {
      if (n <= 0) return;
      const double w = group_weight(hp.reduction, n);
      uterms.clear();
      iterms.clear();
      for (const auto& [u, i] : sample_unlabeled(train, n, uns_rng)) {
        iterms.push_back({sample_noise(hp.d, hp.delta, noise_rng),
                          disc.user_embeddings.row(u).transpose(), FakeSide::Item, w});
        uterms.push_back({sample_noise(hp.d, hp.delta, noise_rng),
                          disc.item_embeddings.row(i).transpose(), FakeSide::User, w});
      }
      gen_loss_sum += gen_objective(gen_i, disc, iterms) + gen_objective(gen_u, disc, uterms);
      gen_backward(gen_i, disc, iterms, igrads);
      gen_i_adam.descend(gen_i, igrads, hp.lr);
      gen_backward(gen_u, disc, uterms, ugrads);
      gen_u_adam.descend(gen_u, ugrads, hp.lr);
      ++g_batches;
    };

    if (hp.alternation == Alternation::Epoch) {
      const std::uint64_t gen_sum_before = checksum(gen_u) ^ checksum(gen_i);
      run_epoch_body(epoch, [&] {
        for (int step = 0; step < hp.d_steps; ++step) {
          uns_rng.shuffle(order);
          for (std::int64_t a = 0; a < n_p; a += hp.batch_size)
            disc_update(a, std::min<std::int64_t>(a + hp.batch_size, n_p));
        }
      });
      if ((checksum(gen_u) ^ checksum(gen_i)) != gen_sum_before)
        throw Error("train_pure: generators changed during the discriminator phase");

      const std::uint64_t disc_sum_before = checksum(disc);
      run_epoch_body(epoch, [&] {
        for (int step = 0; step < hp.g_steps; ++step)
          for (std::int64_t a = 0; a < n_u; a += hp.batch_size)
            gen_update(std::min<std::int64_t>(a + hp.batch_size, n_u) - a);
      });
      if (checksum(disc) != disc_sum_before)
        throw Error("train_pure: discriminator changed during the generator phase");
    } else {
      run_epoch_body(epoch, [&] {
        uns_rng.shuffle(order);
        for (std::int64_t a = 0; a < n_p; a += hp.batch_size) {
          const std::int64_t b = std::min<std::int64_t>(a + hp.batch_size, n_p);
          // Checksumming every minibatch would dominate the epoch, so the
          // phase-isolation invariants are audited on the first one.
          const bool audit = a == 0;
          const std::uint64_t gen_sum_before = audit ? checksum(gen_u) ^ checksum(gen_i) : 0;
          for (int step = 0; step < hp.d_steps; ++step) disc_update(a, b);
          if (audit && (checksum(gen_u) ^ checksum(gen_i)) != gen_sum_before)
            throw Error("train_pure: generators changed during the discriminator phase");
          const std::uint64_t disc_sum_before = audit ? checksum(disc) : 0;
          for (int step = 0; step < hp.g_steps; ++step) gen_update(prorated(a, b, n_p, n_u));
          if (audit && checksum(disc) != disc_sum_before)
            throw Error("train_pure: discriminator changed during the generator phase");
        }
      });
    }

    if (d_batches > 0) {
      const double inv = 1.0 / d_batches;
      epoch_report.positive_term *= inv;
      epoch_report.negative_correction *= inv;
      epoch_report.unlabeled_term *= inv;
      epoch_report.generated_term *= inv;
      epoch_report.total *= inv;
    }
    check_finite_or_throw(model, epoch);

    EpochStats stats;
    stats.disc = epoch_report;
    stats.gen_loss = g_batches > 0 ? gen_loss_sum / g_batches : 0.0;
    stats.wall_ms = ms_since(t0);
    if (unl_seen > 0 && pos_seen > 0) {
      stats.negative_risk = -sum_log1m_unl / static_cast<double>(unl_seen) +
                            hp.pi_p * sum_log1m_pos / static_cast<double>(pos_seen);
      report_negative_risk(hooks, epoch, stats.negative_risk);
    }
    model.history.push_back(stats);
    if (hooks && hooks->on_epoch) hooks->on_epoch(epoch, model);
  }
  return model;
}

}  // namespace pure
