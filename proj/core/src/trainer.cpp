#include "reidkit/trainer.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "reidkit/error.hpp"

namespace reidkit {

namespace {

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0x000000FFu) << 24) | ((v & 0x0000FF00u) << 8) |
        ((v & 0x00FF0000u) >> 8) | ((v & 0xFF000000u) >> 24);
  }
  return v;
}

// Y = X W + b, no normalization.
Matrix affine(const LinearHead& head, const Matrix& x) {
  if (x.cols() != head.d_in()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "head expects " + std::to_string(head.d_in()) + "-D input, got " +
                    std::to_string(x.cols()));
  }
  const std::size_t d_out = head.d_out();
  Matrix y(x.rows(), d_out);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto out = y.row(r);
    std::copy(head.bias.begin(), head.bias.end(), out.begin());
    const auto in = x.row(r);
    for (std::size_t i = 0; i < head.d_in(); ++i) {
      const double xi = in[i];
      if (xi == 0.0) continue;
      const auto w = head.weight.row(i);
      for (std::size_t j = 0; j < d_out; ++j) out[j] += xi * w[j];
    }
  }
  return y;
}

double norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

void adam_update(std::span<double> theta, std::span<const double> g, std::span<double> m,
                 std::span<double> v, double decay, double lr, double bc1, double bc2,
                 const TrainConfig& cfg) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g[i];
    v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    theta[i] = theta[i] * decay - lr * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
  }
}

}  // namespace

LinearHead init_head(std::size_t d_in, std::size_t d_out, Rng& rng) {
  if (d_in == 0 || d_out == 0) {
    throw Error(ErrorCode::kInvalidArgument, "head dimensions must be positive");
  }
  LinearHead head{Matrix(d_in, d_out), std::vector<double>(d_out, 0.0)};
  const double bound = 1.0 / std::sqrt(static_cast<double>(d_in));
  for (double& w : head.weight.data()) w = (2.0 * rng.uniform() - 1.0) * bound;
  return head;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfig, what); };
  if (!(margin > 0.0)) fail("margin must be > 0");
  if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be >= 0");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) fail("plateau_factor must lie in (0, 1)");
  if (plateau_patience == 0) fail("plateau_patience must be >= 1");
  if (embed_dim == 0) fail("embed_dim must be >= 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) fail("adam_beta1 must lie in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) fail("adam_beta2 must lie in [0, 1)");
  if (!(adam_eps > 0.0)) fail("adam_eps must be > 0");
  try {
    pk.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
}

OptimizerState make_optimizer_state(const LinearHead& head, const TrainConfig& cfg) {
  OptimizerState s;
  s.m_weight = Matrix(head.d_in(), head.d_out());
  s.v_weight = Matrix(head.d_in(), head.d_out());
  s.m_bias.assign(head.d_out(), 0.0);
  s.v_bias.assign(head.d_out(), 0.0);
  s.learning_rate = cfg.learning_rate;
  s.best_val_loss = std::numeric_limits<double>::infinity();
  return s;
}

Matrix head_forward(const LinearHead& head, const Matrix& x) {
  Matrix y = affine(head, x);
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto row = y.row(r);
    const double denom = norm(row) + kNormEpsilon;
    for (double& v : row) v /= denom;
  }
  return y;
}

LossAndGradients loss_backward(const LinearHead& head, const Matrix& x,
                               std::span<const Triplet> triplets, double margin) {
  LossAndGradients out;
  out.grad.weight = Matrix(head.d_in(), head.d_out());
  out.grad.bias.assign(head.d_out(), 0.0);
  if (triplets.empty()) return out;

  const Matrix y = affine(head, x);
  const std::size_t n = y.rows();
  const std::size_t d_out = head.d_out();
  std::vector<double> norms(n);
  Matrix e(n, d_out);
  for (std::size_t r = 0; r < n; ++r) {
    norms[r] = norm(y.row(r));
    const double denom = norms[r] + kNormEpsilon;
    for (std::size_t j = 0; j < d_out; ++j) e(r, j) = y(r, j) / denom;
  }

  const double inv_count = 1.0 / static_cast<double>(triplets.size());
  Matrix grad_e(n, d_out);
  double total = 0.0;
  for (const auto& t : triplets) {
    const auto ea = e.row(t.anchor), ep = e.row(t.positive), en = e.row(t.negative);
    const double ap = euclidean(ea, ep);
    const double an = euclidean(ea, en);
    const double hinge = ap - an + margin;
    if (hinge <= 0.0) continue;
    total += hinge;
    ++out.active;
    if (ap == 0.0 || an == 0.0) {
      ++out.skipped;
      continue;
    }
    auto ga = grad_e.row(t.anchor);
    auto gp = grad_e.row(t.positive);
    auto gn = grad_e.row(t.negative);
    for (std::size_t j = 0; j < d_out; ++j) {
      const double u = (ea[j] - ep[j]) / ap * inv_count;
      const double w = (ea[j] - en[j]) / an * inv_count;
      ga[j] += u - w;
      gp[j] -= u;
      gn[j] += w;
    }
  }
  out.loss = total * inv_count;

  // Through e = y / (|y| + eps): dL/dy = g / s - y (y . g) / (|y| s^2), s = |y| + eps.
  Matrix grad_y(n, d_out);
  for (std::size_t r = 0; r < n; ++r) {
    const double len = norms[r];
    if (len == 0.0) continue;
    const double s = len + kNormEpsilon;
    const auto g = grad_e.row(r);
    const auto yr = y.row(r);
    double dot = 0.0;
    for (std::size_t j = 0; j < d_out; ++j) dot += yr[j] * g[j];
    const double radial = dot / (len * s * s);
    auto gy = grad_y.row(r);
    for (std::size_t j = 0; j < d_out; ++j) gy[j] = g[j] / s - yr[j] * radial;
  }

  for (std::size_t r = 0; r < n; ++r) {
    const auto gy = grad_y.row(r);
    const auto xr = x.row(r);
    for (std::size_t j = 0; j < d_out; ++j) out.grad.bias[j] += gy[j];
    for (std::size_t i = 0; i < head.d_in(); ++i) {
      const double xi = xr[i];
      if (xi == 0.0) continue;
      auto gw = out.grad.weight.row(i);
      for (std::size_t j = 0; j < d_out; ++j) gw[j] += xi * gy[j];
    }
  }
  return out;
}

void adamw_step(LinearHead& head, const HeadGradients& grad, OptimizerState& state,
                const TrainConfig& cfg) {
  ++state.step;
  const auto t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, t);
  const double lr = state.learning_rate;
  adam_update(head.weight.data(), grad.weight.data(), state.m_weight.data(),
              state.v_weight.data(), 1.0 - lr * cfg.weight_decay, lr, bc1, bc2, cfg);
  adam_update(head.bias, grad.bias, state.m_bias, state.v_bias, 1.0, lr, bc1, bc2, cfg);
}

bool plateau_update(OptimizerState& state, double val_loss, const TrainConfig& cfg) {
  if (val_loss < state.best_val_loss - kPlateauThreshold) {
    state.best_val_loss = val_loss;
    state.epochs_since_improvement = 0;
    return false;
  }
  if (++state.epochs_since_improvement < cfg.plateau_patience) return false;
  state.learning_rate *= cfg.plateau_factor;
  state.epochs_since_improvement = 0;
  ++state.lr_reductions;
  return true;
}

double batch_loss(const LinearHead& head, const Matrix& x, std::span<const std::int32_t> labels,
                  std::span<const Batch> batches, const TrainConfig& cfg) {
  if (batches.empty()) return 0.0;
  double total = 0.0;
  std::vector<std::int32_t> batch_labels;
  for (const auto& batch : batches) {
    const Matrix emb = head_forward(head, gather_rows(x, batch));
    batch_labels.clear();
    for (auto i : batch) batch_labels.push_back(labels[i]);
    const auto triplets = mine(cfg.mining, pairwise_euclidean(emb), batch_labels, cfg.margin);
    const auto candidates = count_candidate_triplets(batch_labels);
    if (candidates > 0) {
      total += triplet_loss(emb, triplets, cfg.margin) * static_cast<double>(triplets.size()) /
               static_cast<double>(candidates);
    }
  }
  return total / static_cast<double>(batches.size());
}

double validation_loss(const LinearHead& head, const EmbeddingSet& val, const TrainConfig& cfg) {
  const auto ids = fish_ids(val);
  const auto codes = encode_labels(ids);
  Rng rng(cfg.seed + kValidationSeedOffset);
  const auto batches = pk_epoch(codes.codes, cfg.pk, rng);
  return batch_loss(head, to_matrix(val), codes.codes, batches, cfg);
}

TrainResult train(const EmbeddingSet& train_set, const EmbeddingSet& val_set,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_set.dim() != val_set.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "train and validation sets differ in dim");
  }
  const auto train_ids = fish_ids(train_set);
  const auto train_codes = encode_labels(train_ids);
  if (train_codes.names.size() < cfg.pk.p) {
    throw Error(ErrorCode::kInsufficientIdentities,
                "insufficient identities in training set: " +
                    std::to_string(train_codes.names.size()) + " < P=" + std::to_string(cfg.pk.p));
  }
  const auto val_ids = fish_ids(val_set);
  const auto val_codes = encode_labels(val_ids);
  Rng val_rng(cfg.seed + kValidationSeedOffset);
  const auto val_batches = pk_epoch(val_codes.codes, cfg.pk, val_rng);

  const Matrix x_train = to_matrix(train_set);
  const Matrix x_val = to_matrix(val_set);

  Rng run(cfg.seed);
  TrainResult result{init_head(train_set.dim(), cfg.embed_dim, run), {}};
  LinearHead& head = result.head;
  OptimizerState state = make_optimizer_state(head, cfg);

  std::vector<std::int32_t> labels;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng epoch_rng = run.split();
    const auto batches = pk_epoch(train_codes.codes, cfg.pk, epoch_rng);
    EpochStats stats;
    stats.epoch = epoch;
    stats.learning_rate = state.learning_rate;
    double total = 0.0;
    for (const auto& batch : batches) {
      const Matrix xb = gather_rows(x_train, batch);
      labels.clear();
      for (auto i : batch) labels.push_back(train_codes.codes[i]);
      const auto triplets =
          mine(cfg.mining, pairwise_euclidean(head_forward(head, xb)), labels, cfg.margin);
      stats.active_triplets += triplets.size();
      if (triplets.empty()) continue;
      const auto lg = loss_backward(head, xb, triplets, cfg.margin);
      total += lg.loss;
      adamw_step(head, lg.grad, state, cfg);
    }
    stats.train_loss = batches.empty() ? 0.0 : total / static_cast<double>(batches.size());
    stats.val_loss = batch_loss(head, x_val, val_codes.codes, val_batches, cfg);
    plateau_update(state, stats.val_loss, cfg);
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

void write_head(const LinearHead& head, const std::string& name) {
  nlohmann::ordered_json meta;
  meta["magic"] = "REIDHEAD";
  meta["version"] = 1;
  meta["d_in"] = head.d_in();
  meta["d_out"] = head.d_out();
  const std::string meta_path = name + ".meta.json";
  std::ofstream m(meta_path, std::ios::trunc);
  if (!m) throw Error(ErrorCode::kIo, "cannot open " + meta_path);
  m << meta.dump(2) << '\n';

  const std::string blob_path = name + ".f32";
  std::ofstream b(blob_path, std::ios::binary | std::ios::trunc);
  if (!b) throw Error(ErrorCode::kIo, "cannot open " + blob_path);
  auto put = [&b](double v) {
    const auto w = to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    b.write(reinterpret_cast<const char*>(&w), sizeof w);
  };
  for (double v : head.weight.data()) put(v);
  for (double v : head.bias) put(v);
  if (!m || !b) throw Error(ErrorCode::kIo, "failed writing head " + name);
}

LinearHead read_head(const std::string& name) {
  const std::string meta_path = name + ".meta.json";
  std::ifstream m(meta_path);
  if (!m) throw Error(ErrorCode::kIo, "cannot open " + meta_path);
  std::size_t d_in = 0, d_out = 0;
  try {
    const auto meta = nlohmann::json::parse(m);
    if (meta.at("magic") != "REIDHEAD") {
      throw Error(ErrorCode::kMagicMismatch, meta_path + ": magic mismatch (expected REIDHEAD)");
    }
    if (meta.at("version") != 1) {
      throw Error(ErrorCode::kVersionMismatch, meta_path + ": unsupported version");
    }
    d_in = meta.at("d_in").get<std::size_t>();
    d_out = meta.at("d_out").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedMetadata, meta_path + ": " + e.what());
  }
  if (d_in == 0 || d_out == 0) {
    throw Error(ErrorCode::kMalformedMetadata, meta_path + ": dimensions must be positive");
  }
  const std::string blob_path = name + ".f32";
  std::ifstream b(blob_path, std::ios::binary | std::ios::ate);
  if (!b) throw Error(ErrorCode::kIo, "cannot open " + blob_path);
  const std::size_t count = d_in * d_out + d_out;
  if (static_cast<std::size_t>(b.tellg()) != count * sizeof(float)) {
    throw Error(ErrorCode::kBlobLengthMismatch, blob_path + ": blob length mismatch");
  }
  b.seekg(0);
  std::vector<std::uint32_t> words(count);
  b.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(count * sizeof(float)));
  LinearHead head{Matrix(d_in, d_out), std::vector<double>(d_out)};
  for (std::size_t i = 0; i < count; ++i) {
    const float v = std::bit_cast<float>(to_little_endian(words[i]));
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteValue, blob_path + ": NaN/Inf in head");
    if (i < d_in * d_out) {
      head.weight.data()[i] = v;
    } else {
      head.bias[i - d_in * d_out] = v;
    }
  }
  return head;
}

EmbeddingSet project(const LinearHead& head, const EmbeddingSet& set) {
  const Matrix out = head_forward(head, to_matrix(set));
  EmbeddingSet projected(head.d_out());
  for (std::size_t i = 0; i < set.size(); ++i) {
    EmbeddingRecord rec = set[i];
    const auto row = out.row(i);
    rec.vector.assign(row.begin(), row.end());
    projected.add(std::move(rec));
  }
  return projected;
}

}  // namespace reidkit
