#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cte/contrastive.hpp"
#include "cte/nn.hpp"
#include "cte/numeric.hpp"
#include "cte/rng.hpp"
#include "cte/topic_model.hpp"

namespace cte {

// token counts of one half-document; sum equals the half length
struct BowVector {
  Eigen::VectorXd counts;

  static BowVector from(const Document& doc, int V) {
    BowVector b;
    b.counts = Eigen::VectorXd::Zero(V);
    for (TokenId t : doc.tokens) {
      CTE_CHECK(t >= 0 && t < V, "bow: token id out of range");
      b.counts(t) += 1.0;
    }
    return b;
  }
};

inline Eigen::MatrixXd bow_matrix(const std::vector<Document>& docs, int V) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<int>(docs.size()), V);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (TokenId t : docs[i].tokens) {
      CTE_CHECK(t >= 0 && t < V, "bow: token id out of range");
      X(static_cast<int>(i), t) += 1.0;
    }
  }
  return X;
}

struct PairBatch {
  Eigen::MatrixXd X1, X2;  // rows = examples, cols = vocab counts
  Eigen::VectorXd y;       // labels in {0,1}

  int size() const { return static_cast<int>(y.size()); }
};

inline PairBatch to_batch(const ContrastiveDataset& ds, const std::vector<int>& idx,
                          int V) {
  PairBatch b;
  int n = static_cast<int>(idx.size());
  b.X1 = Eigen::MatrixXd::Zero(n, V);
  b.X2 = Eigen::MatrixXd::Zero(n, V);
  b.y.resize(n);
  for (int r = 0; r < n; ++r) {
    const auto& p = ds.pairs[static_cast<std::size_t>(idx[static_cast<std::size_t>(r)])];
    for (TokenId t : p.first.tokens) b.X1(r, t) += 1.0;
    for (TokenId t : p.second.tokens) b.X2(r, t) += 1.0;
    b.y(r) = p.label;
  }
  return b;
}

inline PairBatch to_batch(const ContrastiveDataset& ds, int V) {
  std::vector<int> idx(static_cast<std::size_t>(ds.size()));
  for (int i = 0; i < ds.size(); ++i) idx[static_cast<std::size_t>(i)] = i;
  return to_batch(ds, idx, V);
}

enum class ModelKind { PairMlp, Bilinear };

struct NetConfig {
  ModelKind kind = ModelKind::Bilinear;
  int vocab = 0;
  int depth = 3;      // hidden layers
  int width = 256;    // nodes per hidden layer
  int embed_dim = 32; // tower output dim (bilinear)
  bool batchnorm = false;
  double dropout = 0.0;
  std::uint64_t init_seed = 0;
};

// The two trainable contrastive models:
//  - PairMlp: f(x,x') = sigmoid(mlp([bow(x); bow(x')])), squared loss vs y
//  - Bilinear: score s = f1(x)^T f2(x'), logistic loss with y in {-1,+1};
//    predicted P(y=1) = sigmoid(s)
class ContrastiveNet {
 public:
  ContrastiveNet() = default;

  static ContrastiveNet make(const NetConfig& cfg) {
    CTE_CHECK(cfg.vocab >= 1, "net: vocab must be positive");
    CTE_CHECK(cfg.depth >= 0 && cfg.width >= 1, "net: bad architecture");
    ContrastiveNet net;
    net.cfg_ = cfg;
    auto hidden = [&cfg](int in, int out) {
      std::vector<int> dims{in};
      for (int i = 0; i < cfg.depth; ++i) dims.push_back(cfg.width);
      dims.push_back(out);
      return dims;
    };
    if (cfg.kind == ModelKind::PairMlp) {
      MlpSpec spec{hidden(2 * cfg.vocab, 1), cfg.batchnorm, cfg.dropout};
      net.pair_ = Mlp(spec, derive_seed(cfg.init_seed, 11));
    } else {
      MlpSpec spec{hidden(cfg.vocab, cfg.embed_dim), cfg.batchnorm, cfg.dropout};
      net.tower1_ = Mlp(spec, derive_seed(cfg.init_seed, 21));
      net.tower2_ = Mlp(spec, derive_seed(cfg.init_seed, 22));
    }
    return net;
  }

  const NetConfig& config() const { return cfg_; }
  ModelKind kind() const { return cfg_.kind; }
  int vocab() const { return cfg_.vocab; }

  // mean loss over the batch (train mode) with parameter gradients
  double loss_and_grad(const PairBatch& batch, Mlp::Grad& g_pair,
                       Mlp::Grad& g_t1, Mlp::Grad& g_t2,
                       std::uint64_t dropout_seed) {
    CTE_CHECK(batch.size() > 0, "loss_and_grad: empty batch");
    const double n = batch.size();
    double loss = 0.0;
    if (cfg_.kind == ModelKind::PairMlp) {
      Eigen::MatrixXd X(batch.size(), 2 * cfg_.vocab);
      X << batch.X1, batch.X2;
      MlpWorkspace ws;
      Eigen::MatrixXd Z = pair_.forward_train(X, ws, dropout_seed);
      Eigen::VectorXd dz(batch.size());
      for (int i = 0; i < batch.size(); ++i) {
        double fi = sigmoid(Z(i, 0));
        double d = fi - batch.y(i);
        loss += d * d;
        dz(i) = 2.0 * d * fi * (1.0 - fi) / n;
      }
      loss /= n;
      pair_.backward(ws, dz, g_pair);
    } else {
      MlpWorkspace ws1, ws2;
      Eigen::MatrixXd F1 =
          tower1_.forward_train(batch.X1, ws1, derive_seed(dropout_seed, 1));
      Eigen::MatrixXd F2 =
          tower2_.forward_train(batch.X2, ws2, derive_seed(dropout_seed, 2));
      Eigen::VectorXd s = (F1.array() * F2.array()).rowwise().sum().matrix();
      Eigen::VectorXd ds(batch.size());
      for (int i = 0; i < batch.size(); ++i) {
        double ysign = batch.y(i) > 0.5 ? 1.0 : -1.0;
        loss += log1pexp(-ysign * s(i));
        ds(i) = -ysign * sigmoid(-ysign * s(i)) / n;
      }
      loss /= n;
      tower1_.backward(ws1, ds.asDiagonal() * F2, g_t1);
      tower2_.backward(ws2, ds.asDiagonal() * F1, g_t2);
    }
    if (!std::isfinite(loss)) {
      throw NumericalError("loss_and_grad: non-finite loss (" +
                           std::to_string(loss) + ")");
    }
    return loss;
  }

  // evaluation-mode mean loss (no dropout, running batchnorm stats)
  double eval_loss(const PairBatch& batch) const {
    CTE_CHECK(batch.size() > 0, "eval_loss: empty batch");
    Eigen::VectorXd p = predict_scores(batch.X1, batch.X2);
    double loss = 0.0;
    if (cfg_.kind == ModelKind::PairMlp) {
      for (int i = 0; i < batch.size(); ++i) {
        double d = sigmoid(p(i)) - batch.y(i);
        loss += d * d;
      }
    } else {
      for (int i = 0; i < batch.size(); ++i) {
        double ysign = batch.y(i) > 0.5 ? 1.0 : -1.0;
        loss += log1pexp(-ysign * p(i));
      }
    }
    return loss / batch.size();
  }

  // raw scores: pair-mlp pre-sigmoid logit, bilinear inner product
  Eigen::VectorXd predict_scores(const Eigen::MatrixXd& X1,
                                 const Eigen::MatrixXd& X2) const {
    if (cfg_.kind == ModelKind::PairMlp) {
      Eigen::MatrixXd X(X1.rows(), X1.cols() + X2.cols());
      X << X1, X2;
      return pair_.infer(X).col(0);
    }
    Eigen::MatrixXd F1 = tower1_.infer(X1);
    Eigen::MatrixXd F2 = tower2_.infer(X2);
    return (F1.array() * F2.array()).rowwise().sum().matrix();
  }

  // predicted P(y=1) for row-aligned pairs
  Eigen::VectorXd predict_prob(const Eigen::MatrixXd& X1,
                               const Eigen::MatrixXd& X2) const {
    Eigen::VectorXd s = predict_scores(X1, X2);
    for (int i = 0; i < s.size(); ++i) s(i) = sigmoid(s(i));
    return s;
  }

  double predict_prob_one(const Document& x, const Document& xp) const {
    Eigen::MatrixXd X1 = bow_matrix({x}, cfg_.vocab);
    Eigen::MatrixXd X2 = bow_matrix({xp}, cfg_.vocab);
    return predict_prob(X1, X2)(0);
  }

  // all (doc, landmark) prediction probabilities, docs x landmarks
  Eigen::MatrixXd prob_matrix(const std::vector<Document>& docs,
                              const std::vector<Document>& landmarks) const {
    Eigen::MatrixXd Xd = bow_matrix(docs, cfg_.vocab);
    Eigen::MatrixXd Xl = bow_matrix(landmarks, cfg_.vocab);
    Eigen::MatrixXd P(Xd.rows(), Xl.rows());
    if (cfg_.kind == ModelKind::Bilinear) {
      Eigen::MatrixXd F1 = tower1_.infer(Xd);
      Eigen::MatrixXd F2 = tower2_.infer(Xl);
      P = F1 * F2.transpose();
    } else {
      for (int j = 0; j < Xl.rows(); ++j) {
        Eigen::MatrixXd X(Xd.rows(), 2 * cfg_.vocab);
        X << Xd, Xl.row(j).replicate(Xd.rows(), 1);
        P.col(j) = pair_.infer(X).col(0);
      }
    }
    return P.unaryExpr([](double z) { return sigmoid(z); });
  }

  // tower-one representation f1(x)
  Eigen::MatrixXd tower_embed_matrix(const Eigen::MatrixXd& X) const {
    CTE_CHECK(cfg_.kind == ModelKind::Bilinear, "tower embedding needs a bilinear model");
    return tower1_.infer(X);
  }

  Mlp& pair_mlp() { return pair_; }
  Mlp& tower1() { return tower1_; }
  Mlp& tower2() { return tower2_; }
  const Mlp& pair_mlp() const { return pair_; }
  const Mlp& tower1() const { return tower1_; }
  const Mlp& tower2() const { return tower2_; }

  Eigen::Index param_count() const {
    if (cfg_.kind == ModelKind::PairMlp) return pair_.param_count();
    return tower1_.param_count() + tower2_.param_count();
  }

  Eigen::VectorXd flatten() const {
    Eigen::VectorXd out(param_count());
    if (cfg_.kind == ModelKind::PairMlp) {
      pair_.flatten_into(out.data());
    } else {
      tower1_.flatten_into(out.data());
      tower2_.flatten_into(out.data() + tower1_.param_count());
    }
    return out;
  }

  void unflatten(const Eigen::VectorXd& in) {
    CTE_CHECK(in.size() == param_count(), "unflatten: size mismatch");
    if (cfg_.kind == ModelKind::PairMlp) {
      pair_.unflatten_from(in.data());
    } else {
      tower1_.unflatten_from(in.data());
      tower2_.unflatten_from(in.data() + tower1_.param_count());
    }
  }

  Eigen::VectorXd grad_flatten(const Mlp::Grad& g_pair, const Mlp::Grad& g_t1,
                               const Mlp::Grad& g_t2) const {
    Eigen::VectorXd out(param_count());
    if (cfg_.kind == ModelKind::PairMlp) {
      Mlp::grad_flatten_into(g_pair, out.data());
    } else {
      Mlp::grad_flatten_into(g_t1, out.data());
      Mlp::grad_flatten_into(g_t2, out.data() + tower1_.param_count());
    }
    return out;
  }

  Eigen::VectorXd wd_mask() const {
    Eigen::VectorXd out(param_count());
    if (cfg_.kind == ModelKind::PairMlp) {
      pair_.wd_mask_into(out.data());
    } else {
      tower1_.wd_mask_into(out.data());
      tower2_.wd_mask_into(out.data() + tower1_.param_count());
    }
    return out;
  }

  Eigen::VectorXd state_flatten() const {
    if (cfg_.kind == ModelKind::PairMlp) {
      Eigen::VectorXd out(pair_.state_count());
      pair_.state_flatten_into(out.data());
      return out;
    }
    Eigen::VectorXd out(tower1_.state_count() + tower2_.state_count());
    tower1_.state_flatten_into(out.data());
    tower2_.state_flatten_into(out.data() + tower1_.state_count());
    return out;
  }

  void state_unflatten(const Eigen::VectorXd& in) {
    if (cfg_.kind == ModelKind::PairMlp) {
      pair_.state_unflatten_from(in.data());
    } else {
      tower1_.state_unflatten_from(in.data());
      tower2_.state_unflatten_from(in.data() + tower1_.state_count());
    }
  }

 private:
  NetConfig cfg_;
  Mlp pair_, tower1_, tower2_;
};

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

struct OptConfig {
  enum class Kind { RmsProp, Sgd } kind = Kind::RmsProp;
  double lr = 1e-4;
  double momentum = 0.009;
  double weight_decay = 1e-4;   // L2 added to the gradient, weights only
  double alpha = 0.99;          // RMSProp smoothing
  double eps = 1e-8;
  int lr_halve_epoch = 250;     // lr halved from this epoch on; <0 disables

  double lr_at(int epoch) const {
    if (lr_halve_epoch >= 0 && epoch >= lr_halve_epoch) return 0.5 * lr;
    return lr;
  }
};

struct OptState {
  Eigen::VectorXd sq;   // RMSProp squared-gradient average
  Eigen::VectorXd buf;  // momentum buffer

  static OptState zeros(Eigen::Index n) {
    return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  }
};

// RMSProp with momentum:
//   g   <- grad + wd * (mask .* p)
//   sq  <- alpha * sq + (1 - alpha) * g^2
//   buf <- momentum * buf + g / (sqrt(sq) + eps)
//   p   <- p - lr * buf
inline void opt_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
                     const Eigen::VectorXd& wd_mask, OptState& st,
                     const OptConfig& cfg, double lr) {
  if (!grad.allFinite()) throw NumericalError("opt_step: non-finite gradient");
  Eigen::ArrayXd g = grad.array();
  if (cfg.weight_decay != 0.0) {
    g += cfg.weight_decay * (wd_mask.array() * params.array());
  }
  if (cfg.kind == OptConfig::Kind::Sgd) {
    if (cfg.momentum != 0.0) {
      st.buf.array() = cfg.momentum * st.buf.array() + g;
      params.array() -= lr * st.buf.array();
    } else {
      params.array() -= lr * g;
    }
    return;
  }
  st.sq.array() = cfg.alpha * st.sq.array() + (1.0 - cfg.alpha) * g.square();
  st.buf.array() = cfg.momentum * st.buf.array() + g / (st.sq.array().sqrt() + cfg.eps);
  params.array() -= lr * st.buf.array();
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct TrainConfig {
  int epochs = 100;
  int batch_size = 256;
  std::uint64_t seed = 0;
  OptConfig opt;
  int checkpoint_every = 0;  // 0 = final only
  int holdout_pairs_hint = 0;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double holdout_loss = 0.0;
  double lr = 0.0;
};

struct Checkpoint {
  int epoch = 0;
  Eigen::VectorXd params;
  Eigen::VectorXd bn_state;
};

struct TrainResult {
  std::vector<EpochStats> trace;
  std::vector<Checkpoint> checkpoints;
  bool diverged = false;
  std::string abort_reason;
};

using EpochHook =
    std::function<void(int epoch, const ContrastiveNet& net, const EpochStats&)>;

// Epoch-driven training against a resampling dataset stream. Divergence
// (train loss > 10x the initial loss for 5 consecutive epochs) aborts with
// the trace retained.
inline TrainResult train(ContrastiveNet& net, DatasetStream& stream,
                         const TrainConfig& cfg, const EpochHook& hook = {}) {
  TrainResult result;
  CTE_CHECK(cfg.epochs >= 0, "train: epochs must be >= 0");
  if (cfg.epochs == 0) return result;

  PairBatch holdout = to_batch(stream.make_holdout(0), net.vocab());

  Eigen::VectorXd params = net.flatten();
  Eigen::VectorXd mask = net.wd_mask();
  OptState st = OptState::zeros(params.size());
  Mlp::Grad g_pair = net.kind() == ModelKind::PairMlp ? net.pair_mlp().make_grad()
                                                      : Mlp::Grad{};
  Mlp::Grad g_t1 = net.kind() == ModelKind::Bilinear ? net.tower1().make_grad()
                                                     : Mlp::Grad{};
  Mlp::Grad g_t2 = net.kind() == ModelKind::Bilinear ? net.tower2().make_grad()
                                                     : Mlp::Grad{};

  double initial_loss = -1.0;
  int over_count = 0;
  std::uint64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const ContrastiveDataset& ds = stream.for_epoch(epoch);
    CTE_CHECK(ds.size() > 0, "train: empty dataset from stream");
    Rng order_rng(derive_seed(cfg.seed, 0xe90cULL + static_cast<std::uint64_t>(epoch)));
    std::vector<int> idx(static_cast<std::size_t>(ds.size()));
    for (int i = 0; i < ds.size(); ++i) idx[static_cast<std::size_t>(i)] = i;
    order_rng.shuffle(idx);

    double lr = cfg.opt.lr_at(epoch);
    double loss_sum = 0.0;
    int batches = 0;
    for (int off = 0; off < ds.size(); off += cfg.batch_size) {
      int hi = std::min(off + cfg.batch_size, ds.size());
      std::vector<int> chunk(idx.begin() + off, idx.begin() + hi);
      PairBatch batch = to_batch(ds, chunk, net.vocab());
      double loss = net.loss_and_grad(batch, g_pair, g_t1, g_t2,
                                      derive_seed(cfg.seed, 0xd407ULL + step));
      Eigen::VectorXd grad = net.grad_flatten(g_pair, g_t1, g_t2);
      opt_step(params, grad, mask, st, cfg.opt, lr);
      net.unflatten(params);
      loss_sum += loss * (hi - off);
      ++batches;
      ++step;
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / ds.size();
    stats.holdout_loss = net.eval_loss(holdout);
    stats.lr = lr;
    result.trace.push_back(stats);
    if (hook) hook(epoch, net, stats);

    bool want_checkpoint = cfg.checkpoint_every > 0 &&
                           (epoch % cfg.checkpoint_every == cfg.checkpoint_every - 1);
    if (want_checkpoint || epoch == cfg.epochs - 1) {
      result.checkpoints.push_back({epoch, net.flatten(), net.state_flatten()});
    }

    if (initial_loss < 0.0) initial_loss = stats.train_loss;
    if (stats.train_loss > 10.0 * initial_loss) {
      if (++over_count >= 5) {
        result.diverged = true;
        result.abort_reason = "train loss exceeded 10x initial for 5 epochs";
        break;
      }
    } else {
      over_count = 0;
    }
  }
  return result;
}

}  // namespace cte
