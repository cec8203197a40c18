#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cte/numeric.hpp"
#include "cte/rng.hpp"

namespace cte {

// Fully-connected stack: Linear -> [BatchNorm] -> ReLU -> [Dropout] on hidden
// layers, plain Linear on the output layer. Heads (sigmoid, inner product)
// belong to the loss functions, not the stack.
struct MlpSpec {
  std::vector<int> dims;  // {in, h1, ..., out}
  bool batchnorm = false;
  double dropout = 0.0;  // train-mode drop probability on hidden activations

  int num_layers() const { return static_cast<int>(dims.size()) - 1; }
  bool valid() const { return dims.size() >= 2; }
};

struct MlpWorkspace {
  std::vector<Eigen::MatrixXd> inputs;   // X_l per layer
  std::vector<Eigen::MatrixXd> pre_act;  // post-BN, pre-ReLU (hidden layers)
  std::vector<Eigen::MatrixXd> xhat;     // BN normalized activations
  std::vector<Eigen::VectorXd> invstd;   // BN 1/sqrt(var+eps)
  std::vector<Eigen::MatrixXd> drop_mask;
  Eigen::MatrixXd output;
};

class Mlp {
 public:
  static constexpr double kBnEps = 1e-5;
  static constexpr double kBnMomentum = 0.1;

  struct Layer {
    Eigen::MatrixXd W;  // out x in
    Eigen::VectorXd b;
    Eigen::VectorXd gamma, beta;          // batchnorm affine
    Eigen::VectorXd run_mean, run_var;    // batchnorm eval statistics
  };

  struct Grad {
    std::vector<Layer> layers;

    void set_zero() {
      for (auto& l : layers) {
        l.W.setZero();
        l.b.setZero();
        if (l.gamma.size()) {
          l.gamma.setZero();
          l.beta.setZero();
        }
      }
    }
  };

  Mlp() = default;

  // uniform fan-in init, U(-1/sqrt(in), 1/sqrt(in)) for weights and biases
  Mlp(MlpSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
    CTE_CHECK(spec_.valid(), "mlp: need at least input and output dims");
    for (int l = 0; l < spec_.num_layers(); ++l) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(l)));
      int in = spec_.dims[static_cast<std::size_t>(l)];
      int out = spec_.dims[static_cast<std::size_t>(l) + 1];
      double bound = 1.0 / std::sqrt(static_cast<double>(in));
      Layer layer;
      layer.W.resize(out, in);
      for (int c = 0; c < in; ++c) {
        for (int r = 0; r < out; ++r) {
          layer.W(r, c) = bound * (2.0 * rng.uniform01() - 1.0);
        }
      }
      layer.b.resize(out);
      for (int r = 0; r < out; ++r) layer.b(r) = bound * (2.0 * rng.uniform01() - 1.0);
      if (spec_.batchnorm && l < spec_.num_layers() - 1) {
        layer.gamma = Eigen::VectorXd::Ones(out);
        layer.beta = Eigen::VectorXd::Zero(out);
        layer.run_mean = Eigen::VectorXd::Zero(out);
        layer.run_var = Eigen::VectorXd::Ones(out);
      }
      layers_.push_back(std::move(layer));
    }
  }

  const MlpSpec& spec() const { return spec_; }
  const std::vector<Layer>& layers() const { return layers_; }

  Grad make_grad() const {
    Grad g;
    for (const auto& l : layers_) {
      Layer gl;
      gl.W = Eigen::MatrixXd::Zero(l.W.rows(), l.W.cols());
      gl.b = Eigen::VectorXd::Zero(l.b.size());
      if (l.gamma.size()) {
        gl.gamma = Eigen::VectorXd::Zero(l.gamma.size());
        gl.beta = Eigen::VectorXd::Zero(l.beta.size());
      }
      g.layers.push_back(std::move(gl));
    }
    return g;
  }

  // Training-mode forward. Batch statistics are used for batchnorm (running
  // stats updated); dropout masks are drawn from dropout_seed so a fixed seed
  // reproduces the pass exactly.
  Eigen::MatrixXd forward_train(const Eigen::MatrixXd& X, MlpWorkspace& ws,
                                std::uint64_t dropout_seed) {
    const int L = spec_.num_layers();
    ws.inputs.assign(static_cast<std::size_t>(L), {});
    ws.pre_act.assign(static_cast<std::size_t>(L), {});
    ws.xhat.assign(static_cast<std::size_t>(L), {});
    ws.invstd.assign(static_cast<std::size_t>(L), {});
    ws.drop_mask.assign(static_cast<std::size_t>(L), {});
    Rng drop_rng(dropout_seed);
    Eigen::MatrixXd H = X;
    for (int l = 0; l < L; ++l) {
      auto& layer = layers_[static_cast<std::size_t>(l)];
      ws.inputs[static_cast<std::size_t>(l)] = H;
      Eigen::MatrixXd Z = (H * layer.W.transpose()).rowwise() + layer.b.transpose();
      if (l == L - 1) {
        H = std::move(Z);
        break;
      }
      if (spec_.batchnorm) {
        const auto B = static_cast<double>(Z.rows());
        Eigen::RowVectorXd mu = Z.colwise().mean();
        Eigen::MatrixXd centered = Z.rowwise() - mu;
        Eigen::RowVectorXd var = centered.array().square().colwise().mean();
        Eigen::VectorXd invstd =
            (var.transpose().array() + kBnEps).rsqrt().matrix();
        Eigen::MatrixXd xhat = centered * invstd.asDiagonal();
        Z = (xhat * layer.gamma.asDiagonal()).rowwise() + layer.beta.transpose();
        ws.xhat[static_cast<std::size_t>(l)] = std::move(xhat);
        ws.invstd[static_cast<std::size_t>(l)] = std::move(invstd);
        double unbias = Z.rows() > 1 ? B / (B - 1.0) : 1.0;
        layer.run_mean = (1.0 - kBnMomentum) * layer.run_mean +
                         kBnMomentum * mu.transpose();
        layer.run_var = (1.0 - kBnMomentum) * layer.run_var +
                        kBnMomentum * unbias * var.transpose();
      }
      ws.pre_act[static_cast<std::size_t>(l)] = Z;
      H = Z.cwiseMax(0.0);
      if (spec_.dropout > 0.0) {
        double keep = 1.0 - spec_.dropout;
        Eigen::MatrixXd mask(H.rows(), H.cols());
        for (Eigen::Index r = 0; r < H.rows(); ++r) {
          for (Eigen::Index c = 0; c < H.cols(); ++c) {
            mask(r, c) = drop_rng.uniform01() < keep ? 1.0 / keep : 0.0;
          }
        }
        H = H.cwiseProduct(mask);
        ws.drop_mask[static_cast<std::size_t>(l)] = std::move(mask);
      }
    }
    ws.output = H;
    return ws.output;
  }

  // dOut is the loss gradient w.r.t. the output; parameter grads are written
  // into g (set semantics). Returns nothing: input grads are not needed.
  void backward(const MlpWorkspace& ws, const Eigen::MatrixXd& dOut, Grad& g) const {
    const int L = spec_.num_layers();
    Eigen::MatrixXd G = dOut;
    for (int l = L - 1; l >= 0; --l) {
      const auto& layer = layers_[static_cast<std::size_t>(l)];
      auto& gl = g.layers[static_cast<std::size_t>(l)];
      if (l < L - 1) {
        if (spec_.dropout > 0.0) {
          G = G.cwiseProduct(ws.drop_mask[static_cast<std::size_t>(l)]);
        }
        const auto& A = ws.pre_act[static_cast<std::size_t>(l)];
        G = G.cwiseProduct((A.array() > 0.0).cast<double>().matrix());
        if (spec_.batchnorm) {
          const auto& xhat = ws.xhat[static_cast<std::size_t>(l)];
          const auto& invstd = ws.invstd[static_cast<std::size_t>(l)];
          gl.gamma = G.cwiseProduct(xhat).colwise().sum().transpose();
          gl.beta = G.colwise().sum().transpose();
          Eigen::RowVectorXd mean_g = G.colwise().mean();
          Eigen::RowVectorXd mean_gx = G.cwiseProduct(xhat).colwise().mean();
          Eigen::MatrixXd dz =
              ((G.rowwise() - mean_g) - xhat * mean_gx.transpose().asDiagonal());
          G = dz * (layer.gamma.cwiseProduct(invstd)).asDiagonal();
        }
      }
      const auto& X = ws.inputs[static_cast<std::size_t>(l)];
      gl.W.noalias() = G.transpose() * X;
      gl.b = G.colwise().sum().transpose();
      if (l > 0) G = G * layer.W;
    }
  }

  // Evaluation-mode forward: running batchnorm statistics, no dropout;
  // deterministic and const.
  Eigen::MatrixXd infer(const Eigen::MatrixXd& X) const {
    const int L = spec_.num_layers();
    Eigen::MatrixXd H = X;
    for (int l = 0; l < L; ++l) {
      const auto& layer = layers_[static_cast<std::size_t>(l)];
      Eigen::MatrixXd Z = (H * layer.W.transpose()).rowwise() + layer.b.transpose();
      if (l == L - 1) return Z;
      if (spec_.batchnorm) {
        Eigen::VectorXd invstd = (layer.run_var.array() + kBnEps).rsqrt().matrix();
        Z = ((Z.rowwise() - layer.run_mean.transpose()) *
             (layer.gamma.cwiseProduct(invstd)).asDiagonal())
                .rowwise() +
            layer.beta.transpose();
      }
      H = Z.cwiseMax(0.0);
    }
    return H;
  }

  // flat views over trainable parameters, fixed order (W, b[, gamma, beta])
  Eigen::Index param_count() const {
    Eigen::Index n = 0;
    for (const auto& l : layers_) {
      n += l.W.size() + l.b.size() + l.gamma.size() + l.beta.size();
    }
    return n;
  }

  void flatten_into(double* out) const {
    for (const auto& l : layers_) {
      out = std::copy(l.W.data(), l.W.data() + l.W.size(), out);
      out = std::copy(l.b.data(), l.b.data() + l.b.size(), out);
      out = std::copy(l.gamma.data(), l.gamma.data() + l.gamma.size(), out);
      out = std::copy(l.beta.data(), l.beta.data() + l.beta.size(), out);
    }
  }

  void unflatten_from(const double* in) {
    for (auto& l : layers_) {
      std::copy(in, in + l.W.size(), l.W.data());
      in += l.W.size();
      std::copy(in, in + l.b.size(), l.b.data());
      in += l.b.size();
      std::copy(in, in + l.gamma.size(), l.gamma.data());
      in += l.gamma.size();
      std::copy(in, in + l.beta.size(), l.beta.data());
      in += l.beta.size();
    }
  }

  static void grad_flatten_into(const Grad& g, double* out) {
    for (const auto& l : g.layers) {
      out = std::copy(l.W.data(), l.W.data() + l.W.size(), out);
      out = std::copy(l.b.data(), l.b.data() + l.b.size(), out);
      out = std::copy(l.gamma.data(), l.gamma.data() + l.gamma.size(), out);
      out = std::copy(l.beta.data(), l.beta.data() + l.beta.size(), out);
    }
  }

  // weight-decay mask: 1 on weight matrices, 0 on biases and batchnorm params
  void wd_mask_into(double* out) const {
    for (const auto& l : layers_) {
      out = std::fill_n(out, l.W.size(), 1.0);
      out = std::fill_n(out, l.b.size(), 0.0);
      out = std::fill_n(out, l.gamma.size(), 0.0);
      out = std::fill_n(out, l.beta.size(), 0.0);
    }
  }

  // batchnorm running statistics (not trainable, but part of a checkpoint)
  Eigen::Index state_count() const {
    Eigen::Index n = 0;
    for (const auto& l : layers_) n += l.run_mean.size() + l.run_var.size();
    return n;
  }

  void state_flatten_into(double* out) const {
    for (const auto& l : layers_) {
      out = std::copy(l.run_mean.data(), l.run_mean.data() + l.run_mean.size(), out);
      out = std::copy(l.run_var.data(), l.run_var.data() + l.run_var.size(), out);
    }
  }

  void state_unflatten_from(const double* in) {
    for (auto& l : layers_) {
      std::copy(in, in + l.run_mean.size(), l.run_mean.data());
      in += l.run_mean.size();
      std::copy(in, in + l.run_var.size(), l.run_var.data());
      in += l.run_var.size();
    }
  }

 private:
  MlpSpec spec_;
  std::vector<Layer> layers_;
};

}  // namespace cte
