#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "ilfo/common.hpp"

namespace ilfo {

enum class OutputActivation { Identity, Tanh };

// Per-layer activations retained from a forward pass, consumed by backward.
struct MlpCache {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> pre;
  std::vector<Eigen::MatrixXd> post;
};

struct MlpGrads {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;
};

// Fully connected network with rectifier hidden layers. Batches are columns.
struct Mlp {
  std::vector<Eigen::MatrixXd> w;  // w[l]: widths[l+1] x widths[l]
  std::vector<Eigen::VectorXd> b;
  OutputActivation output_activation = OutputActivation::Identity;

  static Mlp make(const std::vector<int>& widths, OutputActivation act, Rng& rng) {
    if (widths.size() < 2) throw std::invalid_argument("Mlp: need at least input and output widths");
    Mlp net;
    net.output_activation = act;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      const int fan_in = widths[l], fan_out = widths[l + 1];
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      Eigen::MatrixXd W(fan_out, fan_in);
      for (int r = 0; r < fan_out; ++r) {
        for (int c = 0; c < fan_in; ++c) W(r, c) = rng.uniform(-bound, bound);
      }
      Eigen::VectorXd bias(fan_out);
      for (int r = 0; r < fan_out; ++r) bias[r] = rng.uniform(-bound, bound);
      net.w.push_back(std::move(W));
      net.b.push_back(std::move(bias));
    }
    return net;
  }

  int layers() const { return static_cast<int>(w.size()); }
  int input_dim() const { return static_cast<int>(w.front().cols()); }
  int output_dim() const { return static_cast<int>(w.back().rows()); }

  const Eigen::MatrixXd& forward(const Eigen::MatrixXd& x, MlpCache& cache) const {
    if (x.rows() != input_dim()) throw std::invalid_argument("Mlp: input width mismatch");
    const int L = layers();
    cache.input = x;
    cache.pre.resize(L);
    cache.post.resize(L);
    const Eigen::MatrixXd* h = &cache.input;
    for (int l = 0; l < L; ++l) {
      cache.pre[l].noalias() = w[l] * (*h);
      cache.pre[l].colwise() += b[l];
      if (l + 1 < L) {
        cache.post[l] = cache.pre[l].cwiseMax(0.0);
      } else if (output_activation == OutputActivation::Tanh) {
        cache.post[l] = cache.pre[l].array().tanh();
      } else {
        cache.post[l] = cache.pre[l];
      }
      h = &cache.post[l];
    }
    return cache.post.back();
  }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const {
    MlpCache cache;
    return forward(x, cache);
  }

  // Reverse-mode gradients of a scalar loss given dL/d(output). Accumulates
  // nothing: grads are overwritten. Optionally also yields dL/d(input),
  // which the actor update needs to differentiate a critic through its
  // action input.
  void backward(const MlpCache& cache, const Eigen::MatrixXd& dLdy, MlpGrads& grads,
                Eigen::MatrixXd* dLdx = nullptr) const {
    const int L = layers();
    grads.w.resize(L);
    grads.b.resize(L);
    Eigen::MatrixXd delta;
    if (output_activation == OutputActivation::Tanh) {
      delta = dLdy.array() * (1.0 - cache.post[L - 1].array().square());
    } else {
      delta = dLdy;
    }
    for (int l = L - 1; l >= 0; --l) {
      const Eigen::MatrixXd& h_prev = (l == 0) ? cache.input : cache.post[l - 1];
      grads.w[l].noalias() = delta * h_prev.transpose();
      grads.b[l] = delta.rowwise().sum();
      if (l > 0) {
        Eigen::MatrixXd dh = w[l].transpose() * delta;
        delta = dh.array() * (cache.pre[l - 1].array() > 0.0).cast<double>();
      } else if (dLdx) {
        dLdx->noalias() = w[0].transpose() * delta;
      }
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["output_activation"] = output_activation == OutputActivation::Tanh ? "tanh" : "identity";
    auto dump_mat = [](const Eigen::MatrixXd& m) {
      nlohmann::json rows = nlohmann::json::array();
      for (int r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
      }
      return rows;
    };
    j["w"] = nlohmann::json::array();
    j["b"] = nlohmann::json::array();
    for (const auto& W : w) j["w"].push_back(dump_mat(W));
    for (const auto& bias : b) {
      nlohmann::json row = nlohmann::json::array();
      for (int r = 0; r < bias.size(); ++r) row.push_back(bias[r]);
      j["b"].push_back(std::move(row));
    }
    return j;
  }

  static Mlp from_json(const nlohmann::json& j) {
    Mlp net;
    net.output_activation = j.at("output_activation").get<std::string>() == "tanh"
                                ? OutputActivation::Tanh
                                : OutputActivation::Identity;
    for (const auto& rows : j.at("w")) {
      Eigen::MatrixXd W(rows.size(), rows.empty() ? 0 : rows[0].size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
          W(static_cast<int>(r), static_cast<int>(c)) = rows[r][c].get<double>();
        }
      }
      net.w.push_back(std::move(W));
    }
    for (const auto& row : j.at("b")) {
      Eigen::VectorXd bias(row.size());
      for (std::size_t r = 0; r < row.size(); ++r) bias[static_cast<int>(r)] = row[r].get<double>();
      net.b.push_back(std::move(bias));
    }
    return net;
  }
};

// Adam with bias correction.
struct Adam {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long t = 0;
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;

  static Adam make(const Mlp& net, double lr) {
    Adam opt;
    opt.lr = lr;
    for (const auto& W : net.w) {
      opt.mw.push_back(Eigen::MatrixXd::Zero(W.rows(), W.cols()));
      opt.vw.push_back(Eigen::MatrixXd::Zero(W.rows(), W.cols()));
    }
    for (const auto& bias : net.b) {
      opt.mb.push_back(Eigen::VectorXd::Zero(bias.size()));
      opt.vb.push_back(Eigen::VectorXd::Zero(bias.size()));
    }
    return opt;
  }

  void step(Mlp& net, const MlpGrads& g) {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (int l = 0; l < net.layers(); ++l) {
      mw[l] = beta1 * mw[l] + (1.0 - beta1) * g.w[l];
      vw[l] = beta2 * vw[l].array() + (1.0 - beta2) * g.w[l].array().square();
      net.w[l].array() -= lr * (mw[l].array() / c1) / ((vw[l].array() / c2).sqrt() + eps);
      mb[l] = beta1 * mb[l] + (1.0 - beta1) * g.b[l];
      vb[l] = beta2 * vb[l].array() + (1.0 - beta2) * g.b[l].array().square();
      net.b[l].array() -= lr * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + eps);
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["lr"] = lr;
    j["beta1"] = beta1;
    j["beta2"] = beta2;
    j["eps"] = eps;
    j["t"] = t;
    auto dump_mats = [](const auto& mats) {
      nlohmann::json out = nlohmann::json::array();
      for (const auto& m : mats) {
        nlohmann::json rows = nlohmann::json::array();
        for (int r = 0; r < m.rows(); ++r) {
          nlohmann::json row = nlohmann::json::array();
          for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
          rows.push_back(std::move(row));
        }
        out.push_back(std::move(rows));
      }
      return out;
    };
    j["mw"] = dump_mats(mw);
    j["vw"] = dump_mats(vw);
    j["mb"] = dump_mats(mb);
    j["vb"] = dump_mats(vb);
    return j;
  }

  static Adam from_json(const nlohmann::json& j) {
    Adam opt;
    opt.lr = j.at("lr").get<double>();
    opt.beta1 = j.at("beta1").get<double>();
    opt.beta2 = j.at("beta2").get<double>();
    opt.eps = j.at("eps").get<double>();
    opt.t = j.at("t").get<long>();
    auto load_mats = [](const nlohmann::json& arr) {
      std::vector<Eigen::MatrixXd> mats;
      for (const auto& rows : arr) {
        Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows[0].size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
          for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m(static_cast<int>(r), static_cast<int>(c)) = rows[r][c].get<double>();
          }
        }
        mats.push_back(std::move(m));
      }
      return mats;
    };
    auto load_vecs = [](const nlohmann::json& arr) {
      std::vector<Eigen::VectorXd> vecs;
      for (const auto& rows : arr) {
        Eigen::VectorXd v(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
          // each entry is stored as a single-column row
          v[static_cast<int>(r)] = rows[r].is_array() ? rows[r][0].get<double>()
                                                      : rows[r].get<double>();
        }
        vecs.push_back(std::move(v));
      }
      return vecs;
    };
    opt.mw = load_mats(j.at("mw"));
    opt.vw = load_mats(j.at("vw"));
    opt.mb = load_vecs(j.at("mb"));
    opt.vb = load_vecs(j.at("vb"));
    return opt;
  }
};

}  // namespace ilfo
