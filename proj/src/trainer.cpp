/* Copyright (c) 2026 The SANet-cpp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include "sanet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <random>

#include "sanet/checkpoint.hpp"
#include "sanet/loss.hpp"

namespace sanet {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("train: ") + what);
  };
  require(lr0 >= 0.0, "lr0 must be >= 0");
  require(epochs >= 1, "epochs must be >= 1");
  require(batch >= 1, "batch must be >= 1");
  require(eta_min >= 0.0 && eta_min <= lr0, "eta_min must lie in [0, lr0]");
  require(beta1 >= 0.0 && beta1 < 1.0, "beta1 must lie in [0, 1)");
  require(beta2 >= 0.0 && beta2 < 1.0, "beta2 must lie in [0, 1)");
  require(adam_eps > 0.0, "adam_eps must be > 0");
  require(clip_norm >= 0.0, "clip_norm must be >= 0");
  require(loss_eps > 0.0, "loss_eps must be > 0");
  require(match_radius >= 0.0, "match_radius must be >= 0");
}

double cosine_lr(std::size_t t, std::size_t total, double lr0, double eta_min) {
  if (t > total) {
    static bool warned = false;
    if (!warned) {
      std::clog << "warning: cosine schedule queried at step " << t << " beyond " << total
                << "; holding eta_min\n";
      warned = true;
    }
    return eta_min;
  }
  if (total == 0) return lr0;
  const double pi = std::acos(-1.0);
  return eta_min + 0.5 * (lr0 - eta_min) *
                       (1.0 + std::cos(pi * static_cast<double>(t) / static_cast<double>(total)));
}

template <typename T>
Adam<T>::Adam(const ParamRegistry<T>& params, double beta1, double beta2, double eps)
    : params_(params.trainable()), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& e : params_) {
    m_.emplace_back(e.var.shape());
    v_.emplace_back(e.var.shape());
  }
}

template <typename T>
void Adam<T>::step(double lr) {
  for (const auto& e : params_) {
    if (e.var.has_grad() && !e.var.grad().all_finite()) {
      throw NumericalError("non-finite gradient in parameter " + e.name);
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t p = 0; p < params_.size(); ++p) {
    const Var<T>& var = params_[p].var;
    Tensor<T>& theta = var.mutable_value();
    Tensor<T>& m = m_[p];
    Tensor<T>& v = v_[p];
    const bool has = var.has_grad();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double g = has ? static_cast<double>(var.grad()[i]) : 0.0;
      const double mi = beta1_ * static_cast<double>(m[i]) + (1.0 - beta1_) * g;
      const double vi = beta2_ * static_cast<double>(v[i]) + (1.0 - beta2_) * g * g;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double mhat = mi / c1, vhat = vi / c2;
      theta[i] = static_cast<T>(static_cast<double>(theta[i]) - lr * mhat / (std::sqrt(vhat) + eps_));
    }
  }
}

template class Adam<float>;
template class Adam<double>;

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,lr,loss,iou,niou,pd,fa\n";
  for (const auto& r : history) {
    out += std::to_string(r.epoch) + "," + num(r.lr) + "," + num(r.loss) + ",";
    if (r.eval) {
      out += num(r.eval->iou) + "," + num(r.eval->niou) + "," +
             (r.eval->pd ? num(*r.eval->pd) : std::string("NA")) + "," + num(r.eval->fa);
    } else {
      out += ",,,";
    }
    out += "\n";
  }
  return out;
}

Tensor<float> predict(const SANet<float>& net, const Tensor<float>& images) {
  Tape<float> tape;
  tape.set_enabled(false);
  return net.forward(tape, Var<float>::constant(images), false).value();
}

MetricAccumulator evaluate(const SANet<float>& net, const Dataset& data, double threshold,
                           double match_radius, std::size_t batch) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty dataset");
  if (batch == 0) batch = 1;
  MetricAccumulator acc(threshold, match_radius);
  for (std::size_t start = 0; start < data.size(); start += batch) {
    std::vector<std::size_t> idx;
    std::vector<std::string> ids;
    for (std::size_t i = start; i < std::min(start + batch, data.size()); ++i) {
      idx.push_back(i);
      ids.push_back(data[i].id);
    }
    auto [x, y] = make_batch(data, idx);
    acc.add_batch(predict(net, x), y, ids);
  }
  return acc;
}

TrainResult train(SANet<float>& net, const Dataset& train_set, const Dataset& held_out,
                  const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");

  const ParamRegistry<float>& reg = net.params();
  Adam<float> adam(reg, cfg.beta1, cfg.beta2, cfg.adam_eps);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const std::size_t per_epoch = (train_set.size() + cfg.batch - 1) / cfg.batch;
  const std::size_t total = per_epoch * cfg.epochs;
  TrainResult result;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochRecord rec;
    rec.epoch = epoch;
    double loss_sum = 0;
    for (std::size_t b = 0; b < per_epoch; ++b) {
      Dataset batch;
      for (std::size_t k = b * cfg.batch; k < std::min((b + 1) * cfg.batch, order.size()); ++k) {
        const Sample& s = train_set[order[k]];
        batch.push_back(cfg.augment ? augment_flip(s, rng) : s);
      }
      std::vector<std::size_t> idx(batch.size());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      auto [x, y] = make_batch(batch, idx);

      Tape<float> tape;
      reg.zero_grad();
      Var<float> pred = net.forward(tape, Var<float>::constant(std::move(x)), true);
      Var<float> loss = soft_iou_loss(tape, pred, y, static_cast<float>(cfg.loss_eps));
      const double l = loss.value()[0];
      if (!std::isfinite(l)) {
        std::string ids;
        for (const auto& s : batch) ids += (ids.empty() ? "" : ", ") + s.id;
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + " step " +
                             std::to_string(result.steps) + "; batch: " + ids);
      }
      tape.backward(loss);

      if (cfg.clip_norm > 0) {
        double sq = 0;
        for (const auto& e : reg.trainable()) {
          if (e.var.has_grad()) {
            for (float g : e.var.grad().values()) sq += static_cast<double>(g) * g;
          }
        }
        const double norm = std::sqrt(sq);
        if (norm > cfg.clip_norm) {
          const auto scale = static_cast<float>(cfg.clip_norm / norm);
          for (const auto& e : reg.trainable()) {
            if (e.var.has_grad()) {
              for (float& g : e.var.grad_buffer().values()) g *= scale;
            }
          }
        }
      }

      rec.lr = cosine_lr(result.steps, total, cfg.lr0, cfg.eta_min);
      adam.step(rec.lr);
      ++result.steps;
      loss_sum += l;
    }
    rec.loss = loss_sum / static_cast<double>(per_epoch);
    const bool eval_now = !held_out.empty() && cfg.eval_every > 0 &&
                          (epoch % cfg.eval_every == 0 || epoch == cfg.epochs);
    if (eval_now) {
      rec.eval = evaluate(net, held_out, cfg.threshold, cfg.match_radius, cfg.batch).aggregate();
    }
    if (!hooks.checkpoint_dir.empty() && cfg.checkpoint_every > 0 &&
        epoch % cfg.checkpoint_every == 0) {
      std::filesystem::create_directories(hooks.checkpoint_dir);
      save_checkpoint(hooks.checkpoint_dir / ("epoch_" + std::to_string(epoch) + ".ckpt"), net,
                      result.steps);
    }
    if (hooks.on_epoch) hooks.on_epoch(rec);
    result.history.push_back(std::move(rec));
  }
  return result;
}

}  // namespace sanet
