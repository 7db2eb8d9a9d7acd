#include "ladr/trainer.hpp"

#include <cmath>
#include <cstdio>

#include "ladr/errors.hpp"

namespace ladr {

double lr_at_step(const TrainConfig& cfg, int step) {
  if (cfg.warmup_steps > 0 && step < cfg.warmup_steps)
    return cfg.lr * static_cast<double>(step + 1) / cfg.warmup_steps;
  const int span = cfg.total_steps - cfg.warmup_steps;
  const double progress =
      span > 0 ? static_cast<double>(step - cfg.warmup_steps) / span : 1.0;
  constexpr double kPi = 3.14159265358979323846;
  return cfg.lr_final +
         0.5 * (cfg.lr - cfg.lr_final) * (1.0 + std::cos(kPi * progress));
}

namespace {

const char* nonfinite_component(const LossBreakdown& l) {
  if (!std::isfinite(l.loc)) return "loss_loc";
  if (!std::isfinite(l.obj)) return "loss_obj";
  if (!std::isfinite(l.av)) return "loss_av";
  if (!std::isfinite(l.ad)) return "loss_ad";
  if (!std::isfinite(l.total)) return "loss_total";
  return nullptr;
}

void write_csv_row(std::ostream& os, const StepLog& log) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                log.step, log.loss.total, log.loss.loc, log.loss.obj,
                log.loss.av, log.loss.ad, log.lr);
  os << buf;
}

}  // namespace

TrainResult train(Network<float>& net, DualBatchIterator& data,
                  const TrainConfig& cfg, const TrainHooks& hooks) {
  TrainResult result;
  if (hooks.csv)
    *hooks.csv << "step,loss_total,loss_loc,loss_obj,loss_av,loss_ad,lr\n";

  const std::vector<Anchor> anchors = generate_anchors(net.config().anchors);
  auto params = net.parameters();
  std::vector<std::vector<float>> adam_m(params.size()), adam_v(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    adam_m[i].assign(params[i].value->size(), 0.0f);
    adam_v[i].assign(params[i].value->size(), 0.0f);
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::vector<float>> grad_rows;

  for (int step = 0; step < cfg.total_steps; ++step) {
    const std::vector<Sample> batch = data.next();
    const Tensor<float> input = batch_to_tensor(batch);

    std::vector<PreparedImage> prep(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      prep[i].targets = assign_targets(batch[i].objects, anchors,
                                       batch[i].origin, cfg.pos_iou,
                                       cfg.neg_iou);
      prep[i].sampled = sample_minibatch(prep[i].targets, rng(),
                                         cfg.minibatch, cfg.pos_fraction);
    }

    net.zero_grad();
    const LossBreakdown loss =
        network_loss(net, input, prep, cfg.weights, true, &grad_rows);
    if (const char* bad = nonfinite_component(loss))
      throw NonFiniteLoss("step " + std::to_string(step + 1) + ": " + bad +
                          " diverged");
    net.backward(grad_rows);

    if (cfg.grad_clip > 0.0) {
      double norm_sq = 0.0;
      for (const auto& p : params)
        for (const float g : *p.grad) norm_sq += static_cast<double>(g) * g;
      const double norm = std::sqrt(norm_sq);
      if (norm > cfg.grad_clip) {
        const float scale = static_cast<float>(cfg.grad_clip / norm);
        for (auto& p : params)
          for (float& g : *p.grad) g *= scale;
      }
    }

    const double lr = lr_at_step(cfg, step);
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, step + 1);
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, step + 1);
    for (std::size_t i = 0; i < params.size(); ++i) {
      std::vector<float>& value = *params[i].value;
      const std::vector<float>& grad = *params[i].grad;
      for (std::size_t j = 0; j < value.size(); ++j) {
        const double g = grad[j];
        const double m = cfg.adam_beta1 * adam_m[i][j] +
                         (1.0 - cfg.adam_beta1) * g;
        const double v = cfg.adam_beta2 * adam_v[i][j] +
                         (1.0 - cfg.adam_beta2) * g * g;
        adam_m[i][j] = static_cast<float>(m);
        adam_v[i][j] = static_cast<float>(v);
        value[j] -= static_cast<float>(lr * (m / bc1) /
                                       (std::sqrt(v / bc2) + cfg.adam_eps));
      }
    }

    StepLog log{step + 1, loss, lr};
    result.logs.push_back(log);
    if (hooks.csv) write_csv_row(*hooks.csv, log);
    if (hooks.on_step) hooks.on_step(step + 1);
  }
  return result;
}

}  // namespace ladr
