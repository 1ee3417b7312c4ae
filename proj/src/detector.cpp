#include "pdet/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pdet/kernels.hpp"

namespace pdet {

namespace {
constexpr double kProbClamp = 1e-12;
}

void LossWeights::validate() const {
  if (lambda1 < 0.0 || lambda2 < 0.0 || lambda3 < 0.0)
    throw std::invalid_argument("loss weights must be non-negative");
  if (lambda1 + lambda2 <= 0.0)
    throw std::invalid_argument("lambda1 + lambda2 must be positive");
}

DetectorModel DetectorModel::init(const FeaturizerConfig& fz,
                                  std::size_t repr_dim, std::size_t hidden,
                                  rng::Stream& rs) {
  fz.validate();
  DetectorModel model;
  model.featurizer_config = fz;
  model.extractor = Mlp::init(
      fz.embed_dim,
      {{hidden, Activation::relu}, {repr_dim, Activation::tanh}}, rs);
  model.head = Mlp::init(repr_dim, {{2, Activation::linear}}, rs);
  return model;
}

namespace {

std::vector<double> mean_pool(const EmbeddingMatrix& embedding) {
  if (embedding.rows == 0)
    throw std::invalid_argument("extract: embedding has no rows");
  std::vector<double> pooled(embedding.cols, 0.0);
  for (std::size_t r = 0; r < embedding.rows; ++r)
    kernels::add(pooled.data(), pooled.data(), embedding.row(r),
                 embedding.cols);
  kernels::scale(pooled.data(), 1.0 / static_cast<double>(embedding.rows),
                 pooled.size());
  return pooled;
}

}  // namespace

std::vector<double> extract(const DetectorModel& model,
                            const EmbeddingMatrix& embedding) {
  if (embedding.cols != model.extractor.in_dim())
    throw std::invalid_argument(
        "extract: embedding dim " + std::to_string(embedding.cols) +
        " does not match extractor input " +
        std::to_string(model.extractor.in_dim()));
  return forward_value(model.extractor, mean_pool(embedding));
}

std::array<double, 2> predict(const DetectorModel& model,
                              std::span<const double> z) {
  const std::vector<double> logits = forward_value(model.head, z);
  if (!std::isfinite(logits[0]) || !std::isfinite(logits[1]))
    throw std::runtime_error("predict: non-finite logits");
  const double m = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - m);
  const double e1 = std::exp(logits[1] - m);
  const double total = e0 + e1;
  return {e0 / total, e1 / total};
}

double distance_loss(std::span<const double> z_x,
                     std::span<const double> z_n) {
  if (z_x.size() != z_n.size())
    throw std::invalid_argument("distance_loss: dimension mismatch");
  return kernels::sumsq_diff(z_x.data(), z_n.data(), z_x.size());
}

double ce_loss(double y_hat, int label) {
  if (label != 0 && label != 1)
    throw std::invalid_argument("ce_loss: label must be 0 or 1");
  const double p = std::clamp(y_hat, kProbClamp, 1.0 - kProbClamp);
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

double total_loss(double loss_clean, double loss_noisy, double loss_distance,
                  const LossWeights& weights) {
  return weights.lambda1 * loss_clean + weights.lambda2 * loss_noisy +
         weights.lambda3 * loss_distance;
}

DetectorGrads DetectorGrads::zeros_like(const DetectorModel& model) {
  return {MlpGrads::zeros_like(model.extractor),
          MlpGrads::zeros_like(model.head)};
}

void DetectorGrads::accumulate(const DetectorGrads& other) {
  extractor.accumulate(other.extractor);
  head.accumulate(other.head);
}

void DetectorGrads::scale(double factor) {
  extractor.scale(factor);
  head.scale(factor);
}

namespace {

struct BranchForward {
  ForwardCache extractor;
  ForwardCache head;
  std::array<double, 2> probs;
  double ce = 0.0;
};

BranchForward run_branch(const DetectorModel& model, const EmbeddingMatrix& e,
                         int label) {
  BranchForward fwd;
  fwd.extractor = forward(model.extractor, mean_pool(e));
  fwd.head = forward(model.head, fwd.extractor.output);
  const std::vector<double>& logits = fwd.head.output;
  if (!std::isfinite(logits[0]) || !std::isfinite(logits[1]))
    throw std::runtime_error("grad_total_loss: non-finite logits");
  const double m = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - m);
  const double e1 = std::exp(logits[1] - m);
  fwd.probs = {e0 / (e0 + e1), e1 / (e0 + e1)};
  fwd.ce = ce_loss(fwd.probs[1], label);
  return fwd;
}

}  // namespace

LossBreakdown grad_total_loss(const DetectorModel& model,
                              const EmbeddingMatrix& clean,
                              const EmbeddingMatrix& noisy, int label,
                              const LossWeights& weights, DetectorGrads& out) {
  if (clean.cols != noisy.cols)
    throw std::invalid_argument("grad_total_loss: embedding width mismatch");

  const BranchForward fx = run_branch(model, clean, label);
  const BranchForward fn = run_branch(model, noisy, label);
  const std::vector<double>& z_x = fx.extractor.output;
  const std::vector<double>& z_n = fn.extractor.output;

  LossBreakdown loss;
  loss.clean = fx.ce;
  loss.noisy = fn.ce;
  loss.distance = distance_loss(z_x, z_n);
  loss.total = total_loss(loss.clean, loss.noisy, loss.distance, weights);

  // softmax + cross-entropy: d loss / d logits = probs - onehot(label)
  std::vector<double> dlogits_x = {fx.probs[0], fx.probs[1]};
  std::vector<double> dlogits_n = {fn.probs[0], fn.probs[1]};
  dlogits_x[static_cast<std::size_t>(label)] -= 1.0;
  dlogits_n[static_cast<std::size_t>(label)] -= 1.0;
  kernels::scale(dlogits_x.data(), weights.lambda1, 2);
  kernels::scale(dlogits_n.data(), weights.lambda2, 2);

  std::vector<double> gz_x, gz_n;
  MlpGrads head_gx = backward(model.head, fx.head, dlogits_x, gz_x);
  const MlpGrads head_gn = backward(model.head, fn.head, dlogits_n, gz_n);
  head_gx.accumulate(head_gn);

  // distance term: d/dz_x = 2*l3*(z_x - z_n), d/dz_n the negative
  for (std::size_t k = 0; k < z_x.size(); ++k) {
    const double d = 2.0 * weights.lambda3 * (z_x[k] - z_n[k]);
    gz_x[k] += d;
    gz_n[k] -= d;
  }

  std::vector<double> unused;
  MlpGrads ext_gx = backward(model.extractor, fx.extractor, gz_x, unused);
  const MlpGrads ext_gn = backward(model.extractor, fn.extractor, gz_n, unused);
  ext_gx.accumulate(ext_gn);

  if (!ext_gx.all_finite() || !head_gx.all_finite())
    throw std::runtime_error("grad_total_loss: non-finite gradient");
  out.extractor = std::move(ext_gx);
  out.head = std::move(head_gx);
  return loss;
}

}  // namespace pdet
