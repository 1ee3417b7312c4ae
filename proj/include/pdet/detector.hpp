#pragma once

#include <array>
#include <span>
#include <vector>

#include "pdet/featurizer.hpp"
#include "pdet/matrix.hpp"
#include "pdet/neuralcore.hpp"

namespace pdet {

// Weights of the three loss terms: clean cross-entropy, noisy cross-entropy,
// representation distance.
struct LossWeights {
  double lambda1 = 0.5;
  double lambda2 = 0.5;
  double lambda3 = 0.01;

  void validate() const;
  bool operator==(const LossWeights&) const = default;
};

// Trainable detector: extractor maps the mean-pooled embedding to a compact
// representation z, the head maps z to two logits. The featurizer config
// rides along so checkpoints can rebuild the frozen encoder.
struct DetectorModel {
  Mlp extractor;  // embed_dim -> hidden relu -> repr_dim tanh
  Mlp head;       // repr_dim -> 2 linear
  FeaturizerConfig featurizer_config;

  static DetectorModel init(const FeaturizerConfig& fz, std::size_t repr_dim,
                            std::size_t hidden, rng::Stream& rs);
  std::size_t repr_dim() const { return extractor.out_dim(); }
  bool operator==(const DetectorModel&) const = default;
};

// mean-pool token rows, then run the extractor
std::vector<double> extract(const DetectorModel& model,
                            const EmbeddingMatrix& embedding);

// softmax over the head logits; returns {p(class 0), p(class 1)}
std::array<double, 2> predict(const DetectorModel& model,
                              std::span<const double> z);

// squared Euclidean distance between two representations
double distance_loss(std::span<const double> z_x, std::span<const double> z_n);

// binary cross-entropy on the class-1 probability, clamped away from {0,1}
double ce_loss(double y_hat, int label);

double total_loss(double loss_clean, double loss_noisy, double loss_distance,
                  const LossWeights& weights);

struct DetectorGrads {
  MlpGrads extractor;
  MlpGrads head;

  static DetectorGrads zeros_like(const DetectorModel& model);
  void accumulate(const DetectorGrads& other);
  void scale(double factor);
};

struct LossBreakdown {
  double clean = 0.0;
  double noisy = 0.0;
  double distance = 0.0;
  double total = 0.0;
};

// Exact gradients of the weighted total loss through both branches (clean
// and noise-enhanced). The featurizer is upstream of pooling and frozen, so
// no gradient flows there.
LossBreakdown grad_total_loss(const DetectorModel& model,
                              const EmbeddingMatrix& clean,
                              const EmbeddingMatrix& noisy, int label,
                              const LossWeights& weights, DetectorGrads& out);

}  // namespace pdet
