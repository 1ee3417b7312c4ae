#include "pdet/detector.hpp"

#include <cmath>

#include <stdexcept>

#include "doctest.h"
#include "fd_check.hpp"

using namespace pdet;

namespace {

FeaturizerConfig tiny_fz() {
  FeaturizerConfig cfg;
  cfg.embed_dim = 6;
  cfg.max_tokens = 4;
  cfg.table_size = 1024;
  return cfg;
}

DetectorModel tiny_model(std::uint64_t seed = 1) {
  rng::Stream rs(seed);
  return DetectorModel::init(tiny_fz(), /*repr_dim=*/4, /*hidden=*/8, rs);
}

EmbeddingMatrix random_embedding(std::size_t rows, std::size_t cols,
                                 rng::Stream& rs) {
  EmbeddingMatrix e(rows, cols);
  for (double& v : e.data) v = rs.uniform(-1.0, 1.0);
  return e;
}

}  // namespace

TEST_CASE("extract pools over rows") {
  DetectorModel model = tiny_model();
  // zero embedding with zero biases -> tanh(0) = 0
  for (Layer& l : model.extractor.layers) {
    for (double& b : l.bias) b = 0.0;
  }
  EmbeddingMatrix zeros(3, 6);
  const std::vector<double> z = extract(model, zeros);
  for (const double v : z) CHECK(v == 0.0);

  // identical rows pool to the single-row result
  rng::Stream rs(3);
  EmbeddingMatrix one(1, 6);
  for (double& v : one.data) v = rs.uniform(-1.0, 1.0);
  EmbeddingMatrix rep(4, 6);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 6; ++c) rep.at(r, c) = one.at(0, c);
  const std::vector<double> za = extract(model, one);
  const std::vector<double> zb = extract(model, rep);
  for (std::size_t i = 0; i < za.size(); ++i)
    CHECK(za[i] == doctest::Approx(zb[i]).epsilon(1e-12));

  EmbeddingMatrix wrong(2, 5);
  CHECK_THROWS_AS(extract(model, wrong), std::invalid_argument);
}

TEST_CASE("extract matches a straight-line pool-then-forward oracle") {
  rng::Stream rs(17);
  const DetectorModel model = tiny_model(17);
  const EmbeddingMatrix e = random_embedding(5, 6, rs);

  // independent recomputation with naive loops
  std::vector<double> pooled(6, 0.0);
  for (std::size_t r = 0; r < e.rows; ++r)
    for (std::size_t c = 0; c < e.cols; ++c) pooled[c] += e.at(r, c);
  for (double& v : pooled) v /= static_cast<double>(e.rows);
  std::vector<double> cur = pooled;
  for (const Layer& l : model.extractor.layers) {
    std::vector<double> next(l.out_dim());
    for (std::size_t r = 0; r < l.out_dim(); ++r) {
      double acc = l.bias[r];
      for (std::size_t c = 0; c < l.in_dim(); ++c)
        acc += l.weights.at(r, c) * cur[c];
      next[r] = l.act == Activation::relu   ? (acc > 0 ? acc : 0)
                : l.act == Activation::tanh ? std::tanh(acc)
                                            : acc;
    }
    cur = next;
  }

  const std::vector<double> z = extract(model, e);
  REQUIRE(z.size() == cur.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    CHECK(z[i] == doctest::Approx(cur[i]).epsilon(1e-12));
}

TEST_CASE("predict closed forms") {
  DetectorModel model = tiny_model();
  // zero head -> equal logits -> (0.5, 0.5)
  for (Layer& l : model.head.layers) {
    for (double& w : l.weights.data) w = 0.0;
    for (double& b : l.bias) b = 0.0;
  }
  const std::vector<double> z(4, 0.3);
  const auto p = predict(model, z);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));

  // logits (ln 3, 0) -> (0.75, 0.25)
  model.head.layers[0].bias = {std::log(3.0), 0.0};
  const auto p2 = predict(model, std::vector<double>(4, 0.0));
  CHECK(p2[0] == doctest::Approx(0.75));
  CHECK(p2[1] == doctest::Approx(0.25));

  // shift invariance
  model.head.layers[0].bias = {std::log(3.0) + 7.5, 7.5};
  const auto p3 = predict(model, std::vector<double>(4, 0.0));
  CHECK(p3[0] == doctest::Approx(0.75));
  CHECK(p3[1] + p3[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("distance and cross-entropy losses") {
  CHECK(distance_loss(std::vector<double>{1, 0}, std::vector<double>{1, 0}) ==
        0.0);
  CHECK(distance_loss(std::vector<double>{1, 0}, std::vector<double>{0, 1}) ==
        doctest::Approx(2.0));
  CHECK(distance_loss(std::vector<double>{3, 4}, std::vector<double>{0, 0}) ==
        doctest::Approx(25.0));
  CHECK_THROWS_AS(
      distance_loss(std::vector<double>{1}, std::vector<double>{1, 2}),
      std::invalid_argument);

  CHECK(ce_loss(1.0, 1) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(ce_loss(0.5, 1) == doctest::Approx(std::log(2.0)));
  CHECK(ce_loss(0.9, 0) == doctest::Approx(-std::log(0.1)));
  CHECK_THROWS_AS(ce_loss(0.5, 2), std::invalid_argument);

  const LossWeights w;
  CHECK(total_loss(std::log(2.0), std::log(2.0), 2.0, w) ==
        doctest::Approx(std::log(2.0) + 0.02));
  CHECK(total_loss(0.0, 0.0, 0.0, w) == 0.0);
  const LossWeights no_dis = {0.5, 0.5, 0.0};
  CHECK(total_loss(1.0, 1.0, 123.0, no_dis) == total_loss(1.0, 1.0, 0.0, no_dis));
}

TEST_CASE("total loss is linear in each component") {
  const LossWeights w = {0.4, 0.35, 0.07};
  const double base = total_loss(1.0, 2.0, 3.0, w);
  CHECK(total_loss(2.0, 2.0, 3.0, w) - base == doctest::Approx(0.4));
  CHECK(total_loss(1.0, 3.0, 3.0, w) - base == doctest::Approx(0.35));
  CHECK(total_loss(1.0, 2.0, 4.0, w) - base == doctest::Approx(0.07));
}

TEST_CASE("grad_total_loss edge cases") {
  rng::Stream rs(23);
  const DetectorModel model = tiny_model(23);
  const EmbeddingMatrix ex = random_embedding(3, 6, rs);
  const EmbeddingMatrix en = random_embedding(3, 6, rs);

  // all-zero weights -> all-zero gradients (config validation is upstream)
  DetectorGrads grads = DetectorGrads::zeros_like(model);
  const LossWeights zero = {0.0, 0.0, 0.0};
  grad_total_loss(model, ex, en, 1, zero, grads);
  for (const Matrix& m : grads.extractor.weights)
    for (const double v : m.data) CHECK(v == 0.0);
  for (const Matrix& m : grads.head.weights)
    for (const double v : m.data) CHECK(v == 0.0);

  // E_n = E_x -> distance gradient vanishes; compare against lambda3 = 0
  DetectorGrads with_dis = DetectorGrads::zeros_like(model);
  DetectorGrads without_dis = DetectorGrads::zeros_like(model);
  const LossWeights wd = {0.5, 0.5, 0.9};
  const LossWeights wo = {0.5, 0.5, 0.0};
  const LossBreakdown ld = grad_total_loss(model, ex, ex, 1, wd, with_dis);
  grad_total_loss(model, ex, ex, 1, wo, without_dis);
  CHECK(ld.distance == 0.0);
  for (std::size_t li = 0; li < with_dis.extractor.weights.size(); ++li)
    for (std::size_t i = 0; i < with_dis.extractor.weights[li].size(); ++i)
      CHECK(with_dis.extractor.weights[li].data[i] ==
            doctest::Approx(without_dis.extractor.weights[li].data[i])
                .epsilon(1e-12));
}

TEST_CASE("grad_total_loss matches finite differences over 20 seeds") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    rng::Stream rs(seed * 31);
    const DetectorModel model = tiny_model(seed);
    const EmbeddingMatrix ex = random_embedding(4, 6, rs);
    const EmbeddingMatrix en = random_embedding(4, 6, rs);
    const int label = static_cast<int>(seed % 2);
    const LossWeights w;

    DetectorGrads grads = DetectorGrads::zeros_like(model);
    grad_total_loss(model, ex, en, label, w, grads);

    // flatten extractor + head into one parameter vector
    const std::size_t ec = model.extractor.param_count();
    const std::size_t hc = model.head.param_count();
    std::vector<double> flat(ec + hc);
    model.extractor.copy_params_to(std::span(flat.data(), ec));
    model.head.copy_params_to(std::span(flat.data() + ec, hc));

    const auto objective = [&](const std::vector<double>& params) {
      DetectorModel probe = model;
      probe.extractor.set_params_from(
          std::span(params.data(), ec));
      probe.head.set_params_from(std::span(params.data() + ec, hc));
      const std::vector<double> zx = extract(probe, ex);
      const std::vector<double> zn = extract(probe, en);
      const double lx = ce_loss(predict(probe, zx)[1], label);
      const double ln = ce_loss(predict(probe, zn)[1], label);
      return total_loss(lx, ln, distance_loss(zx, zn), w);
    };

    std::vector<double> analytic = testing::flatten_grads(grads.extractor);
    const std::vector<double> head_flat = testing::flatten_grads(grads.head);
    analytic.insert(analytic.end(), head_flat.begin(), head_flat.end());

    const auto fd = testing::fd_compare(objective, flat, analytic);
    CHECK(fd.max_rel_err <= 1e-4);
  }
}
