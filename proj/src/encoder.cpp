#include "barkit/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "barkit/error.hpp"
#include "barkit/supcon.hpp"

namespace barkit {

Eigen::VectorXd pool_features(const Volume3D& vol, int grid) {
  const Dims& d = vol.dims();
  if (grid <= 0 || d.nx % grid != 0 || d.ny % grid != 0 || d.nz % grid != 0) {
    throw Error(ErrorKind::DimsNotPoolable,
                "dims not divisible by pooling grid " + std::to_string(grid));
  }
  const std::int64_t sx = d.nx / grid, sy = d.ny / grid, sz = d.nz / grid;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid) * grid * grid);
  const auto data = vol.data();
  for (std::int64_t z = 0; z < d.nz; ++z) {
    for (std::int64_t y = 0; y < d.ny; ++y) {
      const std::size_t row = d.index(0, y, z);
      const std::int64_t cell_yz = (z / sz) * grid * grid + (y / sy) * grid;
      for (std::int64_t x = 0; x < d.nx; ++x) {
        out(cell_yz + x / sx) += data[row + static_cast<std::size_t>(x)];
      }
    }
  }
  return out / static_cast<double>(sx * sy * sz);
}

EncoderParams EncoderParams::init(Rng& rng, int pool_grid, int hidden, int embedding,
                                  int classes) {
  if (pool_grid <= 0 || hidden <= 0 || embedding < 2 || classes < 2) {
    throw Error(ErrorKind::InvalidConfig, "invalid encoder shape");
  }
  const int features = pool_grid * pool_grid * pool_grid;
  auto xavier = [&](int rows, int cols) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    Eigen::MatrixXd m(rows, cols);
    for (int c = 0; c < cols; ++c) {
      for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(-limit, limit);
    }
    return m;
  };
  EncoderParams p;
  p.pool_grid = pool_grid;
  p.w1 = xavier(hidden, features);
  p.b1 = Eigen::VectorXd::Zero(hidden);
  p.w2 = xavier(embedding, hidden);
  p.b2 = Eigen::VectorXd::Zero(embedding);
  p.head_w = xavier(classes, embedding);
  p.head_b = Eigen::VectorXd::Zero(classes);
  return p;
}

Eigen::VectorXd EncoderParams::encoder_vector() const {
  Eigen::VectorXd flat(w1.size() + b1.size() + w2.size() + b2.size());
  flat << w1.reshaped(), b1, w2.reshaped(), b2;
  return flat;
}

void EncoderParams::set_encoder_vector(const Eigen::VectorXd& flat) {
  Eigen::Index at = 0;
  auto take = [&](auto& target) {
    target.reshaped() = flat.segment(at, target.size());
    at += target.size();
  };
  if (flat.size() != w1.size() + b1.size() + w2.size() + b2.size()) {
    throw Error(ErrorKind::LengthMismatch, "flat encoder vector has wrong length");
  }
  take(w1);
  take(b1);
  take(w2);
  take(b2);
}

void EncoderParams::validate() const {
  const bool shapes = w1.rows() == b1.size() && w2.cols() == w1.rows() &&
                      w2.rows() == b2.size() && head_w.cols() == w2.rows() &&
                      head_w.rows() == head_b.size() &&
                      w1.cols() == static_cast<Eigen::Index>(pool_grid) * pool_grid * pool_grid;
  if (!shapes) throw Error(ErrorKind::InvalidConfig, "encoder shapes are inconsistent");
  const bool finite = w1.allFinite() && b1.allFinite() && w2.allFinite() &&
                      b2.allFinite() && head_w.allFinite() && head_b.allFinite();
  if (!finite) throw Error(ErrorKind::InvalidConfig, "encoder has non-finite weights");
}

bool operator==(const EncoderParams& a, const EncoderParams& b) {
  return a.pool_grid == b.pool_grid && a.normalize_embedding == b.normalize_embedding &&
         a.w1 == b.w1 && a.b1 == b.b1 && a.w2 == b.w2 && a.b2 == b.b2 &&
         a.head_w == b.head_w && a.head_b == b.head_b;
}

EncoderGrads EncoderGrads::zeros_like(const EncoderParams& p) {
  EncoderGrads g;
  g.w1 = Eigen::MatrixXd::Zero(p.w1.rows(), p.w1.cols());
  g.b1 = Eigen::VectorXd::Zero(p.b1.size());
  g.w2 = Eigen::MatrixXd::Zero(p.w2.rows(), p.w2.cols());
  g.b2 = Eigen::VectorXd::Zero(p.b2.size());
  g.head_w = Eigen::MatrixXd::Zero(p.head_w.rows(), p.head_w.cols());
  g.head_b = Eigen::VectorXd::Zero(p.head_b.size());
  return g;
}

Eigen::VectorXd EncoderGrads::encoder_vector() const {
  Eigen::VectorXd flat(w1.size() + b1.size() + w2.size() + b2.size());
  flat << w1.reshaped(), b1, w2.reshaped(), b2;
  return flat;
}

EncoderCache encoder_forward_features(const EncoderParams& params,
                                      const Eigen::VectorXd& features) {
  if (features.size() != params.feature_count()) {
    throw Error(ErrorKind::LengthMismatch, "feature vector does not match encoder input");
  }
  EncoderCache c;
  c.features = features;
  c.hidden = (params.w1 * features + params.b1).array().tanh().matrix();
  c.projection = params.w2 * c.hidden + params.b2;
  c.norm = c.projection.norm();
  if (c.norm < EmbeddingBatch::kMinNorm) {
    throw Error(ErrorKind::DegenerateNorm, "encoder projection has zero norm");
  }
  c.embedding = c.projection / c.norm;
  return c;
}

EncoderCache encoder_forward(const EncoderParams& params, const Volume3D& vol) {
  return encoder_forward_features(params, pool_features(vol, params.pool_grid));
}

void encoder_backward(const EncoderParams& params, const EncoderCache& cache,
                      const Eigen::VectorXd& grad_projection, EncoderGrads& grads) {
  grads.w2.noalias() += grad_projection * cache.hidden.transpose();
  grads.b2 += grad_projection;
  const Eigen::VectorXd grad_hidden = params.w2.transpose() * grad_projection;
  const Eigen::VectorXd grad_pre =
      grad_hidden.array() * (1.0 - cache.hidden.array().square());
  grads.w1.noalias() += grad_pre * cache.features.transpose();
  grads.b1 += grad_pre;
}

const Eigen::VectorXd& head_input(const EncoderParams& params, const EncoderCache& cache) {
  return params.normalize_embedding ? cache.embedding : cache.projection;
}

Eigen::VectorXd head_logits(const EncoderParams& params, const EncoderCache& cache) {
  return params.head_w * head_input(params, cache) + params.head_b;
}

ContrastiveStep contrastive_step(const EncoderParams& params,
                                 std::span<const Eigen::VectorXd> features,
                                 std::span<const SoftLabel> labels, double tau) {
  if (features.size() != labels.size()) {
    throw Error(ErrorKind::LengthMismatch, "one label per sample required");
  }
  std::vector<EncoderCache> caches;
  caches.reserve(features.size());
  Matrix raw(static_cast<Eigen::Index>(features.size()), params.embedding_dim());
  for (std::size_t i = 0; i < features.size(); ++i) {
    caches.push_back(encoder_forward_features(params, features[i]));
    raw.row(static_cast<Eigen::Index>(i)) = caches.back().projection.transpose();
  }
  const EmbeddingBatch batch(std::move(raw), {labels.begin(), labels.end()}, tau);
  const LossAndGrad lg = soft_supcon(batch);

  ContrastiveStep step;
  step.loss = lg.report.value;
  step.grads = EncoderGrads::zeros_like(params);
  for (std::size_t i = 0; i < caches.size(); ++i) {
    const Eigen::VectorXd g = lg.grad_raw.row(static_cast<Eigen::Index>(i)).transpose();
    encoder_backward(params, caches[i], g, step.grads);
  }
  return step;
}

double encoder_grad_check(const EncoderParams& params,
                          std::span<const Eigen::VectorXd> features,
                          std::span<const SoftLabel> labels, double tau, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1e-2)) {
    throw Error(ErrorKind::InvalidArgument, "epsilon must lie in (0, 1e-2]");
  }
  const Eigen::VectorXd analytic =
      contrastive_step(params, features, labels, tau).grads.encoder_vector();
  EncoderParams probe = params;
  Eigen::VectorXd flat = params.encoder_vector();

  auto loss_at = [&](Eigen::Index k, double value) {
    const double saved = flat(k);
    flat(k) = value;
    probe.set_encoder_vector(flat);
    flat(k) = saved;
    return contrastive_step(probe, features, labels, tau).loss;
  };
  auto central = [&](Eigen::Index k, double step) {
    return (loss_at(k, flat(k) + step) - loss_at(k, flat(k) - step)) / (2.0 * step);
  };

  double worst = 0.0;
  for (Eigen::Index k = 0; k < flat.size(); ++k) {
    const double numeric = (4.0 * central(k, 0.5 * epsilon) - central(k, epsilon)) / 3.0;
    const double a = analytic(k);
    // Floor of 1e-6, not 1e-8: differencing a loss near 1 at this step size
    // leaves about 1e-11 of rounding noise, enough to swamp components below 1e-7.
    const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-6});
    worst = std::max(worst, std::fabs(a - numeric) / denom);
  }
  return worst;
}

}  // namespace barkit
