#include "barkit/supcon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "barkit/error.hpp"

namespace barkit {

EmbeddingBatch::EmbeddingBatch(Matrix raw, std::vector<SoftLabel> labels, double tau)
    : raw_(std::move(raw)), labels_(std::move(labels)), tau_(tau) {
  if (raw_.rows() < 2 || raw_.cols() < 2) {
    throw Error(ErrorKind::InvalidBatch, "need n >= 2 rows and d >= 2 columns");
  }
  if (!(tau_ > 0.0) || !std::isfinite(tau_)) {
    throw Error(ErrorKind::InvalidBatch, "temperature must be positive");
  }
  if (labels_.size() != static_cast<std::size_t>(raw_.rows())) {
    throw Error(ErrorKind::LengthMismatch, "one label per row required");
  }
  for (const auto& y : labels_) {
    if (y.size() != labels_.front().size()) {
      throw Error(ErrorKind::LengthMismatch, "labels differ in class count");
    }
  }
  if (!raw_.allFinite()) {
    throw Error(ErrorKind::InvalidBatch, "non-finite embedding");
  }
  norms_ = raw_.rowwise().norm();
  normalized_.resize(raw_.rows(), raw_.cols());
  for (Eigen::Index i = 0; i < raw_.rows(); ++i) {
    if (norms_(i) < kMinNorm) {
      throw Error(ErrorKind::DegenerateNorm, "row " + std::to_string(i) + " has zero norm");
    }
    normalized_.row(i) = raw_.row(i) / norms_(i);
  }
}

EmbeddingBatch EmbeddingBatch::with_raw(Matrix raw) const {
  return EmbeddingBatch(std::move(raw), labels_, tau_);
}

Matrix label_affinity(std::span<const SoftLabel> labels) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  Matrix w = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto& yi = labels[i];
      const auto& yj = labels[j];
      if (yi.size() != yj.size()) {
        throw Error(ErrorKind::LengthMismatch, "labels differ in class count");
      }
      double dot = 0.0;
      for (std::size_t c = 0; c < yi.size(); ++c) dot += yi[c] * yj[c];
      dot = std::clamp(dot, 0.0, 1.0);
      w(i, j) = dot;
      w(j, i) = dot;
    }
  }
  return w;
}

namespace {

struct Forward {
  LossReport report;
  Matrix log_prob;  // log p_ij, diagonal unused
  Matrix affinity;
};

Forward forward(const EmbeddingBatch& batch) {
  const Eigen::Index n = batch.n();
  const Matrix& z = batch.normalized();
  const Matrix sim = (z * z.transpose()) / batch.tau();

  Forward f;
  f.affinity = label_affinity(batch.labels());
  f.log_prob = Matrix::Zero(n, n);
  f.report.per_anchor = Vector::Zero(n);
  f.report.affinity_row_sums = f.affinity.rowwise().sum();
  f.report.valid.assign(static_cast<std::size_t>(n), false);

  double total = 0.0;
  std::size_t valid = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    // log-sum-exp over k != i as max + log1p(rest), which keeps log p
    // accurate when one similarity dominates (p close to 1).
    Eigen::Index top = -1;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k != i && (top < 0 || sim(i, k) > sim(i, top))) top = k;
    }
    const double max_sim = sim(i, top);
    double rest = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k != i && k != top) rest += std::exp(sim(i, k) - max_sim);
    }
    const double log_norm = std::log1p(rest);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) f.log_prob(i, j) = (sim(i, j) - max_sim) - log_norm;
    }

    const double mass = f.report.affinity_row_sums(i);
    if (mass <= kMinAffinityMass) continue;
    double weighted = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) weighted += f.affinity(i, j) * f.log_prob(i, j);
    }
    const double li = -weighted / mass;
    f.report.per_anchor(i) = li;
    f.report.valid[static_cast<std::size_t>(i)] = true;
    total += li;
    ++valid;
  }
  f.report.valid_anchor_count = valid;
  if (valid == 0) {
    throw Error(ErrorKind::NoValidAnchors, "every anchor has zero affinity mass");
  }
  f.report.value = total / static_cast<double>(valid);
  return f;
}

}  // namespace

LossReport soft_supcon_loss(const EmbeddingBatch& batch) {
  return forward(batch).report;
}

LossAndGrad soft_supcon(const EmbeddingBatch& batch) {
  Forward f = forward(batch);
  const Eigen::Index n = batch.n();
  const Matrix& z = batch.normalized();
  const double inv_valid = 1.0 / static_cast<double>(f.report.valid_anchor_count);

  // dL/dsim_ij = (p_ij - w_ij / W_i) / V for valid anchors i, j != i.
  Matrix coeff = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!f.report.valid[static_cast<std::size_t>(i)]) continue;
    const double mass = f.report.affinity_row_sums(i);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      coeff(i, j) = (std::exp(f.log_prob(i, j)) - f.affinity(i, j) / mass) * inv_valid;
    }
  }

  // sim = z z^T / tau, so dL/dz = (C + C^T) z / tau.
  const Matrix grad_z = ((coeff + coeff.transpose()) * z) / batch.tau();

  LossAndGrad out;
  out.grad_sphere.resize(n, batch.d());
  out.grad_raw.resize(n, batch.d());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double radial = grad_z.row(i).dot(z.row(i));
    out.grad_sphere.row(i) = grad_z.row(i) - radial * z.row(i);
    // d(u/|u|)/du = (I - z z^T) / |u|
    out.grad_raw.row(i) = out.grad_sphere.row(i) / batch.norms()(i);
  }
  out.report = std::move(f.report);
  return out;
}

Matrix soft_supcon_grad(const EmbeddingBatch& batch) { return soft_supcon(batch).grad_raw; }

Matrix soft_supcon_grad_sphere(const EmbeddingBatch& batch) {
  return soft_supcon(batch).grad_sphere;
}

namespace {

double central_difference(const EmbeddingBatch& batch, Matrix& raw, Eigen::Index i,
                          Eigen::Index k, double step) {
  const double saved = raw(i, k);
  raw(i, k) = saved + step;
  const double plus = soft_supcon_loss(batch.with_raw(raw)).value;
  raw(i, k) = saved - step;
  const double minus = soft_supcon_loss(batch.with_raw(raw)).value;
  raw(i, k) = saved;
  return (plus - minus) / (2.0 * step);
}

}  // namespace

double finite_diff_check(const EmbeddingBatch& batch, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1e-2)) {
    throw Error(ErrorKind::InvalidArgument, "epsilon must lie in (0, 1e-2]");
  }
  const Matrix analytic = soft_supcon_grad(batch);
  Matrix raw = batch.raw();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    for (Eigen::Index k = 0; k < raw.cols(); ++k) {
      // Richardson step: cancels the O(eps^2) term of the central difference.
      const double coarse = central_difference(batch, raw, i, k, epsilon);
      const double fine = central_difference(batch, raw, i, k, 0.5 * epsilon);
      const double numeric = (4.0 * fine - coarse) / 3.0;

      const double a = analytic(i, k);
      const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
      worst = std::max(worst, std::fabs(a - numeric) / denom);
    }
  }
  return worst;
}

EmbeddingBatch random_batch(Eigen::Index n, Eigen::Index d, double tau, Rng& rng) {
  if (n < 2 || d < 2) {
    throw Error(ErrorKind::InvalidBatch, "need n >= 2 and d >= 2");
  }
  Matrix raw(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) raw(i, k) = rng.normal();
  }
  std::vector<SoftLabel> labels;
  // Redraw the rare label sets where no anchor has any affinity mass.
  do {
    labels.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto a = static_cast<std::size_t>(rng.uniform_int(0, 1));
      const auto b = static_cast<std::size_t>(rng.uniform_int(0, 1));
      labels.push_back(mix_labels(SoftLabel::one_hot(a, 2), SoftLabel::one_hot(b, 2),
                                  rng.uniform()));
    }
  } while (label_affinity(labels).rowwise().sum().maxCoeff() <= kMinAffinityMass);
  return EmbeddingBatch(std::move(raw), std::move(labels), tau);
}

std::string format_scientific(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits, value);
  std::string text(buf);
  const auto e = text.find('e');
  if (e == std::string::npos) return text;  // inf / nan
  const int exponent = std::atoi(text.c_str() + e + 1);
  return text.substr(0, e + 1) + std::to_string(exponent);
}

std::string loss_check_line(Eigen::Index n, Eigen::Index d, double tau, double loss,
                            double max_rel_error) {
  std::ostringstream out;
  out << "n=" << n << " d=" << d << " tau=" << tau
      << " loss=" << format_scientific(loss, 12)
      << " gradcheck=" << format_scientific(max_rel_error, 3);
  return out.str();
}

}  // namespace barkit
