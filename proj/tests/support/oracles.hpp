#pragma once

// Reference implementations written straight from the definitions, with no
// shared code paths with the library kernels.

#include <cmath>
#include <vector>

#include "barkit/atlas.hpp"
#include "barkit/soft_label.hpp"
#include "barkit/supcon.hpp"

namespace barkit::testing {

/// Soft-label contrastive loss evaluated term by term in extended precision.
inline long double brute_soft_supcon(const Matrix& raw, const std::vector<SoftLabel>& labels,
                                     double tau) {
  const auto n = static_cast<std::size_t>(raw.rows());
  const auto d = static_cast<std::size_t>(raw.cols());
  std::vector<std::vector<long double>> z(n, std::vector<long double>(d));
  for (std::size_t i = 0; i < n; ++i) {
    long double sq = 0.0L;
    for (std::size_t k = 0; k < d; ++k) sq += static_cast<long double>(raw(i, k)) * raw(i, k);
    const long double norm = std::sqrt(sq);
    for (std::size_t k = 0; k < d; ++k) z[i][k] = raw(i, k) / norm;
  }
  auto sim = [&](std::size_t i, std::size_t j) {
    long double s = 0.0L;
    for (std::size_t k = 0; k < d; ++k) s += z[i][k] * z[j][k];
    return s / static_cast<long double>(tau);
  };

  long double total = 0.0L;
  std::size_t valid = 0;
  for (std::size_t i = 0; i < n; ++i) {
    long double denom = 0.0L;
    for (std::size_t k = 0; k < n; ++k) {
      if (k != i) denom += std::exp(sim(i, k));
    }
    long double weighted = 0.0L;
    long double mass = 0.0L;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      long double w = 0.0L;
      for (std::size_t c = 0; c < labels[i].size(); ++c) {
        w += static_cast<long double>(labels[i][c]) * labels[j][c];
      }
      weighted += w * std::log(std::exp(sim(i, j)) / denom);
      mass += w;
    }
    if (mass <= 1e-12L) continue;
    total += -weighted / mass;
    ++valid;
  }
  return total / static_cast<long double>(valid);
}

struct HardSupCon {
  double value = 0.0;
  Matrix grad_raw;
};

/// Hard-label SupCon (positives averaged outside the log), with its gradient
/// written per anchor/positive pair and chained through u -> u/|u|.
inline HardSupCon hard_supcon(const Matrix& raw, const std::vector<int>& cls, double tau) {
  const Eigen::Index n = raw.rows();
  const Eigen::Index d = raw.cols();
  Matrix z(n, d);
  std::vector<double> norms(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double sq = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) sq += raw(i, k) * raw(i, k);
    norms[static_cast<std::size_t>(i)] = std::sqrt(sq);
    for (Eigen::Index k = 0; k < d; ++k) z(i, k) = raw(i, k) / norms[static_cast<std::size_t>(i)];
  }

  int anchors = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i && cls[static_cast<std::size_t>(j)] == cls[static_cast<std::size_t>(i)]) {
        ++anchors;
        break;
      }
    }
  }

  HardSupCon out;
  Matrix gz = Matrix::Zero(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> logits(static_cast<std::size_t>(n), 0.0);
    double top = -1e300;
    for (Eigen::Index a = 0; a < n; ++a) {
      if (a == i) continue;
      logits[static_cast<std::size_t>(a)] = z.row(i).dot(z.row(a)) / tau;
      top = std::max(top, logits[static_cast<std::size_t>(a)]);
    }
    double sum = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) {
      if (a != i) sum += std::exp(logits[static_cast<std::size_t>(a)] - top);
    }
    const double log_denom = top + std::log(sum);

    std::vector<Eigen::Index> positives;
    for (Eigen::Index p = 0; p < n; ++p) {
      if (p != i && cls[static_cast<std::size_t>(p)] == cls[static_cast<std::size_t>(i)]) {
        positives.push_back(p);
      }
    }
    if (positives.empty()) continue;
    const double np = static_cast<double>(positives.size());

    double li = 0.0;
    for (Eigen::Index p : positives) li -= (logits[static_cast<std::size_t>(p)] - log_denom) / np;
    out.value += li / anchors;

    // dL_i/dz_i = (sum_a P_ia z_a - mean_p z_p) / tau
    // dL_i/dz_a = (P_ia - [a in P]/|P|) z_i / tau
    for (Eigen::Index a = 0; a < n; ++a) {
      if (a == i) continue;
      double coeff = std::exp(logits[static_cast<std::size_t>(a)] - log_denom);
      for (Eigen::Index p : positives) {
        if (p == a) coeff -= 1.0 / np;
      }
      for (Eigen::Index k = 0; k < d; ++k) {
        gz(i, k) += coeff * z(a, k) / tau / anchors;
        gz(a, k) += coeff * z(i, k) / tau / anchors;
      }
    }
  }

  out.grad_raw = Matrix(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    double radial = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) radial += gz(i, k) * z(i, k);
    for (Eigen::Index k = 0; k < d; ++k) {
      out.grad_raw(i, k) = (gz(i, k) - radial * z(i, k)) / norms[static_cast<std::size_t>(i)];
    }
  }
  return out;
}

inline std::size_t brute_label_count(const ParcellationAtlas& atlas, const RegionSet& ids) {
  std::size_t count = 0;
  for (RegionId l : atlas.labels()) {
    if (ids.contains(l)) ++count;
  }
  return count;
}

inline std::size_t brute_brain_count(const ParcellationAtlas& atlas) {
  std::size_t count = 0;
  for (RegionId l : atlas.labels()) {
    if (l != 0) ++count;
  }
  return count;
}

/// Boundary ratio by testing all six neighbours of every set voxel.
inline double brute_boundary_ratio(const RegionMask& mask) {
  const Dims& d = mask.dims();
  std::size_t set = 0;
  std::size_t boundary = 0;
  const int offsets[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  for (std::int64_t z = 0; z < d.nz; ++z) {
    for (std::int64_t y = 0; y < d.ny; ++y) {
      for (std::int64_t x = 0; x < d.nx; ++x) {
        if (!mask.test(x, y, z)) continue;
        ++set;
        for (const auto& o : offsets) {
          const std::int64_t a = x + o[0], b = y + o[1], c = z + o[2];
          if (a < 0 || b < 0 || c < 0 || a >= d.nx || b >= d.ny || c >= d.nz ||
              !mask.test(a, b, c)) {
            ++boundary;
            break;
          }
        }
      }
    }
  }
  return static_cast<double>(boundary) / static_cast<double>(set);
}

}  // namespace barkit::testing
