#include <algorithm>
#include <numeric>

#include "barkit/supcon.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace barkit;
using namespace barkit::testing;

namespace {

Matrix gaussian(Eigen::Index n, Eigen::Index d, Rng& rng) {
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k) m(i, k) = rng.normal();
  return m;
}

std::vector<SoftLabel> one_hots(const std::vector<int>& cls) {
  std::vector<SoftLabel> out;
  for (int c : cls) out.push_back(SoftLabel::one_hot(static_cast<std::size_t>(c), 2));
  return out;
}

}  // namespace

TEST_CASE("label affinity") {
  const auto hard = one_hots({0, 1, 0});
  const Matrix w = label_affinity(hard);
  CHECK(w(0, 2) == 1.0);
  CHECK(w(0, 1) == 0.0);
  CHECK(w(1, 1) == 0.0);

  const std::vector<SoftLabel> soft{SoftLabel({0.75, 0.25}), SoftLabel({0.25, 0.75})};
  CHECK(label_affinity(soft)(0, 1) == 0.375);

  const std::vector<SoftLabel> flat(3, SoftLabel({0.5, 0.5}));
  const Matrix f = label_affinity(flat);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(f(i, j) == (i == j ? 0.0 : 0.5));

  const std::vector<SoftLabel> mixed{SoftLabel::one_hot(0, 2), SoftLabel::one_hot(0, 3)};
  CHECK(error_kind_of([&] { label_affinity(mixed); }) == ErrorKind::LengthMismatch);
}

TEST_CASE("batch validation") {
  Rng rng(1);
  CHECK(error_kind_of([&] { EmbeddingBatch(gaussian(1, 4, rng), one_hots({0}), 0.1); }) ==
        ErrorKind::InvalidBatch);
  CHECK(error_kind_of([&] { EmbeddingBatch(gaussian(3, 1, rng), one_hots({0, 1, 0}), 0.1); }) ==
        ErrorKind::InvalidBatch);
  CHECK(error_kind_of([&] { EmbeddingBatch(gaussian(2, 4, rng), one_hots({0, 1}), 0.0); }) ==
        ErrorKind::InvalidBatch);
  CHECK(error_kind_of([&] { EmbeddingBatch(gaussian(3, 4, rng), one_hots({0, 1}), 0.1); }) ==
        ErrorKind::LengthMismatch);
  Matrix zero_row = gaussian(3, 4, rng);
  zero_row.row(1).setZero();
  CHECK(error_kind_of([&] { EmbeddingBatch(zero_row, one_hots({0, 1, 0}), 0.1); }) ==
        ErrorKind::DegenerateNorm);

  const EmbeddingBatch b(gaussian(5, 7, rng), one_hots({0, 1, 0, 1, 1}), 0.2);
  for (Eigen::Index i = 0; i < b.n(); ++i) CHECK(std::abs(b.normalized().row(i).norm() - 1.0) < 1e-12);
}

TEST_CASE("two-sample batch is constant") {
  Rng rng(2);
  const std::vector<SoftLabel> labels{SoftLabel({0.8, 0.2}), SoftLabel({0.3, 0.7})};
  const EmbeddingBatch b(gaussian(2, 5, rng), labels, 0.1);
  CHECK(soft_supcon_loss(b).value == 0.0);
  CHECK(soft_supcon_grad(b).isZero(0.0));
  CHECK(finite_diff_check(b, 1e-4) == 0.0);
}

TEST_CASE("anchor exclusion") {
  Rng rng(3);
  CHECK(error_kind_of([&] {
          soft_supcon_loss(EmbeddingBatch(gaussian(2, 3, rng), one_hots({0, 1}), 0.1));
        }) == ErrorKind::NoValidAnchors);

  const EmbeddingBatch b(gaussian(4, 3, rng),
                         {SoftLabel::one_hot(0, 3), SoftLabel::one_hot(1, 3),
                          SoftLabel::one_hot(1, 3), SoftLabel::one_hot(2, 3)},
                         0.3);
  const LossReport r = soft_supcon_loss(b);
  CHECK(r.valid_anchor_count == 2);
  CHECK(r.valid == std::vector<bool>{false, true, true, false});
  CHECK(r.per_anchor(0) == 0.0);
  CHECK(r.affinity_row_sums(0) == 0.0);
  CHECK(r.value == doctest::Approx((r.per_anchor(1) + r.per_anchor(2)) / 2).epsilon(1e-14));
}

TEST_CASE("one-hot labels reduce to hard SupCon") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<Eigen::Index>(rng.uniform_int(3, 8));
    const auto d = static_cast<Eigen::Index>(rng.uniform_int(2, 12));
    const double tau = std::array{0.05, 0.1, 0.5, 1.0}[trial % 4];
    std::vector<int> cls(static_cast<std::size_t>(n));
    for (auto& c : cls) c = static_cast<int>(rng.uniform_int(0, 1));
    cls[0] = cls[1];  // at least one valid anchor
    const Matrix raw = gaussian(n, d, rng);
    const EmbeddingBatch b(raw, one_hots(cls), tau);
    const HardSupCon oracle = hard_supcon(raw, cls, tau);
    CHECK(std::abs(soft_supcon_loss(b).value - oracle.value) <= 1e-10);
    CHECK((soft_supcon_grad(b) - oracle.grad_raw).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("hand-fixed n=3 batch against the extended-precision formula") {
  Matrix raw(3, 2);
  raw << 1.0, 0.0,
         0.6, 0.8,
        -0.5, 2.0;
  const std::vector<SoftLabel> labels{SoftLabel({0.75, 0.25}), SoftLabel({0.4, 0.6}),
                                      SoftLabel({0.0, 1.0})};
  const EmbeddingBatch b(raw, labels, 0.5);
  const long double oracle = brute_soft_supcon(raw, labels, 0.5);
  CHECK(std::abs(soft_supcon_loss(b).value - static_cast<double>(oracle)) <= 1e-13);
}

TEST_CASE("random soft batches against the extended-precision formula") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<Eigen::Index>(rng.uniform_int(2, 8));
    const auto d = static_cast<Eigen::Index>(rng.uniform_int(2, 16));
    const double tau = std::array{0.05, 0.1, 0.5, 1.0}[trial % 4];
    const EmbeddingBatch b = random_batch(n, d, tau, rng);
    const long double oracle = brute_soft_supcon(b.raw(), b.labels(), tau);
    CHECK(std::abs(soft_supcon_loss(b).value - static_cast<double>(oracle)) <=
          1e-11 * std::max(1.0L, std::abs(oracle)));
  }
}

TEST_CASE("loss value is the mean of valid per-anchor terms") {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const EmbeddingBatch b = random_batch(6, 4, 0.1, rng);
    const LossReport r = soft_supcon_loss(b);
    double sum = 0.0;
    for (std::size_t i = 0; i < r.valid.size(); ++i) {
      if (r.valid[i]) sum += r.per_anchor(static_cast<Eigen::Index>(i));
    }
    CHECK(std::abs(r.value - sum / static_cast<double>(r.valid_anchor_count)) <= 1e-12);
    CHECK(r.per_anchor.allFinite());
  }
}

TEST_CASE("sphere gradient is tangent") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const EmbeddingBatch b = random_batch(7, 9, 0.1, rng);
    const Matrix g = soft_supcon_grad_sphere(b);
    for (Eigen::Index i = 0; i < b.n(); ++i) {
      CHECK(std::abs(g.row(i).dot(b.normalized().row(i))) <= 1e-8);
    }
    // Raw gradient is tangent too, since the loss ignores row scale.
    const Matrix gr = soft_supcon_grad(b);
    for (Eigen::Index i = 0; i < b.n(); ++i) {
      CHECK(std::abs(gr.row(i).dot(b.raw().row(i))) <= 1e-8);
    }
  }
}

TEST_CASE("finite-difference harness") {
  Rng rng(8);
  CHECK(finite_diff_check(random_batch(5, 8, 0.07, rng), 1e-4) < 1e-5);
  CHECK(finite_diff_check(random_batch(4, 4, 0.1, rng), 1e-4) < 1e-5);

  const EmbeddingBatch b = random_batch(4, 4, 0.1, rng);
  CHECK(finite_diff_check(b, 1e-10) > finite_diff_check(b, 1e-4));

  CHECK(error_kind_of([&] { finite_diff_check(b, 0.0); }) == ErrorKind::InvalidArgument);
  CHECK(error_kind_of([&] { finite_diff_check(b, 0.1); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("permutation equivariance") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const EmbeddingBatch b = random_batch(6, 5, 0.2, rng);
    std::vector<Eigen::Index> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    Matrix raw(6, 5);
    std::vector<SoftLabel> labels;
    for (Eigen::Index i = 0; i < 6; ++i) {
      raw.row(i) = b.raw().row(perm[static_cast<std::size_t>(i)]);
      labels.push_back(b.labels()[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
    }
    const EmbeddingBatch p(raw, labels, 0.2);
    const LossAndGrad base = soft_supcon(b);
    const LossAndGrad moved = soft_supcon(p);
    CHECK(std::abs(base.report.value - moved.report.value) <= 1e-12);
    for (Eigen::Index i = 0; i < 6; ++i) {
      const Eigen::Index src = perm[static_cast<std::size_t>(i)];
      CHECK(std::abs(moved.report.per_anchor(i) - base.report.per_anchor(src)) <= 1e-12);
      CHECK((moved.grad_raw.row(i) - base.grad_raw.row(src)).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("collapsed embeddings give log(n-1)") {
  Rng rng(10);
  for (Eigen::Index n = 3; n <= 8; ++n) {
    const Eigen::RowVectorXd dir = gaussian(1, 6, rng).row(0);
    Matrix raw(n, 6);
    for (Eigen::Index i = 0; i < n; ++i) raw.row(i) = dir * (0.5 + static_cast<double>(i));
    std::vector<SoftLabel> labels;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = rng.uniform(0.1, 0.9);
      labels.push_back(SoftLabel({x, 1.0 - x}));
    }
    const EmbeddingBatch b(raw, labels, 0.1);
    CHECK(std::abs(soft_supcon_loss(b).value - std::log(static_cast<double>(n - 1))) <= 1e-10);
  }
}

TEST_CASE("wider class separation lowers the loss") {
  // Two classes of two points on the unit circle; same-class pairs sit at
  // +-gap/2 around their class direction, classes are opposite.
  auto loss_at = [](double spread) {
    Matrix raw(4, 2);
    raw << std::cos(spread), std::sin(spread),
           std::cos(-spread), std::sin(-spread),
           -std::cos(spread), std::sin(spread),
           -std::cos(-spread), std::sin(-spread);
    return soft_supcon_loss(EmbeddingBatch(raw, one_hots({0, 0, 1, 1}), 0.5)).value;
  };
  double previous = loss_at(1.2);
  for (double spread : {1.0, 0.8, 0.6, 0.4, 0.2}) {
    const double current = loss_at(spread);
    CHECK(current < previous);
    previous = current;
  }
}

TEST_CASE("loss-check line format") {
  CHECK(format_scientific(0.0, 12) == "0.000000000000e0");
  CHECK(format_scientific(1.5e-3, 3) == "1.500e-3");
  CHECK(format_scientific(12345.0, 2) == "1.23e4");
  CHECK(loss_check_line(6, 8, 0.07, 1.25, 2.5e-9) ==
        "n=6 d=8 tau=0.07 loss=1.250000000000e0 gradcheck=2.500e-9");
}
