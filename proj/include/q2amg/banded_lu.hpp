#ifndef Q2AMG_BANDED_LU_HPP
#define Q2AMG_BANDED_LU_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "q2amg/graph.hpp"
#include "q2amg/sparse.hpp"

namespace q2amg {

/// Direct solver: RCM reordering followed by banded LU with partial pivoting.
/// Used for Picard linear solves and as a test oracle.
class BandedLU {
public:
  explicit BandedLU(const SparseMatrix& a, bool reorder = true) {
    detail::require(a.n_rows == a.n_cols, "banded LU: matrix not square");
    n_ = a.n_rows;
    perm_ = reorder ? rcm_ordering(a) : Permutation::identity(n_);
    const SparseMatrix pa = permute_symmetric(a, perm_.forward);
    kl_ = ku_ = 0;
    for (int i = 0; i < n_; ++i)
      for (int k = pa.row_offsets[i]; k < pa.row_offsets[i + 1]; ++k) {
        const int j = pa.col_indices[k];
        kl_ = std::max(kl_, i - j);
        ku_ = std::max(ku_, j - i);
      }
    // pivoting can push the upper bandwidth to kl + ku
    w_ = 2 * kl_ + ku_ + 1;
    band_.assign(static_cast<std::size_t>(n_) * w_, 0.0);
    for (int i = 0; i < n_; ++i)
      for (int k = pa.row_offsets[i]; k < pa.row_offsets[i + 1]; ++k) at(i, pa.col_indices[k]) = pa.values[k];
    ipiv_.resize(n_);
    const int ku_eff = kl_ + ku_;
    for (int k = 0; k < n_; ++k) {
      const int last = std::min(n_ - 1, k + kl_);
      int p = k;
      double best = std::abs(at(k, k));
      for (int i = k + 1; i <= last; ++i)
        if (std::abs(at(i, k)) > best) {
          best = std::abs(at(i, k));
          p = i;
        }
      if (best == 0.0) throw Error("banded LU: singular matrix at pivot " + std::to_string(k));
      ipiv_[k] = p;
      const int jlast = std::min(n_ - 1, k + ku_eff);
      if (p != k)
        for (int j = k; j <= jlast; ++j) std::swap(at(k, j), at(p, j));
      const double inv = 1.0 / at(k, k);
      for (int i = k + 1; i <= last; ++i) {
        double& l = at(i, k);
        if (l == 0.0) continue;
        l *= inv;
        for (int j = k + 1; j <= jlast; ++j) at(i, j) -= l * at(k, j);
      }
    }
  }

  [[nodiscard]] Vector solve(std::span<const double> b) const {
    detail::require(static_cast<int>(b.size()) == n_, "banded LU: rhs size mismatch");
    Vector y(n_);
    for (int i = 0; i < n_; ++i) y[i] = b[perm_.forward[i]];
    for (int k = 0; k < n_; ++k) {
      if (ipiv_[k] != k) std::swap(y[k], y[ipiv_[k]]);
      const int last = std::min(n_ - 1, k + kl_);
      for (int i = k + 1; i <= last; ++i) y[i] -= at(i, k) * y[k];
    }
    const int ku_eff = kl_ + ku_;
    for (int i = n_ - 1; i >= 0; --i) {
      double s = y[i];
      const int jlast = std::min(n_ - 1, i + ku_eff);
      for (int j = i + 1; j <= jlast; ++j) s -= at(i, j) * y[j];
      y[i] = s / at(i, i);
    }
    Vector x(n_);
    for (int i = 0; i < n_; ++i) x[perm_.forward[i]] = y[i];
    return x;
  }

  [[nodiscard]] int lower_bandwidth() const { return kl_; }
  [[nodiscard]] int upper_bandwidth() const { return ku_; }

private:
  double& at(int r, int c) { return band_[static_cast<std::size_t>(r) * w_ + (c - r + kl_)]; }
  [[nodiscard]] double at(int r, int c) const { return band_[static_cast<std::size_t>(r) * w_ + (c - r + kl_)]; }

  int n_ = 0, kl_ = 0, ku_ = 0, w_ = 1;
  Permutation perm_;
  std::vector<double> band_;
  std::vector<int> ipiv_;
};

}  // namespace q2amg

#endif  // Q2AMG_BANDED_LU_HPP
