#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace lagmcf {

/// Small symmetric matrix (n <= 4) in packed upper-triangular storage.
///
/// Entry (i, j) with i <= j lives at i*n - i*(i-1)/2 + (j - i). Reads and
/// writes through operator() are symmetric by construction.
class SymMat {
 public:
  static constexpr int kMaxN = 4;
  static constexpr int kMaxPacked = kMaxN * (kMaxN + 1) / 2;

  SymMat() = default;
  explicit SymMat(int n);

  static SymMat identity(int n);
  static SymMat diagonal(std::span<const double> diag);
  /// Builds from a dense row-major n*n array; the upper triangle is used.
  static SymMat from_dense(int n, std::span<const double> rowmajor);

  static constexpr int packed_size(int n) { return n * (n + 1) / 2; }
  static constexpr int packed_index(int n, int i, int j) {
    if (i > j) {
      const int t = i;
      i = j;
      j = t;
    }
    return i * n - i * (i - 1) / 2 + (j - i);
  }

  [[nodiscard]] int n() const { return n_; }
  double operator()(int i, int j) const { return a_[packed_index(n_, i, j)]; }
  double& operator()(int i, int j) { return a_[packed_index(n_, i, j)]; }

  [[nodiscard]] std::span<const double> packed() const {
    return {a_.data(), static_cast<std::size_t>(packed_size(n_))};
  }
  [[nodiscard]] std::span<double> packed() {
    return {a_.data(), static_cast<std::size_t>(packed_size(n_))};
  }

  [[nodiscard]] double trace() const;
  [[nodiscard]] bool all_finite() const;

  /// this * this (symmetric because this is symmetric).
  [[nodiscard]] SymMat squared() const;
  /// Q^T * this * Q for a dense row-major orthogonal n*n matrix Q.
  [[nodiscard]] SymMat conjugated(std::span<const double> q) const;

  friend SymMat operator+(const SymMat& a, const SymMat& b);
  friend SymMat operator-(const SymMat& a, const SymMat& b);
  friend SymMat operator*(double s, const SymMat& a);
  friend bool operator==(const SymMat& a, const SymMat& b);

 private:
  int n_ = 0;
  std::array<double, kMaxPacked> a_{};
};

/// Fully index-symmetric rank-3 tensor (n <= 4), stored once per sorted
/// index triple i <= j <= k: n(n+1)(n+2)/6 entries.
class Sym3Tensor {
 public:
  static constexpr int kMaxN = 4;
  static constexpr int kMaxPacked = kMaxN * (kMaxN + 1) * (kMaxN + 2) / 6;

  Sym3Tensor() = default;
  explicit Sym3Tensor(int n);

  static constexpr int packed_size(int n) { return n * (n + 1) * (n + 2) / 6; }
  static int packed_index(int n, int i, int j, int k);

  [[nodiscard]] int n() const { return n_; }
  double operator()(int i, int j, int k) const { return a_[packed_index(n_, i, j, k)]; }
  double& operator()(int i, int j, int k) { return a_[packed_index(n_, i, j, k)]; }

  [[nodiscard]] std::span<const double> packed() const {
    return {a_.data(), static_cast<std::size_t>(packed_size(n_))};
  }
  [[nodiscard]] std::span<double> packed() {
    return {a_.data(), static_cast<std::size_t>(packed_size(n_))};
  }

  /// Flat Euclidean contraction sum_{ijk} T_ijk^2 over all n^3 index slots.
  [[nodiscard]] double norm2() const;
  /// T'_abc = Q_ia Q_jb Q_kc T_ijk for dense row-major orthogonal Q.
  [[nodiscard]] Sym3Tensor transformed(std::span<const double> q) const;

 private:
  int n_ = 0;
  std::array<double, kMaxPacked> a_{};
};

}  // namespace lagmcf
