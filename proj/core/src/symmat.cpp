#include "lagmcf/symmat.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lagmcf {

namespace {

void check_dim(int n) {
  if (n < 0 || n > SymMat::kMaxN) {
    throw std::invalid_argument("matrix dimension out of range: " + std::to_string(n));
  }
}

// index_table[n][i][j][k] -> slot of the sorted triple in the packed layout.
struct Sym3Table {
  int slot[Sym3Tensor::kMaxN + 1][Sym3Tensor::kMaxN][Sym3Tensor::kMaxN][Sym3Tensor::kMaxN]{};
  constexpr Sym3Table() {
    for (int n = 1; n <= Sym3Tensor::kMaxN; ++n) {
      int next = 0;
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
          for (int k = j; k < n; ++k) {
            const int s = next++;
            slot[n][i][j][k] = s;
            slot[n][i][k][j] = s;
            slot[n][j][i][k] = s;
            slot[n][j][k][i] = s;
            slot[n][k][i][j] = s;
            slot[n][k][j][i] = s;
          }
        }
      }
    }
  }
};

constexpr Sym3Table kSym3Table{};

}  // namespace

SymMat::SymMat(int n) : n_(n) { check_dim(n); }

SymMat SymMat::identity(int n) {
  SymMat m(n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

SymMat SymMat::diagonal(std::span<const double> diag) {
  SymMat m(static_cast<int>(diag.size()));
  for (int i = 0; i < m.n(); ++i) m(i, i) = diag[static_cast<std::size_t>(i)];
  return m;
}

SymMat SymMat::from_dense(int n, std::span<const double> rowmajor) {
  if (rowmajor.size() != static_cast<std::size_t>(n * n)) {
    throw std::invalid_argument("dense matrix needs n*n entries");
  }
  SymMat m(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m(i, j) = rowmajor[static_cast<std::size_t>(i * n + j)];
  return m;
}

double SymMat::trace() const {
  double t = 0.0;
  for (int i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

bool SymMat::all_finite() const {
  for (double v : packed())
    if (!std::isfinite(v)) return false;
  return true;
}

SymMat SymMat::squared() const {
  SymMat r(n_);
  for (int i = 0; i < n_; ++i) {
    for (int j = i; j < n_; ++j) {
      double s = 0.0;
      for (int k = 0; k < n_; ++k) s += (*this)(i, k) * (*this)(k, j);
      r(i, j) = s;
    }
  }
  return r;
}

SymMat SymMat::conjugated(std::span<const double> q) const {
  const int n = n_;
  // tmp = this * Q
  double tmp[kMaxN][kMaxN]{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += (*this)(i, k) * q[static_cast<std::size_t>(k * n + j)];
      tmp[i][j] = s;
    }
  SymMat r(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += q[static_cast<std::size_t>(k * n + i)] * tmp[k][j];
      r(i, j) = s;
    }
  return r;
}

SymMat operator+(const SymMat& a, const SymMat& b) {
  SymMat r(a.n());
  for (int p = 0; p < SymMat::packed_size(a.n()); ++p) r.a_[p] = a.a_[p] + b.a_[p];
  return r;
}

SymMat operator-(const SymMat& a, const SymMat& b) {
  SymMat r(a.n());
  for (int p = 0; p < SymMat::packed_size(a.n()); ++p) r.a_[p] = a.a_[p] - b.a_[p];
  return r;
}

SymMat operator*(double s, const SymMat& a) {
  SymMat r(a.n());
  for (int p = 0; p < SymMat::packed_size(a.n()); ++p) r.a_[p] = s * a.a_[p];
  return r;
}

bool operator==(const SymMat& a, const SymMat& b) {
  if (a.n() != b.n()) return false;
  for (int p = 0; p < SymMat::packed_size(a.n()); ++p)
    if (a.a_[p] != b.a_[p]) return false;
  return true;
}

Sym3Tensor::Sym3Tensor(int n) : n_(n) { check_dim(n); }

int Sym3Tensor::packed_index(int n, int i, int j, int k) { return kSym3Table.slot[n][i][j][k]; }

double Sym3Tensor::norm2() const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) {
        const double v = (*this)(i, j, k);
        s += v * v;
      }
  return s;
}

Sym3Tensor Sym3Tensor::transformed(std::span<const double> q) const {
  const int n = n_;
  Sym3Tensor r(n);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b)
      for (int c = b; c < n; ++c) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
              s += q[static_cast<std::size_t>(i * n + a)] * q[static_cast<std::size_t>(j * n + b)] *
                   q[static_cast<std::size_t>(k * n + c)] * (*this)(i, j, k);
        r(a, b, c) = s;
      }
  return r;
}

}  // namespace lagmcf
