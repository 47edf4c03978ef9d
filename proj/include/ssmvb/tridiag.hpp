#pragma once
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ssmvb {

// Symmetric tridiagonal matrix: diag[i] on the diagonal, off[i] linking
// rows i and i+1.
struct Tridiag {
  std::vector<double> diag;
  std::vector<double> off;

  int n() const { return static_cast<int>(diag.size()); }
};

// LDL^T factorization of a symmetric positive-definite tridiagonal matrix:
// A = L D L^T with unit lower-bidiagonal L (subdiagonal l) and pivots d.
struct TridiagLdl {
  std::vector<double> d;
  std::vector<double> l;
};

inline TridiagLdl ldl_factor(const Tridiag& a) {
  const int n = a.n();
  if (n < 1) throw std::invalid_argument("ldl_factor: empty matrix");
  TridiagLdl f;
  f.d.resize(n);
  f.l.assign(n > 1 ? n - 1 : 0, 0.0);
  f.d[0] = a.diag[0];
  for (int i = 1; i < n; ++i) {
    if (!(f.d[i - 1] > 0.0))
      throw std::runtime_error("ldl_factor: matrix not positive definite");
    f.l[i - 1] = a.off[i - 1] / f.d[i - 1];
    f.d[i] = a.diag[i] - f.l[i - 1] * a.off[i - 1];
  }
  if (!(f.d[n - 1] > 0.0))
    throw std::runtime_error("ldl_factor: matrix not positive definite");
  return f;
}

inline double ldl_logdet(const TridiagLdl& f) {
  double s = 0.0;
  for (double d : f.d) s += std::log(d);
  return s;
}

// Solves A x = b given the LDL^T factors.
inline std::vector<double> ldl_solve(const TridiagLdl& f,
                                     const std::vector<double>& b) {
  const int n = static_cast<int>(f.d.size());
  std::vector<double> x(b);
  for (int i = 1; i < n; ++i) x[i] -= f.l[i - 1] * x[i - 1];
  for (int i = 0; i < n; ++i) x[i] /= f.d[i];
  for (int i = n - 2; i >= 0; --i) x[i] -= f.l[i] * x[i + 1];
  return x;
}

// Diagonal and first superdiagonal of A^{-1} for tridiagonal SPD A, from the
// LDL^T factors (backward recurrence).
inline void ldl_inverse_band(const TridiagLdl& f, std::vector<double>& inv_diag,
                             std::vector<double>& inv_off) {
  const int n = static_cast<int>(f.d.size());
  inv_diag.assign(n, 0.0);
  inv_off.assign(n > 1 ? n - 1 : 0, 0.0);
  inv_diag[n - 1] = 1.0 / f.d[n - 1];
  for (int i = n - 2; i >= 0; --i) {
    inv_off[i] = -f.l[i] * inv_diag[i + 1];
    inv_diag[i] = 1.0 / f.d[i] + f.l[i] * f.l[i] * inv_diag[i + 1];
  }
}

}  // namespace ssmvb
