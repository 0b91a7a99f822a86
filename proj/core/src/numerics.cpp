#include "risloc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace risloc {

namespace {

constexpr int kMaxJacobiSweeps = 64;

double off_diagonal_norm(const MatrixD& m) {
  double s = 0.0;
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c)
      if (r != c) s += m(r, c) * m(r, c);
  return std::sqrt(s);
}

// One-sided Jacobi on the columns of a (copied) matrix. Works for real and
// complex entries: the complex case first rotates column p by the phase of
// the cross inner product, reducing the pair to the real plane rotation.
template <typename T>
std::vector<double> one_sided_jacobi(Matrix<T> a) {
  // Column count should not exceed row count or convergence slows; singular
  // values are invariant under (conjugate) transposition.
  if (a.rows() < a.cols()) {
    Matrix<T> at(a.cols(), a.rows());
    for (int r = 0; r < a.rows(); ++r)
      for (int c = 0; c < a.cols(); ++c) {
        if constexpr (std::is_same_v<T, std::complex<double>>)
          at(c, r) = std::conj(a(r, c));
        else
          at(c, r) = a(r, c);
      }
    a = std::move(at);
  }

  const int m = a.rows();
  const int n = a.cols();
  if (n == 0) return {};

  const double eps = 1e-15;
  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    bool converged = true;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0;
        T apq{};
        for (int i = 0; i < m; ++i) {
          const T vp = a(i, p);
          const T vq = a(i, q);
          app += std::norm(vp);
          aqq += std::norm(vq);
          if constexpr (std::is_same_v<T, std::complex<double>>)
            apq += std::conj(vp) * vq;
          else
            apq += vp * vq;
        }
        const double cross = std::abs(apq);
        if (cross <= eps * std::sqrt(app * aqq) || cross == 0.0) continue;
        converged = false;

        // Phase factor aligning the pair so the remaining rotation is real.
        T beta;
        if constexpr (std::is_same_v<T, std::complex<double>>)
          beta = apq / cross;
        else
          beta = apq > 0 ? T{1} : T{-1};

        const double zeta = (aqq - app) / (2.0 * cross);
        const double t = (zeta >= 0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (int i = 0; i < m; ++i) {
          const T vp = a(i, p) * beta;
          const T vq = a(i, q);
          a(i, p) = cs * vp - sn * vq;
          a(i, q) = sn * vp + cs * vq;
        }
      }
    }
    if (converged) break;
  }

  std::vector<double> sv(n);
  for (int c = 0; c < n; ++c) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += std::norm(a(i, c));
    sv[c] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

int rank_from_singular_values(const std::vector<double>& sv, double rel_tol) {
  if (sv.empty() || sv.front() == 0.0) return 0;
  const double cutoff = rel_tol * sv.front();
  int rank = 0;
  for (double s : sv)
    if (s > cutoff) ++rank;
  return rank;
}

}  // namespace

double max_abs(const MatrixD& m) {
  double v = 0.0;
  for (double x : m.data()) v = std::max(v, std::abs(x));
  return v;
}

double frobenius_norm(const MatrixD& m) {
  double s = 0.0;
  for (double x : m.data()) s += x * x;
  return std::sqrt(s);
}

double frobenius_norm(const MatrixC& m) {
  double s = 0.0;
  for (const auto& x : m.data()) s += std::norm(x);
  return std::sqrt(s);
}

bool all_finite(const MatrixD& m) {
  for (double x : m.data())
    if (!std::isfinite(x)) return false;
  return true;
}

SymEigenResult sym_eigen(const MatrixD& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("sym_eigen: matrix must be square");
  const int n = m.rows();

  // Work on the symmetrised copy; callers are expected to pass symmetric
  // matrices and sym_inverse enforces that, but tiny accumulation skew is
  // harmless to fold away here.
  MatrixD a(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) a(r, c) = 0.5 * (m(r, c) + m(c, r));
  MatrixD v = MatrixD::identity(n);

  const double scale = std::max(max_abs(a), 1e-300);
  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= 1e-15 * scale * n) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-18 * scale) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (int i = 0; i < n; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = cs * aip - sn * aiq;
          a(i, q) = sn * aip + cs * aiq;
        }
        for (int i = 0; i < n; ++i) {
          const double api = a(p, i);
          const double aqi = a(q, i);
          a(p, i) = cs * api - sn * aqi;
          a(q, i) = sn * api + cs * aqi;
        }
        for (int i = 0; i < n; ++i) {
          const double vip = v(i, p);
          const double viq = v(i, q);
          v(i, p) = cs * vip - sn * viq;
          v(i, q) = sn * vip + cs * viq;
        }
      }
    }
  }

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a(i, i) > a(j, j); });

  SymEigenResult out;
  out.eigenvalues.resize(n);
  out.eigenvectors = MatrixD(n, n);
  for (int k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]);
    for (int i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
  }
  return out;
}

std::vector<double> singular_values(const MatrixD& m) {
  return one_sided_jacobi(m);
}

std::vector<double> singular_values(const MatrixC& m) {
  return one_sided_jacobi(m);
}

int numerical_rank(const MatrixD& m, double rel_tol) {
  return rank_from_singular_values(singular_values(m), rel_tol);
}

int numerical_rank(const MatrixC& m, double rel_tol) {
  return rank_from_singular_values(singular_values(m), rel_tol);
}

SymInverseResult sym_inverse(const MatrixD& m, double rel_tol) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("sym_inverse: matrix must be square");
  const int n = m.rows();
  const double scale = max_abs(m);
  for (int r = 0; r < n; ++r)
    for (int c = r + 1; c < n; ++c)
      if (std::abs(m(r, c) - m(c, r)) > 1e-10 * std::max(scale, 1.0))
        throw std::invalid_argument("sym_inverse: input is not symmetric");

  const SymEigenResult eig = sym_eigen(m);
  double lam_max = 0.0, lam_min = std::numeric_limits<double>::infinity();
  for (double lam : eig.eigenvalues) {
    lam_max = std::max(lam_max, std::abs(lam));
    lam_min = std::min(lam_min, std::abs(lam));
  }

  SymInverseResult out;
  out.rank = 0;
  for (double lam : eig.eigenvalues)
    if (std::abs(lam) > rel_tol * lam_max) ++out.rank;
  out.condition = (lam_min > 0.0)
                      ? lam_max / lam_min
                      : std::numeric_limits<double>::infinity();
  if (out.rank < n || lam_max == 0.0) {
    out.singular = true;
    return out;
  }

  out.inverse = MatrixD(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = r; c < n; ++c) {
      double s = 0.0;
      for (int k = 0; k < n; ++k)
        s += eig.eigenvectors(r, k) * eig.eigenvectors(c, k) /
             eig.eigenvalues[k];
      out.inverse(r, c) = s;
      out.inverse(c, r) = s;
    }
  return out;
}

MatrixD central_diff(
    const std::function<std::vector<double>(const std::vector<double>&)>& f,
    const std::vector<double>& x, const std::vector<double>& steps) {
  if (steps.size() != x.size())
    throw std::invalid_argument("central_diff: one step per parameter required");
  for (double h : steps)
    if (!(h > 0.0))
      throw std::invalid_argument("central_diff: steps must be positive");

  const int p = static_cast<int>(x.size());
  MatrixD jac;
  for (int i = 0; i < p; ++i) {
    std::vector<double> xp = x, xm = x;
    xp[i] += steps[i];
    xm[i] -= steps[i];
    const std::vector<double> fp = f(xp);
    const std::vector<double> fm = f(xm);
    if (fp.size() != fm.size())
      throw std::invalid_argument("central_diff: inconsistent output size");
    if (jac.empty()) jac = MatrixD(static_cast<int>(fp.size()), p);
    if (static_cast<int>(fp.size()) != jac.rows())
      throw std::invalid_argument("central_diff: inconsistent output size");
    for (int r = 0; r < jac.rows(); ++r) {
      const double d = (fp[r] - fm[r]) / (2.0 * steps[i]);
      if (!std::isfinite(d))
        throw std::domain_error("central_diff: non-finite difference");
      jac(r, i) = d;
    }
  }
  return jac;
}

}  // namespace risloc
