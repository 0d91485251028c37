#pragma once

// Dense complex linear algebra shared by the rest of the library.
//
// Matrices acting on n x n operators are stored as n^2 x n^2 matrices on the
// column-stacked vectorization: vec(A X B) = (B^T kron A) vec(X).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include "oqrw/errors.hpp"

namespace oqrw {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Default tolerances. Every entry point that uses one of these takes the
/// struct by value so callers (and the CLI `--tol-*` flags) can override.
struct Tolerances {
  double positivity = 1e-10;
  double residual = 1e-9;
  double trace = 1e-12;
};

inline std::string describe_shape(const ComplexMatrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

inline void require_finite(const ComplexMatrix& m, const std::string& what) {
  if (!m.allFinite()) fail(ErrorKind::contract, what + " has non-finite entries");
}

inline void require_square(const ComplexMatrix& m, const std::string& what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    fail(ErrorKind::dimension, what + " must be square and nonempty, got " + describe_shape(m));
}

inline ComplexVector vec(const ComplexMatrix& m) {
  return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

inline ComplexMatrix unvec(const ComplexVector& v, Index n) {
  if (v.size() != n * n)
    fail(ErrorKind::dimension, "cannot reshape vector of length " + std::to_string(v.size()) +
                                   " into " + std::to_string(n) + "x" + std::to_string(n));
  return Eigen::Map<const ComplexMatrix>(v.data(), n, n);
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& m) { return (m + m.adjoint()) / 2.0; }

/// Kronecker product a (x) b.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Superoperator matrix of X -> A X B^* in the column-stacking convention.
inline ComplexMatrix sandwich_matrix(const ComplexMatrix& a, const ComplexMatrix& b) {
  return kron(b.conjugate(), a);
}

// ---------------------------------------------------------------------------
// Subspaces

/// Orthonormal basis of the column span of `cols`; singular values at or
/// below `abs_tol` are treated as zero.
inline ComplexMatrix orthonormal_range(const ComplexMatrix& cols, double abs_tol) {
  if (cols.cols() == 0) return ComplexMatrix(cols.rows(), 0);
  Eigen::JacobiSVD<ComplexMatrix> svd(cols, Eigen::ComputeThinU);
  Index rank = 0;
  for (Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > abs_tol) ++rank;
  return svd.matrixU().leftCols(rank);
}

inline Index numerical_rank(const ComplexMatrix& m, double abs_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  Index rank = 0;
  for (Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > abs_tol) ++rank;
  return rank;
}

/// Orthonormal basis of the null space of `m`; singular values at or below
/// `abs_tol` count as zero.
inline ComplexMatrix null_space(const ComplexMatrix& m, double abs_tol) {
  const Index n = m.cols();
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > abs_tol) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

/// Orthonormal basis of the orthogonal complement of span(basis) in C^dim.
inline ComplexMatrix orthogonal_complement(const ComplexMatrix& basis, Index dim) {
  if (basis.cols() == 0) return ComplexMatrix::Identity(dim, dim);
  return null_space(basis.adjoint(), 1e-12);
}

inline ComplexMatrix projector(const ComplexMatrix& orthonormal_basis) {
  return orthonormal_basis * orthonormal_basis.adjoint();
}

// ---------------------------------------------------------------------------
// Eigendecomposition

struct EigenSystem {
  std::vector<Complex> eigenvalues;
  std::vector<ComplexVector> right_eigenvectors;
  std::vector<double> residuals;
  /// Leading modulus shared with another eigenvalue (relative 1e-9).
  bool leading_degenerate = false;
};

namespace detail {

inline void sort_spectrum(std::vector<Complex>& values, std::vector<ComplexVector>& vectors) {
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(values[a]) > std::abs(values[b]);
  });
  // Runs of equal modulus (up to rounding) are ordered by real part
  // descending, then imaginary part ascending.
  const double scale = values.empty() ? 0.0 : std::abs(values[order.front()]);
  const double tie = 1e-12 * std::max(scale, 1e-300);
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() &&
           std::abs(values[order[start]]) - std::abs(values[order[end]]) <= tie)
      ++end;
    std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) {
                       if (values[a].real() != values[b].real())
                         return values[a].real() > values[b].real();
                       return values[a].imag() < values[b].imag();
                     });
    start = end;
  }
  std::vector<Complex> sorted_values;
  std::vector<ComplexVector> sorted_vectors;
  for (auto i : order) {
    sorted_values.push_back(values[i]);
    sorted_vectors.push_back(vectors[i]);
  }
  values = std::move(sorted_values);
  vectors = std::move(sorted_vectors);
}

}  // namespace detail

/// All eigenvalues (with multiplicity) and residual-checked right
/// eigenvectors, sorted by decreasing modulus.
inline EigenSystem eigendecompose(const ComplexMatrix& m, double residual_tol = 1e-9) {
  require_square(m, "eigendecompose input");
  require_finite(m, "eigendecompose input");
  const double norm = m.norm();
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(m, true);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eigensolver did not converge for matrix with Frobenius norm " << norm;
    fail(ErrorKind::convergence, os.str());
  }
  EigenSystem sys;
  for (Index i = 0; i < m.rows(); ++i) {
    sys.eigenvalues.push_back(solver.eigenvalues()(i));
    sys.right_eigenvectors.push_back(solver.eigenvectors().col(i));
  }
  detail::sort_spectrum(sys.eigenvalues, sys.right_eigenvectors);
  for (std::size_t i = 0; i < sys.eigenvalues.size(); ++i) {
    const auto& v = sys.right_eigenvectors[i];
    const double r = (m * v - sys.eigenvalues[i] * v).norm();
    if (r > residual_tol * norm) {
      std::ostringstream os;
      os << "eigenpair " << i << " residual " << r << " exceeds " << residual_tol
         << " x Frobenius norm " << norm;
      fail(ErrorKind::convergence, os.str());
    }
    sys.residuals.push_back(r);
  }
  if (sys.eigenvalues.size() > 1) {
    const double lead = std::abs(sys.eigenvalues[0]);
    sys.leading_degenerate = lead - std::abs(sys.eigenvalues[1]) <= 1e-9 * lead;
  }
  return sys;
}

/// Eigenvalues only, same ordering as eigendecompose.
inline std::vector<Complex> eigenvalues(const ComplexMatrix& m) {
  require_square(m, "eigenvalues input");
  require_finite(m, "eigenvalues input");
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(m, false);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eigensolver did not converge for matrix with Frobenius norm " << m.norm();
    fail(ErrorKind::convergence, os.str());
  }
  std::vector<Complex> values(solver.eigenvalues().data(),
                              solver.eigenvalues().data() + m.rows());
  std::vector<ComplexVector> unused(values.size());
  detail::sort_spectrum(values, unused);
  return values;
}

// ---------------------------------------------------------------------------
// Constrained solves

/// Solves a(x) = b for x restricted to the complement of `constraint`
/// (i.e. <constraint, x> = 0). `a` is an N x N matrix, b and constraint are
/// length-N vectors.
inline ComplexVector solve_on_complement(const ComplexMatrix& a, const ComplexVector& b,
                                         const ComplexVector& constraint,
                                         double residual_rel = 1e-10) {
  require_square(a, "linear map");
  const Index n = a.rows();
  if (b.size() != n || constraint.size() != n)
    fail(ErrorKind::dimension, "right-hand side and constraint must have length " +
                                   std::to_string(n));
  if (n == 1) {
    // The complement of a nonzero vector in C^1 is {0}.
    if (std::abs(b(0)) > residual_rel)
      fail(ErrorKind::contract, "right-hand side is not in the range of the restricted map");
    return ComplexVector::Zero(1);
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(constraint.normalized());
  const ComplexMatrix q_full = qr.householderQ() * ComplexMatrix::Identity(n, n);
  const ComplexMatrix basis = q_full.rightCols(n - 1);
  const ComplexMatrix restricted = a * basis;
  Eigen::JacobiSVD<ComplexMatrix> svd(restricted, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smallest = svd.singularValues()(n - 2);
  const double norm = a.norm();
  if (smallest <= 1e-12 * norm) {
    std::ostringstream os;
    os << "restricted map is singular: smallest singular value " << smallest
       << " (map norm " << norm << ")";
    fail(ErrorKind::rank_deficiency, os.str());
  }
  ComplexVector x = basis * svd.solve(b);
  const double residual = (a * x - b).norm();
  if (residual > residual_rel * b.norm()) {
    std::ostringstream os;
    os << "relative residual " << residual / std::max(b.norm(), 1e-300)
       << " exceeds " << residual_rel << "; right-hand side is not in the range";
    fail(ErrorKind::contract, os.str());
  }
  return x;
}

/// Solves a(x) = b over traceless n x n matrices. `a` acts on vec(x).
inline ComplexMatrix solve_on_traceless(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_square(b, "right-hand side");
  const Index n = b.rows();
  if (a.rows() != n * n || a.cols() != n * n)
    fail(ErrorKind::dimension, "linear map of shape " + describe_shape(a) +
                                   " does not act on " + describe_shape(b) + " matrices");
  if (std::abs(b.trace()) > 1e-10) {
    std::ostringstream os;
    os << "right-hand side has trace " << std::abs(b.trace()) << " (limit 1e-10)";
    fail(ErrorKind::contract, os.str());
  }
  const ComplexVector identity = vec(ComplexMatrix::Identity(n, n));
  ComplexMatrix x = unvec(solve_on_complement(a, vec(b), identity), n);
  x -= (x.trace() / static_cast<double>(n)) * ComplexMatrix::Identity(n, n);
  return x;
}

// ---------------------------------------------------------------------------
// Positivity

struct PsdResult {
  bool is_psd = false;
  double min_eigenvalue = 0.0;
};

inline PsdResult psd_check(const ComplexMatrix& m, double tol = 1e-10) {
  require_square(m, "psd_check input");
  require_finite(m, "psd_check input");
  const double asym = (m - m.adjoint()).norm();
  if (asym > tol * m.norm()) {
    std::ostringstream os;
    os << "matrix is not Hermitian: ||m - m*|| = " << asym;
    fail(ErrorKind::symmetry, os.str());
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(m), Eigen::EigenvaluesOnly);
  const double lowest = solver.eigenvalues()(0);
  return {lowest >= -tol, lowest};
}

inline double min_hermitian_eigenvalue(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(m), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

}  // namespace oqrw
