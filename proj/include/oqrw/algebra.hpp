#pragma once

// Smallest matrix algebra containing a set of generators. A family of n x n
// matrices has no common invariant subspace besides {0} and C^n exactly when
// the unital algebra it generates is all of M_n (Burnside).

#include <span>
#include <vector>

#include "oqrw/numerics.hpp"

namespace oqrw {

class AlgebraClosure {
 public:
  explicit AlgebraClosure(Index n, bool include_identity = true)
      : n_(n), basis_(n * n, 0) {
    if (include_identity) adjoin(ComplexMatrix::Identity(n, n));
  }

  AlgebraClosure(std::span<const ComplexMatrix> generators, bool include_identity)
      : AlgebraClosure(require_common_dim(generators), include_identity) {
    for (const auto& g : generators) add_generator(g);
    close();
  }

  /// Adds a generator without re-closing; call close() afterwards.
  void add_generator(const ComplexMatrix& g) {
    if (g.rows() != n_ || g.cols() != n_)
      fail(ErrorKind::dimension, "generator is " + describe_shape(g) + ", expected " +
                                     std::to_string(n_) + "x" + std::to_string(n_));
    generators_.push_back(g);
    adjoin(g);
  }

  /// Adjoins products generator * basis element until the span is closed.
  /// Each pass either grows the dimension or stops, so at most n^2 passes run.
  void close() {
    Index checked = 0;
    while (checked < basis_.cols()) {
      const Index upto = basis_.cols();
      for (Index k = checked; k < upto; ++k) {
        const ComplexMatrix b = unvec(basis_.col(k), n_);
        for (const auto& g : generators_) {
          adjoin(g * b);
          if (dimension() == n_ * n_) return;
        }
      }
      checked = upto;
    }
  }

  Index n() const { return n_; }
  Index dimension() const { return basis_.cols(); }
  bool is_full() const { return dimension() == n_ * n_; }
  const std::vector<ComplexMatrix>& generators() const { return generators_; }

  /// Orthonormal basis (Hilbert-Schmidt) as columns of vectorized matrices.
  const ComplexMatrix& basis_vectors() const { return basis_; }

  std::vector<ComplexMatrix> basis() const {
    std::vector<ComplexMatrix> out;
    for (Index k = 0; k < basis_.cols(); ++k) out.push_back(unvec(basis_.col(k), n_));
    return out;
  }

  /// Largest relative residual of g * b outside the span, over generators g
  /// and basis elements b.
  double closure_residual() const {
    double worst = 0.0;
    for (Index k = 0; k < basis_.cols(); ++k) {
      const ComplexMatrix b = unvec(basis_.col(k), n_);
      for (const auto& g : generators_) {
        const ComplexVector p = vec(g * b);
        const double norm = p.norm();
        if (norm == 0.0) continue;
        worst = std::max(worst, (p - basis_ * (basis_.adjoint() * p)).norm() / norm);
      }
    }
    return worst;
  }

 private:
  static Index require_common_dim(std::span<const ComplexMatrix> generators) {
    if (generators.empty()) fail(ErrorKind::precondition, "algebra closure needs generators");
    const Index n = generators.front().rows();
    for (const auto& g : generators)
      if (g.rows() != n || g.cols() != n)
        fail(ErrorKind::dimension, "generators must share one square dimension");
    return n;
  }

  void adjoin(const ComplexMatrix& m) {
    if (dimension() == n_ * n_) return;
    ComplexVector v = vec(m);
    const double norm = v.norm();
    if (norm == 0.0) return;
    v /= norm;
    for (int pass = 0; pass < 2; ++pass) v -= basis_ * (basis_.adjoint() * v);
    const double rest = v.norm();
    if (rest <= 1e-9) return;
    basis_.conservativeResize(Eigen::NoChange, basis_.cols() + 1);
    basis_.col(basis_.cols() - 1) = v / rest;
  }

  Index n_;
  ComplexMatrix basis_;
  std::vector<ComplexMatrix> generators_;
};

inline AlgebraClosure algebra_closure(std::span<const ComplexMatrix> mats, bool include_identity) {
  return AlgebraClosure(mats, include_identity);
}

}  // namespace oqrw
