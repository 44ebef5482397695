#include "bfdyn/propagator.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "bfdyn/errors.hpp"

namespace bfdyn {

void PropagationConfig::validate() const {
  if (!std::isfinite(time)) throw InputError("propagation time must be finite");
  if (!(tolerance > 0.0)) throw InputError("propagation tolerance must be positive");
  if (krylov_dim < 2) throw InputError("Krylov dimension must be at least 2");
  if (max_substeps < 1) throw InputError("substep budget must be positive");
}

namespace {

struct Krylov {
  Eigen::MatrixXcd basis;  // orthonormal columns
  Eigen::MatrixXd t;       // tridiagonal projection
  double next_beta = 0.0;  // h_{m+1,m}; 0 on breakdown
  int m = 0;
};

Krylov lanczos(const SparseMatrix& h, const ComplexVector& start, double norm, int max_dim,
               long& matvecs) {
  const Eigen::Index n = start.size();
  const int cap = static_cast<int>(std::min<Eigen::Index>(max_dim, n));
  Krylov k;
  k.basis.resize(n, cap);
  k.t = Eigen::MatrixXd::Zero(cap, cap);
  k.basis.col(0) = start / norm;

  const double scale = std::max(1.0, max_abs_entry(h));
  ComplexVector w(n);
  for (int j = 0; j < cap; ++j) {
    w.noalias() = h * k.basis.col(j);
    ++matvecs;
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass) {
      const ComplexVector overlaps = k.basis.leftCols(j + 1).adjoint() * w;
      w.noalias() -= k.basis.leftCols(j + 1) * overlaps;
      if (pass == 0) k.t(j, j) = overlaps(j).real();
    }
    const double beta = w.norm();
    k.m = j + 1;
    if (beta <= 1e-13 * scale) {
      k.next_beta = 0.0;
      break;
    }
    k.next_beta = beta;
    if (j + 1 < cap) {
      k.t(j, j + 1) = k.t(j + 1, j) = beta;
      k.basis.col(j + 1) = w / beta;
    }
  }
  return k;
}

// Coefficients of exp(-i tau T) e_1 for the leading m x m block.
Eigen::VectorXcd small_exp(const Eigen::MatrixXd& t, int m, double tau) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t.topLeftCorner(m, m));
  const auto& q = eig.eigenvectors();
  Eigen::VectorXcd phase(m);
  for (int i = 0; i < m; ++i) {
    phase(i) = std::polar(1.0, -eig.eigenvalues()(i) * tau) * q(0, i);
  }
  return q.cast<Complex>() * phase;
}

}  // namespace

ComplexVector evolve_vector(const SparseMatrix& h, const ComplexVector& psi0,
                            const PropagationConfig& cfg, PropagationStats* stats) {
  cfg.validate();
  if (h.rows() != h.cols() || h.rows() != psi0.size()) {
    throw BasisMismatchError("operator and state dimensions differ");
  }
  PropagationStats local;
  ComplexVector psi = psi0;
  double done = 0.0;
  const double total = std::abs(cfg.time);
  const double sign = cfg.time < 0 ? -1.0 : 1.0;
  double guess = total;

  while (done < total) {
    const double norm = psi.norm();
    if (norm == 0.0) break;
    if (++local.substeps > cfg.max_substeps) {
      throw PropagationError("Krylov propagation exceeded its substep budget",
                             local.error_estimate);
    }
    const Krylov k = lanczos(h, psi, norm, cfg.krylov_dim, local.matvecs);
    const double remaining = total - done;
    double tau = std::min(guess, remaining);
    Eigen::VectorXcd c;
    double err = 0.0;
    for (int attempt = 0;; ++attempt) {
      c = small_exp(k.t, k.m, sign * tau);
      if (k.next_beta == 0.0) {
        err = 0.0;  // invariant subspace: exact
      } else {
        const double tail = k.next_beta * std::abs(c(k.m - 1));
        double diff = 0.0;
        if (k.m > 1) {
          Eigen::VectorXcd shorter = Eigen::VectorXcd::Zero(k.m);
          shorter.head(k.m - 1) = small_exp(k.t, k.m - 1, sign * tau);
          diff = (c - shorter).norm();
        }
        err = norm * std::max(tail, diff);
      }
      const double allowed = cfg.tolerance * tau * norm;
      if (err <= allowed) break;
      if (attempt > 60) {
        throw PropagationError("Krylov substep did not reach the tolerance", err);
      }
      const double shrink = 0.9 * std::pow(allowed / err, 1.0 / std::max(2, k.m - 1));
      tau *= std::clamp(shrink, 0.1, 0.7);
    }
    psi.noalias() = norm * (k.basis.leftCols(k.m) * c);
    done += tau;
    local.error_estimate += err;
    // Allow the next step to grow again after a successful one.
    guess = (tau < remaining) ? tau * 1.5 : tau;
  }
  if (stats) {
    stats->substeps += local.substeps;
    stats->matvecs += local.matvecs;
    stats->error_estimate += local.error_estimate;
  }
  return psi;
}

StateVector evolve(const SparseHermitianOperator& h, const StateVector& psi0,
                   const PropagationConfig& cfg, PropagationStats* stats) {
  if (psi0.basis().hash() != h.basis().hash()) {
    throw BasisMismatchError("state basis differs from operator basis");
  }
  return StateVector(psi0.basis_ptr(), evolve_vector(h.matrix(), psi0.amplitudes(), cfg, stats));
}

ComplexVector dense_expm_vector(const SparseMatrix& h, const ComplexVector& psi0, double t) {
  if (static_cast<std::size_t>(h.rows()) > kDenseLimit) {
    throw DimensionLimitError("dense oracle limited to dimension 4000",
                              static_cast<double>(h.rows()));
  }
  if (h.rows() != h.cols() || h.rows() != psi0.size()) {
    throw BasisMismatchError("operator and state dimensions differ");
  }
  const Eigen::MatrixXcd dense = Eigen::MatrixXcd(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(dense);
  const auto& q = eig.eigenvectors();
  Eigen::VectorXcd coeff = q.adjoint() * psi0;
  for (Eigen::Index i = 0; i < coeff.size(); ++i) {
    coeff(i) *= std::polar(1.0, -eig.eigenvalues()(i) * t);
  }
  return q * coeff;
}

StateVector dense_expm(const SparseHermitianOperator& h, const StateVector& psi0, double t) {
  if (psi0.basis().hash() != h.basis().hash()) {
    throw BasisMismatchError("state basis differs from operator basis");
  }
  return StateVector(psi0.basis_ptr(), dense_expm_vector(h.matrix(), psi0.amplitudes(), t));
}

StateVector evolve_blocked(const BlockDecomposition& blocks, const StateVector& psi0,
                           const PropagationConfig& cfg, PropagationStats* stats) {
  if (psi0.basis().hash() != blocks.basis_ptr()->hash()) {
    throw BasisMismatchError("state basis differs from decomposition basis");
  }
  cfg.validate();
  const auto& list = blocks.blocks();
  StateVector out = StateVector::zero(psi0.basis_ptr());
  for (const auto& block : list) {
    const auto size = static_cast<Eigen::Index>(block.indices.size());
    ComplexVector sub(size);
    for (Eigen::Index i = 0; i < size; ++i) sub(i) = psi0.amplitudes()(block.indices[i]);
    if (sub.squaredNorm() == 0.0) continue;
    const ComplexVector evolved = evolve_vector(block.matrix, sub, cfg, stats);
    for (Eigen::Index i = 0; i < size; ++i) out.amplitudes()(block.indices[i]) = evolved(i);
  }
  return out;
}

}  // namespace bfdyn
