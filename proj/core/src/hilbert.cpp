#include "threebox/hilbert.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "threebox/errors.hpp"

namespace threebox {
namespace {

Eigen::Index basis_index(int box) {
  if (box < 1 || box > 3) {
    throw std::invalid_argument("box label must be 1, 2 or 3, got " + std::to_string(box));
  }
  return static_cast<Eigen::Index>(box - 1);
}

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

// StateVector -----------------------------------------------------------------

StateVector StateVector::from_amplitudes(const CVector& amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("state vector must have finite, nonzero norm");
  }
  return StateVector(amplitudes / n);
}

StateVector StateVector::box(int box) {
  CVector v = CVector::Zero();
  v[basis_index(box)] = 1.0;
  return StateVector(v);
}

StateVector StateVector::initial() { return from_amplitudes(CVector(1.0, 1.0, 1.0)); }

StateVector StateVector::final_state() { return from_amplitudes(CVector(1.0, 1.0, -1.0)); }

DensityMatrix StateVector::density() const { return DensityMatrix::pure(*this); }

// DensityMatrix ---------------------------------------------------------------

bool DensityMatrix::is_valid(const CMatrix& m, double herm_tol, double trace_tol, double eig_tol) {
  if (!m.allFinite()) return false;
  if (max_abs(m - m.adjoint()) > herm_tol) return false;
  const Complex tr = m.trace();
  if (std::abs(tr.real() - 1.0) > trace_tol || std::abs(tr.imag()) > trace_tol) return false;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() >= -eig_tol;
}

DensityMatrix::DensityMatrix(const CMatrix& m) : m_(m) {
  if (!is_valid(m_)) {
    throw std::invalid_argument("matrix is not a valid density matrix");
  }
}

DensityMatrix DensityMatrix::pure(const StateVector& s) {
  return DensityMatrix(s.amplitudes() * s.amplitudes().adjoint());
}

DensityMatrix DensityMatrix::box(int box) { return pure(StateVector::box(box)); }

double DensityMatrix::population(int box) const {
  const auto i = basis_index(box);
  return m_(i, i).real();
}

int DensityMatrix::dominant_box() const {
  int best = 1;
  for (int b = 2; b <= 3; ++b) {
    if (population(b) > population(best)) best = b;
  }
  return best;
}

// Unitary ---------------------------------------------------------------------

Unitary::Unitary(const CMatrix& m) : m_(m) {
  if (!m_.allFinite() || max_abs(m_.adjoint() * m_ - CMatrix::Identity()) > kMatrixTol) {
    throw std::invalid_argument("matrix is not unitary");
  }
}

Unitary Unitary::plane_rotation(std::size_t a, std::size_t b, double angle) {
  if (a >= kDim || b >= kDim || a == b) {
    throw std::invalid_argument("rotation plane needs two distinct basis indices");
  }
  CMatrix r = CMatrix::Identity();
  const auto ia = static_cast<Eigen::Index>(a);
  const auto ib = static_cast<Eigen::Index>(b);
  r(ia, ia) = std::cos(angle);
  r(ib, ib) = std::cos(angle);
  r(ia, ib) = -std::sin(angle);
  r(ib, ia) = std::sin(angle);
  return Unitary(r);
}

// Projector -------------------------------------------------------------------

Projector::Projector(const CMatrix& m) : m_(m) {
  if (!m_.allFinite() || max_abs(m_ * m_ - m_) > kMatrixTol || max_abs(m_ - m_.adjoint()) > kMatrixTol) {
    throw std::invalid_argument("matrix is not an orthogonal projector");
  }
}

Projector Projector::box(int box) { return onto(StateVector::box(box)); }

Projector Projector::box_complement(int box) { return Projector::box(box).complement(); }

Projector Projector::onto(const StateVector& s) {
  return Projector(s.amplitudes() * s.amplitudes().adjoint());
}

// Channel ---------------------------------------------------------------------

Channel::Channel(std::vector<CMatrix> kraus) : kraus_(std::move(kraus)) {
  if (kraus_.empty()) {
    throw std::invalid_argument("channel needs at least one Kraus operator");
  }
  CMatrix sum = CMatrix::Zero();
  for (const auto& k : kraus_) sum += k.adjoint() * k;
  if (max_abs(sum - CMatrix::Identity()) > kMatrixTol) {
    throw std::invalid_argument("Kraus operators are not trace preserving");
  }
}

Channel Channel::identity() { return Channel({CMatrix::Identity()}); }

Channel Channel::from_unitary(const Unitary& u) { return Channel({u.matrix()}); }

Channel Channel::dephasing(double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw std::invalid_argument("dephasing rate must lie in [0, 1]");
  }
  std::vector<CMatrix> ops;
  ops.emplace_back(std::sqrt(1.0 - rate) * CMatrix::Identity());
  for (int b = 1; b <= 3; ++b) {
    ops.emplace_back(std::sqrt(rate) * Projector::box(b).matrix());
  }
  return Channel(std::move(ops));
}

Channel Channel::swap_boxes(int a, int b, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("swap probability must lie in [0, 1]");
  }
  CMatrix perm = CMatrix::Identity();
  const auto ia = basis_index(a);
  const auto ib = basis_index(b);
  perm(ia, ia) = 0.0;
  perm(ib, ib) = 0.0;
  perm(ia, ib) = 1.0;
  perm(ib, ia) = 1.0;
  if (a == b) perm = CMatrix::Identity();
  return Channel({std::sqrt(1.0 - p) * CMatrix::Identity(), std::sqrt(p) * perm});
}

// Operations ------------------------------------------------------------------

std::array<CVector, kDim> complete_basis(const CVector& first) {
  std::array<CVector, kDim> basis;
  basis[0] = first.normalized();
  std::size_t filled = 1;
  for (Eigen::Index e = 0; e < 3 && filled < kDim; ++e) {
    CVector v = CVector::Unit(e);
    // Two passes of modified Gram-Schmidt keep the result orthonormal to ~1e-16.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < filled; ++k) v -= basis[k].dot(v) * basis[k];
    }
    const double n = v.norm();
    if (n > 1e-6) basis[filled++] = v / n;
  }
  return basis;
}

Unitary unitary_from_pair(const StateVector& source, const StateVector& target) {
  const auto src = complete_basis(source.amplitudes());
  const auto tgt = complete_basis(target.amplitudes());
  CMatrix u = CMatrix::Zero();
  for (std::size_t k = 0; k < kDim; ++k) u += tgt[k] * src[k].adjoint();
  return Unitary(u);
}

double born_probability(const Projector& p, const StateVector& s) {
  const CVector& v = s.amplitudes();
  return v.dot(p.matrix() * v).real();
}

double born_probability(const Projector& p, const DensityMatrix& rho) {
  return (p.matrix() * rho.matrix()).trace().real();
}

Projection project(const Projector& p, const StateVector& s) {
  const double prob = born_probability(p, s);
  if (prob < kMinBranchProbability) {
    throw ZeroProbabilityProjection("projection onto a branch with probability " +
                                    std::to_string(prob));
  }
  return {StateVector::from_amplitudes(p.matrix() * s.amplitudes()), prob};
}

StateVector apply_unitary(const Unitary& u, const StateVector& s) {
  return StateVector::from_amplitudes(u.matrix() * s.amplitudes());
}

DensityMatrix apply_unitary(const Unitary& u, const DensityMatrix& rho) {
  return DensityMatrix(hermitian_part(u.matrix() * rho.matrix() * u.matrix().adjoint()));
}

DensityMatrix apply_channel(const Channel& c, const DensityMatrix& rho) {
  CMatrix out = CMatrix::Zero();
  for (const auto& k : c.kraus_ops()) out += k * rho.matrix() * k.adjoint();
  return DensityMatrix(hermitian_part(out));
}

Measurement measure_in_basis(const DensityMatrix& rho, std::span<const Projector> projectors,
                             Rng& rng) {
  if (projectors.empty()) {
    throw std::invalid_argument("measurement needs at least one projector");
  }
  CMatrix sum = CMatrix::Zero();
  for (const auto& p : projectors) sum += p.matrix();
  if (max_abs(sum - CMatrix::Identity()) > kMatrixTol) {
    throw std::invalid_argument("projectors do not form a complete measurement");
  }

  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t chosen = projectors.size();
  std::size_t last_possible = 0;
  for (std::size_t i = 0; i < projectors.size(); ++i) {
    const double p = born_probability(projectors[i], rho);
    if (p >= kMinBranchProbability) last_possible = i;
    cumulative += p;
    if (chosen == projectors.size() && u < cumulative && p >= kMinBranchProbability) chosen = i;
  }
  // Rounding can leave u just above the final cumulative sum.
  if (chosen == projectors.size()) chosen = last_possible;

  const CMatrix& proj = projectors[chosen].matrix();
  CMatrix post = hermitian_part(proj * rho.matrix() * proj);
  post /= post.trace().real();
  return {chosen, DensityMatrix(post)};
}

}  // namespace threebox
