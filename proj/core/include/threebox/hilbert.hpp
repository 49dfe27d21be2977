#pragma once

// Exact linear algebra on the three-level box system.
//
// Basis index k = 0, 1, 2 holds box label k + 1. Helpers that take a `box`
// argument use the 1-based label.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "threebox/rng.hpp"

namespace threebox {

using Complex = std::complex<double>;
using CVector = Eigen::Vector3cd;
using CMatrix = Eigen::Matrix3cd;

inline constexpr std::size_t kDim = 3;
inline constexpr double kAlgebraTol = 1e-12;
inline constexpr double kMatrixTol = 1e-10;
inline constexpr double kMinBranchProbability = 1e-14;

class DensityMatrix;

class StateVector {
 public:
  // Normalizes; throws std::invalid_argument on a zero vector.
  static StateVector from_amplitudes(const CVector& amplitudes);

  static StateVector box(int box);
  // (|1> + |2> + |3>)/sqrt(3): Alice's pre-selected state.
  static StateVector initial();
  // (|1> + |2> - |3>)/sqrt(3): Alice's post-selected state.
  static StateVector final_state();

  const CVector& amplitudes() const { return amps_; }
  Complex operator[](std::size_t i) const { return amps_[static_cast<Eigen::Index>(i)]; }

  // <this|other>
  Complex inner(const StateVector& other) const { return amps_.dot(other.amps_); }
  double squared_norm() const { return amps_.squaredNorm(); }

  DensityMatrix density() const;

 private:
  explicit StateVector(const CVector& v) : amps_(v) {}
  CVector amps_;
};

class DensityMatrix {
 public:
  // Validates hermiticity, unit trace and positivity; throws std::invalid_argument.
  explicit DensityMatrix(const CMatrix& m);

  static DensityMatrix pure(const StateVector& s);
  static DensityMatrix box(int box);

  const CMatrix& matrix() const { return m_; }
  double population(int box) const;
  double trace() const { return m_.trace().real(); }
  double purity() const { return (m_ * m_).trace().real(); }
  // Box label with the largest population (ties resolve to the lower label).
  int dominant_box() const;

  static bool is_valid(const CMatrix& m, double herm_tol = kAlgebraTol,
                       double trace_tol = kAlgebraTol, double eig_tol = 1e-10);

 private:
  CMatrix m_;
};

class Unitary {
 public:
  explicit Unitary(const CMatrix& m);
  static Unitary identity() { return Unitary(CMatrix::Identity()); }
  // Real rotation by `angle` in the plane spanned by basis indices a and b.
  static Unitary plane_rotation(std::size_t a, std::size_t b, double angle);

  const CMatrix& matrix() const { return m_; }
  Unitary adjoint() const { return Unitary(m_.adjoint()); }
  Unitary operator*(const Unitary& rhs) const { return Unitary(m_ * rhs.m_); }

 private:
  CMatrix m_;
};

class Projector {
 public:
  explicit Projector(const CMatrix& m);
  // |box><box|
  static Projector box(int box);
  // 1 - |box><box|
  static Projector box_complement(int box);
  static Projector onto(const StateVector& s);

  const CMatrix& matrix() const { return m_; }
  Projector complement() const { return Projector(CMatrix::Identity() - m_); }

 private:
  CMatrix m_;
};

class Channel {
 public:
  // Requires sum K^dag K = 1 within 1e-10.
  explicit Channel(std::vector<CMatrix> kraus);

  static Channel identity();
  static Channel from_unitary(const Unitary& u);
  // rho -> (1 - rate) rho + rate * diag(rho), in the box basis.
  static Channel dephasing(double rate);
  // With probability p swap boxes a and b, otherwise leave the state alone.
  static Channel swap_boxes(int a, int b, double p);

  const std::vector<CMatrix>& kraus_ops() const { return kraus_; }

 private:
  std::vector<CMatrix> kraus_;
};

// U with U * source = target and <target|U|source> = 1. The remaining basis
// vectors on both sides are completed by Gram-Schmidt over the standard basis
// in index order.
Unitary unitary_from_pair(const StateVector& source, const StateVector& target);

// Orthonormal basis whose first element is `first`, completed from the
// standard basis in index order.
std::array<CVector, kDim> complete_basis(const CVector& first);

double born_probability(const Projector& p, const StateVector& s);
double born_probability(const Projector& p, const DensityMatrix& rho);

struct Projection {
  StateVector state;
  double probability;
};

// Throws ZeroProbabilityProjection below kMinBranchProbability.
Projection project(const Projector& p, const StateVector& s);

StateVector apply_unitary(const Unitary& u, const StateVector& s);
DensityMatrix apply_unitary(const Unitary& u, const DensityMatrix& rho);
DensityMatrix apply_channel(const Channel& c, const DensityMatrix& rho);

struct Measurement {
  std::size_t index;  // position in the projector list
  DensityMatrix post;
};

// Samples outcome i with probability tr(P_i rho) using one uniform draw.
// Throws std::invalid_argument unless the projectors sum to the identity.
Measurement measure_in_basis(const DensityMatrix& rho, std::span<const Projector> projectors,
                             Rng& rng);

}  // namespace threebox
