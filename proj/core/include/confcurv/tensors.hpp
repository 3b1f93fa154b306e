#pragma once

// Pointwise algebra of symmetric bilinear forms and (0,4) curvature tensors.

#include <span>
#include <vector>

namespace confcurv {

/// Symmetric n x n form. Setting (i, j) also sets (j, i).
class SymBilinear {
 public:
  SymBilinear() = default;
  explicit SymBilinear(int n);

  static SymBilinear identity(int n);
  static SymBilinear diagonal(std::span<const double> d);

  int dim() const noexcept { return n_; }
  double operator()(int i, int j) const { return a_[idx(i, j)]; }
  void set(int i, int j, double v) {
    a_[idx(i, j)] = v;
    a_[idx(j, i)] = v;
  }

  double max_norm() const;
  /// Trace against the inverse of `metric`.
  double trace(const SymBilinear& metric) const;

  SymBilinear& operator+=(const SymBilinear& o);
  SymBilinear& operator-=(const SymBilinear& o);
  SymBilinear& operator*=(double s);
  friend SymBilinear operator+(SymBilinear a, const SymBilinear& b) { return a += b; }
  friend SymBilinear operator-(SymBilinear a, const SymBilinear& b) { return a -= b; }
  friend SymBilinear operator*(double s, SymBilinear a) { return a *= s; }

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i * n_ + j); }

  int n_ = 0;
  std::vector<double> a_;
};

/// Dense (0,4) tensor R_{ijkl}. Storage is the full n^4 array so that a
/// tensor violating the curvature symmetries is representable (and
/// detectable by validate_symmetries); n stays small in practice.
class CurvTensor {
 public:
  CurvTensor() = default;
  explicit CurvTensor(int n);

  int dim() const noexcept { return n_; }
  double operator()(int i, int j, int k, int l) const { return r_[idx(i, j, k, l)]; }
  double& at(int i, int j, int k, int l) { return r_[idx(i, j, k, l)]; }

  /// Assign one independent value to all eight index orderings related by
  /// the antisymmetries and pair symmetry.
  void set_with_symmetries(int i, int j, int k, int l, double v);

  std::span<const double> data() const noexcept { return r_; }

 private:
  std::size_t idx(int i, int j, int k, int l) const {
    return static_cast<std::size_t>(((i * n_ + j) * n_ + k) * n_ + l);
  }

  int n_ = 0;
  std::vector<double> r_;
};

/// (A ⊙ B)_{ijkl} = A_ik B_jl + A_jl B_ik - A_il B_jk - A_jk B_il.
CurvTensor kulkarni_nomizu(const SymBilinear& a, const SymBilinear& b);

/// Violations of the curvature symmetries, each measured in max norm.
struct SymmetryViolation {
  double antisym_first = 0.0;   // R_ijkl + R_jikl
  double antisym_second = 0.0;  // R_ijkl + R_ijlk
  double pair = 0.0;            // R_ijkl - R_klij
  double bianchi = 0.0;         // R_ijkl + R_iklj + R_iljk

  double max() const;
};

SymmetryViolation symmetry_violation(const CurvTensor& r);

/// True iff every symmetry family holds within `tol`. Each check allows, on
/// top of `tol`, the rounding slack of the floating-point sum it evaluates
/// (a few ulps of the summed magnitudes), so identities that hold exactly
/// in real arithmetic pass at tol = 0.
bool validate_symmetries(const CurvTensor& r, double tol);

double tensor_max_norm(const CurvTensor& r);
CurvTensor tensor_difference(const CurvTensor& a, const CurvTensor& b);

}  // namespace confcurv
