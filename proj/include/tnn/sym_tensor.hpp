#pragma once

#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "tnn/multi_index.hpp"

namespace tnn {

enum class Field { Real, Complex };

const char* field_name(Field f);

/// Symmetric tensor of order m over F^n, stored as one value per monomial
/// alpha with |alpha| = m (the a-vector of the entries). Multiplicities
/// multinomial(m; alpha) enter only through the inner product and the
/// polynomial conversion.
class SymTensor {
 public:
  SymTensor() = default;
  SymTensor(int order, int dim, Field field);

  int order() const { return order_; }
  int dim() const { return dim_; }
  Field field() const { return field_; }
  const std::vector<MultiIndex>& monomials() const { return monomials_; }
  int entry_count() const { return static_cast<int>(monomials_.size()); }

  const Vec& a_re() const { return a_re_; }
  const Vec& a_im() const { return a_im_; }
  Vec& a_re() { return a_re_; }
  Vec& a_im() { return a_im_; }

  int position(const MultiIndex& alpha) const;
  std::complex<double> entry(const MultiIndex& alpha) const;
  void set_entry(const MultiIndex& alpha, std::complex<double> v);

  /// Dense hypermatrix entry for the index tuple (0-based), well defined by
  /// symmetry.
  std::complex<double> dense_entry(const std::vector<int>& tuple) const;

  SymTensor operator+(const SymTensor& other) const;
  SymTensor operator-(const SymTensor& other) const;
  SymTensor scaled(double t) const;

 private:
  int order_ = 0;
  int dim_ = 0;
  Field field_ = Field::Real;
  std::vector<MultiIndex> monomials_;  // N^n_{m} in graded-lex order
  Basis index_;                        // lookup over the same set via find()
  Vec a_re_, a_im_;
};

/// One rank-one term sign * lambda * (atom_re + i atom_im)^{tensor order}.
struct DecompositionTerm {
  double lambda = 0.0;  // > 0
  int sign = +1;        // -1 only in the even real split
  Vec atom_re;
  Vec atom_im;  // zero for real decompositions
};

/// Rank-one decomposition attaining (or witnessing a bound on) the nuclear
/// norm. For nonsymmetric order-3 decompositions the atom vector holds the
/// three factor segments concatenated, each of unit norm, and segment_dims
/// records the split; otherwise segment_dims is empty and atoms are unit.
struct NuclearDecomposition {
  Field field = Field::Real;
  int order = 0;
  int dim = 0;
  std::vector<DecompositionTerm> terms;
  std::vector<int> segment_dims;

  double mass() const;
};

/// Dense input view: row-major entries over an order-m cube of side n.
struct DenseTensor {
  int order = 0;
  int dim = 0;
  std::vector<std::complex<double>> values;  // size dim^order, row-major

  std::complex<double>& at(const std::vector<int>& tuple);
  std::complex<double> at(const std::vector<int>& tuple) const;
  static DenseTensor zeros(int order, int dim);
};

/// Validates full symmetry (1e-12 relative by default) and keeps one value
/// per monomial. Throws std::invalid_argument naming the first offending
/// index pair.
SymTensor from_dense(const DenseTensor& dense, Field field, double tol = 1e-12);

DenseTensor to_dense(const SymTensor& A);

/// Builds the tensor of the homogeneous form sum_alpha c_alpha x^alpha, so
/// that A(x) reproduces the polynomial: a_alpha = c_alpha / multinomial.
SymTensor from_poly(const std::vector<std::pair<MultiIndex, std::complex<double>>>& coeffs,
                    int order, int dim, Field field);

/// Coefficients of A(x) = sum multinomial(m;alpha) a_alpha x^alpha.
std::vector<std::pair<MultiIndex, std::complex<double>>> to_poly(const SymTensor& A);

/// sum_i sign_i lambda_i w_i^{\otimes m} in a-vector form.
SymTensor reconstruct(const NuclearDecomposition& d);

/// Hermitian inner product A . B = sum multinomial * a(A) * conj(a(B)).
std::complex<double> hs_inner(const SymTensor& A, const SymTensor& B);
double hs_norm(const SymTensor& A);

/// sym(a \otimes b \otimes c) as an order-3 symmetric tensor.
SymTensor symmetrize3(const Vec& a, const Vec& b, const Vec& c);

/// A(v) for a (possibly complex) point, i.e. A . conj evaluation of the
/// associated form.
std::complex<double> eval_form(const SymTensor& A, const Vec& re, const Vec& im);

}  // namespace tnn
