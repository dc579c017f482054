#pragma once

#include <vector>

#include "tnn/multi_index.hpp"

namespace tnn {

/// Symmetric matrix-valued linear map on a tms vector: the (i, j) cell reads
/// sum_t coeff_t * z[var_t]. Rows are indexed by Basis(nvars, row_deg); the
/// referenced tms is over Basis(nvars, 2k). Only the upper triangle (i <= j)
/// is stored.
class LinearMatrixMap {
 public:
  struct Term {
    std::int32_t var;  // position in the tms basis
    double coeff;
  };

  LinearMatrixMap() = default;
  LinearMatrixMap(int nvars, int order_2k, int size);

  int nvars() const { return nvars_; }
  int tms_degree() const { return tms_degree_; }
  int size() const { return size_; }

  const std::vector<Term>& cell(int i, int j) const {
    return cells_[cell_index(i, j)];
  }
  std::vector<Term>& cell(int i, int j) { return cells_[cell_index(i, j)]; }

  /// Evaluate at a tms value vector (length binom(nvars+2k, 2k)).
  Mat eval(const Vec& z) const;

  /// out += weight * (d/dz)^T applied to the symmetric matrix X, i.e. the
  /// adjoint map: out[var] += coeff * X(i,j) * (i==j ? 1 : 2).
  void adjoint_add(const Mat& X, double weight, Vec& out) const;

  /// Nonzeros grouped by tms variable: for each var, the list of
  /// (i, j, coeff) with i <= j. Built lazily, used by the solver.
  struct VarEntry {
    std::int32_t row, col;
    double coeff;
  };
  const std::vector<std::pair<std::int32_t, std::vector<VarEntry>>>& by_variable() const;

  int cell_count() const { return size_ * (size_ + 1) / 2; }

 private:
  int cell_index(int i, int j) const {
    if (i > j) std::swap(i, j);
    return i * size_ - i * (i - 1) / 2 + (j - i);
  }

  int nvars_ = 0;
  int tms_degree_ = 0;
  int size_ = 0;
  std::vector<std::vector<Term>> cells_;
  mutable std::vector<std::pair<std::int32_t, std::vector<VarEntry>>> by_var_;
};

/// M_k(z): cell (alpha, beta) = z_{alpha+beta}.
LinearMatrixMap moment_matrix(int nvars, int k);

/// L_q^{(k)}(z) for q given as coefficients over Basis(nvars, deg q):
/// cell (alpha, beta) = sum_gamma q_gamma z_{alpha+beta+gamma}, with row
/// basis degree k - ceil(deg(q)/2).
LinearMatrixMap localizing_matrix(const std::vector<std::pair<MultiIndex, double>>& q,
                                  int nvars, int k);

enum class SupportSet { Sphere, HalfSphere, ComplexSector, ProductSpheres };

enum class SectorVariant { Lemma51, Eq510 };

/// Membership description of a moment cone: psd blocks plus zero blocks
/// (the latter get compiled to scalar equalities by the conic layer).
struct ConeSpec {
  int nvars = 0;
  int order = 0;  // relaxation order k
  SupportSet support = SupportSet::Sphere;
  std::vector<int> group_dims;  // ProductSpheres only
  std::vector<LinearMatrixMap> psd;
  std::vector<LinearMatrixMap> zero;
};

/// S^{2k}: M_k >= 0, L_{1-|x|^2} = 0.
ConeSpec cone_real_sphere(int nvars, int k);

/// S^{+,2k}: adds L_{1^T x} >= 0.
ConeSpec cone_half_sphere(int nvars, int k);

/// S^{c,2k} on 2n realified variables, with the sector cuts of Lemma 5.1
/// (or the swapped (5.10) form when variant == Eq510).
ConeSpec cone_complex_sector(int n, int m, int k,
                             SectorVariant variant = SectorVariant::Lemma51);

/// Product of unit spheres for the nonsymmetric order-3 cone.
ConeSpec cone_product_spheres(const std::vector<int>& dims, int k);

/// Scalar equality rows sum coeff * z[var] = 0 obtained from a zero block,
/// deduplicated by canonical cell value.
struct LinearRow {
  std::vector<LinearMatrixMap::Term> terms;
  double rhs = 0.0;
};
std::vector<LinearRow> compile_zero_block(const LinearMatrixMap& map);

}  // namespace tnn
