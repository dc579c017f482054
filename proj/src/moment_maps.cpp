#include "tnn/moment_maps.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace tnn {

LinearMatrixMap::LinearMatrixMap(int nvars, int order_2k, int size)
    : nvars_(nvars), tms_degree_(order_2k), size_(size) {
  cells_.resize(static_cast<std::size_t>(cell_count()));
}

Mat LinearMatrixMap::eval(const Vec& z) const {
  Mat M = Mat::Zero(size_, size_);
  for (int i = 0; i < size_; ++i)
    for (int j = i; j < size_; ++j) {
      double v = 0.0;
      for (const Term& t : cell(i, j)) v += t.coeff * z[t.var];
      M(i, j) = v;
      M(j, i) = v;
    }
  return M;
}

void LinearMatrixMap::adjoint_add(const Mat& X, double weight, Vec& out) const {
  for (int i = 0; i < size_; ++i)
    for (int j = i; j < size_; ++j) {
      double mult = (i == j) ? 1.0 : 2.0;
      for (const Term& t : cell(i, j))
        out[t.var] += weight * mult * t.coeff * X(i, j);
    }
}

const std::vector<std::pair<std::int32_t, std::vector<LinearMatrixMap::VarEntry>>>&
LinearMatrixMap::by_variable() const {
  if (by_var_.empty() && !cells_.empty()) {
    std::map<std::int32_t, std::vector<VarEntry>> acc;
    for (int i = 0; i < size_; ++i)
      for (int j = i; j < size_; ++j)
        for (const Term& t : cell(i, j))
          acc[t.var].push_back({i, j, t.coeff});
    by_var_.assign(acc.begin(), acc.end());
  }
  return by_var_;
}

LinearMatrixMap moment_matrix(int nvars, int k) {
  return localizing_matrix({{MultiIndex::zero(nvars), 1.0}}, nvars, k);
}

LinearMatrixMap localizing_matrix(const std::vector<std::pair<MultiIndex, double>>& q,
                                  int nvars, int k) {
  int degq = 0;
  for (const auto& [gamma, c] : q) degq = std::max(degq, gamma.degree());
  if (degq > 2 * k)
    throw std::invalid_argument("localizing_matrix: deg(q) exceeds 2k");
  int shift = (degq + 1) / 2;
  Basis rows(nvars, k - shift);
  Basis tms(nvars, 2 * k);
  LinearMatrixMap map(nvars, 2 * k, rows.size());
  for (int i = 0; i < rows.size(); ++i)
    for (int j = i; j < rows.size(); ++j) {
      auto& cell = map.cell(i, j);
      for (const auto& [gamma, c] : q) {
        MultiIndex target = rows[i].plus(rows[j]).plus(gamma);
        cell.push_back({static_cast<std::int32_t>(tms.position(target)), c});
      }
    }
  return map;
}

namespace {

std::vector<std::pair<MultiIndex, double>> sphere_poly(int nvars, int lo, int hi) {
  // 1 - sum_{j in [lo, hi)} x_j^2; with lo=0, hi=nvars this is 1 - |x|^2.
  std::vector<std::pair<MultiIndex, double>> q;
  q.emplace_back(MultiIndex::zero(nvars), 1.0);
  for (int j = lo; j < hi; ++j)
    q.emplace_back(MultiIndex::unit(nvars, j).plus_unit(j), -1.0);
  return q;
}

std::vector<std::pair<MultiIndex, double>> ones_poly(int nvars, int lo, int hi,
                                                     double coeff) {
  std::vector<std::pair<MultiIndex, double>> q;
  for (int j = lo; j < hi; ++j)
    q.emplace_back(MultiIndex::unit(nvars, j), coeff);
  return q;
}

}  // namespace

ConeSpec cone_real_sphere(int nvars, int k) {
  ConeSpec cone;
  cone.nvars = nvars;
  cone.order = k;
  cone.support = SupportSet::Sphere;
  cone.psd.push_back(moment_matrix(nvars, k));
  cone.zero.push_back(localizing_matrix(sphere_poly(nvars, 0, nvars), nvars, k));
  return cone;
}

ConeSpec cone_half_sphere(int nvars, int k) {
  ConeSpec cone = cone_real_sphere(nvars, k);
  cone.support = SupportSet::HalfSphere;
  cone.psd.push_back(localizing_matrix(ones_poly(nvars, 0, nvars, 1.0), nvars, k));
  return cone;
}

ConeSpec cone_complex_sector(int n, int m, int k, SectorVariant variant) {
  int nv = 2 * n;
  ConeSpec cone;
  cone.nvars = nv;
  cone.order = k;
  cone.support = SupportSet::ComplexSector;
  cone.psd.push_back(moment_matrix(nv, k));
  cone.zero.push_back(localizing_matrix(sphere_poly(nv, 0, nv), nv, k));

  double s = std::sin(2.0 * std::numbers::pi / m);
  double c = std::cos(2.0 * std::numbers::pi / m);
  // g1 = 1^T x^im
  cone.psd.push_back(localizing_matrix(ones_poly(nv, n, nv, 1.0), nv, k));
  // g2: Lemma 5.1 form sin*1^T x^re - cos*1^T x^im; Eq. (5.10) swaps re/im.
  std::vector<std::pair<MultiIndex, double>> g2;
  if (variant == SectorVariant::Lemma51) {
    for (auto& t : ones_poly(nv, 0, n, s)) g2.push_back(t);
    for (auto& t : ones_poly(nv, n, nv, -c)) g2.push_back(t);
  } else {
    for (auto& t : ones_poly(nv, n, nv, s)) g2.push_back(t);
    for (auto& t : ones_poly(nv, 0, n, -c)) g2.push_back(t);
  }
  cone.psd.push_back(localizing_matrix(g2, nv, k));
  return cone;
}

ConeSpec cone_product_spheres(const std::vector<int>& dims, int k) {
  int nv = 0;
  for (int d : dims) nv += d;
  ConeSpec cone;
  cone.nvars = nv;
  cone.order = k;
  cone.support = SupportSet::ProductSpheres;
  cone.group_dims = dims;
  cone.psd.push_back(moment_matrix(nv, k));
  int lo = 0;
  for (int d : dims) {
    cone.zero.push_back(localizing_matrix(sphere_poly(nv, lo, lo + d), nv, k));
    lo += d;
  }
  return cone;
}

std::vector<LinearRow> compile_zero_block(const LinearMatrixMap& map) {
  // Cells of a moment-structured map repeat whenever alpha+beta coincides;
  // dedup rows by their canonical (var, coeff) signature.
  std::map<std::vector<std::pair<std::int32_t, double>>, LinearRow> rows;
  for (int i = 0; i < map.size(); ++i)
    for (int j = i; j < map.size(); ++j) {
      std::map<std::int32_t, double> merged;
      for (const auto& t : map.cell(i, j)) merged[t.var] += t.coeff;
      std::vector<std::pair<std::int32_t, double>> key(merged.begin(), merged.end());
      if (key.empty()) continue;
      if (rows.count(key)) continue;
      LinearRow row;
      for (auto& [var, c] : key) row.terms.push_back({var, c});
      rows.emplace(std::move(key), std::move(row));
    }
  std::vector<LinearRow> out;
  out.reserve(rows.size());
  for (auto& [k, row] : rows) out.push_back(std::move(row));
  return out;
}

}  // namespace tnn
