#include "tnn/relax.hpp"

#include <cmath>
#include <map>

#include "tnn/rng.hpp"

namespace tnn {

int minimum_order(int m) { return (m + 1) / 2; }

std::pair<Vec, Vec> realify(const MultiIndex& alpha) {
  int n = alpha.nvars();
  int m = alpha.degree();
  int nv = 2 * n;
  // Gaussian-integer coefficients keyed by the 2n-variable exponent vector.
  std::map<std::vector<std::int32_t>, std::pair<long long, long long>> poly;
  poly[std::vector<std::int32_t>(nv, 0)] = {1, 0};
  for (int j = 0; j < n; ++j) {
    for (int rep = 0; rep < alpha[j]; ++rep) {
      std::map<std::vector<std::int32_t>, std::pair<long long, long long>> next;
      for (const auto& [e, c] : poly) {
        auto er = e;
        ++er[j];
        auto& tr = next[er];
        tr.first += c.first;
        tr.second += c.second;
        auto ei = e;
        ++ei[n + j];
        // multiply by i x_{n+j}: (re, im) -> (-im, re)
        auto& ti = next[ei];
        ti.first -= c.second;
        ti.second += c.first;
      }
      poly = std::move(next);
    }
  }
  auto monos = enumerate_indices(nv, m, IndexShape::Exact);
  Basis basis(nv, m);
  int tail = basis.size() - static_cast<int>(monos.size());
  Vec re = Vec::Zero(static_cast<Eigen::Index>(monos.size()));
  Vec im = Vec::Zero(static_cast<Eigen::Index>(monos.size()));
  for (const auto& [e, c] : poly) {
    int p = basis.position(MultiIndex(e)) - tail;
    re[p] = static_cast<double>(c.first);
    im[p] = static_cast<double>(c.second);
  }
  return {re, im};
}

namespace {

/// Shifts a cone's maps and rows so they address the tms at `offset` inside
/// the stacked variable vector.
LinearMatrixMap shift_map(const LinearMatrixMap& map, int offset) {
  LinearMatrixMap out = map;
  for (int i = 0; i < out.size(); ++i)
    for (int j = i; j <= out.size() - 1; ++j)
      for (auto& t : out.cell(i, j)) t.var += offset;
  return out;
}

void attach_cone(Relaxation& rel, const ConeSpec& cone, int offset) {
  for (const auto& m : cone.psd) rel.program.psd_blocks.push_back(shift_map(m, offset));
  for (const auto& m : cone.zero) rel.program.zero_blocks.push_back(shift_map(m, offset));
}

}  // namespace

Relaxation build_odd_real(const SymTensor& A, int k) {
  if (A.field() != Field::Real)
    throw std::invalid_argument("build_odd_real: tensor must be real");
  if (A.order() % 2 == 0)
    throw std::invalid_argument(
        "build_odd_real: even order; use the even-real relaxation");
  if (k < minimum_order(A.order()))
    throw std::invalid_argument("build_odd_real: k below ceil(m/2)");

  int n = A.dim(), m = A.order();
  Basis tms(n, 2 * k);
  Relaxation rel;
  rel.kind = RelaxationKind::OddReal;
  rel.order = k;
  rel.tms_offsets = {0};
  rel.tms_nvars = n;
  rel.cone = cone_real_sphere(n, k);
  rel.program.num_vars = tms.size();
  rel.program.objective = Vec::Zero(tms.size());
  rel.program.objective[0] = 1.0;

  rel.dual_spec.field = Field::Real;
  rel.dual_spec.n = n;
  rel.dual_spec.m = m;
  rel.dual_spec.monomials = A.monomials();
  for (int p = 0; p < A.entry_count(); ++p) {
    int var = tms.position(A.monomials()[p]);
    rel.dual_spec.re_rows.push_back(static_cast<int>(rel.program.equalities.size()));
    rel.program.add_equality({{static_cast<std::int32_t>(var), 1.0}}, A.a_re()[p]);
  }
  attach_cone(rel, rel.cone, 0);
  return rel;
}

Relaxation build_even_real(const SymTensor& A, int k) {
  if (A.field() != Field::Real)
    throw std::invalid_argument("build_even_real: tensor must be real");
  if (k < minimum_order(A.order()))
    throw std::invalid_argument("build_even_real: k below ceil(m/2)");

  int n = A.dim(), m = A.order();
  Basis tms(n, 2 * k);
  int D = tms.size();
  Relaxation rel;
  rel.kind = RelaxationKind::EvenReal;
  rel.order = k;
  rel.tms_offsets = {0, D};
  rel.tms_nvars = n;
  rel.cone = cone_half_sphere(n, k);
  rel.program.num_vars = 2 * D;
  rel.program.objective = Vec::Zero(2 * D);
  rel.program.objective[0] = 1.0;
  rel.program.objective[D] = 1.0;

  rel.dual_spec.field = Field::Real;
  rel.dual_spec.n = n;
  rel.dual_spec.m = m;
  rel.dual_spec.monomials = A.monomials();
  for (int p = 0; p < A.entry_count(); ++p) {
    auto var = static_cast<std::int32_t>(tms.position(A.monomials()[p]));
    rel.dual_spec.re_rows.push_back(static_cast<int>(rel.program.equalities.size()));
    rel.program.add_equality(
        {{var, 1.0}, {static_cast<std::int32_t>(var + D), -1.0}}, A.a_re()[p]);
  }
  attach_cone(rel, rel.cone, 0);
  attach_cone(rel, rel.cone, D);
  return rel;
}

Relaxation build_complex(const SymTensor& A, int k, SectorVariant variant) {
  if (k < minimum_order(A.order()))
    throw std::invalid_argument("build_complex: k below ceil(m/2)");
  int n = A.dim(), m = A.order();
  int nv = 2 * n;
  Basis tms(nv, 2 * k);
  Relaxation rel;
  rel.kind = RelaxationKind::Complex;
  rel.order = k;
  rel.tms_offsets = {0};
  rel.tms_nvars = nv;
  rel.cone = cone_complex_sector(n, m, k, variant);
  rel.program.num_vars = tms.size();
  rel.program.objective = Vec::Zero(tms.size());
  rel.program.objective[0] = 1.0;

  rel.dual_spec.field = Field::Complex;
  rel.dual_spec.n = n;
  rel.dual_spec.m = m;
  rel.dual_spec.monomials = A.monomials();

  auto monos_2n = enumerate_indices(nv, m, IndexShape::Exact);
  int tail = tms.position(monos_2n[0]);
  for (int p = 0; p < A.entry_count(); ++p) {
    auto [re_coeff, im_coeff] = realify(A.monomials()[p]);
    std::vector<LinearMatrixMap::Term> re_terms, im_terms;
    for (int q = 0; q < re_coeff.size(); ++q) {
      auto var = static_cast<std::int32_t>(tail + q);
      if (re_coeff[q] != 0.0) re_terms.push_back({var, re_coeff[q]});
      if (im_coeff[q] != 0.0) im_terms.push_back({var, im_coeff[q]});
    }
    rel.dual_spec.re_rows.push_back(static_cast<int>(rel.program.equalities.size()));
    rel.program.add_equality(std::move(re_terms), A.a_re()[p]);
    rel.dual_spec.im_rows.push_back(static_cast<int>(rel.program.equalities.size()));
    rel.program.add_equality(std::move(im_terms), A.a_im()[p]);
  }
  attach_cone(rel, rel.cone, 0);
  return rel;
}

Relaxation build_nonsym3(const std::vector<double>& entries,
                         const std::vector<int>& dims, int k) {
  if (dims.size() != 3)
    throw std::invalid_argument("build_nonsym3: expected three dimensions");
  if (k < 2) throw std::invalid_argument("build_nonsym3: k must be >= 2");
  if (entries.size() != static_cast<std::size_t>(dims[0]) * dims[1] * dims[2])
    throw std::invalid_argument("build_nonsym3: entry count does not match dims");
  int nv = dims[0] + dims[1] + dims[2];
  Basis tms(nv, 2 * k);
  Relaxation rel;
  rel.kind = RelaxationKind::Nonsym3;
  rel.order = k;
  rel.tms_offsets = {0};
  rel.tms_nvars = nv;
  rel.cone = cone_product_spheres(dims, k);
  rel.program.num_vars = tms.size();
  rel.program.objective = Vec::Zero(tms.size());
  rel.program.objective[0] = 1.0;

  rel.dual_spec.field = Field::Real;
  rel.dual_spec.n = nv;
  rel.dual_spec.m = 3;
  rel.dual_spec.nonsym = true;
  rel.dual_spec.segment_dims = dims;
  for (int i = 0; i < dims[0]; ++i)
    for (int j = 0; j < dims[1]; ++j)
      for (int l = 0; l < dims[2]; ++l) {
        MultiIndex mono = MultiIndex::unit(nv, i)
                              .plus(MultiIndex::unit(nv, dims[0] + j))
                              .plus(MultiIndex::unit(nv, dims[0] + dims[1] + l));
        rel.dual_spec.monomials.push_back(mono);
        rel.dual_spec.re_rows.push_back(
            static_cast<int>(rel.program.equalities.size()));
        double value = entries[(static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + l];
        rel.program.add_equality(
            {{static_cast<std::int32_t>(tms.position(mono)), 1.0}}, value);
      }
  attach_cone(rel, rel.cone, 0);
  return rel;
}

Relaxation with_tiebreak_objective(const Relaxation& rel, double epsilon,
                                   std::uint64_t seed) {
  Relaxation out = rel;
  int nv = rel.tms_nvars;
  int k = rel.order;
  Basis tms(nv, 2 * k);
  int d = k - 1;
  Basis half(nv, d);
  Rng rng = Rng::derive(seed, "tiebreak-objective", static_cast<std::uint64_t>(k));
  Mat G(half.size(), half.size());
  for (int i = 0; i < half.size(); ++i)
    for (int j = 0; j < half.size(); ++j) G(i, j) = rng.normal();
  Mat J = G * G.transpose() / half.size() +
          0.5 * Mat::Identity(half.size(), half.size());
  Vec r = Vec::Zero(tms.size());
  for (int i = 0; i < half.size(); ++i)
    for (int j = 0; j < half.size(); ++j)
      r[tms.position(half[i].plus(half[j]))] += J(i, j);
  // L1 normalization keeps <R, z> on the order of the mass, so the mass
  // excess of the tie-broken optimizer stays below epsilon * O(value).
  r /= r.cwiseAbs().sum();
  for (int offset : rel.tms_offsets)
    out.program.objective.segment(offset, tms.size()) += epsilon * r;
  return out;
}

}  // namespace tnn
