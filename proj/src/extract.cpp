#include "tnn/extract.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "tnn/relax.hpp"
#include "tnn/rng.hpp"

namespace tnn {

namespace {

double eval_monomial(const Vec& v, const MultiIndex& alpha) {
  double x = 1.0;
  for (int j = 0; j < alpha.nvars(); ++j)
    for (int e = 0; e < alpha[j]; ++e) x *= v[j];
  return x;
}

int numeric_rank(const Mat& M, double rank_tol) {
  if (M.rows() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
  double top = es.eigenvalues().cwiseAbs().maxCoeff();
  if (top <= 0.0) return 0;
  int r = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()[i]) > rank_tol * top) ++r;
  return r;
}

}  // namespace

bool solution_usable(const ConicSolution& sol, double accept_tol) {
  if (sol.status == SolveStatus::Optimal) return true;
  return sol.status == SolveStatus::NumericalLimit &&
         sol.feas_residual <= accept_tol && sol.gap <= accept_tol;
}

Tms AtomicMeasure::moments(int maxdeg) const {
  int nv = atoms.empty() ? 0 : static_cast<int>(atoms.front().size());
  if (atoms.empty())
    throw std::invalid_argument("AtomicMeasure::moments: empty measure has no dimension");
  Tms z(nv, maxdeg);
  for (int i = 0; i < z.size(); ++i) {
    double s = 0.0;
    for (std::size_t a = 0; a < atoms.size(); ++a)
      s += weights[a] * eval_monomial(atoms[a], z.basis()[i]);
    z.values()[i] = s;
  }
  return z;
}

Vec AtomicMeasure::moments_zero_and(int m) const {
  if (atoms.empty()) return Vec();
  int nv = static_cast<int>(atoms.front().size());
  auto idx = enumerate_indices(nv, m, IndexShape::ZeroAndExact);
  Vec out = Vec::Zero(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t a = 0; a < atoms.size(); ++a)
      out[static_cast<Eigen::Index>(i)] +=
          weights[a] * eval_monomial(atoms[a], idx[i]);
  return out;
}

FlatTruncation flat_truncation(const Tms& z, int k, int d0, double rank_tol) {
  FlatTruncation out;
  if (2 * k > z.maxdeg())
    throw std::invalid_argument("flat_truncation: k exceeds the tms degree");
  int prev_rank = -1, prev_t = -1;
  for (int t = 0; t <= k; ++t) {
    Mat Mt = moment_matrix(z.nvars(), t).eval(z.values());
    int r = numeric_rank(Mt, rank_tol);
    if (t - d0 == prev_t && r == prev_rank) {
      out.flat = true;
      out.rank = r;
      out.level = t;
      return out;
    }
    if (d0 == 1) {
      prev_rank = r;
      prev_t = t;
    } else if (t - d0 >= 0) {
      // general d0: recompute the lagged rank directly
      Mat Ml = moment_matrix(z.nvars(), t - d0).eval(z.values());
      if (numeric_rank(Ml, rank_tol) == r) {
        out.flat = true;
        out.rank = r;
        out.level = t;
        return out;
      }
    }
  }
  return out;
}

Vec nnls(const Mat& A, const Vec& b, int max_iter) {
  const int n = static_cast<int>(A.cols());
  if (max_iter <= 0) max_iter = 3 * n + 30;
  Vec x = Vec::Zero(n);
  std::vector<bool> passive(n, false);
  Vec w = A.transpose() * b;
  double tol = 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff()) *
               std::max(1.0, A.cwiseAbs().maxCoeff());

  auto solve_passive = [&](const std::vector<bool>& mask) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (mask[i]) idx.push_back(i);
    Vec xp = Vec::Zero(n);
    if (idx.empty()) return xp;
    Mat Ap(A.rows(), idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c) Ap.col(c) = A.col(idx[c]);
    Vec sol = Ap.colPivHouseholderQr().solve(b);
    for (std::size_t c = 0; c < idx.size(); ++c) xp[idx[c]] = sol[c];
    return xp;
  };

  for (int iter = 0; iter < max_iter; ++iter) {
    w = A.transpose() * (b - A * x);
    int best = -1;
    double best_w = tol;
    for (int i = 0; i < n; ++i)
      if (!passive[i] && w[i] > best_w) {
        best_w = w[i];
        best = i;
      }
    if (best < 0) break;
    passive[best] = true;
    Vec xp = solve_passive(passive);
    while (true) {
      double min_p = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i)
        if (passive[i]) min_p = std::min(min_p, xp[i]);
      if (min_p > 0.0) break;
      double alpha = 1.0;
      for (int i = 0; i < n; ++i)
        if (passive[i] && xp[i] <= 0.0)
          alpha = std::min(alpha, x[i] / (x[i] - xp[i]));
      x += alpha * (xp - x);
      for (int i = 0; i < n; ++i)
        if (passive[i] && x[i] <= 1e-14) passive[i] = false;
      xp = solve_passive(passive);
    }
    x = xp;
  }
  return x.cwiseMax(0.0);
}

namespace {

/// Phase rotation of a realified complex atom into the Lemma 5.1 sector:
/// choose tau with tau^m = 1 so that arg(1^T tau w) lands in [0, 2pi/m).
void rotate_into_sector(Vec& v, int m) {
  int n = static_cast<int>(v.size()) / 2;
  std::complex<double> s = 0.0;
  for (int j = 0; j < n; ++j) s += std::complex<double>(v[j], v[n + j]);
  if (std::abs(s) <= 1e-9) return;
  double theta = std::arg(s);
  if (theta < 0) theta += 2.0 * std::numbers::pi;
  int kk = static_cast<int>(std::floor(theta / (2.0 * std::numbers::pi / m)));
  if (kk == 0) return;
  std::complex<double> tau =
      std::polar(1.0, -2.0 * std::numbers::pi * kk / m);
  for (int j = 0; j < n; ++j) {
    std::complex<double> wj(v[j], v[n + j]);
    wj *= tau;
    v[j] = wj.real();
    v[n + j] = wj.imag();
  }
}

/// Projects an extracted atom onto the support set. Returns false when the
/// atom cannot be repaired (caller treats it as an extraction failure).
bool project_atom(Vec& v, int m, SupportSet support,
                  const std::vector<int>& group_dims, double support_tol) {
  switch (support) {
    case SupportSet::Sphere:
    case SupportSet::HalfSphere:
    case SupportSet::ComplexSector: {
      double nrm = v.norm();
      if (nrm < 1e-8) return false;
      v /= nrm;
      if (support == SupportSet::HalfSphere && v.sum() < 0.0) {
        if (m % 2 == 0)
          v = -v;
        else if (v.sum() < -support_tol)
          return false;
      }
      if (support == SupportSet::ComplexSector) {
        rotate_into_sector(v, m);
        int n = static_cast<int>(v.size()) / 2;
        double g1 = v.tail(n).sum();
        double g2 = std::sin(2.0 * std::numbers::pi / m) * v.head(n).sum() -
                    std::cos(2.0 * std::numbers::pi / m) * v.tail(n).sum();
        if (g1 < -support_tol || g2 < -support_tol) return false;
      }
      return true;
    }
    case SupportSet::ProductSpheres: {
      int lo = 0;
      for (int d : group_dims) {
        double nrm = v.segment(lo, d).norm();
        if (nrm < 1e-8) return false;
        v.segment(lo, d) /= nrm;
        lo += d;
      }
      return true;
    }
  }
  return false;
}

}  // namespace

AtomicMeasure extract_atoms(const Tms& z, int level, int rank, int m,
                            SupportSet support, const std::vector<int>& group_dims,
                            const ExtractOptions& opt) {
  AtomicMeasure out;
  out.support = support;
  out.group_dims = group_dims;
  if (rank == 0) return out;

  int nv = z.nvars();
  Mat Mt = moment_matrix(nv, level).eval(z.values());
  Eigen::SelfAdjointEigenSolver<Mat> es(Mt);
  int D = static_cast<int>(Mt.rows());
  Mat V(D, rank);
  for (int i = 0; i < rank; ++i) {
    double lam = std::max(es.eigenvalues()[D - 1 - i], 1e-300);
    V.col(i) = es.eigenvectors().col(D - 1 - i) * std::sqrt(lam);
  }

  int D_low = static_cast<int>(binomial(nv + level - 1, level - 1));
  Basis rows(nv, level);
  Mat V0 = V.topRows(D_low);
  Eigen::ColPivHouseholderQR<Mat> qr(V0);

  // Multiplication operators N_j from the degree shift beta -> x_j beta.
  std::vector<Mat> mult_ops(nv);
  for (int j = 0; j < nv; ++j) {
    Mat Vj(D_low, rank);
    for (int r = 0; r < D_low; ++r)
      Vj.row(r) = V.row(rows.position(rows[r].plus_unit(j)));
    mult_ops[j] = qr.solve(Vj);
  }

  Rng rng = Rng::derive(opt.seed, "extract-combination");
  Vec comb(nv);
  for (int j = 0; j < nv; ++j) comb[j] = 0.1 + rng.uniform();
  comb /= comb.sum();
  Mat N = Mat::Zero(rank, rank);
  for (int j = 0; j < nv; ++j) N += comb[j] * mult_ops[j];

  Eigen::RealSchur<Mat> schur(N);
  const Mat& Q = schur.matrixU();

  for (int i = 0; i < rank; ++i) {
    Vec v(nv);
    for (int j = 0; j < nv; ++j) v[j] = Q.col(i).dot(mult_ops[j] * Q.col(i));
    if (!project_atom(v, m, support, group_dims, opt.support_tol))
      throw std::runtime_error("extract_atoms: atom off the support set");
    out.atoms.push_back(v);
  }

  // Weight fit against z|_{0,m}.
  Vec target = z.truncate_zero_and(m);
  auto idx = enumerate_indices(nv, m, IndexShape::ZeroAndExact);
  Mat B(static_cast<Eigen::Index>(idx.size()), rank);
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (int i = 0; i < rank; ++i)
      B(static_cast<Eigen::Index>(r), i) = eval_monomial(out.atoms[i], idx[r]);
  Vec lambda = nnls(B, target);
  double res = (B * lambda - target).norm();
  if (res > opt.extract_tol * std::max(1.0, target.norm()))
    throw std::runtime_error("extract_atoms: least-squares residual " +
                             std::to_string(res) + " exceeds tolerance");

  AtomicMeasure trimmed;
  trimmed.support = support;
  trimmed.group_dims = group_dims;
  for (int i = 0; i < rank; ++i)
    if (lambda[i] > opt.weight_tol) {
      trimmed.atoms.push_back(out.atoms[i]);
      trimmed.weights.push_back(lambda[i]);
    }
  return trimmed;
}

namespace {

/// min <R, z> s.t. pinned entries of z match y and z in the support cone.
ConicProgram membership_program(const Vec& y, int m, SupportSet support, int nvars,
                                const std::vector<int>& group_dims, int k,
                                SectorVariant variant, std::uint64_t seed) {
  ConeSpec cone;
  switch (support) {
    case SupportSet::Sphere: cone = cone_real_sphere(nvars, k); break;
    case SupportSet::HalfSphere: cone = cone_half_sphere(nvars, k); break;
    case SupportSet::ComplexSector:
      cone = cone_complex_sector(nvars / 2, m, k, variant);
      break;
    case SupportSet::ProductSpheres:
      cone = cone_product_spheres(group_dims, k);
      break;
  }
  Basis tms(nvars, 2 * k);
  ConicProgram prog;
  prog.num_vars = tms.size();

  // Generic strictly positive objective R(x) = [x]_d^T J [x]_d with a seeded
  // random positive definite J, d = k - 1.
  int d = k - 1;
  Basis half(nvars, d);
  Rng rng = Rng::derive(seed, "membership-objective", static_cast<std::uint64_t>(k));
  Mat G(half.size(), half.size());
  for (int i = 0; i < half.size(); ++i)
    for (int j = 0; j < half.size(); ++j) G(i, j) = rng.normal();
  Mat J = G * G.transpose() / half.size() +
          0.5 * Mat::Identity(half.size(), half.size());
  prog.objective = Vec::Zero(tms.size());
  for (int i = 0; i < half.size(); ++i)
    for (int j = 0; j < half.size(); ++j)
      prog.objective[tms.position(half[i].plus(half[j]))] += J(i, j);

  // Pins.
  prog.add_equality({{0, 1.0}}, y[0]);
  auto exact = enumerate_indices(nvars, m, IndexShape::Exact);
  if (support == SupportSet::ProductSpheres) {
    int n1 = group_dims[0], n2 = group_dims[1], n3 = group_dims[2];
    Basis mono(nvars, m);
    int tail = mono.size() - static_cast<int>(exact.size());
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n2; ++j)
        for (int l = 0; l < n3; ++l) {
          MultiIndex mixed = MultiIndex::unit(nvars, i)
                                 .plus(MultiIndex::unit(nvars, n1 + j))
                                 .plus(MultiIndex::unit(nvars, n1 + n2 + l));
          int yi = 1 + mono.position(mixed) - tail;
          prog.add_equality({{static_cast<std::int32_t>(tms.position(mixed)), 1.0}},
                            y[yi]);
        }
  } else {
    for (std::size_t i = 0; i < exact.size(); ++i)
      prog.add_equality(
          {{static_cast<std::int32_t>(tms.position(exact[i])), 1.0}},
          y[static_cast<Eigen::Index>(i) + 1]);
  }
  for (const auto& mapz : cone.zero) prog.zero_blocks.push_back(mapz);
  for (const auto& mapp : cone.psd) prog.psd_blocks.push_back(mapp);
  return prog;
}

}  // namespace

MembershipResult certify_membership(const Vec& y, int m, SupportSet support,
                                    int nvars, const std::vector<int>& group_dims,
                                    int k_max, const ExtractOptions& opt,
                                    SectorVariant variant,
                                    const SolveSettings& solver) {
  MembershipResult out;
  double mass = y[0];
  double rest = y.size() > 1 ? y.tail(y.size() - 1).cwiseAbs().maxCoeff() : 0.0;
  if (mass < -1e-9) {
    out.member = Membership::No;
    return out;
  }
  if (mass <= 1e-10 && rest <= 1e-9) {
    out.member = Membership::Yes;
    out.measure = AtomicMeasure{support, group_dims, {}, {}};
    out.order_used = minimum_order(m);
    return out;
  }
  if (mass <= 1e-12 * std::max(1.0, rest) && rest > 1e-9) {
    // Zero total mass forces every moment to vanish.
    out.member = Membership::No;
    return out;
  }

  int k0 = std::max(minimum_order(m),
                    support == SupportSet::ProductSpheres ? 2 : 0);
  for (int k = k0; k <= std::max(k0, k_max); ++k) {
    ConicProgram prog =
        membership_program(y, m, support, nvars, group_dims, k, variant, opt.seed);
    ConicSolution sol = solve(prog, solver);
    out.order_used = k;
    if (sol.status == SolveStatus::Infeasible) {
      out.member = Membership::No;
      return out;
    }
    if (!solution_usable(sol, opt.accept_tol)) continue;
    Tms z(nvars, 2 * k, sol.z);
    FlatTruncation ft = flat_truncation(z, k, 1, opt.rank_tol);
    if (!ft.flat) continue;
    try {
      AtomicMeasure mu =
          extract_atoms(z, ft.level, ft.rank, m, support, group_dims, opt);
      // Validate the pinned entries against y itself.
      Vec rep = mu.atoms.empty() ? Vec::Zero(y.size()) : mu.moments_zero_and(m);
      double err = (rep - y).cwiseAbs().maxCoeff();
      if (support == SupportSet::ProductSpheres) {
        // Only mass and mixed entries are pinned.
        err = std::abs(rep[0] - y[0]);
        auto exact = enumerate_indices(nvars, m, IndexShape::Exact);
        for (std::size_t i = 0; i < exact.size(); ++i) {
          const MultiIndex& a = exact[i];
          bool mixed = true;
          int lo = 0;
          for (int g = 0; g < 3; ++g) {
            int deg = 0;
            for (int v = lo; v < lo + group_dims[g]; ++v) deg += a[v];
            if (deg != 1) mixed = false;
            lo += group_dims[g];
          }
          if (mixed)
            err = std::max(err, std::abs(rep[static_cast<Eigen::Index>(i) + 1] -
                                         y[static_cast<Eigen::Index>(i) + 1]));
        }
      }
      if (err <= opt.extract_tol * std::max(1.0, y.cwiseAbs().maxCoeff()) * 10.0)
        {
          out.member = Membership::Yes;
          out.measure = std::move(mu);
          return out;
        }
    } catch (const std::runtime_error&) {
      // extraction failure at this order; move on
    }
  }
  out.member = Membership::Inconclusive;
  return out;
}

}  // namespace tnn
