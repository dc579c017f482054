#include "tnn/norms.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "tnn/rng.hpp"

namespace tnn {

const char* report_status_name(ReportStatus s) {
  return s == ReportStatus::Certified ? "certified" : "lower-bound";
}

namespace {

double now_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct ResolvedOptions {
  int k_min, k_max;
  SolveSettings solver;
  ExtractOptions extract;
};

ResolvedOptions resolve(const NormOptions& opts, int m, bool nonsym = false) {
  ResolvedOptions r;
  int m0 = nonsym ? 2 : minimum_order(m);
  r.k_min = opts.k_min > 0 ? opts.k_min : m0;
  r.k_max = opts.k_max > 0 ? opts.k_max : m0 + 3;
  r.solver.feas_tol = opts.feas_tol;
  r.solver.gap_tol = opts.gap_tol;
  r.extract = opts.extract;
  r.extract.seed = opts.seed;
  return r;
}

/// Certification of a solved relaxation in three stages: flat truncation on
/// the optimizer itself, a tie-break resolve toward an extreme point of the
/// optimal face, then the pinned-truncation membership loop. Returns one
/// measure per tms variable on success.
std::optional<std::vector<AtomicMeasure>> certify_relaxation(
    const Relaxation& rel, const ConicSolution& sol, int m,
    const ResolvedOptions& ro, const NormOptions& opts) {
  int nv = rel.tms_nvars;
  int k = rel.order;
  int D = Basis(nv, 2 * k).size();
  SupportSet support = rel.cone.support;
  const std::vector<int>& gd = rel.cone.group_dims;

  auto try_extract_all =
      [&](const Vec& z_all) -> std::optional<std::vector<AtomicMeasure>> {
    std::vector<AtomicMeasure> out;
    for (int offset : rel.tms_offsets) {
      Tms z(nv, 2 * k, z_all.segment(offset, D));
      FlatTruncation ft = flat_truncation(z, k, 1, ro.extract.rank_tol);
      if (!ft.flat) return std::nullopt;
      try {
        out.push_back(
            extract_atoms(z, ft.level, ft.rank, m, support, gd, ro.extract));
      } catch (const std::runtime_error&) {
        return std::nullopt;
      }
    }
    return out;
  };

  if (auto r = try_extract_all(sol.z)) return r;

  // The final mu must sit well below epsilon for the tie-break to localize
  // on the extreme point, hence the tighter gap target.
  Relaxation tb = with_tiebreak_objective(rel, 1e-6, opts.seed);
  SolveSettings tb_settings = ro.solver;
  tb_settings.feas_tol = std::min(ro.solver.feas_tol, 1e-9);
  tb_settings.gap_tol = std::min(ro.solver.gap_tol, 1e-9);
  ConicSolution sol2 = solve(tb.program, tb_settings);
  if (solution_usable(sol2, 1e-4)) {
    if (auto r = try_extract_all(sol2.z)) return r;
  }

  std::vector<AtomicMeasure> out;
  int cert_cap = std::min(k + opts.membership_extra_orders, ro.k_max);
  for (int offset : rel.tms_offsets) {
    Tms z(nv, 2 * k, sol.z.segment(offset, D));
    MembershipResult res = certify_membership(
        z.truncate_zero_and(m), m, support, nv, gd, cert_cap, ro.extract,
        opts.sector_variant, ro.solver);
    if (res.member != Membership::Yes) return std::nullopt;
    out.push_back(*res.measure);
  }
  return out;
}

NuclearDecomposition measure_to_decomposition(const AtomicMeasure& mu, int m,
                                              int n, Field field, double scale,
                                              int sign) {
  NuclearDecomposition d;
  d.field = field;
  d.order = m;
  d.dim = n;
  for (std::size_t i = 0; i < mu.atoms.size(); ++i) {
    DecompositionTerm t;
    t.lambda = mu.weights[i] * scale;
    t.sign = sign;
    if (field == Field::Complex) {
      t.atom_re = mu.atoms[i].head(n);
      t.atom_im = mu.atoms[i].tail(n);
    } else {
      t.atom_re = mu.atoms[i];
      t.atom_im = Vec::Zero(n);
    }
    d.terms.push_back(std::move(t));
  }
  return d;
}

void attach_dual(NormReport& report, const ConicSolution& sol,
                 const DualFormSpec& spec, double scale, const NormOptions& opts) {
  DualForm form = dual_certificate(sol, spec);
  form.attained *= scale;
  report.dual_sphere_max =
      dual_form_sphere_max(form, opts.seed, opts.sphere_samples);
  report.dual = std::move(form);
}

}  // namespace

std::pair<double, double> verify(const SymTensor& A, const NuclearDecomposition& d) {
  SymTensor R = reconstruct(d);
  double residual = hs_norm(A - R) / std::max(1.0, hs_norm(A));
  return {residual, d.mass()};
}

std::pair<double, double> verify_nonsym3(const std::vector<double>& entries,
                                         const std::vector<int>& dims,
                                         const NuclearDecomposition& d) {
  if (dims.size() != 3 || d.segment_dims != dims)
    throw std::invalid_argument("verify_nonsym3: dimension mismatch");
  int n1 = dims[0], n2 = dims[1], n3 = dims[2];
  double err2 = 0.0, norm2 = 0.0;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j)
      for (int l = 0; l < n3; ++l) {
        double rec = 0.0;
        for (const auto& t : d.terms)
          rec += t.sign * t.lambda * t.atom_re[i] * t.atom_re[n1 + j] *
                 t.atom_re[n1 + n2 + l];
        double a = entries[(static_cast<std::size_t>(i) * n2 + j) * n3 + l];
        err2 += (a - rec) * (a - rec);
        norm2 += a * a;
      }
  return {std::sqrt(err2) / std::max(1.0, std::sqrt(norm2)), d.mass()};
}

double dual_form_sphere_max(const DualForm& form, std::uint64_t seed, int samples) {
  Rng rng = Rng::derive(seed, "dual-sphere-samples");
  int nv = form.monomials.empty() ? 0 : form.monomials.front().nvars();
  if (nv == 0) return 0.0;
  int n_total = form.field == Field::Complex ? 2 * form.n : nv;
  double worst = 0.0;
  Vec x(n_total);
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < n_total; ++i) x[i] = rng.normal();
    if (form.nonsym) {
      int lo = 0;
      for (int d : form.segment_dims) {
        double nrm = x.segment(lo, d).norm();
        if (nrm < 1e-12) nrm = 1.0;
        x.segment(lo, d) /= nrm;
        lo += d;
      }
    } else {
      double nrm = x.norm();
      if (nrm < 1e-12) continue;
      x /= nrm;
    }
    if (form.field == Field::Complex) {
      std::complex<double> q = 0.0;
      for (std::size_t i = 0; i < form.monomials.size(); ++i) {
        const MultiIndex& alpha = form.monomials[i];
        std::complex<double> w = 1.0;
        for (int j = 0; j < form.n; ++j) {
          std::complex<double> wj(x[j], x[form.n + j]);
          for (int e = 0; e < alpha[j]; ++e) w *= wj;
        }
        q += std::complex<double>(form.coeff_re[static_cast<Eigen::Index>(i)],
                                  form.coeff_im[static_cast<Eigen::Index>(i)]) *
             w;
      }
      worst = std::max(worst, std::abs(q));
    } else {
      double p = 0.0;
      for (std::size_t i = 0; i < form.monomials.size(); ++i) {
        const MultiIndex& alpha = form.monomials[i];
        double mono = 1.0;
        for (int j = 0; j < nv; ++j)
          for (int e = 0; e < alpha[j]; ++e) mono *= x[j];
        p += form.coeff_re[static_cast<Eigen::Index>(i)] * mono;
      }
      worst = std::max(worst, std::abs(p));
    }
  }
  return worst;
}

namespace {

NormReport run_real(const SymTensor& A, const NormOptions& opts) {
  if (A.field() != Field::Real)
    throw std::invalid_argument("nuclear_norm_real: tensor must be real");
  auto t0 = std::chrono::steady_clock::now();
  int m = A.order(), n = A.dim();
  bool even_route = (m % 2 == 0) || opts.force_even;
  ResolvedOptions ro = resolve(opts, m);

  NormReport report;
  report.field = Field::Real;
  report.kind = even_route ? RelaxationKind::EvenReal : RelaxationKind::OddReal;
  report.order_m = m;
  report.dim_n = n;
  report.seed = opts.seed;

  double hsn = hs_norm(A);
  if (hsn < 1e-14) {
    report.status = ReportStatus::Certified;
    report.order_used = ro.k_min;
    report.value = 0.0;
    report.decomposition = NuclearDecomposition{Field::Real, m, n, {}, {}};
    report.trace.push_back({ro.k_min, 0.0, 0, 0.0});
    report.seconds = now_seconds(t0);
    return report;
  }
  SymTensor Ahat = A.scaled(1.0 / hsn);

  for (int k = ro.k_min; k <= ro.k_max; ++k) {
    Relaxation rel =
        even_route ? build_even_real(Ahat, k) : build_odd_real(Ahat, k);
    ConicSolution sol = solve(rel.program, ro.solver);
    if (!solution_usable(sol, ro.extract.accept_tol)) {
      if (k == ro.k_min)
        throw SolverError(std::string("relaxation solve failed at the first order: ") +
                          status_name(sol.status));
      break;
    }
    double value_k = sol.objective * hsn;
    report.trace.push_back({k, value_k, sol.iterations, sol.seconds});
    report.value = value_k;
    report.order_used = k;

    bool certified = false;
    NuclearDecomposition dec;
    if (auto measures = certify_relaxation(rel, sol, m, ro, opts)) {
      dec = measure_to_decomposition((*measures)[0], m, n, Field::Real, hsn, +1);
      if (even_route) {
        NuclearDecomposition dm =
            measure_to_decomposition((*measures)[1], m, n, Field::Real, hsn, -1);
        for (auto& t : dm.terms) dec.terms.push_back(std::move(t));
      }
      certified = true;
    }

    if (certified) {
      auto [residual, mass] = verify(A, dec);
      bool mass_ok = std::abs(mass - value_k) <= 1e-5 * std::max(1.0, value_k);
      if (residual <= 1e-5 && mass_ok) {
        report.status = ReportStatus::Certified;
        report.decomposition = std::move(dec);
        report.residual = residual;
        attach_dual(report, sol, rel.dual_spec, hsn, opts);
        report.seconds = now_seconds(t0);
        return report;
      }
    }
    if (k == ro.k_max) attach_dual(report, sol, rel.dual_spec, hsn, opts);
  }
  report.status = ReportStatus::LowerBound;
  report.seconds = now_seconds(t0);
  return report;
}

}  // namespace

NormReport nuclear_norm_real(const SymTensor& A, const NormOptions& opts) {
  return run_real(A, opts);
}

NormReport nuclear_norm_complex(const SymTensor& A, const NormOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  int m = A.order(), n = A.dim();
  ResolvedOptions ro = resolve(opts, m);

  NormReport report;
  report.field = Field::Complex;
  report.kind = RelaxationKind::Complex;
  report.order_m = m;
  report.dim_n = n;
  report.seed = opts.seed;

  double hsn = hs_norm(A);
  if (hsn < 1e-14) {
    report.status = ReportStatus::Certified;
    report.order_used = ro.k_min;
    report.decomposition = NuclearDecomposition{Field::Complex, m, n, {}, {}};
    report.trace.push_back({ro.k_min, 0.0, 0, 0.0});
    report.seconds = now_seconds(t0);
    return report;
  }
  SymTensor Ahat = A.scaled(1.0 / hsn);
  if (Ahat.field() == Field::Real) {
    SymTensor widened(m, n, Field::Complex);
    widened.a_re() = Ahat.a_re();
    Ahat = widened;
  }

  for (int k = ro.k_min; k <= ro.k_max; ++k) {
    Relaxation rel = build_complex(Ahat, k, opts.sector_variant);
    ConicSolution sol = solve(rel.program, ro.solver);
    if (!solution_usable(sol, ro.extract.accept_tol)) {
      if (k == ro.k_min)
        throw SolverError(std::string("relaxation solve failed at the first order: ") +
                          status_name(sol.status));
      break;
    }
    double value_k = sol.objective * hsn;
    report.trace.push_back({k, value_k, sol.iterations, sol.seconds});
    report.value = value_k;
    report.order_used = k;

    if (auto measures = certify_relaxation(rel, sol, m, ro, opts)) {
      NuclearDecomposition dec =
          measure_to_decomposition((*measures)[0], m, n, Field::Complex, hsn, +1);
      auto [residual, mass] = verify(A, dec);
      bool mass_ok = std::abs(mass - value_k) <= 1e-5 * std::max(1.0, value_k);
      if (residual <= 1e-5 && mass_ok) {
        report.status = ReportStatus::Certified;
        report.decomposition = std::move(dec);
        report.residual = residual;
        attach_dual(report, sol, rel.dual_spec, hsn, opts);
        report.seconds = now_seconds(t0);
        return report;
      }
    }
    if (k == ro.k_max) attach_dual(report, sol, rel.dual_spec, hsn, opts);
  }
  report.status = ReportStatus::LowerBound;
  report.seconds = now_seconds(t0);
  return report;
}

NormReport nuclear_norm_nonsym3(const std::vector<double>& entries,
                                const std::vector<int>& dims,
                                const NormOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  ResolvedOptions ro = resolve(opts, 3, /*nonsym=*/true);
  int nv = dims.at(0) + dims.at(1) + dims.at(2);

  NormReport report;
  report.field = Field::Real;
  report.kind = RelaxationKind::Nonsym3;
  report.order_m = 3;
  report.dim_n = nv;
  report.seed = opts.seed;

  double norm = 0.0;
  for (double v : entries) norm += v * v;
  norm = std::sqrt(norm);
  if (norm < 1e-14) {
    report.status = ReportStatus::Certified;
    report.order_used = ro.k_min;
    report.decomposition = NuclearDecomposition{Field::Real, 3, nv, {}, dims};
    report.trace.push_back({ro.k_min, 0.0, 0, 0.0});
    report.seconds = now_seconds(t0);
    return report;
  }
  std::vector<double> scaled(entries);
  for (double& v : scaled) v /= norm;

  for (int k = ro.k_min; k <= ro.k_max; ++k) {
    Relaxation rel = build_nonsym3(scaled, dims, k);
    ConicSolution sol = solve(rel.program, ro.solver);
    if (!solution_usable(sol, ro.extract.accept_tol)) {
      if (k == ro.k_min)
        throw SolverError(std::string("relaxation solve failed at the first order: ") +
                          status_name(sol.status));
      break;
    }
    double value_k = sol.objective * norm;
    report.trace.push_back({k, value_k, sol.iterations, sol.seconds});
    report.value = value_k;
    report.order_used = k;

    if (auto measures = certify_relaxation(rel, sol, 3, ro, opts)) {
      const AtomicMeasure& mu = (*measures)[0];
      NuclearDecomposition dec;
      dec.field = Field::Real;
      dec.order = 3;
      dec.dim = nv;
      dec.segment_dims = dims;
      for (std::size_t i = 0; i < mu.atoms.size(); ++i) {
        DecompositionTerm t;
        t.lambda = mu.weights[i] * norm;
        t.sign = +1;
        t.atom_re = mu.atoms[i];
        t.atom_im = Vec::Zero(nv);
        dec.terms.push_back(std::move(t));
      }
      auto [residual, mass] = verify_nonsym3(entries, dims, dec);
      bool mass_ok = std::abs(mass - value_k) <= 1e-5 * std::max(1.0, value_k);
      if (residual <= 1e-5 && mass_ok) {
        report.status = ReportStatus::Certified;
        report.decomposition = std::move(dec);
        report.residual = residual;
        attach_dual(report, sol, rel.dual_spec, norm, opts);
        report.seconds = now_seconds(t0);
        return report;
      }
    }
    if (k == ro.k_max) attach_dual(report, sol, rel.dual_spec, norm, opts);
  }
  report.status = ReportStatus::LowerBound;
  report.seconds = now_seconds(t0);
  return report;
}

SpectralBound spectral_norm_bound(const SymTensor& A, int k, const NormOptions& opts) {
  SpectralBound out;
  int m = A.order();
  if (k < minimum_order(m)) k = minimum_order(m);
  ResolvedOptions ro = resolve(opts, m);

  bool complex_field = A.field() == Field::Complex;
  int nv = complex_field ? 2 * A.dim() : A.dim();
  Basis tms(nv, 2 * k);
  ConeSpec cone = cone_real_sphere(nv, k);

  // Objective coefficients of Re A(x) over the (realified) sphere variables.
  auto objective_for = [&](double flip) {
    Vec f = Vec::Zero(tms.size());
    for (int p = 0; p < A.entry_count(); ++p) {
      const MultiIndex& alpha = A.monomials()[p];
      double mult = multinomial(m, alpha);
      if (!complex_field) {
        f[tms.position(alpha)] += flip * mult * A.a_re()[p];
      } else {
        auto [re_coeff, im_coeff] = realify(alpha);
        auto monos = enumerate_indices(nv, m, IndexShape::Exact);
        int tail = tms.position(monos[0]);
        for (int q = 0; q < re_coeff.size(); ++q) {
          f[tail + q] += flip * mult * (A.a_re()[p] * re_coeff[q] +
                                        A.a_im()[p] * im_coeff[q]);
        }
      }
    }
    return f;
  };

  auto solve_side = [&](double flip, Tms* z_out) {
    ConicProgram prog;
    prog.num_vars = tms.size();
    prog.objective = -objective_for(flip);
    prog.add_equality({{0, 1.0}}, 1.0);
    for (const auto& mp : cone.psd) prog.psd_blocks.push_back(mp);
    for (const auto& mz : cone.zero) prog.zero_blocks.push_back(mz);
    ConicSolution sol = solve(prog, ro.solver);
    if (!solution_usable(sol, ro.extract.accept_tol))
      throw SolverError("spectral_norm_bound: relaxation solve failed");
    if (z_out) *z_out = Tms(nv, 2 * k, sol.z);
    return -sol.objective;
  };

  Tms z_best;
  double up = solve_side(+1.0, &z_best);
  if (m % 2 == 0 && !complex_field) {
    Tms z_neg;
    double up_neg = solve_side(-1.0, &z_neg);
    if (up_neg > up) {
      up = up_neg;
      z_best = z_neg;
    }
  }
  out.upper = up;

  // |A . v^{\otimes m}| at v = (re, -im) equals |A(re + i im)|; the stored
  // maximizer is the conjugate of the evaluation point.
  auto consider = [&](const Vec& re, const Vec& im) {
    double v = std::abs(eval_form(A, re, im));
    if (v > out.lower) {
      out.lower = v;
      out.maximizer_re = re;
      out.maximizer_im = -im;
    }
  };

  FlatTruncation ft = flat_truncation(z_best, k, 1, ro.extract.rank_tol);
  if (ft.flat) {
    try {
      AtomicMeasure mu = extract_atoms(z_best, ft.level, ft.rank, m,
                                       SupportSet::Sphere, {}, ro.extract);
      for (const auto& atom : mu.atoms) {
        if (complex_field)
          consider(atom.head(A.dim()), atom.tail(A.dim()));
        else
          consider(atom, Vec::Zero(A.dim()));
      }
      out.certified = !mu.atoms.empty();
    } catch (const std::runtime_error&) {
    }
  }
  Rng rng = Rng::derive(opts.seed, "spectral-samples");
  Vec x(nv);
  for (int s = 0; s < 10000; ++s) {
    for (int i = 0; i < nv; ++i) x[i] = rng.normal();
    double nrm = x.norm();
    if (nrm < 1e-12) continue;
    x /= nrm;
    if (complex_field)
      consider(x.head(A.dim()), x.tail(A.dim()));
    else
      consider(x, Vec::Zero(A.dim()));
  }
  return out;
}

}  // namespace tnn
