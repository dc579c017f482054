#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SVD>

#include "tnn/conic.hpp"

namespace tnn {

void ConicProgram::add_equality(std::vector<LinearMatrixMap::Term> terms, double rhs) {
  equalities.push_back({std::move(terms), rhs});
}

void ConicProgram::dump(std::ostream& os) const {
  os << "# tnn conic program dump 1\n";
  os << "# vars " << num_vars << " eq " << equalities.size() << " psd "
     << psd_blocks.size() << " zero " << zero_blocks.size() << "\n";
  for (int l = 0; l < objective.size(); ++l)
    if (objective[l] != 0.0) os << "obj " << l << " " << objective[l] << "\n";
  for (std::size_t r = 0; r < equalities.size(); ++r) {
    for (const auto& t : equalities[r].terms)
      os << "eq " << r << " " << t.var << " " << t.coeff << "\n";
    os << "rhs " << r << " " << equalities[r].rhs << "\n";
  }
  auto dump_maps = [&os](const std::vector<LinearMatrixMap>& maps, const char* tag) {
    for (std::size_t b = 0; b < maps.size(); ++b)
      for (int i = 0; i < maps[b].size(); ++i)
        for (int j = i; j < maps[b].size(); ++j)
          for (const auto& t : maps[b].cell(i, j))
            os << tag << " " << b << " " << i << " " << j << " " << t.var << " "
               << t.coeff << "\n";
  };
  dump_maps(psd_blocks, "psd");
  dump_maps(zero_blocks, "zero");
}

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::NumericalLimit: return "numerical-limit";
  }
  return "?";
}

namespace {

struct Row {
  std::vector<LinearMatrixMap::Term> terms;
  double rhs;
};

double row_dot(const Row& row, const Vec& z) {
  double s = 0.0;
  for (const auto& t : row.terms) s += t.coeff * z[t.var];
  return s;
}

/// Largest step alpha <= cap with V + alpha * dV still psd.
double max_step(const Mat& V, const Mat& dV, double cap) {
  Eigen::LLT<Mat> llt(V);
  if (llt.info() != Eigen::Success) return 0.0;
  Mat S = llt.matrixL().solve(dV);
  S = llt.matrixL().solve(S.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (S + S.transpose()),
                                        Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  if (lmin >= -1e-16) return cap;
  return std::min(cap, -1.0 / lmin);
}

/// Infeasible-start primal-dual path-following method with Nesterov-Todd
/// scaling and a Mehrotra predictor-corrector. The Newton system is reduced
/// to a normal system over the tms variables; equalities stay explicit and
/// enter through a dense Schur complement.
class Solver {
 public:
  Solver(const ConicProgram& prog, const SolveSettings& opt)
      : prog_(prog), opt_(opt), N_(prog.num_vars) {
    rows_.reserve(prog.equalities.size());
    for (const auto& e : prog.equalities) rows_.push_back({e.terms, e.rhs});
    num_explicit_ = static_cast<int>(rows_.size());
    for (const auto& zb : prog.zero_blocks)
      for (auto& r : compile_zero_block(zb)) rows_.push_back({r.terms, 0.0});
    p_ = static_cast<int>(rows_.size());
    b_ = Vec::Zero(p_);
    for (int r = 0; r < p_; ++r) b_[r] = rows_[r].rhs;
    c_ = prog.objective;
    nb_ = static_cast<int>(prog.psd_blocks.size());
    dim_total_ = 0;
    for (const auto& blk : prog.psd_blocks) dim_total_ += blk.size();
  }

  ConicSolution run() {
    auto t0 = std::chrono::steady_clock::now();
    ConicSolution sol;
    if (!presolve(sol)) {
      sol.seconds = elapsed(t0);
      return sol;
    }
    init_point();

    double best_metric = std::numeric_limits<double>::infinity();
    Vec best_z = z_, best_y = y_;
    std::vector<Mat> best_X = X_;
    double best_obj = 0, best_dobj = 0, best_feas = 0, best_gap = 0;
    int stall = 0, since_best = 0;

    int it = 0;
    for (; it < opt_.max_iter; ++it) {
      Vec rp = b_ - apply_A(z_);
      Vec rd = c_ - apply_At(y_);
      for (int j = 0; j < nb_; ++j) prog_.psd_blocks[j].adjoint_add(X_[j], -1.0, rd);
      std::vector<Mat> Rg(nb_);
      for (int j = 0; j < nb_; ++j) Rg[j] = prog_.psd_blocks[j].eval(z_) - V_[j];

      double vx = 0.0;
      for (int j = 0; j < nb_; ++j) vx += (V_[j].array() * X_[j].array()).sum();
      double mu = vx / std::max(1, dim_total_);
      double pobj = c_.dot(z_), dobj = b_.dot(y_);
      double pinf = rp.size() ? rp.cwiseAbs().maxCoeff() / (1.0 + bnorm_) : 0.0;
      double ginf = 0.0, vscale = 1.0;
      for (int j = 0; j < nb_; ++j) {
        ginf = std::max(ginf, Rg[j].cwiseAbs().maxCoeff());
        vscale = std::max(vscale, V_[j].cwiseAbs().maxCoeff());
      }
      pinf = std::max(pinf, ginf / (1.0 + vscale));
      double dinf = rd.cwiseAbs().maxCoeff() / (1.0 + cnorm_);
      double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      double mugap = vx / (1.0 + std::abs(pobj) + std::abs(dobj));

      if (opt_.verbose)
        std::printf("it %3d  mu %9.2e  pobj %+.8e  dobj %+.8e  pinf %8.1e  dinf %8.1e\n",
                    it, mu, pobj, dobj, pinf, dinf);

      double metric = std::max({pinf, dinf, gap, mugap});
      if (metric < best_metric) {
        best_metric = metric;
        best_z = z_; best_y = y_; best_X = X_;
        best_obj = pobj; best_dobj = dobj;
        best_feas = std::max(pinf, dinf); best_gap = gap;
        since_best = 0;
      } else if (++since_best >= 12 && best_metric <= 1e-4) {
        // Accuracy floor reached (degenerate instances); return the best
        // iterate rather than grinding out further steps.
        break;
      }

      if (pinf <= opt_.feas_tol && dinf <= opt_.feas_tol &&
          gap <= opt_.gap_tol && mugap <= std::max(opt_.gap_tol, 1e-10)) {
        fill(sol, SolveStatus::Optimal, pobj, dobj, std::max(pinf, dinf), gap, it);
        sol.seconds = elapsed(t0);
        return sol;
      }
      if (detect_infeasible(rd)) {
        fill(sol, SolveStatus::Infeasible, pobj, dobj, std::max(pinf, dinf), gap, it);
        sol.seconds = elapsed(t0);
        return sol;
      }
      if (detect_unbounded(rp, pobj)) {
        fill(sol, SolveStatus::Unbounded, pobj, dobj, std::max(pinf, dinf), gap, it);
        sol.seconds = elapsed(t0);
        return sol;
      }

      if (!compute_scalings()) break;
      if (!build_normal_system()) break;

      // Predictor: affine direction (sigma = 0).
      std::vector<Mat> Rc(nb_);
      for (int j = 0; j < nb_; ++j)
        Rc[j] = Mat((-sigma_[j].array().square()).matrix().asDiagonal());
      Step aff;
      if (!solve_kkt(Rc, rp, rd, Rg, aff)) break;
      double ap_aff = std::min(1.0, 0.99 * step_length(V_, aff.dV));
      double ad_aff = std::min(1.0, 0.99 * step_length(X_, aff.dX));
      double vx_aff = 0.0;
      for (int j = 0; j < nb_; ++j)
        vx_aff += ((V_[j] + ap_aff * aff.dV[j]).array() *
                   (X_[j] + ad_aff * aff.dX[j]).array()).sum();
      double mu_aff = std::max(vx_aff, 0.0) / std::max(1, dim_total_);
      double sigma = std::pow(std::min(1.0, mu_aff / std::max(mu, 1e-300)), 3.0);

      // Corrector with the Mehrotra second-order term in scaled space.
      for (int j = 0; j < nb_; ++j) {
        Mat dVt = Rinv_[j] * aff.dV[j] * Rinv_[j].transpose();
        Mat dXt = R_[j].transpose() * aff.dX[j] * R_[j];
        Mat cross = 0.5 * (dVt * dXt + dXt * dVt);
        Rc[j] = Mat((sigma * mu - sigma_[j].array().square()).matrix().asDiagonal());
        Rc[j] -= cross;
      }
      Step dir;
      if (!solve_kkt(Rc, rp, rd, Rg, dir)) break;

      double tau = mu < 1e-6 ? 0.99 : 0.95;
      double ap = std::min(1.0, tau * step_length(V_, dir.dV));
      double ad = std::min(1.0, tau * step_length(X_, dir.dX));
      if (ap < 1e-8 && ad < 1e-8) {
        if (++stall >= 3) break;
      } else {
        stall = 0;
      }

      z_ += ap * dir.dz;
      if (p_ > 0) y_ += ad * dir.dy;
      for (int j = 0; j < nb_; ++j) {
        V_[j] += ap * dir.dV[j];
        X_[j] += ad * dir.dX[j];
        V_[j] = 0.5 * (V_[j] + V_[j].transpose()).eval();
        X_[j] = 0.5 * (X_[j] + X_[j].transpose()).eval();
      }
      // Dual polish: keep y the least-squares multiplier for the current X,
      // so solve errors in the recovered dX do not accumulate in the dual
      // residual.
      if (p_ > 0 && mu < 1e-4) {
        Vec t = c_;
        for (int j = 0; j < nb_; ++j) prog_.psd_blocks[j].adjoint_add(X_[j], -1.0, t);
        y_ = cod_At_.solve(t);
      }
    }

    z_ = best_z; y_ = best_y; X_ = best_X;
    fill(sol, SolveStatus::NumericalLimit, best_obj, best_dobj, best_feas, best_gap, it);
    if (best_feas <= opt_.feas_tol && best_gap <= opt_.gap_tol)
      sol.status = SolveStatus::Optimal;
    sol.seconds = elapsed(t0);
    return sol;
  }

 private:
  struct Step {
    Vec dz, dy;
    std::vector<Mat> dV, dX;
  };

  static double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  Vec apply_A(const Vec& z) const {
    Vec out = Vec::Zero(p_);
    for (int r = 0; r < p_; ++r) out[r] = row_dot(rows_[r], z);
    return out;
  }

  Vec apply_At(const Vec& y) const {
    Vec out = Vec::Zero(N_);
    for (int r = 0; r < p_; ++r)
      for (const auto& t : rows_[r].terms) out[t.var] += t.coeff * y[r];
    return out;
  }

  /// Consistency check of the linear equalities plus a min-norm starting
  /// point. Returns false (solution filled) when they are contradictory.
  bool presolve(ConicSolution& sol) {
    bnorm_ = p_ ? b_.cwiseAbs().maxCoeff() : 0.0;
    cnorm_ = c_.size() ? c_.cwiseAbs().maxCoeff() : 0.0;
    z0_ = Vec::Zero(N_);
    if (p_ == 0) return true;
    At_ = Mat::Zero(N_, p_);
    for (int r = 0; r < p_; ++r)
      for (const auto& t : rows_[r].terms) At_(t.var, r) += t.coeff;

    cod_At_.setThreshold(1e-12);
    cod_At_.compute(At_);
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(At_.transpose());
    cod.setThreshold(1e-12);
    z0_ = cod.solve(b_);
    if ((apply_A(z0_) - b_).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + bnorm_)) {
      sol.status = SolveStatus::Infeasible;
      sol.z = Vec::Zero(N_);
      sol.eq_duals = Vec::Zero(num_explicit_);
      for (const auto& blk : prog_.psd_blocks)
        sol.psd_duals.push_back(Mat::Zero(blk.size(), blk.size()));
      return false;
    }
    return true;
  }

  void init_point() {
    z_ = z0_;
    y_ = Vec::Zero(p_);
    V_.clear();
    X_.clear();
    double scale = 1.0;
    for (const auto& blk : prog_.psd_blocks) {
      Mat G = blk.eval(z_);
      scale = std::max(scale, G.cwiseAbs().maxCoeff());
    }
    for (const auto& blk : prog_.psd_blocks) {
      V_.push_back(Mat::Identity(blk.size(), blk.size()) * scale);
      X_.push_back(Mat::Identity(blk.size(), blk.size()));
    }
  }

  bool compute_scalings() {
    R_.assign(nb_, Mat());
    Rinv_.assign(nb_, Mat());
    Tinv_.assign(nb_, Mat());
    sigma_.assign(nb_, Vec());
    for (int j = 0; j < nb_; ++j) {
      Eigen::LLT<Mat> lltV(V_[j]);
      Eigen::LLT<Mat> lltX(X_[j]);
      if (lltV.info() != Eigen::Success || lltX.info() != Eigen::Success)
        return false;
      Mat Lv = lltV.matrixL();
      Mat Lx = lltX.matrixL();
      Eigen::JacobiSVD<Mat> svd(Lx.transpose() * Lv,
                                Eigen::ComputeThinU | Eigen::ComputeThinV);
      Vec sv = svd.singularValues();
      double floor_sv = std::max(1e-150, 1e-15 * sv[0]);
      for (int i = 0; i < sv.size(); ++i) sv[i] = std::max(sv[i], floor_sv);
      Mat P = svd.matrixV();
      Vec inv_sqrt = sv.array().sqrt().inverse();
      R_[j] = Lv * P * inv_sqrt.asDiagonal();
      Mat Lvinv = Mat::Identity(V_[j].rows(), V_[j].cols());
      lltV.matrixL().solveInPlace(Lvinv);
      Rinv_[j] = Vec(sv.array().sqrt()).asDiagonal() * P.transpose() * Lvinv;
      Tinv_[j] = Rinv_[j].transpose() * Rinv_[j];
      sigma_[j] = sv;
    }
    return true;
  }

  /// H = G^*(T^{-1} G(.) T^{-1}) over all blocks, then the dense Schur
  /// complement over the equality multipliers. Exploits the per-variable
  /// sparsity of the matrix maps.
  bool build_normal_system() {
    H_.setZero(N_, N_);
    for (int j = 0; j < nb_; ++j) {
      const auto& byvar = prog_.psd_blocks[j].by_variable();
      const Mat& Ti = Tinv_[j];
      int nj = prog_.psd_blocks[j].size();
      Mat B(nj, nj);
      for (std::size_t a = 0; a < byvar.size(); ++a) {
        const auto& [la, entries_a] = byvar[a];
        B.setZero();
        for (const auto& e : entries_a) {
          B.noalias() += e.coeff * (Ti.col(e.row) * Ti.row(e.col));
          if (e.row != e.col)
            B.noalias() += e.coeff * (Ti.col(e.col) * Ti.row(e.row));
        }
        for (std::size_t bi = 0; bi <= a; ++bi) {
          const auto& [lb, entries_b] = byvar[bi];
          double s = 0.0;
          for (const auto& e : entries_b)
            s += e.coeff * B(e.row, e.col) * (e.row == e.col ? 1.0 : 2.0);
          H_(la, lb) += s;
          if (la != lb) H_(lb, la) += s;
        }
      }
    }
    double reg = 1e-13 * std::max(1.0, H_.diagonal().maxCoeff());
    H_.diagonal().array() += reg;
    lltH_.compute(H_);
    if (lltH_.info() != Eigen::Success) {
      H_.diagonal().array() += 1e6 * reg;
      lltH_.compute(H_);
      if (lltH_.info() != Eigen::Success) return false;
    }
    if (p_ > 0) {
      K_ = At_;
      lltH_.matrixL().solveInPlace(K_);
      schur_ = K_.transpose() * K_;
      schur_.diagonal().array() +=
          1e-13 * std::max(1.0, schur_.diagonal().maxCoeff());
      lltS_.compute(schur_);
      if (lltS_.info() != Eigen::Success) return false;
    }
    return true;
  }

  /// Newton saddle solve for a given scaled complementarity residual Rc.
  bool solve_kkt(const std::vector<Mat>& Rc, const Vec& rp, const Vec& rd,
                 const std::vector<Mat>& Rg, Step& step) {
    Vec r1 = -rd;
    std::vector<Mat> Lc(nb_);
    for (int j = 0; j < nb_; ++j) {
      const Vec& s = sigma_[j];
      Lc[j] = Rc[j];
      for (int a = 0; a < Lc[j].rows(); ++a)
        for (int b = 0; b < Lc[j].cols(); ++b)
          Lc[j](a, b) *= 2.0 / (s[a] + s[b]);
      Mat W = Rinv_[j].transpose() * Lc[j] * Rinv_[j] -
              Tinv_[j] * Rg[j] * Tinv_[j];
      prog_.psd_blocks[j].adjoint_add(0.5 * (W + W.transpose()), 1.0, r1);
    }
    if (p_ > 0) {
      Vec w = r1;
      lltH_.matrixL().solveInPlace(w);
      Vec rhs = rp - K_.transpose() * w;
      step.dy = lltS_.solve(rhs);
      step.dz = lltH_.solve(r1 + At_ * step.dy);
      // One round of refinement on the saddle system; the Schur factors lose
      // digits once the scaling matrices blow up near the boundary.
      for (int round = 0; round < 2; ++round) {
        Vec e1 = r1 - (H_ * step.dz - At_ * step.dy);
        Vec e2 = rp - At_.transpose() * step.dz;
        Vec w2 = e1;
        lltH_.matrixL().solveInPlace(w2);
        Vec cy = lltS_.solve(e2 - K_.transpose() * w2);
        Vec cz = lltH_.solve(e1 + At_ * cy);
        step.dy += cy;
        step.dz += cz;
      }
    } else {
      step.dy = Vec();
      step.dz = lltH_.solve(r1);
      Vec e1 = r1 - H_ * step.dz;
      step.dz += lltH_.solve(e1);
    }
    step.dV.resize(nb_);
    step.dX.resize(nb_);
    for (int j = 0; j < nb_; ++j) {
      step.dV[j] = prog_.psd_blocks[j].eval(step.dz) + Rg[j];
      Mat dVt = Rinv_[j] * step.dV[j] * Rinv_[j].transpose();
      Mat dXt = Lc[j] - 0.5 * (dVt + dVt.transpose());
      step.dX[j] = Rinv_[j].transpose() * dXt * Rinv_[j];
      step.dX[j] = 0.5 * (step.dX[j] + step.dX[j].transpose()).eval();
    }
    return step.dz.allFinite() && (p_ == 0 || step.dy.allFinite());
  }

  double step_length(const std::vector<Mat>& M, const std::vector<Mat>& dM) const {
    double a = 1.0 / 0.95;
    for (int j = 0; j < nb_; ++j) a = std::min(a, max_step(M[j], dM[j], 1.0 / 0.95));
    return a;
  }

  bool detect_infeasible(const Vec& rd) const {
    // Farkas dual ray: A^T y + G^*(X) ~ 0, X >= 0, b^T y > 0.
    double ynorm = p_ ? y_.cwiseAbs().maxCoeff() : 0.0;
    for (int j = 0; j < nb_; ++j) ynorm = std::max(ynorm, X_[j].cwiseAbs().maxCoeff());
    if (ynorm < 1e5) return false;
    Vec ray_res = c_ - rd;  // = A^T y + G^*(X)
    double viol = ray_res.cwiseAbs().maxCoeff() / ynorm;
    double gain = p_ ? b_.dot(y_) / ynorm : 0.0;
    return viol <= 1e-9 && gain >= 1e-7;
  }

  bool detect_unbounded(const Vec& rp, double pobj) const {
    double znorm = z_.cwiseAbs().maxCoeff();
    if (znorm < 1e7 || pobj > -1e-7 * znorm) return false;
    double feas = rp.size() ? rp.cwiseAbs().maxCoeff() / znorm : 0.0;
    return feas <= 1e-9;
  }

  void fill(ConicSolution& sol, SolveStatus st, double pobj, double dobj,
            double feas, double gap, int iters) const {
    sol.status = st;
    sol.z = z_;
    sol.eq_duals = num_explicit_ ? Vec(y_.head(num_explicit_)) : Vec::Zero(0);
    sol.psd_duals = X_;
    sol.objective = pobj;
    sol.dual_objective = dobj;
    sol.feas_residual = feas;
    sol.gap = gap;
    sol.iterations = iters;
  }

  const ConicProgram& prog_;
  SolveSettings opt_;
  int N_, p_ = 0, nb_ = 0, num_explicit_ = 0, dim_total_ = 0;
  std::vector<Row> rows_;
  Vec b_, c_, z0_;
  double bnorm_ = 0, cnorm_ = 0;

  Vec z_, y_;
  std::vector<Mat> V_, X_;
  std::vector<Mat> R_, Rinv_, Tinv_;
  std::vector<Vec> sigma_;
  Mat H_, At_, K_, schur_;
  Eigen::LLT<Mat> lltH_, lltS_;
  Eigen::CompleteOrthogonalDecomposition<Mat> cod_At_;
};

}  // namespace

ConicSolution solve(const ConicProgram& program, const SolveSettings& settings) {
  if (program.psd_blocks.empty())
    throw std::invalid_argument("conic::solve: program has no psd block");
  if (program.objective.size() != program.num_vars)
    throw std::invalid_argument("conic::solve: objective length mismatch");
  for (const auto& e : program.equalities)
    for (const auto& t : e.terms)
      if (t.var < 0 || t.var >= program.num_vars)
        throw std::invalid_argument("conic::solve: equality references invalid var");
  Solver s(program, settings);
  return s.run();
}

DualForm dual_certificate(const ConicSolution& sol, const DualFormSpec& spec) {
  if (sol.status == SolveStatus::Infeasible || sol.status == SolveStatus::Unbounded)
    throw std::runtime_error("dual_certificate: no certificate for status " +
                             std::string(status_name(sol.status)));
  DualForm form;
  form.field = spec.field;
  form.n = spec.n;
  form.m = spec.m;
  form.nonsym = spec.nonsym;
  form.segment_dims = spec.segment_dims;
  form.monomials = spec.monomials;
  auto count = static_cast<Eigen::Index>(spec.monomials.size());
  form.coeff_re = Vec::Zero(count);
  form.coeff_im = Vec::Zero(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    form.coeff_re[i] = sol.eq_duals[spec.re_rows[i]];
    if (!spec.im_rows.empty())
      form.coeff_im[i] = -sol.eq_duals[spec.im_rows[i]];
  }
  form.attained = sol.dual_objective;
  return form;
}

}  // namespace tnn
