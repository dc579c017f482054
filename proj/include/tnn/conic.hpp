#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "tnn/moment_maps.hpp"
#include "tnn/sym_tensor.hpp"

namespace tnn {

/// Linear conic program over a stacked tms vector z:
///
///   min  c^T z
///   s.t. A z = b            (explicit equality rows)
///        Z_i(z) = 0         (zero blocks, compiled to scalar equalities)
///        S_j(z) >= 0        (psd blocks)
///
/// All matrix maps are homogeneous linear in z.
struct ConicProgram {
  int num_vars = 0;
  Vec objective;
  std::vector<LinearRow> equalities;
  std::vector<LinearMatrixMap> psd_blocks;
  std::vector<LinearMatrixMap> zero_blocks;

  void add_equality(std::vector<LinearMatrixMap::Term> terms, double rhs);

  /// Sparse text dump, one line per nonzero. Lines:
  ///   obj <var> <coeff>
  ///   eq <row> <var> <coeff>         rhs <row> <value>
  ///   psd <block> <row> <col> <var> <coeff>
  ///   zero <block> <row> <col> <var> <coeff>
  void dump(std::ostream& os) const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalLimit };

const char* status_name(SolveStatus s);

struct SolveSettings {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iter = 200;
  bool verbose = false;
};

struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalLimit;
  Vec z;                       // primal tms values
  Vec eq_duals;                // multipliers of the explicit equality rows
  std::vector<Mat> psd_duals;  // multipliers of the psd blocks
  double objective = 0.0;
  double dual_objective = 0.0;
  double feas_residual = 0.0;  // max of scaled primal/dual residuals
  double gap = 0.0;            // relative duality gap
  int iterations = 0;
  double seconds = 0.0;
};

ConicSolution solve(const ConicProgram& program, const SolveSettings& settings = {});

/// Identifies which equality rows carry the tensor-entry (or R/T) constraints
/// so the dual form can be read off the multipliers.
struct DualFormSpec {
  Field field = Field::Real;
  int n = 0;  // variables of the form (n1+n2+n3 for nonsym)
  int m = 0;
  bool nonsym = false;
  std::vector<int> segment_dims;
  std::vector<MultiIndex> monomials;  // N^n_{m} (or mixed triples) in row order
  std::vector<int> re_rows;           // equality row per monomial, real part
  std::vector<int> im_rows;           // imaginary part rows (complex only)
};

/// Degree-m form certified dual-feasible by the solver; for complex programs
/// the coefficients are those of q(w) = p1^T R + p2^T T read as q_alpha =
/// (p1)_alpha - i (p2)_alpha.
struct DualForm {
  Field field = Field::Real;
  int n = 0;
  int m = 0;
  bool nonsym = false;
  std::vector<int> segment_dims;
  std::vector<MultiIndex> monomials;
  Vec coeff_re;
  Vec coeff_im;
  double attained = 0.0;  // <p, a>, equals the optimal value
};

DualForm dual_certificate(const ConicSolution& sol, const DualFormSpec& spec);

}  // namespace tnn
