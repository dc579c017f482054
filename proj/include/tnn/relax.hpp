#pragma once

#include "tnn/conic.hpp"
#include "tnn/moment_maps.hpp"
#include "tnn/sym_tensor.hpp"

namespace tnn {

enum class RelaxationKind { OddReal, EvenReal, Complex, Nonsym3 };

/// A compiled relaxation: the conic program plus the row bookkeeping needed
/// to read dual certificates and locate the tms variables.
struct Relaxation {
  RelaxationKind kind = RelaxationKind::OddReal;
  int order = 0;  // k
  ConicProgram program;
  DualFormSpec dual_spec;
  // Offsets of the stacked tms variables inside z (one entry per variable;
  // the even-real split has two: z+ then z-).
  std::vector<int> tms_offsets;
  int tms_nvars = 0;  // variables of each tms (n, 2n, or n1+n2+n3)
  ConeSpec cone;      // the per-variable support cone
};

int minimum_order(int m);  // ceil(m/2)

/// Real/imaginary coefficient vectors of prod_j (x_j + i x_{n+j})^{alpha_j},
/// over the exact-degree-m monomials of 2n variables (graded-lex order).
/// Exact integer expansion.
std::pair<Vec, Vec> realify(const MultiIndex& alpha);

/// Odd-order real relaxation (3.5): min (z)_0 over S^{2k} with z_alpha =
/// a_alpha for |alpha| = m.
Relaxation build_odd_real(const SymTensor& A, int k);

/// Even-order split relaxation (4.7): min (z+)_0 + (z-)_0 over two copies of
/// S^{+,2k}. Also valid for odd m.
Relaxation build_even_real(const SymTensor& A, int k);

/// Complex relaxation (5.13) on 2n realified variables.
Relaxation build_complex(const SymTensor& A, int k,
                         SectorVariant variant = SectorVariant::Lemma51);

/// Nonsymmetric order-3 relaxation (7.4) over the product of spheres.
/// Entries are row-major over dims (n1, n2, n3).
Relaxation build_nonsym3(const std::vector<double>& entries,
                         const std::vector<int>& dims, int k);

/// Copy of the relaxation with the objective replaced by
/// (z)_0 + epsilon * R(z), R a seeded generic strictly positive form over
/// each tms variable. The optimizer lands on an extreme point of the
/// optimal face, where flat truncation generically holds.
Relaxation with_tiebreak_objective(const Relaxation& rel, double epsilon,
                                   std::uint64_t seed);

}  // namespace tnn
