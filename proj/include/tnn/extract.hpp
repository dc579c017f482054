#pragma once

#include <cstdint>
#include <optional>

#include "tnn/conic.hpp"
#include "tnn/moment_maps.hpp"

namespace tnn {

/// Finitely supported representing measure on one of the four support sets.
struct AtomicMeasure {
  SupportSet support = SupportSet::Sphere;
  std::vector<int> group_dims;  // ProductSpheres only
  std::vector<Vec> atoms;       // points in R^N
  std::vector<double> weights;  // > weight_tol

  /// Moment vector over Basis(nvars, maxdeg).
  Tms moments(int maxdeg) const;
  /// Entries with |alpha| in {0, m}.
  Vec moments_zero_and(int m) const;
};

struct ExtractOptions {
  double rank_tol = 1e-6;     // relative singular value threshold
  double weight_tol = 1e-7;   // drop weights below this
  double extract_tol = 1e-5;  // relative residual gate on the fit
  double support_tol = 1e-6;  // atom feasibility gate
  // Degenerate instances can leave the interior-point method at its accuracy
  // floor just above the strict tolerances; solves whose achieved residual
  // and gap stay below this are still used.
  double accept_tol = 1e-6;
  std::uint64_t seed = 0;
};

/// True when a solve is usable: certified optimal, or best-iterate residuals
/// within accept_tol.
bool solution_usable(const ConicSolution& sol, double accept_tol);

struct FlatTruncation {
  bool flat = false;
  int rank = 0;
  int level = 0;  // smallest t with rank M_{t-d0} = rank M_t
};

/// Rank-stabilization test on the moment matrices of z up to order k.
FlatTruncation flat_truncation(const Tms& z, int k, int d0 = 1,
                               double rank_tol = 1e-6);

/// Atom extraction at a flat level: truncated eigenfactor of M_t, shifted
/// multiplication operators, joint diagonalization via a real Schur form of
/// a random convex combination, then nonnegative least-squares weights
/// against z|_{0,m}. Throws std::runtime_error on a residual breach.
AtomicMeasure extract_atoms(const Tms& z, int level, int rank, int m,
                            SupportSet support, const std::vector<int>& group_dims,
                            const ExtractOptions& opt);

enum class Membership { Yes, No, Inconclusive };

struct MembershipResult {
  Membership member = Membership::Inconclusive;
  std::optional<AtomicMeasure> measure;
  int order_used = 0;
};

/// Decides membership of y (indexed by N^nvars_{0,m}) in the truncated
/// moment cone of the support set, by re-solving with a generic strictly
/// positive objective and testing flat truncation (Algorithm step 2).
/// For ProductSpheres only the mass and the mixed (1,1,1) entries of y are
/// pinned, matching the section-7 cone.
MembershipResult certify_membership(const Vec& y, int m, SupportSet support,
                                    int nvars, const std::vector<int>& group_dims,
                                    int k_max, const ExtractOptions& opt,
                                    SectorVariant variant = SectorVariant::Lemma51,
                                    const SolveSettings& solver = {});

/// Lawson-Hanson nonnegative least squares: min |Ax - b| s.t. x >= 0.
Vec nnls(const Mat& A, const Vec& b, int max_iter = 0);

}  // namespace tnn
