#pragma once

#include <optional>
#include <string>

#include "tnn/extract.hpp"
#include "tnn/relax.hpp"

namespace tnn {

enum class ReportStatus { Certified, LowerBound };

const char* report_status_name(ReportStatus s);

struct NormOptions {
  int k_min = 0;  // 0: ceil(m/2)
  int k_max = 0;  // 0: ceil(m/2) + 3
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  std::uint64_t seed = 0;
  bool force_even = false;  // route odd orders through the split algorithm
  SectorVariant sector_variant = SectorVariant::Lemma51;
  int membership_extra_orders = 1;  // cert order budget above the current k
  int sphere_samples = 100000;      // dual form bound check
  ExtractOptions extract;
};

struct OrderTrace {
  int order = 0;
  double value = 0.0;
  int iterations = 0;
  double seconds = 0.0;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NormReport {
  Field field = Field::Real;
  RelaxationKind kind = RelaxationKind::OddReal;
  int order_m = 0;
  int dim_n = 0;
  double value = 0.0;
  ReportStatus status = ReportStatus::LowerBound;
  int order_used = 0;
  std::optional<NuclearDecomposition> decomposition;
  double residual = 0.0;  // relative reconstruction residual
  std::optional<DualForm> dual;
  double dual_sphere_max = 0.0;  // sampled sup |p| over the support set
  std::vector<OrderTrace> trace;
  double seconds = 0.0;
  std::uint64_t seed = 0;
};

/// Algorithm for real nuclear norms; odd orders use the single-measure
/// sphere formulation, even orders (or force_even) the half-sphere split.
NormReport nuclear_norm_real(const SymTensor& A, const NormOptions& opts = {});

/// Complex nuclear norm via the realified sector formulation; accepts real
/// tensors as well.
NormReport nuclear_norm_complex(const SymTensor& A, const NormOptions& opts = {});

/// Nonsymmetric order-3 real nuclear norm over the product of spheres.
NormReport nuclear_norm_nonsym3(const std::vector<double>& entries,
                                const std::vector<int>& dims,
                                const NormOptions& opts = {});

/// (relative reconstruction residual, total mass).
std::pair<double, double> verify(const SymTensor& A, const NuclearDecomposition& d);

/// Same for a nonsymmetric order-3 decomposition against dense entries.
std::pair<double, double> verify_nonsym3(const std::vector<double>& entries,
                                         const std::vector<int>& dims,
                                         const NuclearDecomposition& d);

struct SpectralBound {
  double upper = 0.0;
  double lower = 0.0;
  bool certified = false;  // flat truncation succeeded on the maximizer side
  Vec maximizer_re, maximizer_im;
};

/// Sandwich bound on the spectral norm at relaxation order k; the upper
/// bound is the sphere-moment optimum, the lower bound the best evaluation
/// over extracted atoms and sampled points.
SpectralBound spectral_norm_bound(const SymTensor& A, int k,
                                  const NormOptions& opts = {});

/// Sampled sup of |p| over the dual form's support set (unit sphere, complex
/// sphere, or product of spheres).
double dual_form_sphere_max(const DualForm& form, std::uint64_t seed, int samples);

}  // namespace tnn
