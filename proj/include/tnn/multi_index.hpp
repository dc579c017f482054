#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace tnn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Exponent vector of a monomial x1^a1 ... xn^an with cached total degree.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<std::int32_t> exponents);
  static MultiIndex zero(int nvars);
  static MultiIndex unit(int nvars, int var);

  int nvars() const { return static_cast<int>(exp_.size()); }
  int degree() const { return degree_; }
  std::int32_t operator[](int i) const { return exp_[i]; }
  const std::vector<std::int32_t>& exponents() const { return exp_; }

  MultiIndex plus(const MultiIndex& other) const;
  MultiIndex plus_unit(int var, int amount = 1) const;

  bool operator==(const MultiIndex& other) const { return exp_ == other.exp_; }
  bool operator!=(const MultiIndex& other) const { return !(*this == other); }

  /// Graded lexicographic order with x1 > x2 > ... > xn.
  static bool graded_lex_less(const MultiIndex& a, const MultiIndex& b);

  std::string to_string() const;

 private:
  std::vector<std::int32_t> exp_;
  std::int32_t degree_ = 0;
};

struct MultiIndexHash {
  std::size_t operator()(const std::vector<std::int32_t>& e) const {
    std::size_t h = 0x9e3779b97f4a7c15ULL;
    for (auto v : e) h = (h ^ static_cast<std::size_t>(v)) * 0x100000001b3ULL;
    return h;
  }
};

enum class IndexShape { Full, Exact, ZeroAndExact };

std::uint64_t binomial(int n, int k);
/// m! / (a1! ... an!) for |a| = m.
double multinomial(int m, const MultiIndex& alpha);

/// All alpha in N^n with |alpha| <= d (Full), = d (Exact), or in {0, d}
/// (ZeroAndExact), listed in graded lexicographic order.
std::vector<MultiIndex> enumerate_indices(int nvars, int degree, IndexShape shape);

/// Graded-lex list of all monomials of degree <= maxdeg together with the
/// inverse position map. Fixes row/column order everywhere downstream.
class Basis {
 public:
  Basis() = default;
  Basis(int nvars, int maxdeg);

  int nvars() const { return nvars_; }
  int maxdeg() const { return maxdeg_; }
  int size() const { return static_cast<int>(list_.size()); }
  const MultiIndex& operator[](int i) const { return list_[i]; }
  const std::vector<MultiIndex>& list() const { return list_; }

  int position(const MultiIndex& alpha) const;        // throws if absent
  int find(const MultiIndex& alpha) const;            // -1 if absent

 private:
  int nvars_ = 0;
  int maxdeg_ = 0;
  std::vector<MultiIndex> list_;
  std::unordered_map<std::vector<std::int32_t>, int, MultiIndexHash> pos_;
};

/// Truncated moment sequence: real vector indexed by Basis(nvars, maxdeg).
class Tms {
 public:
  Tms() = default;
  Tms(int nvars, int maxdeg);
  Tms(int nvars, int maxdeg, Vec values);

  int nvars() const { return basis_.nvars(); }
  int maxdeg() const { return basis_.maxdeg(); }
  const Basis& basis() const { return basis_; }
  const Vec& values() const { return values_; }
  Vec& values() { return values_; }
  int size() const { return basis_.size(); }

  double operator[](const MultiIndex& alpha) const {
    return values_[basis_.position(alpha)];
  }
  double& operator[](const MultiIndex& alpha) {
    return values_[basis_.position(alpha)];
  }

  /// Entries with |alpha| in {0, m}, in basis order.
  Vec truncate_zero_and(int m) const;

 private:
  Basis basis_;
  Vec values_;
};

/// <p, z> = sum_alpha p_alpha z_alpha for a coefficient vector over
/// Basis(nvars, d), d <= z.maxdeg. The coefficient vector is aligned with
/// the leading entries of z's basis (graded-lex order nests by degree).
double pairing(const Vec& coeffs, const Tms& z);

}  // namespace tnn
