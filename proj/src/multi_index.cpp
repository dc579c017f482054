#include "tnn/multi_index.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace tnn {

MultiIndex::MultiIndex(std::vector<std::int32_t> exponents)
    : exp_(std::move(exponents)) {
  degree_ = 0;
  for (auto e : exp_) {
    if (e < 0) throw std::invalid_argument("MultiIndex: negative exponent");
    degree_ += e;
  }
}

MultiIndex MultiIndex::zero(int nvars) {
  return MultiIndex(std::vector<std::int32_t>(nvars, 0));
}

MultiIndex MultiIndex::unit(int nvars, int var) {
  std::vector<std::int32_t> e(nvars, 0);
  e.at(var) = 1;
  return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::plus(const MultiIndex& other) const {
  if (nvars() != other.nvars())
    throw std::invalid_argument("MultiIndex::plus: nvars mismatch");
  std::vector<std::int32_t> e(exp_);
  for (int i = 0; i < nvars(); ++i) e[i] += other.exp_[i];
  return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::plus_unit(int var, int amount) const {
  std::vector<std::int32_t> e(exp_);
  e.at(var) += amount;
  return MultiIndex(std::move(e));
}

bool MultiIndex::graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
  if (a.degree_ != b.degree_) return a.degree_ < b.degree_;
  // Within a degree, x1 > x2 > ... : higher leading exponents come first.
  return std::lexicographical_compare(b.exp_.begin(), b.exp_.end(),
                                      a.exp_.begin(), a.exp_.end());
}

std::string MultiIndex::to_string() const {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < nvars(); ++i) os << (i ? "," : "") << exp_[i];
  os << ")";
  return os.str();
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

double multinomial(int m, const MultiIndex& alpha) {
  if (alpha.degree() != m)
    throw std::invalid_argument("multinomial: |alpha| != m");
  std::uint64_t r = 1;
  int rem = m;
  for (int i = 0; i < alpha.nvars(); ++i) {
    r *= binomial(rem, alpha[i]);
    rem -= alpha[i];
  }
  return static_cast<double>(r);
}

namespace {

void enumerate_exact_rec(int nvars, int var, int remaining,
                         std::vector<std::int32_t>& current,
                         std::vector<MultiIndex>& out) {
  if (var == nvars - 1) {
    current[var] = remaining;
    out.emplace_back(current);
    current[var] = 0;
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[var] = e;
    enumerate_exact_rec(nvars, var + 1, remaining - e, current, out);
  }
  current[var] = 0;
}

}  // namespace

std::vector<MultiIndex> enumerate_indices(int nvars, int degree, IndexShape shape) {
  if (nvars < 1) throw std::invalid_argument("enumerate_indices: nvars < 1");
  if (degree < 0) throw std::invalid_argument("enumerate_indices: degree < 0");
  std::vector<MultiIndex> out;
  std::vector<std::int32_t> cur(nvars, 0);
  switch (shape) {
    case IndexShape::Full:
      for (int t = 0; t <= degree; ++t) enumerate_exact_rec(nvars, 0, t, cur, out);
      break;
    case IndexShape::Exact:
      enumerate_exact_rec(nvars, 0, degree, cur, out);
      break;
    case IndexShape::ZeroAndExact:
      out.push_back(MultiIndex::zero(nvars));
      if (degree > 0) enumerate_exact_rec(nvars, 0, degree, cur, out);
      break;
  }
  return out;
}

Basis::Basis(int nvars, int maxdeg) : nvars_(nvars), maxdeg_(maxdeg) {
  list_ = enumerate_indices(nvars, maxdeg, IndexShape::Full);
  pos_.reserve(list_.size() * 2);
  for (int i = 0; i < static_cast<int>(list_.size()); ++i)
    pos_.emplace(list_[i].exponents(), i);
}

int Basis::position(const MultiIndex& alpha) const {
  int p = find(alpha);
  if (p < 0)
    throw std::out_of_range("Basis::position: index " + alpha.to_string() +
                            " outside basis (n=" + std::to_string(nvars_) +
                            ", d=" + std::to_string(maxdeg_) + ")");
  return p;
}

int Basis::find(const MultiIndex& alpha) const {
  auto it = pos_.find(alpha.exponents());
  return it == pos_.end() ? -1 : it->second;
}

Tms::Tms(int nvars, int maxdeg)
    : basis_(nvars, maxdeg), values_(Vec::Zero(basis_.size())) {}

Tms::Tms(int nvars, int maxdeg, Vec values) : basis_(nvars, maxdeg) {
  if (values.size() != basis_.size())
    throw std::invalid_argument("Tms: value vector has length " +
                                std::to_string(values.size()) + ", expected " +
                                std::to_string(basis_.size()));
  values_ = std::move(values);
}

Vec Tms::truncate_zero_and(int m) const {
  if (m > maxdeg())
    throw std::out_of_range("Tms::truncate_zero_and: m=" + std::to_string(m) +
                            " exceeds maxdeg=" + std::to_string(maxdeg()));
  auto idx = enumerate_indices(nvars(), m, IndexShape::ZeroAndExact);
  Vec out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = values_[basis_.position(idx[i])];
  return out;
}

double pairing(const Vec& coeffs, const Tms& z) {
  if (coeffs.size() > z.values().size())
    throw std::invalid_argument("pairing: coefficient vector longer than tms");
  return coeffs.dot(z.values().head(coeffs.size()));
}

}  // namespace tnn
