#include "tnn/sym_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tnn {

const char* field_name(Field f) { return f == Field::Real ? "real" : "complex"; }

namespace {

MultiIndex tuple_to_index(const std::vector<int>& tuple, int dim) {
  std::vector<std::int32_t> e(dim, 0);
  for (int i : tuple) {
    if (i < 0 || i >= dim)
      throw std::out_of_range("tensor index out of range");
    ++e[i];
  }
  return MultiIndex(std::move(e));
}

std::string tuple_to_string(const std::vector<int>& t) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < t.size(); ++i) os << (i ? "," : "") << t[i] + 1;
  os << ")";
  return os.str();
}

}  // namespace

SymTensor::SymTensor(int order, int dim, Field field)
    : order_(order), dim_(dim), field_(field) {
  if (order < 1 || dim < 1)
    throw std::invalid_argument("SymTensor: order and dim must be positive");
  monomials_ = enumerate_indices(dim, order, IndexShape::Exact);
  index_ = Basis(dim, order);
  a_re_ = Vec::Zero(static_cast<Eigen::Index>(monomials_.size()));
  a_im_ = Vec::Zero(static_cast<Eigen::Index>(monomials_.size()));
}

int SymTensor::position(const MultiIndex& alpha) const {
  if (alpha.degree() != order_)
    throw std::invalid_argument("SymTensor::position: |alpha| != order");
  // Exact-degree monomials occupy the tail of the full basis.
  int p = index_.position(alpha) - (index_.size() - entry_count());
  return p;
}

std::complex<double> SymTensor::entry(const MultiIndex& alpha) const {
  int p = position(alpha);
  return {a_re_[p], a_im_[p]};
}

void SymTensor::set_entry(const MultiIndex& alpha, std::complex<double> v) {
  int p = position(alpha);
  a_re_[p] = v.real();
  a_im_[p] = v.imag();
}

std::complex<double> SymTensor::dense_entry(const std::vector<int>& tuple) const {
  if (static_cast<int>(tuple.size()) != order_)
    throw std::invalid_argument("dense_entry: tuple length != order");
  return entry(tuple_to_index(tuple, dim_));
}

SymTensor SymTensor::operator+(const SymTensor& other) const {
  if (order_ != other.order_ || dim_ != other.dim_)
    throw std::invalid_argument("SymTensor: shape mismatch");
  SymTensor out(order_, dim_,
                (field_ == Field::Complex || other.field_ == Field::Complex)
                    ? Field::Complex
                    : Field::Real);
  out.a_re_ = a_re_ + other.a_re_;
  out.a_im_ = a_im_ + other.a_im_;
  return out;
}

SymTensor SymTensor::operator-(const SymTensor& other) const {
  return *this + other.scaled(-1.0);
}

SymTensor SymTensor::scaled(double t) const {
  SymTensor out = *this;
  out.a_re_ *= t;
  out.a_im_ *= t;
  return out;
}

std::complex<double>& DenseTensor::at(const std::vector<int>& tuple) {
  std::size_t idx = 0;
  for (int i : tuple) idx = idx * dim + static_cast<std::size_t>(i);
  return values.at(idx);
}

std::complex<double> DenseTensor::at(const std::vector<int>& tuple) const {
  std::size_t idx = 0;
  for (int i : tuple) idx = idx * dim + static_cast<std::size_t>(i);
  return values.at(idx);
}

DenseTensor DenseTensor::zeros(int order, int dim) {
  DenseTensor t;
  t.order = order;
  t.dim = dim;
  std::size_t total = 1;
  for (int i = 0; i < order; ++i) total *= static_cast<std::size_t>(dim);
  t.values.assign(total, {0.0, 0.0});
  return t;
}

namespace {

bool next_tuple(std::vector<int>& t, int dim) {
  for (int i = static_cast<int>(t.size()) - 1; i >= 0; --i) {
    if (++t[i] < dim) return true;
    t[i] = 0;
  }
  return false;
}

}  // namespace

SymTensor from_dense(const DenseTensor& dense, Field field, double tol) {
  SymTensor A(dense.order, dense.dim, field);
  std::size_t total = 1;
  for (int i = 0; i < dense.order; ++i) total *= static_cast<std::size_t>(dense.dim);
  if (dense.values.size() != total)
    throw std::invalid_argument("from_dense: value count does not match dim^order");

  double scale = 0.0;
  for (const auto& v : dense.values) scale = std::max(scale, std::abs(v));
  double abs_tol = tol * std::max(1.0, scale);

  // First representative tuple seen per monomial, for error reporting.
  std::vector<std::vector<int>> rep(A.entry_count());
  std::vector<char> seen(A.entry_count(), 0);

  std::vector<int> tuple(dense.order, 0);
  do {
    MultiIndex alpha = tuple_to_index(tuple, dense.dim);
    int p = A.position(alpha);
    std::complex<double> v = dense.at(tuple);
    if (!seen[p]) {
      seen[p] = 1;
      rep[p] = tuple;
      A.a_re()[p] = v.real();
      A.a_im()[p] = v.imag();
    } else {
      std::complex<double> have(A.a_re()[p], A.a_im()[p]);
      if (std::abs(v - have) > abs_tol)
        throw std::invalid_argument(
            "from_dense: asymmetric input, entries " + tuple_to_string(rep[p]) +
            " and " + tuple_to_string(tuple) + " differ by " +
            std::to_string(std::abs(v - have)));
    }
  } while (next_tuple(tuple, dense.dim));

  if (field == Field::Real && A.a_im().cwiseAbs().maxCoeff() > abs_tol)
    throw std::invalid_argument("from_dense: complex entries in a real tensor");
  if (field == Field::Real) A.a_im().setZero();
  return A;
}

DenseTensor to_dense(const SymTensor& A) {
  DenseTensor d = DenseTensor::zeros(A.order(), A.dim());
  std::vector<int> tuple(A.order(), 0);
  do {
    d.at(tuple) = A.dense_entry(tuple);
  } while (next_tuple(tuple, A.dim()));
  return d;
}

SymTensor from_poly(const std::vector<std::pair<MultiIndex, std::complex<double>>>& coeffs,
                    int order, int dim, Field field) {
  SymTensor A(order, dim, field);
  for (const auto& [alpha, c] : coeffs) {
    if (alpha.nvars() != dim)
      throw std::invalid_argument("from_poly: monomial has wrong variable count");
    if (alpha.degree() != order)
      throw std::invalid_argument("from_poly: monomial " + alpha.to_string() +
                                  " is not homogeneous of degree " +
                                  std::to_string(order));
    std::complex<double> v = A.entry(alpha) + c / multinomial(order, alpha);
    A.set_entry(alpha, v);
  }
  if (field == Field::Real) A.a_im().setZero();
  return A;
}

std::vector<std::pair<MultiIndex, std::complex<double>>> to_poly(const SymTensor& A) {
  std::vector<std::pair<MultiIndex, std::complex<double>>> out;
  for (int p = 0; p < A.entry_count(); ++p) {
    std::complex<double> v(A.a_re()[p], A.a_im()[p]);
    if (v != std::complex<double>(0.0, 0.0))
      out.emplace_back(A.monomials()[p],
                       v * multinomial(A.order(), A.monomials()[p]));
  }
  return out;
}

SymTensor reconstruct(const NuclearDecomposition& d) {
  if (!d.segment_dims.empty())
    throw std::invalid_argument(
        "reconstruct: nonsymmetric decompositions are handled by the norms layer");
  SymTensor A(d.order, d.dim, d.field);
  for (const auto& term : d.terms) {
    for (int p = 0; p < A.entry_count(); ++p) {
      const MultiIndex& alpha = A.monomials()[p];
      std::complex<double> w = 1.0;
      for (int j = 0; j < d.dim; ++j) {
        std::complex<double> wj(term.atom_re[j], term.atom_im[j]);
        for (int e = 0; e < alpha[j]; ++e) w *= wj;
      }
      w *= term.sign * term.lambda;
      A.a_re()[p] += w.real();
      A.a_im()[p] += w.imag();
    }
  }
  if (d.field == Field::Real) A.a_im().setZero();
  return A;
}

double NuclearDecomposition::mass() const {
  double s = 0.0;
  for (const auto& t : terms) s += t.lambda;
  return s;
}

std::complex<double> hs_inner(const SymTensor& A, const SymTensor& B) {
  if (A.order() != B.order() || A.dim() != B.dim())
    throw std::invalid_argument("hs_inner: shape mismatch");
  std::complex<double> s = 0.0;
  for (int p = 0; p < A.entry_count(); ++p) {
    std::complex<double> a(A.a_re()[p], A.a_im()[p]);
    std::complex<double> b(B.a_re()[p], B.a_im()[p]);
    s += multinomial(A.order(), A.monomials()[p]) * a * std::conj(b);
  }
  return s;
}

double hs_norm(const SymTensor& A) {
  double s = 0.0;
  for (int p = 0; p < A.entry_count(); ++p) {
    double m = multinomial(A.order(), A.monomials()[p]);
    s += m * (A.a_re()[p] * A.a_re()[p] + A.a_im()[p] * A.a_im()[p]);
  }
  return std::sqrt(s);
}

SymTensor symmetrize3(const Vec& a, const Vec& b, const Vec& c) {
  int n = static_cast<int>(a.size());
  if (b.size() != n || c.size() != n)
    throw std::invalid_argument("symmetrize3: dimension mismatch");
  DenseTensor d = DenseTensor::zeros(3, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        d.at({i, j, k}) = (a[i] * b[j] * c[k] + a[i] * c[j] * b[k] +
                           b[i] * a[j] * c[k] + b[i] * c[j] * a[k] +
                           c[i] * a[j] * b[k] + c[i] * b[j] * a[k]) /
                          6.0;
  return from_dense(d, Field::Real);
}

std::complex<double> eval_form(const SymTensor& A, const Vec& re, const Vec& im) {
  std::complex<double> s = 0.0;
  for (int p = 0; p < A.entry_count(); ++p) {
    const MultiIndex& alpha = A.monomials()[p];
    std::complex<double> x = 1.0;
    for (int j = 0; j < A.dim(); ++j) {
      std::complex<double> xj(re[j], im.size() ? im[j] : 0.0);
      for (int e = 0; e < alpha[j]; ++e) x *= xj;
    }
    s += multinomial(A.order(), alpha) * std::complex<double>(A.a_re()[p], A.a_im()[p]) * x;
  }
  return s;
}

}  // namespace tnn
