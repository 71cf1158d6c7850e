// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "aams/error.hpp"
#include "aams/parallel.hpp"
#include "aams/tensor.hpp"

namespace aams {

// C = A * B. Each output row accumulates A(i, p) * B.row(p) for p ascending.
template <typename T>
BasicMatrix<T> matmul(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (a.cols() != b.rows())
    throw DimensionError(detail::concat("matmul: ", a.rows(), "x", a.cols(), " times ", b.rows(), "x", b.cols()));
  BasicMatrix<T> c(a.rows(), b.cols());
  parallel_for(a.rows(), [&](std::size_t i) {
    T* __restrict out = c.row(i).data();
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const T av = a(i, p);
      if (av == T{}) continue;
      const T* __restrict src = b.row(p).data();
      for (std::size_t j = 0; j < b.cols(); ++j) out[j] += av * src[j];
    }
  });
  return c;
}

// A * A^T / divisor, exploiting symmetry.
template <typename T>
BasicMatrix<T> gram(const BasicMatrix<T>& a, T divisor) {
  const std::size_t n = a.rows();
  BasicMatrix<T> g(n, n);
  parallel_for(n, [&](std::size_t i) {
    auto ri = a.row(i);
    for (std::size_t j = i; j < n; ++j) {
      auto rj = a.row(j);
      T s{};
      for (std::size_t k = 0; k < ri.size(); ++k) s += ri[k] * rj[k];
      g(i, j) = s / divisor;
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

template <typename T>
double frobenius_norm(const BasicMatrix<T>& m) {
  double s = 0.0;
  for (T v : m.data()) s += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(s);
}

template <typename T>
void require_symmetric(const BasicMatrix<T>& m, const char* what) {
  if (!m.square())
    throw DimensionError(detail::concat(what, ": matrix is ", m.rows(), "x", m.cols(), ", not square"));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      const double aij = m(i, j), aji = m(j, i);
      if (std::abs(aij - aji) > 1e-5 * std::max(1.0, std::abs(aij)))
        throw DimensionError(detail::concat(what, ": matrix not symmetric at (", i, ",", j, ")"));
    }
}

struct EigenDecomposition {
  std::vector<double> values;  // descending
  MatrixD vectors;             // column j pairs with values[j]
};

// Symmetric eigendecomposition (Householder tridiagonalization + implicit QL,
// via Eigen). Computed in double precision whatever the input type.
template <typename T>
EigenDecomposition sym_eig(const BasicMatrix<T>& m) {
  require_symmetric(m, "sym_eig");
  const auto n = static_cast<Eigen::Index>(m.rows());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto r = static_cast<std::size_t>(i), c = static_cast<std::size_t>(j);
      a(i, j) = 0.5 * (static_cast<double>(m(r, c)) + static_cast<double>(m(c, r)));
    }
  if (!a.allFinite()) throw NumericalError("sym_eig: matrix has non-finite entries");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw NumericalError(detail::concat("sym_eig: eigensolver did not converge (n=", n, ")"));

  // Eigen returns ascending order.
  EigenDecomposition result;
  result.values.resize(static_cast<std::size_t>(n));
  result.vectors = MatrixD(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = n - 1 - j;
    result.values[static_cast<std::size_t>(j)] = solver.eigenvalues()(src);
    for (Eigen::Index k = 0; k < n; ++k)
      result.vectors(static_cast<std::size_t>(k), static_cast<std::size_t>(j)) = solver.eigenvectors()(k, src);
  }
  return result;
}

}  // namespace aams
