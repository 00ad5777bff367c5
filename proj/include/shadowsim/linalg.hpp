// Copyright 2026 The shadowsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SHADOWSIM_LINALG_HPP_
#define SHADOWSIM_LINALG_HPP_

#include <Eigen/Dense>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace shadowsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

// Shared numerical tolerances. Eigenvalue-based Hermiticity/PSD checks use
// kEigTol; trace-equality conditions on Choi operators use kChoiTol (SDP
// solutions carry ~1e-8 residuals).
inline constexpr double kEigTol = 1e-9;
inline constexpr double kChoiTol = 1e-8;

// Ordered list of subsystem dimensions. Composite indices are big-endian:
// the first subsystem is the most significant digit.
struct SubsystemShape {
  std::vector<int> dims;

  SubsystemShape() = default;
  SubsystemShape(std::initializer_list<int> d) : dims(d) { validate(); }
  explicit SubsystemShape(std::vector<int> d) : dims(std::move(d)) {
    validate();
  }

  int total() const {
    return std::accumulate(dims.begin(), dims.end(), 1,
                           std::multiplies<int>());
  }
  int size() const { return static_cast<int>(dims.size()); }

 private:
  void validate() const {
    for (int d : dims) {
      if (d < 1) throw std::invalid_argument("subsystem dimension must be >=1");
    }
  }
};

inline bool is_hermitian(const Matrix& m, double tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

// Kronecker product with big-endian index convention:
// (a (x) b)[(i*rb+k),(j*cb+l)] = a[i,j]*b[k,l].
inline Matrix tensor(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Matrix tensor(const Matrix& a, const Matrix& b, const Matrix& c) {
  return tensor(tensor(a, b), c);
}

namespace detail {

inline std::vector<int> strides_of(const SubsystemShape& shape) {
  std::vector<int> strides(shape.dims.size());
  int acc = 1;
  for (int k = shape.size() - 1; k >= 0; --k) {
    strides[static_cast<size_t>(k)] = acc;
    acc *= shape.dims[static_cast<size_t>(k)];
  }
  return strides;
}

inline void check_shape(const Matrix& m, const SubsystemShape& shape) {
  if (m.rows() != m.cols() || m.rows() != shape.total())
    throw std::invalid_argument("matrix side does not match subsystem shape");
}

}  // namespace detail

// Partial trace keeping the subsystems listed in `keep` (original order).
inline Matrix partial_trace(const Matrix& m, const SubsystemShape& shape,
                            const std::vector<int>& keep) {
  detail::check_shape(m, shape);
  if (keep.empty()) throw std::invalid_argument("keep set must be non-empty");
  std::vector<bool> kept(shape.dims.size(), false);
  for (int k : keep) {
    if (k < 0 || k >= shape.size())
      throw std::invalid_argument("keep index out of range");
    kept[static_cast<size_t>(k)] = true;
  }

  std::vector<int> keep_dims, trace_dims, keep_idx, trace_idx;
  for (int k = 0; k < shape.size(); ++k) {
    if (kept[static_cast<size_t>(k)]) {
      keep_dims.push_back(shape.dims[static_cast<size_t>(k)]);
      keep_idx.push_back(k);
    } else {
      trace_dims.push_back(shape.dims[static_cast<size_t>(k)]);
      trace_idx.push_back(k);
    }
  }
  const int dk = std::accumulate(keep_dims.begin(), keep_dims.end(), 1,
                                 std::multiplies<int>());
  const int dt = std::accumulate(trace_dims.begin(), trace_dims.end(), 1,
                                 std::multiplies<int>());
  auto strides = detail::strides_of(shape);

  // Map (kept composite, traced composite) -> full composite index.
  auto full_index = [&](int ik, int it) {
    int idx = 0;
    int rem = ik;
    for (int k = static_cast<int>(keep_idx.size()) - 1; k >= 0; --k) {
      int d = keep_dims[static_cast<size_t>(k)];
      idx += (rem % d) * strides[static_cast<size_t>(keep_idx[static_cast<size_t>(k)])];
      rem /= d;
    }
    rem = it;
    for (int k = static_cast<int>(trace_idx.size()) - 1; k >= 0; --k) {
      int d = trace_dims[static_cast<size_t>(k)];
      idx += (rem % d) * strides[static_cast<size_t>(trace_idx[static_cast<size_t>(k)])];
      rem /= d;
    }
    return idx;
  };

  Matrix out = Matrix::Zero(dk, dk);
  for (int r = 0; r < dk; ++r)
    for (int c = 0; c < dk; ++c)
      for (int t = 0; t < dt; ++t)
        out(r, c) += m(full_index(r, t), full_index(c, t));
  return out;
}

// Reorders subsystems: subsystem `perm[k]` of the input becomes subsystem k
// of the output.
inline Matrix permute_systems(const Matrix& m, const SubsystemShape& shape,
                              const std::vector<int>& perm) {
  detail::check_shape(m, shape);
  if (static_cast<int>(perm.size()) != shape.size())
    throw std::invalid_argument("permutation length mismatch");
  auto strides = detail::strides_of(shape);
  std::vector<int> new_dims;
  new_dims.reserve(perm.size());
  for (int p : perm) new_dims.push_back(shape.dims[static_cast<size_t>(p)]);
  SubsystemShape new_shape(new_dims);
  auto new_strides = detail::strides_of(new_shape);
  const int n = shape.total();

  std::vector<int> old_of_new(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    int rem = i, old = 0;
    for (int k = new_shape.size() - 1; k >= 0; --k) {
      int d = new_shape.dims[static_cast<size_t>(k)];
      old += (rem % d) * strides[static_cast<size_t>(perm[static_cast<size_t>(k)])];
      rem /= d;
    }
    old_of_new[static_cast<size_t>(i)] = old;
  }
  Matrix out(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      out(r, c) = m(old_of_new[static_cast<size_t>(r)],
                    old_of_new[static_cast<size_t>(c)]);
  return out;
}

struct EigResult {
  RealVector eigenvalues;  // ascending
  Matrix eigenvectors;     // columns, m = V diag(w) V^dag
};

inline EigResult eig_hermitian(const Matrix& m) {
  if (!is_hermitian(m, 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff())))
    throw std::invalid_argument("eig_hermitian: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.adjoint()) / 2.0);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eig_hermitian: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline double min_eigenvalue(const Matrix& m) {
  return eig_hermitian(m).eigenvalues.minCoeff();
}

inline bool is_psd(const Matrix& m, double tol = kEigTol) {
  if (!is_hermitian(m, 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff())))
    return false;
  return min_eigenvalue(m) >= -tol;
}

inline double fro_norm(const Matrix& m) { return m.norm(); }

inline Matrix identity(int d) { return Matrix::Identity(d, d); }

// Unnormalized maximally entangled operator |Gamma><Gamma|, |Gamma> = sum |jj>.
inline Matrix gamma_operator(int d) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d * d);
  for (int j = 0; j < d; ++j) v(j * d + j) = 1.0;
  return v * v.adjoint();
}

// Maximally entangled state Phi = Gamma / d.
inline Matrix phi_state(int d) { return gamma_operator(d) / double(d); }

}  // namespace shadowsim

#endif  // SHADOWSIM_LINALG_HPP_
