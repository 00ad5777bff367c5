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

#ifndef SHADOWSIM_CHANNELS_HPP_
#define SHADOWSIM_CHANNELS_HPP_

#include <string>
#include <utility>
#include <vector>

#include "shadowsim/linalg.hpp"
#include "json.hpp"

namespace shadowsim {

// Choi operator of a linear map, on input (x) output with the unnormalized
// |Gamma> = sum |jj> convention, so CPTP <=> J >= 0 and tr_out J = I_in.
// Systems are ordered (inputs..., outputs...).
struct ChoiOperator {
  Matrix matrix;
  int in_dim = 0;
  int out_dim = 0;

  ChoiOperator() = default;
  ChoiOperator(Matrix m, int in, int out)
      : matrix(std::move(m)), in_dim(in), out_dim(out) {
    if (in_dim < 1 || out_dim < 1)
      throw std::invalid_argument("ChoiOperator: dimensions must be >=1");
    if (matrix.rows() != matrix.cols() ||
        matrix.rows() != Eigen::Index(in_dim) * out_dim)
      throw std::invalid_argument("ChoiOperator: matrix side != in_dim*out_dim");
    double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
    if (!is_hermitian(matrix, kEigTol * scale))
      throw std::invalid_argument("ChoiOperator: matrix is not Hermitian");
    matrix = (matrix + matrix.adjoint()) / 2.0;
  }

  SubsystemShape shape() const { return SubsystemShape{in_dim, out_dim}; }
  Matrix trace_out() const { return partial_trace(matrix, shape(), {0}); }
};

// Choi + scaling factor of a Hermitian-preserving trace-scaling map.
struct VirtualChannel {
  ChoiOperator choi;
  double scaling = 1.0;

  VirtualChannel() = default;
  VirtualChannel(ChoiOperator c, double lambda)
      : choi(std::move(c)), scaling(lambda) {}
};

// Virtual bipartite code on A'B -> AB', stored as the pair of scaled CPTP
// parts (tr_AB'[J+-] = p+- I_{A'B}); the code's Choi is j_plus - j_minus.
// System order is (A', B, A, B').
struct SuperchannelChoi {
  Matrix j_plus;
  Matrix j_minus;
  int dim_a_in = 0;   // A' (target input)
  int dim_b = 0;      // B  (source output)
  int dim_a = 0;      // A  (source input)
  int dim_b_out = 0;  // B' (target output)
  double p_plus = 0.0;
  double p_minus = 0.0;

  SubsystemShape shape() const {
    return SubsystemShape{dim_a_in, dim_b, dim_a, dim_b_out};
  }
  Matrix matrix() const { return j_plus - j_minus; }
  double sampling_cost() const { return p_plus + p_minus; }
};

// (p+, J+, p-, J-) with J+- CPTP, realizing the virtual Choi p+ J+ - p- J-.
struct QuasiDecomposition {
  double p_plus = 0.0;
  ChoiOperator choi_plus;
  double p_minus = 0.0;
  ChoiOperator choi_minus;

  double sampling_cost() const { return p_plus + p_minus; }
  double scaling() const { return p_plus - p_minus; }
  Matrix reconstruct() const {
    return p_plus * choi_plus.matrix - p_minus * choi_minus.matrix;
  }
};

inline ChoiOperator kraus_to_choi(const std::vector<Matrix>& kraus, int in_dim,
                                  int out_dim) {
  Matrix j = Matrix::Zero(in_dim * out_dim, in_dim * out_dim);
  for (const Matrix& k : kraus) {
    if (k.rows() != out_dim || k.cols() != in_dim)
      throw std::invalid_argument("kraus_to_choi: Kraus operator shape");
    // J += (I (x) K) |Gamma><Gamma| (I (x) K)^dag, entrywise
    // J[(i,a),(j,b)] += K[a,i] conj(K[b,j]).
    for (int i = 0; i < in_dim; ++i)
      for (int a = 0; a < out_dim; ++a)
        for (int j2 = 0; j2 < in_dim; ++j2)
          for (int b = 0; b < out_dim; ++b)
            j(i * out_dim + a, j2 * out_dim + b) +=
                k(a, i) * std::conj(k(b, j2));
  }
  return ChoiOperator(std::move(j), in_dim, out_dim);
}

inline ChoiOperator identity_choi(int d) {
  return ChoiOperator(gamma_operator(d), d, d);
}

inline void check_probability(double p) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("channel parameter p must be in [0,1]");
}

// Single-qubit depolarizing: J = p Gamma + (1-p) I/2.
inline ChoiOperator depolarizing_choi(double p) {
  check_probability(p);
  Matrix j = p * gamma_operator(2) + (1.0 - p) / 2.0 * identity(4);
  return ChoiOperator(std::move(j), 2, 2);
}

// Single-qubit dephasing: J = p Gamma + (1-p) diag(Gamma).
inline ChoiOperator dephasing_choi(double p) {
  check_probability(p);
  Matrix g = gamma_operator(2);
  Matrix j = p * g + (1.0 - p) * Matrix(g.diagonal().asDiagonal());
  return ChoiOperator(std::move(j), 2, 2);
}

// Single-qubit amplitude damping with Kraus |0><0| + sqrt(p)|1><1| and
// sqrt(1-p)|0><1|.
inline ChoiOperator amplitude_damping_choi(double p) {
  check_probability(p);
  Matrix k0 = Matrix::Zero(2, 2), k1 = Matrix::Zero(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(p);
  k1(0, 1) = std::sqrt(1.0 - p);
  return kraus_to_choi({k0, k1}, 2, 2);
}

// Tensor product of two channels acting independently.
inline ChoiOperator tensor_channels(const ChoiOperator& a,
                                    const ChoiOperator& b) {
  // (in_a, out_a) (x) (in_b, out_b) -> reorder to (in_a, in_b, out_a, out_b).
  Matrix prod = tensor(a.matrix, b.matrix);
  SubsystemShape s{a.in_dim, a.out_dim, b.in_dim, b.out_dim};
  Matrix reordered = permute_systems(prod, s, {0, 2, 1, 3});
  return ChoiOperator(std::move(reordered), a.in_dim * b.in_dim,
                      a.out_dim * b.out_dim);
}

inline ChoiOperator tensor_power(const ChoiOperator& a, int k) {
  if (k < 1) throw std::invalid_argument("tensor_power: k must be >=1");
  ChoiOperator out = a;
  for (int i = 1; i < k; ++i) out = tensor_channels(out, a);
  return out;
}

// N(rho) = tr_in[(rho^T (x) I_out) J].
inline Matrix apply_channel(const ChoiOperator& choi, const Matrix& rho) {
  if (rho.rows() != choi.in_dim || rho.cols() != choi.in_dim)
    throw std::invalid_argument("apply_channel: state dimension mismatch");
  Matrix lifted = tensor(rho.transpose(), identity(choi.out_dim));
  return partial_trace(lifted * choi.matrix, choi.shape(), {1});
}

inline bool is_cptp(const ChoiOperator& choi, double tol = kChoiTol) {
  if (!is_psd(choi.matrix, kEigTol)) return false;
  return (choi.trace_out() - identity(choi.in_dim)).cwiseAbs().maxCoeff() <=
         tol;
}

inline bool is_hpts(const VirtualChannel& v, double tol = kChoiTol) {
  Matrix t = v.choi.trace_out();
  return (t - v.scaling * identity(v.choi.in_dim)).cwiseAbs().maxCoeff() <= tol;
}

namespace detail {

// tr_{B'}[J] == tr_{BB'}[J] (x) I_B / d_B on (A', B, A, B').
inline bool ns_b_to_a(const Matrix& j, const SubsystemShape& s, double tol) {
  Matrix lhs = partial_trace(j, s, {0, 1, 2});
  Matrix aa = partial_trace(j, s, {0, 2}) / double(s.dims[1]);
  // Rebuild aa (x) I_B on ordering (A', B, A).
  Matrix rhs = permute_systems(
      tensor(aa, identity(s.dims[1])),
      SubsystemShape{s.dims[0], s.dims[2], s.dims[1]}, {0, 2, 1});
  return (lhs - rhs).cwiseAbs().maxCoeff() <= tol;
}

// tr_{A}[J] == tr_{A'A}[J] (x) I_{A'} / d_{A'} on (A', B, A, B').
inline bool ns_a_to_b(const Matrix& j, const SubsystemShape& s, double tol) {
  Matrix lhs = partial_trace(j, s, {0, 1, 3});
  Matrix bb = partial_trace(j, s, {1, 3}) / double(s.dims[0]);
  Matrix rhs = tensor(identity(s.dims[0]), bb);
  return (lhs - rhs).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace detail

inline bool is_no_signaling(const SuperchannelChoi& s, double tol = kChoiTol) {
  SubsystemShape shape = s.shape();
  double scale = std::max({1.0, s.p_plus, s.p_minus});
  for (const Matrix* j : {&s.j_plus, &s.j_minus}) {
    if (!detail::ns_b_to_a(*j, shape, tol * scale)) return false;
    if (!detail::ns_a_to_b(*j, shape, tol * scale)) return false;
  }
  return true;
}

// Checks the scaled-CPTP-part condition tr_AB'[J+-] = p+- I_{A'B} plus
// positivity of both parts.
inline bool has_valid_cptp_parts(const SuperchannelChoi& s,
                                 double tol = kChoiTol) {
  SubsystemShape shape = s.shape();
  double scale = std::max({1.0, s.p_plus, s.p_minus});
  const int dab = s.dim_a_in * s.dim_b;
  struct Part {
    const Matrix* j;
    double p;
  };
  for (Part part : {Part{&s.j_plus, s.p_plus}, Part{&s.j_minus, s.p_minus}}) {
    if (part.p < -tol) return false;
    if (!is_psd(*part.j, kEigTol * scale)) return false;
    Matrix t = partial_trace(*part.j, shape, {0, 1});
    if ((t - part.p * identity(dab)).cwiseAbs().maxCoeff() > tol * scale)
      return false;
  }
  return true;
}

// Twirling over U (x) conj(U): projects onto span{Phi, I - Phi}.
inline Matrix twirl(const Matrix& x, int d) {
  if (d < 2) throw std::invalid_argument("twirl: d must be >=2");
  if (x.rows() != Eigen::Index(d) * d || x.cols() != x.rows())
    throw std::invalid_argument("twirl: matrix must be d^2 x d^2");
  Matrix phi = phi_state(d);
  Matrix rest = identity(d * d) - phi;
  Complex a = (x * phi).trace();
  Complex b = (x * rest).trace();
  return a * phi + b / double(d * d - 1) * rest;
}

// Composes a code with a source channel:
// J^M~ = tr_AB[((J^N)^T (x) I_{A'B'}) (J+ - J-)], Choi on (A', B').
inline VirtualChannel compose_superchannel(const SuperchannelChoi& code,
                                           const ChoiOperator& n) {
  if (n.in_dim != code.dim_a || n.out_dim != code.dim_b)
    throw std::invalid_argument("compose_superchannel: dimension mismatch");
  const int da_in = code.dim_a_in, db = code.dim_b, da = code.dim_a,
            db_out = code.dim_b_out;
  Matrix delta = code.matrix();
  Matrix out = Matrix::Zero(da_in * db_out, da_in * db_out);
  // out[(a',b'),(c',d')] =
  //   sum_{a,b,g,d} J^N[(g,d),(a,b)] delta[(a',d,g,b'),(c',b,a,d')].
  auto sidx = [&](int x0, int x1, int x2, int x3) {
    return ((x0 * db + x1) * da + x2) * db_out + x3;
  };
  for (int ap = 0; ap < da_in; ++ap)
    for (int bp = 0; bp < db_out; ++bp)
      for (int cp = 0; cp < da_in; ++cp)
        for (int dp = 0; dp < db_out; ++dp) {
          Complex acc = 0.0;
          for (int a = 0; a < da; ++a)
            for (int b = 0; b < db; ++b)
              for (int g = 0; g < da; ++g)
                for (int dd = 0; dd < db; ++dd)
                  acc += n.matrix(g * db + dd, a * db + b) *
                         delta(sidx(ap, dd, g, bp), sidx(cp, b, a, dp));
          out(ap * db_out + bp, cp * db_out + dp) = acc;
        }
  out = (out + out.adjoint()) / 2.0;
  return VirtualChannel(ChoiOperator(std::move(out), da_in, db_out),
                        code.p_plus - code.p_minus);
}

// Splits an HPTS map into p+ J+ - p- J- with J+- CPTP. The positive and
// negative eigenparts are padded with ((alpha I - tr_out P) (x) I/d_out) so
// that both parts become valid channels; not cost-optimal by construction.
inline QuasiDecomposition decompose_hpts(const VirtualChannel& v,
                                         double tol = kChoiTol) {
  if (!is_hpts(v, tol))
    throw std::invalid_argument("decompose_hpts: input is not HPTS");
  const int din = v.choi.in_dim, dout = v.choi.out_dim;
  EigResult eig = eig_hermitian(v.choi.matrix);
  Matrix pos = Matrix::Zero(din * dout, din * dout);
  Matrix neg = Matrix::Zero(din * dout, din * dout);
  for (int k = 0; k < eig.eigenvalues.size(); ++k) {
    double w = eig.eigenvalues(k);
    Matrix proj = eig.eigenvectors.col(k) * eig.eigenvectors.col(k).adjoint();
    if (w >= 0.0)
      pos += w * proj;
    else
      neg -= w * proj;
  }
  SubsystemShape shape{din, dout};
  Matrix tp = partial_trace(pos, shape, {0});
  double alpha = eig_hermitian(tp).eigenvalues.maxCoeff();
  if (alpha <= tol) {
    // Nonpositive-part-free degenerate case (e.g. the zero map): fall back to
    // a pure padding channel.
    alpha = std::max(alpha, 0.0);
  }
  Matrix pad_plus = tensor(alpha * identity(din) - tp, identity(dout)) /
                    double(dout);
  Matrix tn = partial_trace(neg, shape, {0});
  double beta = alpha - v.scaling;
  Matrix pad_minus =
      tensor(beta * identity(din) - tn, identity(dout)) / double(dout);

  Matrix jp = pos + pad_plus;
  Matrix jm = neg + pad_minus;
  double p_plus = alpha, p_minus = beta;

  auto normalize = [&](Matrix& j, double p) -> ChoiOperator {
    if (p <= kEigTol) {
      // Zero-weight part: any channel works; use the fully depolarizing one.
      Matrix filler = tensor(identity(din), identity(dout)) / double(dout);
      return ChoiOperator(std::move(filler), din, dout);
    }
    Matrix m = j / p;
    m = (m + m.adjoint()) / 2.0;
    return ChoiOperator(std::move(m), din, dout);
  };
  QuasiDecomposition d;
  d.p_plus = p_plus;
  d.choi_plus = normalize(jp, p_plus);
  d.p_minus = p_minus;
  d.choi_minus = normalize(jm, p_minus);
  return d;
}

// JSON wire format: {in_dim, out_dim, re: [[...]], im: [[...]]}.
inline nlohmann::json choi_to_json(const ChoiOperator& c) {
  nlohmann::json j;
  j["in_dim"] = c.in_dim;
  j["out_dim"] = c.out_dim;
  std::vector<std::vector<double>> re, im;
  for (Eigen::Index r = 0; r < c.matrix.rows(); ++r) {
    std::vector<double> rr, ri;
    for (Eigen::Index col = 0; col < c.matrix.cols(); ++col) {
      rr.push_back(c.matrix(r, col).real());
      ri.push_back(c.matrix(r, col).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  j["re"] = re;
  j["im"] = im;
  return j;
}

inline ChoiOperator choi_from_json(const nlohmann::json& j) {
  int in_dim = j.at("in_dim").get<int>();
  int out_dim = j.at("out_dim").get<int>();
  auto re = j.at("re").get<std::vector<std::vector<double>>>();
  auto im = j.at("im").get<std::vector<std::vector<double>>>();
  const int side = in_dim * out_dim;
  if (static_cast<int>(re.size()) != side || static_cast<int>(im.size()) != side)
    throw std::invalid_argument("choi_from_json: row count mismatch");
  Matrix m(side, side);
  for (int r = 0; r < side; ++r) {
    if (static_cast<int>(re[size_t(r)].size()) != side ||
        static_cast<int>(im[size_t(r)].size()) != side)
      throw std::invalid_argument("choi_from_json: column count mismatch");
    for (int c = 0; c < side; ++c)
      m(r, c) = Complex(re[size_t(r)][size_t(c)], im[size_t(r)][size_t(c)]);
  }
  return ChoiOperator(std::move(m), in_dim, out_dim);
}

}  // namespace shadowsim

#endif  // SHADOWSIM_CHANNELS_HPP_
