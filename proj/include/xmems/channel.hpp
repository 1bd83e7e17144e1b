#pragma once

// Quantum channels in Choi and Kraus form, Dicke mixtures, and the log-det
// rank-minimization loop that searches for a channel with few Kraus
// operators mapping a given state onto a target.
//
// Storage convention: the first tensor factor of a Choi matrix is the channel
// input, the second the output. Row (alpha * d + i) pairs input basis state
// alpha with output basis state i, so tr_2 C = 1 and
// apply(rho) = tr_1[(rho^T (x) 1) C].

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "xmems/qmat.hpp"
#include "xmems/sdp.hpp"

namespace xmems {

inline constexpr double kCptpTolerance = 1e-8;
inline constexpr double kChoiPsdSlack = 1e-9;

namespace detail {

inline Index square_root_dim(Index big, const std::string& what) {
  const Index d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(big))));
  if (d <= 0 || d * d != big) {
    throw std::invalid_argument(what + ": dimension " + std::to_string(big) + " is not a square");
  }
  return d;
}

}  // namespace detail

/// ||tr_2 C - 1_d||_F
inline double cptp_residual(const HermitianMatrix& c, Index d) {
  const HermitianMatrix t = partial_trace(c, d, d, TracedFactor::second);
  return (t.matrix() - CMatrix::Identity(d, d)).norm();
}

class ChoiMatrix {
 public:
  /// Validates PSD (down to -1e-9) and trace preservation (1e-8).
  static ChoiMatrix make(HermitianMatrix c) {
    const Index d = detail::square_root_dim(c.dim(), "ChoiMatrix");
    const double res = cptp_residual(c, d);
    if (res > kCptpTolerance) {
      throw std::invalid_argument("ChoiMatrix: partial trace over output differs from identity by " +
                                  std::to_string(res));
    }
    const double mn = min_eigenvalue(c);
    if (mn < -kChoiPsdSlack) {
      throw std::invalid_argument("ChoiMatrix: not PSD, min eigenvalue " + std::to_string(mn));
    }
    return ChoiMatrix(d, std::move(c));
  }

  Index d() const { return d_; }
  const HermitianMatrix& matrix() const { return c_; }

 private:
  ChoiMatrix(Index d, HermitianMatrix c) : d_(d), c_(std::move(c)) {}
  Index d_;
  HermitianMatrix c_;
};

/// ||sum_m M_m^dagger M_m - 1||_F
inline double completeness_residual(const std::vector<CMatrix>& ops) {
  if (ops.empty()) return std::numeric_limits<double>::infinity();
  const Index d = ops.front().rows();
  CMatrix s = CMatrix::Zero(d, d);
  for (const auto& m : ops) s += m.adjoint() * m;
  return (s - CMatrix::Identity(d, d)).norm();
}

class KrausSet {
 public:
  static KrausSet make(std::vector<CMatrix> ops) {
    if (ops.empty()) throw std::invalid_argument("KrausSet: no operators");
    const Index d = ops.front().rows();
    for (const auto& m : ops) {
      if (m.rows() != d || m.cols() != d) {
        throw std::invalid_argument("KrausSet: operators must be square with equal dimension");
      }
    }
    const double res = completeness_residual(ops);
    if (res > kCptpTolerance) {
      throw std::invalid_argument("KrausSet: completeness violated by " + std::to_string(res));
    }
    KrausSet k;
    k.ops_ = std::move(ops);
    return k;
  }

  Index d() const { return ops_.front().rows(); }
  std::size_t size() const { return ops_.size(); }
  const std::vector<CMatrix>& operators() const { return ops_; }

 private:
  KrausSet() = default;
  std::vector<CMatrix> ops_;
};

/// sum_m (1 (x) M_m)|Psi><Psi|(1 (x) M_m)^dagger with |Psi> = sum_a |a>|a>.
inline ChoiMatrix choi_from_kraus(const KrausSet& k) {
  const Index d = k.d();
  CMatrix c = CMatrix::Zero(d * d, d * d);
  CVector v(d * d);
  for (const auto& m : k.operators()) {
    for (Index a = 0; a < d; ++a) v.segment(a * d, d) = m.col(a);
    c.noalias() += v * v.adjoint();
  }
  return ChoiMatrix::make(HermitianMatrix(c));
}

/// Kraus operators from the eigenpairs of C above tol * lambda_max; the count
/// equals the numerical rank of C.
inline KrausSet kraus_from_choi(const ChoiMatrix& c, double tol = kDefaultRankTolerance) {
  const Index d = c.d();
  const Eigensystem es = eig_hermitian(c.matrix());
  const double top = es.values.size() ? std::max(es.values(0), 0.0) : 0.0;
  if (es.values.size() && es.values.minCoeff() < -kChoiPsdSlack * std::max(top, 1.0)) {
    throw std::invalid_argument("kraus_from_choi: negative eigenvalue " +
                                std::to_string(es.values.minCoeff()));
  }
  const double cut = tol * std::max(top, 1.0);
  std::vector<CMatrix> ops;
  for (Index k = 0; k < es.values.size(); ++k) {
    if (es.values(k) <= cut) break;
    const CVector v = std::sqrt(es.values(k)) * es.vectors.col(k);
    CMatrix m(d, d);
    for (Index a = 0; a < d; ++a) m.col(a) = v.segment(a * d, d);
    ops.push_back(std::move(m));
  }
  return KrausSet::make(std::move(ops));
}

/// tr_1[(rho^T (x) 1) C]
inline HermitianMatrix apply_channel(const HermitianMatrix& c, const HermitianMatrix& rho) {
  const Index d = rho.dim();
  if (c.dim() != d * d) {
    throw std::invalid_argument("apply_channel: Choi dimension " + std::to_string(c.dim()) +
                                " does not match state dimension " + std::to_string(d));
  }
  const CMatrix& cm = c.matrix();
  CMatrix out = CMatrix::Zero(d, d);
  for (Index g = 0; g < d; ++g) {
    for (Index a = 0; a < d; ++a) {
      const cplx w = rho(g, a);
      if (w == cplx(0.0)) continue;
      out += w * cm.block(g * d, a * d, d, d);
    }
  }
  return HermitianMatrix(CMatrix((out + out.adjoint()) / 2.0));
}

inline HermitianMatrix apply_channel(const ChoiMatrix& c, const HermitianMatrix& rho) {
  return apply_channel(c.matrix(), rho);
}

/// sum_m M rho M^dagger
inline HermitianMatrix apply_kraus(const KrausSet& k, const HermitianMatrix& rho) {
  if (rho.dim() != k.d()) throw std::invalid_argument("apply_kraus: dimension mismatch");
  CMatrix out = CMatrix::Zero(k.d(), k.d());
  for (const auto& m : k.operators()) out += m * rho.matrix() * m.adjoint();
  return HermitianMatrix(CMatrix((out + out.adjoint()) / 2.0));
}

/// 1_d (x) target, the channel that discards its input and prepares target.
inline HermitianMatrix collapse_choi(const HermitianMatrix& target) {
  return kron(HermitianMatrix::identity(target.dim()), target);
}

/// {sqrt(a_mu) |mu><nu|} over the eigenpairs of target above the default
/// rank tolerance and every basis state nu. Kept weights are renormalized so
/// that completeness is exact.
inline KrausSet trivial_collapse_channel(const HermitianMatrix& target) {
  const Index d = target.dim();
  const Eigensystem es = eig_hermitian(target);
  const Index r = numerical_rank(es.values);
  const double kept = es.values.head(r).sum();
  if (!(kept > 0)) throw std::invalid_argument("trivial_collapse_channel: target has no support");
  std::vector<CMatrix> ops;
  for (Index mu = 0; mu < r; ++mu) {
    const CVector u = std::sqrt(es.values(mu) / kept) * es.vectors.col(mu);
    for (Index nu = 0; nu < d; ++nu) {
      CMatrix m = CMatrix::Zero(d, d);
      m.col(nu) = u;
      ops.push_back(std::move(m));
    }
  }
  return KrausSet::make(std::move(ops));
}

/// Normalized symmetric superposition of the N-qubit basis states with k ones.
inline CVector dicke_state(int qubits, int k) {
  if (qubits < 1 || qubits > 30) throw std::invalid_argument("dicke_state: N must be in [1, 30]");
  if (k < 0 || k > qubits) throw std::invalid_argument("dicke_state: k must be in [0, N]");
  const Index dim = Index{1} << qubits;
  CVector v = CVector::Zero(dim);
  Index count = 0;
  for (Index s = 0; s < dim; ++s) {
    if (__builtin_popcountll(static_cast<unsigned long long>(s)) == k) {
      v(s) = 1.0;
      ++count;
    }
  }
  return v / std::sqrt(static_cast<double>(count));
}

/// Equal mixture of the N+1 Dicke states; purity 1/(N+1).
inline HermitianMatrix dicke_mixture(int qubits) {
  const Index dim = Index{1} << qubits;
  CMatrix m = CMatrix::Zero(dim, dim);
  for (int k = 0; k <= qubits; ++k) {
    const CVector v = dicke_state(qubits, k);
    m += v * v.adjoint();
  }
  return HermitianMatrix(CMatrix(m / static_cast<double>(qubits + 1)));
}

// ---------------------------------------------------------------------------
// Conversion SDP

/// Hermitian constraint tr(A C) = rhs on the complex Choi matrix, A stored
/// as a full (both triangles) list of nonzeros.
struct HermitianConstraint {
  struct Entry {
    Index row, col;
    cplx value;
  };
  std::vector<Entry> entries;
  double rhs = 0;

  CMatrix dense(Index dim) const {
    CMatrix m = CMatrix::Zero(dim, dim);
    for (const auto& e : entries) m(e.row, e.col) += e.value;
    return m;
  }
};

namespace detail {

/// Real-linear constraints fixing tr_2 C = 1 and tr_1[(rho^T (x) 1) C] = target.
/// Each complex condition tr(E C) = z contributes tr((E+E^dag)/2 C) = Re z and,
/// off the diagonal, tr((E-E^dag)/(2i) C) = Im z. The diagonal map constraint
/// for the last basis state is implied by the others together with trace
/// preservation and is left out.
inline std::vector<HermitianConstraint> conversion_constraints(const HermitianMatrix& rho,
                                                               const HermitianMatrix& target) {
  const Index d = rho.dim();
  using Entry = HermitianConstraint::Entry;
  std::vector<HermitianConstraint> out;
  const cplx i1(0.0, 1.0);

  // e holds the nonzeros of E; E^dag has the transposed conjugates.
  auto push_pair = [&](const std::vector<Entry>& e, cplx value, bool diagonal) {
    HermitianConstraint re, im;
    for (const auto& x : e) {
      re.entries.push_back({x.row, x.col, x.value / 2.0});
      re.entries.push_back({x.col, x.row, std::conj(x.value) / 2.0});
      im.entries.push_back({x.row, x.col, x.value / (2.0 * i1)});
      im.entries.push_back({x.col, x.row, -std::conj(x.value) / (2.0 * i1)});
    }
    re.rhs = value.real();
    im.rhs = value.imag();
    out.push_back(std::move(re));
    if (!diagonal) out.push_back(std::move(im));
  };

  // (tr_2 C)_{ab} = tr(C (|b><a| (x) 1))
  for (Index a = 0; a < d; ++a) {
    for (Index b = a; b < d; ++b) {
      std::vector<Entry> e;
      for (Index i = 0; i < d; ++i) e.push_back({b * d + i, a * d + i, 1.0});
      push_pair(e, a == b ? cplx(1.0) : cplx(0.0), a == b);
    }
  }
  // out_{kl} = tr(C (rho^T (x) |l><k|))
  for (Index k = 0; k < d; ++k) {
    for (Index l = k; l < d; ++l) {
      if (k == l && k == d - 1) continue;
      std::vector<Entry> e;
      for (Index a = 0; a < d; ++a)
        for (Index g = 0; g < d; ++g)
          if (rho(g, a) != cplx(0.0)) e.push_back({a * d + l, g * d + k, rho(g, a)});
      push_pair(e, target(k, l), k == l);
    }
  }
  return out;
}

/// emb(A) / 2 for Hermitian A given by its nonzeros.
inline sdp::BlockMatrix half_embedding(const std::vector<HermitianConstraint::Entry>& entries, Index dim) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(4 * entries.size());
  for (const auto& e : entries) {
    const double re = e.value.real() / 2.0, im = e.value.imag() / 2.0;
    if (re != 0.0) {
      t.emplace_back(e.row, e.col, re);
      t.emplace_back(e.row + dim, e.col + dim, re);
    }
    if (im != 0.0) {
      t.emplace_back(e.row + dim, e.col, im);
      t.emplace_back(e.row, e.col + dim, -im);
    }
  }
  sdp::SparseMatrix m(2 * dim, 2 * dim);
  m.setFromTriplets(t.begin(), t.end());
  m.prune(0.0);
  m.makeCompressed();
  return sdp::BlockMatrix{{std::move(m)}};
}

inline sdp::BlockMatrix half_embedding(const HermitianMatrix& w) {
  std::vector<HermitianConstraint::Entry> e;
  for (Index c = 0; c < w.dim(); ++c)
    for (Index r = 0; r < w.dim(); ++r)
      if (w(r, c) != cplx(0.0)) e.push_back({r, c, w(r, c)});
  return half_embedding(e, w.dim());
}

/// Constraint part of the conversion SDP; the cost is filled in per call.
inline sdp::SdpProblem conversion_skeleton(const HermitianMatrix& rho, const HermitianMatrix& target) {
  const Index d = rho.dim();
  if (target.dim() != d) throw std::invalid_argument("build_conversion_sdp: rho and target differ in dimension");
  const auto cons = conversion_constraints(rho, target);
  sdp::StandardForm f;
  f.rhs.resize(static_cast<Index>(cons.size()));
  for (std::size_t i = 0; i < cons.size(); ++i) {
    f.constraints.push_back(half_embedding(cons[i].entries, d * d));
    f.rhs(static_cast<Index>(i)) = cons[i].rhs;
  }
  sdp::SdpProblem p;
  p.block_sizes = {2 * d * d};
  p.data = std::move(f);
  return p;
}

inline void set_conversion_cost(sdp::SdpProblem& p, const HermitianMatrix& w) {
  const Index big = p.block_sizes.front() / 2;
  if (w.dim() != big) throw std::invalid_argument("build_conversion_sdp: W must have dimension d^2");
  std::get<sdp::StandardForm>(p.data).cost = half_embedding(w);
}

}  // namespace detail

/// minimize tr(W C) over Choi matrices C of CPTP maps with C(rho) = target,
/// posed over the real embedding of C. With H = complex_from_embedding(X),
/// <emb(A)/2, X> = tr(A H), so the standard form carries halved embeddings.
inline sdp::SdpProblem build_conversion_sdp(const HermitianMatrix& rho, const HermitianMatrix& target,
                                            const HermitianMatrix& w) {
  sdp::SdpProblem p = detail::conversion_skeleton(rho, target);
  detail::set_conversion_cost(p, w);
  return p;
}

/// Rank of a complex Hermitian matrix counted on its real embedding.
inline Index complex_rank(const HermitianMatrix& c, double tau = kDefaultRankTolerance) {
  const Index r = numerical_rank(sdp::real_embedding(c), tau);
  return (r + 1) / 2;
}

// ---------------------------------------------------------------------------
// Log-det heuristic

struct IdentityScaledStart {};
struct CollapseStart {};
using InitialPoint = std::variant<CollapseStart, IdentityScaledStart, HermitianMatrix>;

struct LogDetConfig {
  double delta = 0.2;
  int max_iters = 300;
  double rank_tol = kDefaultRankTolerance;
  int stall_window = 20;
  InitialPoint initial = CollapseStart{};
  sdp::SolveOptions solver{};

  void validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("LogDetConfig: delta must lie in (0, 1)");
    if (max_iters <= 0 || stall_window <= 0) throw std::invalid_argument("LogDetConfig: counts must be positive");
    if (!(rank_tol > 0.0)) throw std::invalid_argument("LogDetConfig: rank_tol must be positive");
  }
};

struct LogDetIteration {
  int iteration = 0;
  Index complex_rank = 0;
  double objective = 0;  // tr(W_{i-1} C_i)
  double logdet = 0;     // log det(C_i + delta 1)
  double cptp_residual = 0;
  double map_residual = 0;
  sdp::Status status = sdp::Status::optimal;
  int sdp_iterations = 0;
};

struct LogDetResult {
  std::vector<LogDetIteration> history;
  HermitianMatrix choi;  // last iterate
  bool stalled = false;

  std::vector<Index> rank_trace() const {
    std::vector<Index> r;
    for (const auto& h : history) r.push_back(h.complex_rank);
    return r;
  }
};

/// Thrown when an inner SDP fails badly enough that the iterate would break
/// the CPTP or mapping invariants.
class LogDetFailure : public std::runtime_error {
 public:
  LogDetFailure(int iteration, const std::string& what)
      : std::runtime_error("log-det iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

namespace detail {

struct ShiftedInverse {
  HermitianMatrix inverse;
  double logdet;
};

/// (C + delta 1)^{-1} and log det(C + delta 1) from one eigendecomposition.
inline ShiftedInverse shifted_inverse(const HermitianMatrix& c, double delta) {
  const Eigensystem es = eig_hermitian(c);
  const RVector shifted = es.values.array() + delta;
  if (shifted.minCoeff() <= 0.0) throw NumericalError("shifted_inverse: C + delta 1 is not positive definite");
  const CMatrix inv = es.vectors * shifted.cwiseInverse().cast<cplx>().asDiagonal() * es.vectors.adjoint();
  return {HermitianMatrix(CMatrix((inv + inv.adjoint()) / 2.0)), shifted.array().log().sum()};
}

}  // namespace detail

/// Iterates C_{i+1} = argmin tr[(C_i + delta 1)^{-1} C] over CPTP maps taking
/// rho to target. Row 0 describes the initial point, with objective
/// tr[(C_0 + delta 1)^{-1} C_0]. Stops after max_iters or when the complex
/// rank has not changed for stall_window iterations. `on_iteration`, when
/// set, is called after every row is recorded.
inline LogDetResult logdet_minimize_rank(const HermitianMatrix& rho, const HermitianMatrix& target,
                                         const LogDetConfig& cfg = {},
                                         const std::function<void(const LogDetIteration&)>& on_iteration = {}) {
  cfg.validate();
  const Index d = rho.dim();
  if (target.dim() != d) throw std::invalid_argument("logdet_minimize_rank: dimension mismatch");

  HermitianMatrix c;
  if (std::holds_alternative<CollapseStart>(cfg.initial)) {
    c = collapse_choi(target);
  } else if (std::holds_alternative<IdentityScaledStart>(cfg.initial)) {
    c = (1.0 - cfg.delta) * HermitianMatrix::identity(d * d);
  } else {
    c = std::get<HermitianMatrix>(cfg.initial);
    if (c.dim() != d * d) throw std::invalid_argument("logdet_minimize_rank: custom initial point has wrong dimension");
  }

  LogDetResult res;
  auto record = [&](int iter, const HermitianMatrix& ci, const detail::ShiftedInverse& si, double objective,
                    sdp::Status st, int sdp_iters) {
    LogDetIteration row;
    row.iteration = iter;
    row.complex_rank = complex_rank(ci, cfg.rank_tol);
    row.objective = objective;
    row.logdet = si.logdet;
    row.cptp_residual = cptp_residual(ci, d);
    row.map_residual = (apply_channel(ci, rho).matrix() - target.matrix()).norm();
    row.status = st;
    row.sdp_iterations = sdp_iters;
    res.history.push_back(row);
    if (on_iteration) on_iteration(row);
  };

  detail::ShiftedInverse si = detail::shifted_inverse(c, cfg.delta);
  record(0, c, si, (si.inverse.matrix() * c.matrix()).trace().real(), sdp::Status::optimal, 0);

  sdp::SdpProblem prob = detail::conversion_skeleton(rho, target);
  int unchanged = 0;
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    detail::set_conversion_cost(prob, si.inverse);
    const sdp::SdpSolution sol = sdp::solve(prob, cfg.solver);
    if (sol.status == sdp::Status::numerical_failure && sol.primal_matrix.empty()) {
      throw LogDetFailure(iter, "solver returned no iterate");
    }
    HermitianMatrix next = sdp::complex_from_embedding(sol.primal_matrix.front());
    const double cptp = cptp_residual(next, d);
    const double map = (apply_channel(next, rho).matrix() - target.matrix()).norm();
    if (cptp > 1e-7 || map > 1e-6) {
      throw LogDetFailure(iter, std::string("solver status ") + sdp::to_string(sol.status) +
                                    ", CPTP residual " + std::to_string(cptp) + ", map residual " +
                                    std::to_string(map));
    }
    const double objective = (si.inverse.matrix() * next.matrix()).trace().real();
    c = std::move(next);
    si = detail::shifted_inverse(c, cfg.delta);
    const Index prev_rank = res.history.back().complex_rank;
    record(iter, c, si, objective, sol.status, sol.iterations);
    unchanged = res.history.back().complex_rank == prev_rank ? unchanged + 1 : 0;
    if (unchanged >= cfg.stall_window) {
      res.stalled = true;
      break;
    }
  }
  res.choi = c;
  return res;
}

}  // namespace xmems
