#pragma once

// Dense primal-dual interior-point solver for small and medium semidefinite
// programs over a block-diagonal PSD cone.
//
// Two problem forms are supported:
//
//   inequality:       minimize c^T lambda  s.t.  F0 + sum_i lambda_i F_i >= 0
//   standard primal:  minimize <C, X>      s.t.  <A_i, X> = b_i,  X >= 0
//
// The inequality form is solved through its dual, which is a standard primal
// problem with C = F0, A_i = F_i, b = c (see to_standard_primal).
//
// The standard primal solver is an infeasible-start path-following method
// with Nesterov-Todd scaling and a Mehrotra predictor-corrector step. The
// Schur complement M_ij = <A_i, W A_j W> is assembled densely, restricting
// each product to the row support of A_j.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "xmems/qmat.hpp"

namespace xmems::sdp {

using SparseMatrix = Eigen::SparseMatrix<double>;
using BlockDense = std::vector<RMatrix>;

/// Block-diagonal symmetric matrix with sparse blocks. Both triangles are
/// stored.
struct BlockMatrix {
  std::vector<SparseMatrix> blocks;

  static BlockMatrix zero(const std::vector<Index>& sizes) {
    BlockMatrix m;
    for (Index s : sizes) m.blocks.emplace_back(s, s);
    return m;
  }

  static BlockMatrix from_dense(const BlockDense& dense, double drop = 0.0) {
    BlockMatrix m;
    for (const auto& d : dense) m.blocks.push_back(d.sparseView(1.0, drop));
    for (auto& b : m.blocks) b.makeCompressed();
    return m;
  }

  BlockDense to_dense() const {
    BlockDense out;
    for (const auto& b : blocks) out.emplace_back(RMatrix(b));
    return out;
  }

  std::vector<Index> sizes() const {
    std::vector<Index> s;
    for (const auto& b : blocks) s.push_back(b.rows());
    return s;
  }
};

inline double inner(const BlockMatrix& a, const BlockDense& x) {
  double s = 0.0;
  for (std::size_t b = 0; b < a.blocks.size(); ++b) {
    const SparseMatrix& blk = a.blocks[b];
    for (Index k = 0; k < blk.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(blk, k); it; ++it) s += it.value() * x[b](it.row(), it.col());
    }
  }
  return s;
}

inline double inner(const BlockDense& a, const BlockDense& x) {
  double s = 0.0;
  for (std::size_t b = 0; b < a.size(); ++b) s += a[b].cwiseProduct(x[b]).sum();
  return s;
}

struct InequalityForm {
  RVector c;
  BlockMatrix f0;
  std::vector<BlockMatrix> f;
};

struct StandardForm {
  BlockMatrix cost;
  std::vector<BlockMatrix> constraints;
  RVector rhs;
};

/// Maps the optimal value of the problem's own objective to the value the
/// caller wants reported: reported = offset + scale * value.
struct ValueConvention {
  double scale = 1.0;
  double offset = 0.0;
  double apply(double value) const { return offset + scale * value; }
};

enum class Form { inequality, standard_primal };

struct SdpProblem {
  std::vector<Index> block_sizes;
  std::variant<InequalityForm, StandardForm> data;
  ValueConvention convention;

  Form form() const {
    return std::holds_alternative<InequalityForm>(data) ? Form::inequality : Form::standard_primal;
  }
  const InequalityForm& inequality() const { return std::get<InequalityForm>(data); }
  const StandardForm& standard() const { return std::get<StandardForm>(data); }
  Index num_variables() const {
    return form() == Form::inequality ? inequality().c.size() : standard().rhs.size();
  }
};

namespace detail {

inline void check_block(const SparseMatrix& m, Index expected, const std::string& what) {
  if (m.rows() != expected || m.cols() != expected) {
    throw std::invalid_argument("SdpProblem: " + what + " has inconsistent block size");
  }
  const SparseMatrix t = m.transpose();
  const double asym = (m - t).norm();
  if (asym > 1e-12 * std::max(1.0, m.norm())) {
    throw std::invalid_argument("SdpProblem: " + what + " is not symmetric");
  }
}

inline void check_blocks(const BlockMatrix& m, const std::vector<Index>& sizes,
                         const std::string& what) {
  if (m.blocks.size() != sizes.size()) {
    throw std::invalid_argument("SdpProblem: " + what + " has wrong block count");
  }
  for (std::size_t b = 0; b < sizes.size(); ++b) check_block(m.blocks[b], sizes[b], what);
}

}  // namespace detail

/// Throws std::invalid_argument on inconsistent block structure or asymmetric data.
inline void validate(const SdpProblem& p) {
  if (p.form() == Form::inequality) {
    const auto& q = p.inequality();
    if (static_cast<std::size_t>(q.c.size()) != q.f.size()) {
      throw std::invalid_argument("SdpProblem: cost length differs from number of F_i");
    }
    detail::check_blocks(q.f0, p.block_sizes, "F0");
    for (std::size_t i = 0; i < q.f.size(); ++i) {
      detail::check_blocks(q.f[i], p.block_sizes, "F" + std::to_string(i + 1));
    }
  } else {
    const auto& q = p.standard();
    if (static_cast<std::size_t>(q.rhs.size()) != q.constraints.size()) {
      throw std::invalid_argument("SdpProblem: rhs length differs from number of A_i");
    }
    detail::check_blocks(q.cost, p.block_sizes, "C");
    for (std::size_t i = 0; i < q.constraints.size(); ++i) {
      detail::check_blocks(q.constraints[i], p.block_sizes, "A" + std::to_string(i + 1));
    }
  }
}

/// The dual of an inequality-form problem, written as a standard primal:
/// minimize <F0, Z> s.t. <F_i, Z> = c_i, Z >= 0. Its optimal value is -p*,
/// which the returned convention folds back into the caller's reporting.
inline SdpProblem to_standard_primal(const SdpProblem& p) {
  if (p.form() != Form::inequality) {
    throw std::invalid_argument("to_standard_primal: problem is already in standard form");
  }
  const auto& q = p.inequality();
  SdpProblem out;
  out.block_sizes = p.block_sizes;
  out.data = StandardForm{q.f0, q.f, q.c};
  out.convention = ValueConvention{-p.convention.scale, p.convention.offset};
  return out;
}

/// [[Re H, -Im H], [Im H, Re H]]. PSD iff H is, with twice the rank.
inline RMatrix real_embedding(const HermitianMatrix& h) {
  const Index d = h.dim();
  RMatrix out(2 * d, 2 * d);
  const RMatrix re = h.matrix().real();
  const RMatrix im = h.matrix().imag();
  out.topLeftCorner(d, d) = re;
  out.topRightCorner(d, d) = -im;
  out.bottomLeftCorner(d, d) = im;
  out.bottomRightCorner(d, d) = re;
  return out;
}

/// Inverse of real_embedding, projecting an arbitrary symmetric 2d x 2d
/// matrix onto the embedded subspace first. For symmetric A_emb = emb(A) and
/// any symmetric X, <emb(A), X> = 2 tr(A H) with H the returned matrix.
inline HermitianMatrix complex_from_embedding(const RMatrix& x) {
  if (x.rows() != x.cols() || x.rows() % 2 != 0) {
    throw std::invalid_argument("complex_from_embedding: dimension must be even and square");
  }
  const Index d = x.rows() / 2;
  const RMatrix re = (x.topLeftCorner(d, d) + x.bottomRightCorner(d, d)) / 2.0;
  const RMatrix im = (x.bottomLeftCorner(d, d) - x.topRightCorner(d, d)) / 2.0;
  CMatrix h(d, d);
  h.real() = re;
  h.imag() = im;
  return HermitianMatrix(CMatrix((h + h.adjoint()) / 2.0));
}

struct SolveOptions {
  double feas_tol = 1e-9;
  double gap_tol = 1e-9;
  int max_iters = 100;
  double step_fraction = 0.98;
  double regularization = 1e-12;
  /// Lower bound on the Mehrotra centering parameter. Pure Mehrotra steps
  /// drift off the central path and leave the solution error at O(sqrt(mu))
  /// on curved boundaries; the floor keeps it O(mu).
  double min_centering = 0.2;
};

enum class Status { optimal, max_iterations, infeasible_detected, numerical_failure };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::max_iterations: return "max-iterations";
    case Status::infeasible_detected: return "infeasible-detected";
    case Status::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

/// Per-iteration record, in terms of the standard primal that was solved.
struct IterationLog {
  int iteration = 0;
  double primal_value = 0;
  double dual_value = 0;
  double primal_infeasibility = 0;
  double dual_infeasibility = 0;
  double mu = 0;
  double step_primal = 0;
  double step_dual = 0;
  double centrality = 0;  // min eig(XZ) / mu
};

/// Solution in the form of the input problem.
///   inequality:  primal_vector = lambda, dual_matrix = Z (dual variable),
///                slack = F0 + sum lambda_i F_i.
///   standard:    primal_matrix = X, dual_vector = y, slack = C - sum y_i A_i.
/// primal_value / dual_value are objective values of that form (no
/// convention applied); `reported` applies the problem's ValueConvention to
/// the primal value.
struct SdpSolution {
  Status status = Status::numerical_failure;
  int iterations = 0;
  RVector primal_vector;
  BlockDense primal_matrix;
  RVector dual_vector;
  BlockDense dual_matrix;
  BlockDense slack;
  double primal_value = 0;
  double dual_value = 0;
  double reported = 0;
  double gap = 0;  // relative
  double primal_infeasibility = 0;
  double dual_infeasibility = 0;
  std::vector<IterationLog> history;
};

namespace detail {

/// One constraint restricted to one block: its row support, the dense
/// principal submatrix on that support and its nonzeros in block coordinates.
struct SupportBlock {
  std::vector<Index> support;
  RMatrix dense;
  struct Entry {
    Index row, col;
    double value;
  };
  std::vector<Entry> entries;
  std::vector<Entry> lower;  // row >= col, off-diagonal values doubled
};

inline SupportBlock compile(const SparseMatrix& m) {
  SupportBlock out;
  std::vector<char> used(m.rows(), 0);
  for (Index k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      if (it.value() == 0.0) continue;
      used[it.row()] = 1;
      out.entries.push_back({it.row(), it.col(), it.value()});
    }
  }
  std::vector<Index> local(m.rows(), -1);
  for (Index r = 0; r < m.rows(); ++r) {
    if (used[r]) {
      local[r] = static_cast<Index>(out.support.size());
      out.support.push_back(r);
    }
  }
  const Index s = static_cast<Index>(out.support.size());
  out.dense = RMatrix::Zero(s, s);
  for (const auto& e : out.entries) {
    out.dense(local[e.row], local[e.col]) += e.value;
    if (e.row > e.col) out.lower.push_back({e.row, e.col, 2.0 * e.value});
    else if (e.row == e.col) out.lower.push_back(e);
  }
  return out;
}

inline double inner(const SupportBlock& a, const RMatrix& x) {
  double s = 0.0;
  for (const auto& e : a.entries) s += e.value * x(e.row, e.col);
  return s;
}

/// <A, S> for symmetric S of which only the lower triangle is valid.
inline double inner_lower(const SupportBlock& a, const RMatrix& s) {
  double v = 0.0;
  for (const auto& e : a.lower) v += e.value * s(e.row, e.col);
  return v;
}

inline void add_scaled(const SupportBlock& a, double w, RMatrix& out) {
  for (const auto& e : a.entries) out(e.row, e.col) += w * e.value;
}

struct Scaling {
  RMatrix l;      // chol(X)
  RMatrix g;      // W = G G^T, G^T Z G = G^{-1} X G^{-T} = diag(d)
  RMatrix w;
  RVector d;
  RMatrix v;      // right singular vectors of R^T L
};

/// Largest alpha with X + alpha dX >= 0, given L = chol(X).
inline double max_step(const RMatrix& l, const RMatrix& dx) {
  const auto tri = l.triangularView<Eigen::Lower>();
  RMatrix t = tri.solve(dx);
  t = tri.solve(t.transpose()).transpose();
  t = (t + t.transpose()) / 2.0;
  const double lam = min_eigenvalue(t);
  return lam < 0 ? -1.0 / lam : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Solve a standard primal problem. block_sizes must match the data.
inline SdpSolution solve_standard(const StandardForm& p, const std::vector<Index>& sizes,
                                  const SolveOptions& opts) {
  using detail::SupportBlock;
  const std::size_t nb = sizes.size();
  const Index m = p.rhs.size();
  const Index n_total = std::accumulate(sizes.begin(), sizes.end(), Index{0});

  std::vector<std::vector<SupportBlock>> a(m);
  for (Index i = 0; i < m; ++i) {
    for (std::size_t b = 0; b < nb; ++b) a[i].push_back(detail::compile(p.constraints[i].blocks[b]));
  }
  const BlockDense c = p.cost.to_dense();

  auto apply_a = [&](const BlockDense& x) {
    RVector out(m);
    for (Index i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t b = 0; b < nb; ++b) s += detail::inner(a[i][b], x[b]);
      out(i) = s;
    }
    return out;
  };
  auto apply_at = [&](const RVector& y) {
    BlockDense out;
    for (Index s : sizes) out.push_back(RMatrix::Zero(s, s));
    for (Index i = 0; i < m; ++i) {
      if (y(i) == 0.0) continue;
      for (std::size_t b = 0; b < nb; ++b) detail::add_scaled(a[i][b], y(i), out[b]);
    }
    return out;
  };

  // Starting point scaled by the data norms.
  double max_a_norm = 0.0;
  double xi_scale = 0.0;
  for (Index i = 0; i < m; ++i) {
    double nrm2 = 0.0;
    for (std::size_t b = 0; b < nb; ++b) nrm2 += a[i][b].dense.squaredNorm();
    const double nrm = std::sqrt(nrm2);
    max_a_norm = std::max(max_a_norm, nrm);
    xi_scale = std::max(xi_scale, (1.0 + std::abs(p.rhs(i))) / (1.0 + nrm));
  }
  double c_norm = 0.0;
  for (const auto& blk : c) c_norm += blk.squaredNorm();
  c_norm = std::sqrt(c_norm);
  const double b_norm = p.rhs.norm();

  BlockDense x, z;
  for (Index s : sizes) {
    const double sq = std::sqrt(static_cast<double>(s));
    const double xi = std::max({10.0, sq, static_cast<double>(s) * xi_scale});
    const double eta = std::max({10.0, sq, max_a_norm, c_norm});
    x.push_back(xi * RMatrix::Identity(s, s));
    z.push_back(eta * RMatrix::Identity(s, s));
  }
  RVector y = RVector::Zero(m);

  SdpSolution sol;
  // Best iterate so far, by the worst of the three scaled stopping measures;
  // returned when the run ends without meeting the tolerances.
  struct Snapshot {
    BlockDense x, z;
    RVector y;
    double score = std::numeric_limits<double>::infinity();
  } best;
  auto finish = [&](Status st, int iters) {
    if (st != Status::optimal && best.score < std::numeric_limits<double>::infinity()) {
      x = best.x;
      y = best.y;
      z = best.z;
    }
    sol.status = st;
    sol.iterations = iters;
    sol.primal_matrix = x;
    sol.dual_vector = y;
    sol.dual_matrix = z;
    BlockDense slack = apply_at(y);
    for (std::size_t b = 0; b < nb; ++b) slack[b] = c[b] - slack[b];
    sol.slack = slack;
    sol.primal_value = inner(c, x);
    sol.dual_value = p.rhs.dot(y);
    sol.gap = std::abs(sol.primal_value - sol.dual_value) /
              (1.0 + std::abs(sol.primal_value) + std::abs(sol.dual_value));
    sol.primal_infeasibility = (p.rhs - apply_a(x)).norm() / (1.0 + b_norm);
    double rd = 0.0;
    for (std::size_t b = 0; b < nb; ++b) rd += (slack[b] - z[b]).squaredNorm();
    sol.dual_infeasibility = std::sqrt(rd) / (1.0 + c_norm);
    sol.reported = sol.primal_value;
    return sol;
  };

  for (int iter = 0;; ++iter) {
    const RVector rp = p.rhs - apply_a(x);
    BlockDense rd = apply_at(y);
    for (std::size_t b = 0; b < nb; ++b) rd[b] = c[b] - z[b] - rd[b];
    const double pobj = inner(c, x);
    const double dobj = p.rhs.dot(y);
    const double mu = inner(x, z) / static_cast<double>(n_total);
    double rd_norm = 0.0;
    for (const auto& blk : rd) rd_norm += blk.squaredNorm();
    rd_norm = std::sqrt(rd_norm);
    const double pinf = rp.norm() / (1.0 + b_norm);
    const double dinf = rd_norm / (1.0 + c_norm);
    const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

    if (!sol.history.empty()) {
      sol.history.back().primal_value = pobj;
      sol.history.back().dual_value = dobj;
      sol.history.back().primal_infeasibility = pinf;
      sol.history.back().dual_infeasibility = dinf;
      sol.history.back().mu = mu;
    } else {
      sol.history.push_back({0, pobj, dobj, pinf, dinf, mu, 0, 0, 0});
    }

    const double score = std::max({pinf / opts.feas_tol, dinf / opts.feas_tol, relgap / opts.gap_tol});
    if (std::isfinite(score) && score < best.score) best = {x, z, y, score};

    if (pinf <= opts.feas_tol && dinf <= opts.feas_tol && relgap <= opts.gap_tol) {
      return finish(Status::optimal, iter);
    }
    if (iter >= opts.max_iters) return finish(Status::max_iterations, iter);
    double x_tr = 0.0;
    for (const auto& blk : x) x_tr += blk.trace();
    if (!std::isfinite(x_tr) || x_tr > 1e12 * (1.0 + b_norm) || y.norm() > 1e12 * (1.0 + c_norm)) {
      return finish(Status::infeasible_detected, iter);
    }

    // Nesterov-Todd scaling per block.
    std::vector<detail::Scaling> sc(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      Eigen::LLT<RMatrix> lx(x[b]), lz(z[b]);
      if (lx.info() != Eigen::Success || lz.info() != Eigen::Success) {
        return finish(Status::numerical_failure, iter);
      }
      sc[b].l = lx.matrixL();
      const RMatrix r = lz.matrixL();
      Eigen::BDCSVD<RMatrix> svd(r.transpose() * sc[b].l, Eigen::ComputeFullU | Eigen::ComputeFullV);
      sc[b].d = svd.singularValues();
      if (sc[b].d.minCoeff() <= 0.0) return finish(Status::numerical_failure, iter);
      sc[b].v = svd.matrixV();
      sc[b].g = sc[b].l * sc[b].v * sc[b].d.cwiseSqrt().cwiseInverse().asDiagonal();
      sc[b].w = sc[b].g * sc[b].g.transpose();
    }
    {
      double mn = std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < nb; ++b) mn = std::min(mn, sc[b].d.cwiseAbs2().minCoeff());
      sol.history.back().centrality = mn / mu;
    }

    // Schur complement M_ij = <A_i, W A_j W>.
    RMatrix schur = RMatrix::Zero(m, m);
    RMatrix prod;
    for (std::size_t b = 0; b < nb; ++b) {
      const RMatrix& w = sc[b].w;
      for (Index j = 0; j < m; ++j) {
        const SupportBlock& aj = a[j][b];
        const Index s = static_cast<Index>(aj.support.size());
        if (s == 0) continue;
        RMatrix w_rows(s, w.cols());
        for (Index r = 0; r < s; ++r) w_rows.row(r) = w.row(aj.support[r]);
        const RMatrix t = aj.dense * w_rows;
        // W A_j W = W[:,R] A_j[R,R] W[R,:] is symmetric; form its lower half only.
        prod.resize(w.rows(), w.cols());
        prod.triangularView<Eigen::Lower>() = w_rows.transpose() * t;
        for (Index i = j; i < m; ++i) schur(i, j) += detail::inner_lower(a[i][b], prod);
      }
    }
    schur = schur.selfadjointView<Eigen::Lower>();
    schur.diagonal().array() += opts.regularization;
    Eigen::LLT<RMatrix> schur_llt(schur);
    std::optional<Eigen::LDLT<RMatrix>> schur_ldlt;
    if (schur_llt.info() != Eigen::Success) {
      schur_ldlt.emplace(schur);
      if (schur_ldlt->info() != Eigen::Success) return finish(Status::numerical_failure, iter);
    }
    auto schur_solve = [&](const RVector& rhs) -> RVector {
      return schur_ldlt ? RVector(schur_ldlt->solve(rhs)) : RVector(schur_llt.solve(rhs));
    };

    // W Rd W, reused by both solves.
    BlockDense wrdw(nb);
    for (std::size_t b = 0; b < nb; ++b) wrdw[b] = sc[b].w * rd[b] * sc[b].w;

    struct Direction {
      BlockDense dx, dz;
      RVector dy;
    };
    // rc: right-hand side of the linearized complementarity in the scaled frame.
    auto direction = [&](const BlockDense& rc) -> std::optional<Direction> {
      BlockDense h(nb);
      for (std::size_t b = 0; b < nb; ++b) {
        const RVector& d = sc[b].d;
        const Index s = d.size();
        RMatrix e(s, s);
        for (Index i = 0; i < s; ++i)
          for (Index j = 0; j < s; ++j) e(i, j) = 2.0 * rc[b](i, j) / (d(i) + d(j));
        h[b] = sc[b].g * e * sc[b].g.transpose();
      }
      BlockDense tmp(nb);
      for (std::size_t b = 0; b < nb; ++b) tmp[b] = h[b] - wrdw[b];
      const RVector rhs = rp - apply_a(tmp);
      Direction dir;
      dir.dy = schur_solve(rhs);
      if (!dir.dy.allFinite()) return std::nullopt;
      dir.dz = apply_at(dir.dy);
      dir.dx.resize(nb);
      for (std::size_t b = 0; b < nb; ++b) {
        dir.dz[b] = rd[b] - dir.dz[b];
        RMatrix dx = h[b] - sc[b].w * dir.dz[b] * sc[b].w;
        dir.dx[b] = (dx + dx.transpose()) / 2.0;
      }
      return dir;
    };

    auto steps = [&](const Direction& dir) {
      double ap = std::numeric_limits<double>::infinity();
      double ad = ap;
      for (std::size_t b = 0; b < nb; ++b) {
        ap = std::min(ap, detail::max_step(sc[b].l, dir.dx[b]));
        Eigen::LLT<RMatrix> lz(z[b]);
        ad = std::min(ad, detail::max_step(RMatrix(lz.matrixL()), dir.dz[b]));
      }
      return std::pair{ap, ad};
    };

    // Predictor.
    BlockDense rc(nb);
    for (std::size_t b = 0; b < nb; ++b) rc[b] = RMatrix(RVector(-sc[b].d.cwiseAbs2()).asDiagonal());
    auto pred = direction(rc);
    if (!pred) return finish(Status::numerical_failure, iter);
    auto [ap_aff, ad_aff] = steps(*pred);
    ap_aff = std::min(1.0, ap_aff);
    ad_aff = std::min(1.0, ad_aff);
    double mu_aff = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      mu_aff += ((x[b] + ap_aff * pred->dx[b]).cwiseProduct(z[b] + ad_aff * pred->dz[b])).sum();
    }
    mu_aff /= static_cast<double>(n_total);
    const double sigma =
        std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), std::clamp(opts.min_centering, 0.0, 1.0), 1.0);

    // Corrector, with the second-order term of the predictor.
    for (std::size_t b = 0; b < nb; ++b) {
      const auto tri = sc[b].l.triangularView<Eigen::Lower>();
      RMatrix t = tri.solve(pred->dx[b]);
      t = tri.solve(t.transpose()).transpose();
      const RVector dsq = sc[b].d.cwiseSqrt();
      const RMatrix dx_s = dsq.asDiagonal() * (sc[b].v.transpose() * t * sc[b].v) * dsq.asDiagonal();
      const RMatrix dz_s = sc[b].g.transpose() * pred->dz[b] * sc[b].g;
      const RMatrix cross = (dx_s * dz_s + dz_s * dx_s) / 2.0;
      rc[b] = sigma * mu * RMatrix::Identity(dsq.size(), dsq.size());
      rc[b].diagonal() -= sc[b].d.cwiseAbs2();
      rc[b] -= cross;
    }
    auto corr = direction(rc);
    if (!corr) return finish(Status::numerical_failure, iter);
    auto [ap, ad] = steps(*corr);
    ap = std::min(1.0, opts.step_fraction * ap);
    ad = std::min(1.0, opts.step_fraction * ad);

    for (std::size_t b = 0; b < nb; ++b) {
      x[b] += ap * corr->dx[b];
      z[b] += ad * corr->dz[b];
      x[b] = (x[b] + x[b].transpose()) / 2.0;
      z[b] = (z[b] + z[b].transpose()) / 2.0;
    }
    y += ad * corr->dy;
    sol.history.back().step_primal = ap;
    sol.history.back().step_dual = ad;
    sol.history.push_back({iter + 1, 0, 0, 0, 0, 0, 0, 0, 0});

    if (ap < 1e-10 && ad < 1e-10) return finish(Status::numerical_failure, iter + 1);
  }
}

/// Solve either form. Deterministic for identical inputs and options.
inline SdpSolution solve(const SdpProblem& problem, const SolveOptions& opts = {}) {
  validate(problem);
  if (problem.form() == Form::standard_primal) {
    SdpSolution s = solve_standard(problem.standard(), problem.block_sizes, opts);
    s.reported = problem.convention.apply(s.primal_value);
    return s;
  }
  const auto& q = problem.inequality();
  const SdpProblem dual = to_standard_primal(problem);
  const SdpSolution inner_sol = solve_standard(dual.standard(), dual.block_sizes, opts);

  SdpSolution s;
  s.status = inner_sol.status;
  s.iterations = inner_sol.iterations;
  s.history = inner_sol.history;
  s.primal_vector = -inner_sol.dual_vector;
  s.dual_matrix = inner_sol.primal_matrix;
  BlockDense slack = q.f0.to_dense();
  for (std::size_t i = 0; i < q.f.size(); ++i) {
    for (std::size_t b = 0; b < slack.size(); ++b) slack[b] += s.primal_vector(i) * RMatrix(q.f[i].blocks[b]);
  }
  s.dual_value = -inner_sol.primal_value;
  s.slack = std::move(slack);
  s.primal_value = q.c.dot(s.primal_vector);
  s.gap = inner_sol.gap;
  s.primal_infeasibility = inner_sol.dual_infeasibility;
  s.dual_infeasibility = inner_sol.primal_infeasibility;
  s.reported = problem.convention.apply(s.primal_value);
  return s;
}

/// Residuals of a candidate point.
struct ResidualReport {
  double max_equality_residual = 0;
  double min_slack_eigenvalue = 0;
  double objective = 0;
};

/// Inequality form, primal point lambda: min eigenvalue of F0 + sum lambda_i F_i.
inline ResidualReport check_feasibility(const SdpProblem& p, const RVector& lambda) {
  if (p.form() != Form::inequality) {
    throw std::invalid_argument("check_feasibility: vector point requires an inequality-form problem");
  }
  const auto& q = p.inequality();
  if (lambda.size() != q.c.size()) {
    throw std::invalid_argument("check_feasibility: point has wrong dimension");
  }
  ResidualReport r;
  r.objective = q.c.dot(lambda);
  r.min_slack_eigenvalue = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < p.block_sizes.size(); ++b) {
    RMatrix f = RMatrix(q.f0.blocks[b]);
    for (Index i = 0; i < lambda.size(); ++i) f += lambda(i) * RMatrix(q.f[i].blocks[b]);
    r.min_slack_eigenvalue = std::min(r.min_slack_eigenvalue, min_eigenvalue(f));
  }
  return r;
}

/// Standard form, primal point X: equality residuals and min eigenvalue of X.
inline ResidualReport check_feasibility(const SdpProblem& p, const BlockDense& x) {
  if (p.form() != Form::standard_primal) {
    throw std::invalid_argument("check_feasibility: matrix point requires a standard-form problem");
  }
  const auto& q = p.standard();
  if (x.size() != p.block_sizes.size()) {
    throw std::invalid_argument("check_feasibility: point has wrong block count");
  }
  ResidualReport r;
  r.objective = inner(q.cost, x);
  for (std::size_t i = 0; i < q.constraints.size(); ++i) {
    r.max_equality_residual =
        std::max(r.max_equality_residual, std::abs(inner(q.constraints[i], x) - q.rhs(i)));
  }
  r.min_slack_eigenvalue = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < x.size(); ++b) {
    if (x[b].rows() != p.block_sizes[b]) {
      throw std::invalid_argument("check_feasibility: block size mismatch");
    }
    r.min_slack_eigenvalue = std::min(r.min_slack_eigenvalue, min_eigenvalue(RMatrix((x[b] + x[b].transpose()) / 2.0)));
  }
  return r;
}

}  // namespace xmems::sdp
