#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "xmems/channel.hpp"
#include "xmems/mems.hpp"
#include "xmems/sdp.hpp"

using namespace xmems;
using Catch::Matchers::WithinAbs;

namespace {

RMatrix random_symmetric(Index d, oracle::Rng& rng) {
  std::normal_distribution<double> nd;
  RMatrix m(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = nd(rng);
  return (m + m.transpose()) / 2.0;
}

RMatrix random_pd(Index d, oracle::Rng& rng) {
  const RMatrix g = random_symmetric(d, rng);
  return g * g.transpose() + 0.5 * RMatrix::Identity(d, d);
}

/// Inequality-form instance that is strictly feasible at lambda = 0 and whose
/// dual has the strictly feasible point Z0, hence bounded with attained optimum.
sdp::SdpProblem random_inequality(const std::vector<Index>& sizes, Index vars, oracle::Rng& rng) {
  sdp::InequalityForm q;
  sdp::BlockDense f0, z0;
  for (Index s : sizes) {
    f0.push_back(random_pd(s, rng));
    z0.push_back(random_pd(s, rng));
  }
  q.f0 = sdp::BlockMatrix::from_dense(f0);
  q.c.resize(vars);
  for (Index i = 0; i < vars; ++i) {
    sdp::BlockDense fi;
    for (Index s : sizes) fi.push_back(random_symmetric(s, rng));
    q.f.push_back(sdp::BlockMatrix::from_dense(fi));
    q.c(i) = sdp::inner(fi, z0);
  }
  sdp::SdpProblem p;
  p.block_sizes = sizes;
  p.data = std::move(q);
  return p;
}

}  // namespace

TEST_CASE("2x2 PSD boundary: minimize x s.t. [[x,1],[1,x]] >= 0") {
  sdp::InequalityForm q;
  q.c = RVector::Ones(1);
  RMatrix f0(2, 2), f1 = RMatrix::Identity(2, 2);
  f0 << 0, 1, 1, 0;
  q.f0 = sdp::BlockMatrix::from_dense({f0});
  q.f = {sdp::BlockMatrix::from_dense({f1})};
  sdp::SdpProblem p;
  p.block_sizes = {2};
  p.data = q;
  const sdp::SdpSolution s = sdp::solve(p);
  CHECK(s.status == sdp::Status::optimal);
  CHECK_THAT(s.primal_vector(0), WithinAbs(1.0, 1e-8));
  CHECK_THAT(s.primal_value, WithinAbs(1.0, 1e-8));
  CHECK(s.gap <= 1e-9);
  CHECK_THAT(s.dual_value, WithinAbs(s.primal_value, 1e-8));
}

TEST_CASE("purity SDP at n = 2, P = 1 gives p* = -2") {
  const sdp::SdpSolution s = sdp::solve(build_purity_sdp(1.0, 2));
  CHECK(s.status == sdp::Status::optimal);
  CHECK_THAT(s.primal_value, WithinAbs(-2.0, 1e-8));
}

TEST_CASE("standard form with a single feasible point returns it") {
  oracle::Rng rng(41);
  for (Index d : {2, 3, 5}) {
    const RMatrix x0 = random_pd(d, rng);
    sdp::StandardForm f;
    std::vector<double> rhs;
    for (Index i = 0; i < d; ++i) {
      for (Index j = i; j < d; ++j) {
        RMatrix a = RMatrix::Zero(d, d);
        a(i, j) = a(j, i) = 1.0;
        f.constraints.push_back(sdp::BlockMatrix::from_dense({a}));
        rhs.push_back((a.array() * x0.array()).sum());
      }
    }
    f.rhs = Eigen::Map<RVector>(rhs.data(), static_cast<Index>(rhs.size()));
    f.cost = sdp::BlockMatrix::from_dense({random_symmetric(d, rng)});
    sdp::SdpProblem p;
    p.block_sizes = {d};
    p.data = f;
    const sdp::SdpSolution s = sdp::solve(p);
    CHECK(s.status == sdp::Status::optimal);
    CHECK((s.primal_matrix[0] - x0).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("to_standard_primal of the purity SDP") {
  const sdp::SdpProblem p = build_purity_sdp(0.25, 4);
  const sdp::SdpProblem d = sdp::to_standard_primal(p);
  REQUIRE(d.form() == sdp::Form::standard_primal);
  CHECK(d.standard().rhs(0) == -2.0);
  for (Index i = 1; i < 4; ++i) CHECK(d.standard().rhs(i) == -1.0);
  CHECK(d.block_sizes == p.block_sizes);
  CHECK_THROWS_AS(sdp::to_standard_primal(d), std::invalid_argument);

  const sdp::SdpSolution a = sdp::solve(p), b = sdp::solve(d);
  CHECK_THAT(a.reported, WithinAbs(b.reported, 1e-8));
  CHECK_THAT(b.reported, WithinAbs(2.0 * gamma_of_purity(0.25, 4), 1e-8));
}

TEST_CASE("scalar LMI becomes a linear program") {
  // minimize lambda s.t. lambda - 1 >= 0, 3 - lambda >= 0
  sdp::InequalityForm q;
  q.c = RVector::Ones(1);
  q.f0 = sdp::BlockMatrix::from_dense({RMatrix::Constant(1, 1, -1.0), RMatrix::Constant(1, 1, 3.0)});
  q.f = {sdp::BlockMatrix::from_dense({RMatrix::Constant(1, 1, 1.0), RMatrix::Constant(1, 1, -1.0)})};
  sdp::SdpProblem p;
  p.block_sizes = {1, 1};
  p.data = q;
  const sdp::SdpProblem lp = sdp::to_standard_primal(p);
  // dual: minimize -z1 + 3 z2 s.t. z1 - z2 = 1, z >= 0
  CHECK(RMatrix(lp.standard().cost.blocks[0])(0, 0) == -1.0);
  CHECK(RMatrix(lp.standard().cost.blocks[1])(0, 0) == 3.0);
  CHECK(lp.standard().rhs(0) == 1.0);
  const sdp::SdpSolution s = sdp::solve(p);
  CHECK(s.status == sdp::Status::optimal);
  CHECK_THAT(s.primal_vector(0), WithinAbs(1.0, 1e-8));
  CHECK_THAT(sdp::solve(lp).reported, WithinAbs(1.0, 1e-8));
}

TEST_CASE("random instances: inequality and standard forms agree") {
  oracle::Rng rng(42);
  for (int t = 0; t < 30; ++t) {
    const std::vector<Index> sizes =
        t % 2 ? std::vector<Index>{3, 2} : std::vector<Index>{1 + static_cast<Index>(rng() % 5)};
    const sdp::SdpProblem p = random_inequality(sizes, 1 + static_cast<Index>(rng() % 4), rng);
    const sdp::SdpSolution a = sdp::solve(p);
    const sdp::SdpSolution b = sdp::solve(sdp::to_standard_primal(p));
    INFO("instance " << t);
    REQUIRE(a.status == sdp::Status::optimal);
    REQUIRE(b.status == sdp::Status::optimal);
    const double scale = std::max(1.0, std::abs(a.primal_value));
    CHECK_THAT(a.reported, WithinAbs(b.reported, 1e-7 * scale));
    CHECK_THAT(a.primal_value, WithinAbs(a.dual_value, 1e-7 * scale));
    // the returned pair is feasible
    CHECK(sdp::check_feasibility(p, a.primal_vector).min_slack_eigenvalue >= -1e-8);
    const sdp::ResidualReport dual = sdp::check_feasibility(sdp::to_standard_primal(p), a.dual_matrix);
    CHECK(dual.max_equality_residual <= 1e-8 * scale);
    CHECK(dual.min_slack_eigenvalue >= -1e-8);
  }
}

TEST_CASE("weak duality on every feasible iterate") {
  oracle::Rng rng(43);
  for (int t = 0; t < 10; ++t) {
    const sdp::SdpProblem p = random_inequality({4, 2}, 3, rng);
    const sdp::SdpSolution s = sdp::solve(p);
    REQUIRE(s.status == sdp::Status::optimal);
    int checked = 0;
    for (const auto& h : s.history) {
      const double scale = 1.0 + std::abs(h.primal_value) + std::abs(h.dual_value);
      if (h.primal_infeasibility <= 1e-6 && h.dual_infeasibility <= 1e-6) {
        ++checked;
        // in the standard primal that is solved: <C,X> >= b^T y
        CHECK(h.primal_value - h.dual_value >= -1e-6 * scale);
      }
    }
    CHECK(checked > 0);
  }
}

TEST_CASE("solver is deterministic") {
  const sdp::SdpProblem p = build_purity_sdp(0.3, 8);
  const sdp::SdpSolution a = sdp::solve(p), b = sdp::solve(p);
  CHECK(a.iterations == b.iterations);
  CHECK(a.primal_value == b.primal_value);
  CHECK(a.dual_value == b.dual_value);
  CHECK((a.primal_vector - b.primal_vector).norm() == 0.0);
}

TEST_CASE("infeasible problem is not reported optimal") {
  // lambda >= 1 and lambda <= 0
  sdp::InequalityForm q;
  q.c = RVector::Ones(1);
  q.f0 = sdp::BlockMatrix::from_dense({RMatrix::Constant(1, 1, -1.0), RMatrix::Constant(1, 1, 0.0)});
  q.f = {sdp::BlockMatrix::from_dense({RMatrix::Constant(1, 1, 1.0), RMatrix::Constant(1, 1, -1.0)})};
  sdp::SdpProblem p;
  p.block_sizes = {1, 1};
  p.data = q;
  const sdp::SdpSolution s = sdp::solve(p);
  CHECK(s.status != sdp::Status::optimal);
}

TEST_CASE("problem validation") {
  sdp::InequalityForm q;
  q.c = RVector::Ones(1);
  RMatrix bad(2, 2);
  bad << 1, 2, 0, 1;
  q.f0 = sdp::BlockMatrix::from_dense({bad});
  q.f = {sdp::BlockMatrix::from_dense({RMatrix::Identity(2, 2)})};
  sdp::SdpProblem p;
  p.block_sizes = {2};
  p.data = q;
  CHECK_THROWS_AS(sdp::solve(p), std::invalid_argument);
  p.block_sizes = {3};
  std::get<sdp::InequalityForm>(p.data).f0 = sdp::BlockMatrix::from_dense({RMatrix::Identity(2, 2)});
  CHECK_THROWS_AS(sdp::solve(p), std::invalid_argument);
}

TEST_CASE("purity family: optimum and dual point on 25-point grids") {
  for (std::size_t n : {2, 4, 8, 16}) {
    const double lo = 1.0 / (static_cast<double>(n) + 1.0);
    for (int k = 1; k <= 25; ++k) {
      const double p = k == 25 ? 1.0 : lo + (1.0 - lo) * k / 25.0;
      const sdp::SdpProblem prob = build_purity_sdp(p, n);
      const sdp::SdpSolution s = sdp::solve(prob);
      INFO("n = " << n << ", P = " << p);
      CHECK(s.status == sdp::Status::optimal);
      CHECK_THAT(s.reported, WithinAbs(2.0 * gamma_of_purity(p, n), 1e-8));
      const sdp::ResidualReport dual = sdp::check_feasibility(sdp::to_standard_primal(prob), s.dual_matrix);
      CHECK(dual.max_equality_residual <= 1e-8);
      CHECK(dual.min_slack_eigenvalue >= -1e-8);
    }
  }
}

TEST_CASE("check_feasibility on known points") {
  const double p = 0.25;
  const std::size_t n = 4;
  const sdp::SdpProblem prob = build_purity_sdp(p, n);
  const PurityOptimum o = xmems_spectrum_from_purity(p, n);
  const RVector lam = Eigen::Map<const RVector>(o.spectrum.data(), 4);
  CHECK(sdp::check_feasibility(prob, lam).min_slack_eigenvalue >= -1e-10);

  const sdp::ResidualReport zero = sdp::check_feasibility(prob, RVector::Zero(4));
  CHECK_THAT(zero.min_slack_eigenvalue, WithinAbs(p - 1.0, 1e-12));
  CHECK(zero.objective == 0.0);

  const DualCertificate c = dual_certificate(p, n);
  const RMatrix z = c.matrix.matrix().real();
  const sdp::BlockDense zb{z.topLeftCorner(5, 5), z.bottomRightCorner(1, 1)};
  const sdp::ResidualReport dr = sdp::check_feasibility(sdp::to_standard_primal(prob), zb);
  CHECK(dr.max_equality_residual <= 1e-10);
  CHECK(dr.min_slack_eigenvalue >= -1e-9);

  CHECK_THROWS_AS(sdp::check_feasibility(prob, RVector::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(sdp::check_feasibility(prob, zb), std::invalid_argument);
}

TEST_CASE("real embedding") {
  oracle::Rng rng(44);
  const RMatrix r = random_symmetric(3, rng);
  const RMatrix e = sdp::real_embedding(HermitianMatrix(r));
  CHECK((e.topLeftCorner(3, 3) - r).norm() == 0.0);
  CHECK((e.bottomRightCorner(3, 3) - r).norm() == 0.0);
  CHECK(e.topRightCorner(3, 3).norm() == 0.0);

  CMatrix y = CMatrix::Zero(2, 2);
  y(0, 1) = cplx(0, 1);
  y(1, 0) = cplx(0, -1);
  const RVector ev = eigenvalues(sdp::real_embedding(HermitianMatrix(y)));
  CHECK_THAT(ev(0), WithinAbs(1.0, 1e-15));
  CHECK_THAT(ev(1), WithinAbs(1.0, 1e-15));
  CHECK_THAT(ev(2), WithinAbs(-1.0, 1e-15));
  CHECK_THAT(ev(3), WithinAbs(-1.0, 1e-15));

  const CMatrix id = CMatrix::Identity(3, 3);
  const HermitianMatrix psi(oracle::choi({id}));
  CHECK(numerical_rank(sdp::real_embedding(psi)) == 2);
  CHECK(complex_rank(psi) == 1);
}

TEST_CASE("real embedding preserves PSD status and doubles rank") {
  oracle::Rng rng(45);
  for (int t = 0; t < 50; ++t) {
    const Index d = 2 + static_cast<Index>(rng() % 6);
    const Index rank = 1 + static_cast<Index>(rng() % d);
    const CMatrix g = oracle::ginibre(d, rank, rng);
    const HermitianMatrix psd(CMatrix(g * g.adjoint()));
    const RMatrix e = sdp::real_embedding(psd);
    CHECK(min_eigenvalue(e) >= -1e-12 * e.norm());
    CHECK(numerical_rank(e) == 2 * numerical_rank(psd));
    CHECK(numerical_rank(psd) == rank);
    const HermitianMatrix h(oracle::random_hermitian(d, rng));
    CHECK((min_eigenvalue(h) >= 0) == (min_eigenvalue(sdp::real_embedding(h)) >= 0));
    CHECK((sdp::complex_from_embedding(sdp::real_embedding(h)).matrix() - h.matrix()).norm() <= 1e-15);
  }
}
