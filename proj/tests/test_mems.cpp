#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "xmems/mems.hpp"

using namespace xmems;
using Catch::Matchers::WithinAbs;

namespace {

Spectrum pure_spectrum(std::size_t len) {
  std::vector<double> v(len, 0.0);
  v[0] = 1.0;
  return Spectrum::make(v);
}

std::vector<double> sorted_spectrum(const XState& x) { return oracle::spectrum(to_density_matrix(x).matrix()); }

}  // namespace

TEST_CASE("Spectrum validation") {
  CHECK_NOTHROW(Spectrum::make({0.4, 0.3, 0.2, 0.1}));
  CHECK_NOTHROW(Spectrum::make({0.5, 0.5, 0.0, -1e-13}));
  CHECK_THROWS_AS(Spectrum::make({0.1, 0.3, 0.2, 0.4}), std::invalid_argument);
  CHECK_THROWS_AS(Spectrum::make({0.5, 0.3, 0.1, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Spectrum::make({0.6, 0.3, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(Spectrum::make({1.1, 0.0, 0.0, -0.1}), std::invalid_argument);
  const Spectrum s = Spectrum::make({0.4, 0.3, 0.2, 0.1});
  CHECK(s.n() == 2);
  CHECK(s.lambda(1) == 0.4);
  CHECK_THAT(s.purity(), WithinAbs(0.3, 1e-16));
}

TEST_CASE("max_gm_for_spectrum fixed values") {
  CHECK(max_gm_for_spectrum(pure_spectrum(8)) == 1.0);
  CHECK(max_gm_for_spectrum(Spectrum::make(std::vector<double>(8, 0.125))) == 0.0);
}

TEST_CASE("two-qubit case reduces to the Verstraete expression") {
  oracle::Rng rng(31);
  for (int t = 0; t < 200; ++t) {
    const auto v = oracle::dirichlet(4, rng);
    const double expect = std::max(0.0, v[0] - v[2] - 2.0 * std::sqrt(v[1] * v[3]));
    CHECK_THAT(max_gm_for_spectrum(Spectrum::make(v)), WithinAbs(expect, 1e-15));
  }
}

TEST_CASE("xmems_from_spectrum: pure and uniform spectra") {
  const XState g = xmems_from_spectrum(pure_spectrum(8));
  CHECK(g.a()[0] == 0.5);
  CHECK(g.b()[0] == 0.5);
  CHECK(g.r()[0] == 0.5);
  for (std::size_t k = 1; k < 4; ++k) CHECK(g.a()[k] + g.b()[k] + g.r()[k] == 0.0);
  CHECK(gm_concurrence_x(g) == 1.0);

  const XState u = xmems_from_spectrum(Spectrum::make(std::vector<double>(8, 0.125)));
  CHECK((to_density_matrix(u).matrix() - CMatrix::Identity(8, 8) / 8.0).norm() <= 1e-16);
}

TEST_CASE("xmems_from_spectrum: isospectral and optimal on random spectra") {
  oracle::Rng rng(32);
  for (std::size_t n : {2, 4, 8, 16}) {
    for (int t = 0; t < 50; ++t) {
      const auto v = oracle::dirichlet(2 * n, rng);
      const Spectrum s = Spectrum::make(v);
      const XState x = xmems_from_spectrum(s);
      const auto got = sorted_spectrum(x);
      for (std::size_t i = 0; i < v.size(); ++i) CHECK_THAT(got[i], WithinAbs(v[i], 1e-10));
      CHECK_THAT(gm_concurrence_x(x), WithinAbs(max_gm_for_spectrum(s), 1e-12));
      CHECK(x.a()[0] == x.b()[0]);
    }
  }
}

TEST_CASE("no isospectral X-state beats the closed form") {
  oracle::Rng rng(33);
  for (std::size_t n : {2, 4}) {
    for (int t = 0; t < 40; ++t) {
      const auto v = oracle::dirichlet(2 * n, rng);
      const double claimed = max_gm_for_spectrum(Spectrum::make(v));
      const double found = oracle::isospectral_search(v, 2000, rng);
      CHECK(found <= claimed + 1e-9);
    }
  }
}

TEST_CASE("xmems_eigenvectors is orthogonal and diagonalizes the canonical state") {
  for (std::size_t n : {2, 4, 8}) {
    const RMatrix v = xmems_eigenvectors(n);
    const Index d = static_cast<Index>(2 * n);
    CHECK((v.transpose() * v - RMatrix::Identity(d, d)).norm() <= 1e-15);
    // dyadic spectrum: every product below is exact up to the 1/sqrt2 factors
    std::vector<double> s(2 * n);
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) total += (s[i] = static_cast<double>(2 * n - i));
    for (auto& x : s) x /= total;
    RVector lam(d);
    for (Index i = 0; i < d; ++i) lam(i) = s[static_cast<std::size_t>(i)];
    const RMatrix got = v * lam.asDiagonal() * v.transpose();
    const RMatrix expect = to_density_matrix(xmems_from_spectrum(Spectrum::make(s))).matrix().real();
    CHECK((got - expect).cwiseAbs().maxCoeff() <= 1e-16);
  }
}

TEST_CASE("optimal_unitary on a sorted diagonal state is V") {
  const std::vector<double> s{0.4, 0.3, 0.2, 0.1};
  RVector lam(4);
  lam << 0.4, 0.3, 0.2, 0.1;
  const CMatrix u = optimal_unitary(HermitianMatrix::diagonal(lam));
  CHECK((u - CMatrix(xmems_eigenvectors(2).cast<cplx>())).norm() <= 1e-15);
}

TEST_CASE("two-qubit optimal state matches the explicit construction") {
  oracle::Rng rng(34);
  for (int t = 0; t < 50; ++t) {
    const auto v = oracle::dirichlet(4, rng);
    const CMatrix rho = oracle::density_with_spectrum(v, rng);
    const CMatrix u = optimal_unitary(HermitianMatrix(rho));
    const CMatrix out = u * rho * u.adjoint();
    // (l1+l3)/2 (|00><00| + |11><11|) + (l1-l3)/2 (|00><11| + h.c.) + l2 |01><01| + l4 |10><10|
    CMatrix expect = CMatrix::Zero(4, 4);
    expect(0, 0) = expect(3, 3) = (v[0] + v[2]) / 2.0;
    expect(0, 3) = expect(3, 0) = (v[0] - v[2]) / 2.0;
    expect(1, 1) = v[1];
    expect(2, 2) = v[3];
    CHECK((out - expect).norm() <= 1e-9);
  }
}

TEST_CASE("optimal_unitary on random states") {
  oracle::Rng rng(35);
  for (std::size_t n : {2, 4, 8}) {
    for (int t = 0; t < 30; ++t) {
      const auto v = oracle::dirichlet(2 * n, rng);
      const CMatrix rho = oracle::density_with_spectrum(v, rng);
      const CMatrix u = optimal_unitary(HermitianMatrix(rho));
      const Index d = static_cast<Index>(2 * n);
      CHECK((u.adjoint() * u - CMatrix::Identity(d, d)).norm() <= 1e-10);
      const CMatrix target = to_density_matrix(xmems_from_spectrum(Spectrum::make(v))).matrix();
      CHECK((u * rho * u.adjoint() - target).norm() <= 1e-9);
    }
  }
}

TEST_CASE("optimal_unitary handles degenerate spectra") {
  oracle::Rng rng(36);
  const std::vector<double> v{0.25, 0.25, 0.25, 0.25, 0.0, 0.0, 0.0, 0.0};
  const CMatrix rho = oracle::density_with_spectrum(v, rng);
  const CMatrix u = optimal_unitary(HermitianMatrix(rho));
  const CMatrix target = to_density_matrix(xmems_from_spectrum(Spectrum::make(v))).matrix();
  CHECK((u * rho * u.adjoint() - target).norm() <= 1e-9);
}

TEST_CASE("gamma_of_purity fixed values") {
  CHECK(gamma_of_purity(1.0, 4) == 0.5);
  CHECK(gamma_of_purity(1.0 + 1e-13, 4) == 0.5);
  CHECK_THAT(gamma_of_purity(0.25, 4), WithinAbs(std::sqrt(1.0 / 40.0), 1e-15));
  CHECK_THAT(gamma_of_purity(0.25, 4), WithinAbs(0.1581139, 1e-7));
  for (std::size_t n : {2, 4, 8, 16, 32}) {
    const double pj = purity_junction(n);
    const double expect = 1.0 / (static_cast<double>(n) + 1.0);
    CHECK_THAT(gamma_of_purity(pj, n, PurityBranch::low), WithinAbs(expect, 1e-15));
    CHECK_THAT(gamma_of_purity(pj, n, PurityBranch::high), WithinAbs(expect, 1e-15));
  }
}

TEST_CASE("purity range is the half-open interval") {
  CHECK_THROWS_AS(gamma_of_purity(1.0 / 3.0, 2), std::domain_error);
  CHECK_THROWS_AS(gamma_of_purity(0.1, 4), std::domain_error);
  CHECK_THROWS_AS(gamma_of_purity(1.001, 4), std::domain_error);
  CHECK_THROWS_AS(gamma_of_purity(std::nan(""), 4), std::domain_error);
  CHECK_NOTHROW(gamma_of_purity(0.2 + 1e-12, 4));
  CHECK_THROWS_AS(build_purity_sdp(0.2, 4), std::domain_error);
  CHECK_THROWS_AS(dual_certificate(0.2, 4), std::domain_error);
}

TEST_CASE("xmems_spectrum_from_purity fixed values") {
  const PurityOptimum j = xmems_spectrum_from_purity(7.0 / 25.0, 4);
  CHECK_THAT(j.gamma, WithinAbs(0.2, 1e-15));
  const double expect[8] = {0.4, 0.2, 0.2, 0.2, 0, 0, 0, 0};
  for (int i = 0; i < 8; ++i) CHECK_THAT(j.spectrum[i], WithinAbs(expect[i], 1e-15));

  const PurityOptimum one = xmems_spectrum_from_purity(1.0, 8);
  CHECK(one.spectrum[0] == 1.0);
  for (std::size_t i = 1; i < 16; ++i) CHECK(one.spectrum[i] == 0.0);

  const PurityOptimum q = xmems_spectrum_from_purity(0.25, 4);
  const double g = std::sqrt(1.0 / 40.0);
  CHECK_THAT(q.spectrum[0], WithinAbs(0.2 + g, 1e-15));
  CHECK_THAT(q.spectrum[0], WithinAbs(0.3581, 1e-4));
  for (int i = 1; i < 4; ++i) CHECK_THAT(q.spectrum[i], WithinAbs(0.2, 1e-15));
  CHECK_THAT(q.spectrum[4], WithinAbs(0.2 - g, 1e-15));
  CHECK_THAT(q.spectrum[4], WithinAbs(0.0419, 1e-4));
  for (int i = 5; i < 8; ++i) CHECK(q.spectrum[i] == 0.0);
  CHECK(std::count_if(q.spectrum.begin(), q.spectrum.end(), [](double x) { return x > 0; }) == 5);
}

TEST_CASE("optimal spectrum realizes the purity on random points") {
  oracle::Rng rng(37);
  for (std::size_t n : {2, 4, 8, 16}) {
    const double lo = 1.0 / (static_cast<double>(n) + 1.0);
    for (int t = 0; t < 100; ++t) {
      const double p = oracle::uniform(rng, lo + 1e-9, 1.0);
      const PurityOptimum o = xmems_spectrum_from_purity(p, n);
      double s = 0.0, s2 = 0.0;
      for (double x : o.spectrum) {
        s += x;
        s2 += x * x;
        CHECK(x >= 0.0);
      }
      CHECK_THAT(s, WithinAbs(1.0, 1e-12));
      CHECK_THAT(s2, WithinAbs(p, 1e-10));
      for (std::size_t j = n + 1; j < 2 * n; ++j) CHECK(o.spectrum[j] == 0.0);
    }
  }
}

TEST_CASE("xmems_from_purity fixed values") {
  const XState g = xmems_from_purity(1.0, 3);
  CHECK(g.r()[0] == 0.5);
  CHECK(gm_concurrence_x(g) == 1.0);
  CHECK_THAT(gm_concurrence_x(xmems_from_purity(0.28, 3)), WithinAbs(0.4, 1e-12));
  CHECK_THAT(gm_concurrence_x(xmems_from_purity(0.25, 3)), WithinAbs(2.0 * std::sqrt(1.0 / 40.0), 1e-12));
  CHECK_THAT(gm_concurrence_x(xmems_from_purity(0.25, 3)), WithinAbs(0.3162278, 1e-7));
  oracle::Rng rng(38);
  for (int q = 2; q <= 6; ++q) {
    const std::size_t n = std::size_t{1} << (q - 1);
    for (int t = 0; t < 20; ++t) {
      const double p = oracle::uniform(rng, 1.0 / (n + 1.0) + 1e-9, 1.0);
      const XState x = xmems_from_purity(p, q);
      CHECK_THAT(to_density_matrix(x).purity(), WithinAbs(p, 1e-10));
      CHECK_THAT(gm_concurrence_x(x), WithinAbs(2.0 * gamma_of_purity(p, n), 1e-12));
    }
  }
}

TEST_CASE("2 gamma(P) is strictly increasing") {
  for (std::size_t n : {2, 4, 8, 16}) {
    const double lo = 1.0 / (static_cast<double>(n) + 1.0);
    double prev = 0.0;
    for (int k = 1; k <= 2000; ++k) {
      const double p = lo + (1.0 - lo) * k / 2000.0;
      const double c = 2.0 * gamma_of_purity(p, n);
      CHECK(c > prev);
      prev = c;
    }
  }
}

TEST_CASE("branch formulas agree at the junction") {
  for (std::size_t n : {2, 3, 4, 8, 16, 32}) {
    const double gj = 1.0 / (static_cast<double>(n) + 1.0);
    const CertificateEntries lo = certificate_entries(gj, n, PurityBranch::low);
    const CertificateEntries hi = certificate_entries(gj, n, PurityBranch::high);
    const double scale = std::max(1.0, std::abs(lo.z1));
    CHECK_THAT(lo.z1, WithinAbs(hi.z1, 1e-12 * scale));
    CHECK_THAT(lo.z2, WithinAbs(hi.z2, 1e-12 * scale));
    CHECK_THAT(lo.z3, WithinAbs(hi.z3, 1e-12 * scale));
    CHECK_THAT(lo.z4, WithinAbs(hi.z4, 1e-12));
    const double lam = lambda_n(gj, n, PurityBranch::low);
    CHECK_THAT(lam, WithinAbs(lambda_n(gj, n, PurityBranch::high), 1e-12 * lam));
    CHECK_THAT(f_of_gamma(gj, n), WithinAbs(gj, 1e-15));
    CHECK_THAT(g_of_gamma(gj, n), WithinAbs(gj, 1e-15));
  }
}

TEST_CASE("dual certificate structure") {
  const DualCertificate low = dual_certificate(0.25, 4);
  CHECK(low.branch == PurityBranch::low);
  CHECK(low.z.z4 == 0.0);
  CHECK(low.matrix.dim() == 6);
  const DualCertificate high = dual_certificate(0.9, 4);
  CHECK(high.branch == PurityBranch::high);
  CHECK(high.z.z4 > 0.0);
  // Lambda_n is positive at both ends of both branches
  for (std::size_t n : {2, 4, 8, 16}) {
    const double gj = 1.0 / (static_cast<double>(n) + 1.0);
    CHECK(lambda_n(gj, n, PurityBranch::low) > 0.0);
    CHECK(lambda_n(gj, n, PurityBranch::high) > 0.0);
    CHECK(lambda_n(0.5, n) > 0.0);
  }
}

TEST_CASE("dual value at n = 4, P = 1/4") {
  const DualCertificate c = dual_certificate(0.25, 4);
  const VerificationReport r = verify_certificate(c, 0.25, 4);
  CHECK_THAT(r.dual_value, WithinAbs(-1.0 - 2.0 * std::sqrt(1.0 / 40.0), 1e-12));
  CHECK(r.certified());
}

TEST_CASE("certificates verify on both branches for n = 2..16") {
  oracle::Rng rng(39);
  for (std::size_t n = 2; n <= 16; ++n) {
    const double lo = 1.0 / (static_cast<double>(n) + 1.0);
    const double pj = purity_junction(n);
    std::vector<double> ps{pj, 1.0};
    for (int t = 0; t < 10; ++t) {
      ps.push_back(oracle::uniform(rng, lo + 1e-6, pj));
      ps.push_back(oracle::uniform(rng, pj, 1.0));
    }
    for (double p : ps) {
      const VerificationReport r = verify_certificate(dual_certificate(p, n), p, n);
      INFO("n = " << n << ", P = " << p);
      REQUIRE(r.checks.size() == 4);
      for (const auto& c : r.checks) {
        INFO(c.name << " residual " << c.residual);
        CHECK(c.passed);
      }
      CHECK_THAT(r.primal_value, WithinAbs(-1.0 - 2.0 * gamma_of_purity(p, n), 1e-10));
    }
  }
}

TEST_CASE("a perturbed certificate keeps the trace constraints but loses tightness") {
  DualCertificate c = dual_certificate(0.25, 4);
  c.z.z1 += 1e-3;
  c.matrix = HermitianMatrix(certificate_matrix(4, c.z));
  const VerificationReport r = verify_certificate(c, 0.25, 4);
  CHECK(r.check("trace-constraints").passed);
  CHECK_FALSE(r.check("dual-value").passed);
  CHECK_FALSE(r.certified());
  CHECK_THROWS_AS(r.check("nonexistent"), std::out_of_range);
}

TEST_CASE("purity SDP: analytic point is feasible") {
  oracle::Rng rng(40);
  for (std::size_t n : {2, 4, 8, 16}) {
    for (int t = 0; t < 20; ++t) {
      const double p = oracle::uniform(rng, 1.0 / (n + 1.0) + 1e-9, 1.0);
      const sdp::SdpProblem prob = build_purity_sdp(p, n);
      const PurityOptimum o = xmems_spectrum_from_purity(p, n);
      const RVector lam = Eigen::Map<const RVector>(o.spectrum.data(), static_cast<Index>(n));
      const sdp::ResidualReport rep = sdp::check_feasibility(prob, lam);
      CHECK(rep.min_slack_eigenvalue >= -1e-9);
      CHECK_THAT(prob.convention.apply(rep.objective), WithinAbs(2.0 * o.gamma, 1e-12));
    }
  }
}

TEST_CASE("purity SDP data layout") {
  const sdp::SdpProblem p = build_purity_sdp(0.5, 2);
  REQUIRE(p.block_sizes == std::vector<Index>{3, 1});
  const auto& q = p.inequality();
  CHECK(q.c(0) == -2.0);
  CHECK(q.c(1) == -1.0);
  const RMatrix f0 = RMatrix(q.f0.blocks[0]);
  CHECK_THAT(f0(0, 0), WithinAbs(2.0 / 3.0, 1e-16));
  CHECK_THAT(f0(0, 1), WithinAbs(-1.0 / 3.0, 1e-16));
  CHECK_THAT(f0(2, 2), WithinAbs(-0.5, 1e-16));
  CHECK(RMatrix(q.f0.blocks[1])(0, 0) == 1.0);
  const RMatrix f2 = RMatrix(q.f[1].blocks[0]);
  CHECK(f2(1, 2) == 1.0);
  CHECK(f2(2, 1) == 1.0);
  CHECK(f2(2, 2) == 2.0);
  CHECK(f2(0, 2) == 0.0);
  CHECK(RMatrix(q.f[1].blocks[1])(0, 0) == -1.0);
}

TEST_CASE("purity SDP solves to the closed form") {
  const sdp::SdpSolution one = sdp::solve(build_purity_sdp(1.0, 2));
  CHECK(one.status == sdp::Status::optimal);
  CHECK_THAT(one.primal_value, WithinAbs(-2.0, 1e-8));
  CHECK_THAT(one.reported, WithinAbs(1.0, 1e-8));

  for (std::size_t n : {2, 4, 8}) {
    for (double p : {0.95, 0.6, 1.0 / (n + 1.0) + 0.01}) {
      const sdp::SdpSolution s = sdp::solve(build_purity_sdp(p, n));
      CHECK(s.status == sdp::Status::optimal);
      CHECK_THAT(s.reported, WithinAbs(2.0 * gamma_of_purity(p, n), 1e-8));
    }
  }

  // near the lower end the optimum approaches the uniform vector and -1
  const double eps = 1e-8;
  const sdp::SdpSolution near = sdp::solve(build_purity_sdp(1.0 / 3.0 + eps, 2));
  CHECK_THAT(near.primal_value, WithinAbs(-1.0, 1e-3));
  CHECK_THAT(near.primal_vector(0), WithinAbs(1.0 / 3.0, 1e-3));
  CHECK_THAT(near.primal_vector(1), WithinAbs(1.0 / 3.0, 1e-3));
}
