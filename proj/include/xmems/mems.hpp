#pragma once

// Maximally GM-entangled X-states for a fixed spectrum and for a fixed
// purity, the SDP whose optimum reproduces the purity case, and the explicit
// dual feasible point that certifies it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "xmems/qmat.hpp"
#include "xmems/sdp.hpp"
#include "xmems/xstate.hpp"

namespace xmems {

/// Sorted probability vector of length 2n, n = 2^(N-1).
class Spectrum {
 public:
  /// Validates ordering, nonnegativity and normalization. Entries within
  /// 1e-12 below zero are clamped to zero.
  static Spectrum make(std::vector<double> values) {
    const std::size_t len = values.size();
    if (len < 4 || !is_power_of_two(static_cast<Index>(len))) {
      throw std::invalid_argument("Spectrum: length " + std::to_string(len) +
                                  " is not 2^N with N >= 2");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      if (!std::isfinite(values[i])) throw std::invalid_argument("Spectrum: non-finite value");
      if (values[i] < -kPsdSlack) {
        throw std::invalid_argument("Spectrum: negative eigenvalue " + std::to_string(values[i]));
      }
      values[i] = std::max(values[i], 0.0);
      if (i > 0 && values[i] > values[i - 1]) {
        throw std::invalid_argument("Spectrum: values are not sorted descending");
      }
      total += values[i];
    }
    if (std::abs(total - 1.0) > kTraceTolerance) {
      throw std::invalid_argument("Spectrum: values sum to " + std::to_string(total));
    }
    Spectrum s;
    s.values_ = std::move(values);
    return s;
  }

  /// Spectrum of a density matrix. Eigenvalues down to -1e-9 are treated as
  /// solver noise and clamped; the result is renormalized.
  static Spectrum of(const HermitianMatrix& rho) {
    const RVector ev = eigenvalues(rho);
    std::vector<double> v(ev.data(), ev.data() + ev.size());
    double total = 0.0;
    for (auto& x : v) {
      if (x < -1e-9) {
        throw std::invalid_argument("Spectrum::of: matrix is not PSD (eigenvalue " +
                                    std::to_string(x) + ")");
      }
      x = std::max(x, 0.0);
      total += x;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("Spectrum::of: trace is " + std::to_string(total));
    }
    for (auto& x : v) x /= total;
    std::sort(v.begin(), v.end(), std::greater<>());
    return make(std::move(v));
  }

  const std::vector<double>& values() const { return values_; }
  std::size_t n() const { return values_.size() / 2; }
  /// 1-based access matching lambda_1 >= ... >= lambda_2n.
  double lambda(std::size_t i) const { return values_.at(i - 1); }
  double purity() const {
    double p = 0.0;
    for (double v : values_) p += v * v;
    return p;
  }

 private:
  Spectrum() = default;
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Fixed spectrum

/// max[0, l_1 - l_{n+1} - 2 sum_{l=2}^n sqrt(l_l l_{2n+2-l})]
inline double max_gm_for_spectrum(const Spectrum& s) {
  const std::size_t n = s.n();
  double v = s.lambda(1) - s.lambda(n + 1);
  for (std::size_t l = 2; l <= n; ++l) v -= 2.0 * std::sqrt(s.lambda(l) * s.lambda(2 * n + 2 - l));
  return std::max(0.0, v);
}

/// Canonical X-MEMS of the given spectrum (all phases zero, no LU freedom).
inline XState xmems_from_spectrum(const Spectrum& s) {
  const std::size_t n = s.n();
  std::vector<double> a(n), b(n), r(n, 0.0), phi(n, 0.0);
  a[0] = b[0] = (s.lambda(1) + s.lambda(n + 1)) / 2.0;
  r[0] = (s.lambda(1) - s.lambda(n + 1)) / 2.0;
  for (std::size_t j = 2; j <= n; ++j) {
    a[j - 1] = s.lambda(j);
    b[j - 1] = s.lambda(2 * n + 2 - j);
  }
  // a1 b1 - r1^2 = l1 l_{n+1} >= 0; round-off can push r1 a hair above sqrt(a1 b1).
  r[0] = std::min(r[0], std::sqrt(a[0] * b[0]));
  return XState::make(std::move(a), std::move(b), std::move(r), std::move(phi));
}

/// Eigenvector matrix of the canonical X-MEMS: column k holds the eigenvector
/// of lambda_{k+1}.
inline RMatrix xmems_eigenvectors(std::size_t n) {
  const Index nn = static_cast<Index>(n);
  const double h = 1.0 / std::sqrt(2.0);
  RMatrix v = RMatrix::Zero(2 * nn, 2 * nn);
  // V11 = V12 + sum_{i>=2} E_ii, V12 = E_11/sqrt2, V21 = E_n1/sqrt2,
  // V22 = -V21 + sum_{i<n} E_{i,i+1}
  v(0, 0) = h;
  for (Index i = 1; i < nn; ++i) v(i, i) = 1.0;
  v(0, nn) = h;
  v(nn + nn - 1, 0) = h;
  v(nn + nn - 1, nn) = -h;
  for (Index i = 0; i + 1 < nn; ++i) v(nn + i, nn + i + 1) = 1.0;
  return v;
}

/// Global unitary taking rho to the canonical X-MEMS of its spectrum:
/// U = V Phi^dagger, with Phi the (descending) eigenbasis of rho.
inline CMatrix optimal_unitary(const HermitianMatrix& rho) {
  const Index d = rho.dim();
  if (d < 4 || !is_power_of_two(d)) {
    throw std::invalid_argument("optimal_unitary: dimension is not 2^N with N >= 2");
  }
  const Eigensystem es = eig_hermitian(rho);
  const RMatrix v = xmems_eigenvectors(static_cast<std::size_t>(d / 2));
  return v.cast<cplx>() * es.vectors.adjoint();
}

// ---------------------------------------------------------------------------
// Fixed purity

enum class PurityBranch { low, high };

inline const char* to_string(PurityBranch b) { return b == PurityBranch::low ? "low" : "high"; }

/// Purity at which the two branches meet, (n+3)/(n+1)^2.
inline double purity_junction(std::size_t n) {
  const double nd = static_cast<double>(n);
  return (nd + 3.0) / ((nd + 1.0) * (nd + 1.0));
}

/// Range check on P in ]1/(n+1), 1]; values within 1e-12 above 1 are clamped.
inline double checked_purity(double p, std::size_t n) {
  if (n < 2) throw std::invalid_argument("purity: n must be at least 2");
  const double lo = 1.0 / (static_cast<double>(n) + 1.0);
  if (!std::isfinite(p) || p <= lo || p > 1.0 + 1e-12) {
    throw std::domain_error("purity " + std::to_string(p) + " outside ]1/(n+1), 1] for n = " +
                            std::to_string(n));
  }
  return std::min(p, 1.0);
}

inline PurityBranch branch_of_purity(double p, std::size_t n) {
  return checked_purity(p, n) <= purity_junction(n) ? PurityBranch::low : PurityBranch::high;
}

inline PurityBranch branch_of_gamma(double gamma, std::size_t n) {
  return gamma <= 1.0 / (static_cast<double>(n) + 1.0) ? PurityBranch::low : PurityBranch::high;
}

inline double gamma_of_purity(double p, std::size_t n, PurityBranch branch) {
  const double nd = static_cast<double>(n);
  if (branch == PurityBranch::low) return std::sqrt(std::max(0.0, p / 2.0 - 1.0 / (2.0 * (nd + 1.0))));
  return 1.0 / (2.0 * nd) + 0.5 * std::sqrt(std::max(0.0, (1.0 - 1.0 / nd) * (p - 1.0 / nd)));
}

/// Half the maximal X-state GM-concurrence at purity P.
inline double gamma_of_purity(double p, std::size_t n) {
  p = checked_purity(p, n);
  return gamma_of_purity(p, n, branch_of_purity(p, n));
}

inline double f_of_gamma(double gamma, std::size_t n) {
  return branch_of_gamma(gamma, n) == PurityBranch::low ? 1.0 / (static_cast<double>(n) + 1.0) : gamma;
}

inline double g_of_gamma(double gamma, std::size_t n) {
  return (1.0 - 2.0 * f_of_gamma(gamma, n)) / (static_cast<double>(n) - 1.0);
}

struct PurityOptimum {
  double purity = 0;
  double gamma = 0;
  double concurrence = 0;
  double f = 0;
  double g = 0;
  PurityBranch branch = PurityBranch::low;
  std::vector<double> spectrum;  // length 2n, descending
};

inline PurityOptimum xmems_spectrum_from_purity(double p, std::size_t n) {
  PurityOptimum out;
  out.purity = checked_purity(p, n);
  out.branch = branch_of_purity(out.purity, n);
  out.gamma = gamma_of_purity(out.purity, n);
  out.concurrence = 2.0 * out.gamma;
  out.f = f_of_gamma(out.gamma, n);
  out.g = g_of_gamma(out.gamma, n);
  out.spectrum.assign(2 * n, 0.0);
  out.spectrum[0] = out.f + out.gamma;
  for (std::size_t j = 1; j < n; ++j) out.spectrum[j] = out.g;
  out.spectrum[n] = std::max(0.0, out.f - out.gamma);
  return out;
}

inline XState xmems_from_purity(double p, int qubits) {
  if (qubits < 2 || qubits > 30) throw std::invalid_argument("xmems_from_purity: N must be in [2, 30]");
  const std::size_t n = std::size_t{1} << (qubits - 1);
  const PurityOptimum opt = xmems_spectrum_from_purity(p, n);
  std::vector<double> v = opt.spectrum;
  double total = 0.0;
  for (double x : v) total += x;
  for (auto& x : v) x /= total;
  return xmems_from_spectrum(Spectrum::make(std::move(v)));
}

/// Inequality-form SDP over lambda in R^n:
///   minimize -b^T lambda  s.t.  blkdiag([[Q_n, lambda], [lambda^T, P-1+2 j^T lambda]],
///                                       1 - j^T lambda) >= 0
/// with b = (2, 1, ..., 1), Q_n = 1 - J/(n+1). Blocks have sizes n+1 and 1.
/// The reported value is -1 - p*, which equals the maximal concurrence 2 gamma.
inline sdp::SdpProblem build_purity_sdp(double p, std::size_t n) {
  p = checked_purity(p, n);
  const Index nn = static_cast<Index>(n);
  sdp::InequalityForm q;
  q.c = -RVector::Ones(nn);
  q.c(0) = -2.0;

  sdp::BlockDense f0{RMatrix::Zero(nn + 1, nn + 1), RMatrix::Ones(1, 1)};
  f0[0].topLeftCorner(nn, nn) =
      RMatrix::Identity(nn, nn) - RMatrix::Constant(nn, nn, 1.0 / (static_cast<double>(n) + 1.0));
  f0[0](nn, nn) = p - 1.0;
  q.f0 = sdp::BlockMatrix::from_dense(f0);

  for (Index i = 0; i < nn; ++i) {
    sdp::BlockDense fi{RMatrix::Zero(nn + 1, nn + 1), -RMatrix::Ones(1, 1)};
    fi[0](i, nn) = fi[0](nn, i) = 1.0;
    fi[0](nn, nn) = 2.0;
    q.f.push_back(sdp::BlockMatrix::from_dense(fi));
  }

  sdp::SdpProblem prob;
  prob.block_sizes = {nn + 1, 1};
  prob.data = std::move(q);
  prob.convention = sdp::ValueConvention{-1.0, -1.0};
  return prob;
}

// ---------------------------------------------------------------------------
// Dual certificate

struct CertificateEntries {
  double z1 = 0, z2 = 0, z3 = 0, z4 = 0;
};

inline CertificateEntries certificate_entries(double gamma, std::size_t n, PurityBranch branch) {
  const double nd = static_cast<double>(n);
  const double g = gamma;
  CertificateEntries z;
  if (branch == PurityBranch::low) {
    z.z1 = 2.0 + 2.0 * g + 1.0 / (2.0 * g);
    z.z2 = (1.0 + g) * (1.0 + g) / (2.0 * g);
    z.z3 = 1.0 / (2.0 * g);
    z.z4 = 0.0;
  } else {
    const double den = 1.0 - 2.0 * nd * g;
    z.z1 = (1.0 - nd) * (1.0 + 2.0 * g) * (1.0 + 2.0 * g) / (2.0 * den);
    z.z2 = (nd - 2.0 * g) * (nd - 2.0 * g) / (2.0 * (1.0 - nd) * den);
    z.z3 = (1.0 - nd) / (2.0 * den);
    z.z4 = 1.0 + (1.0 - 2.0 * g) / den;
  }
  return z;
}

/// The only nonzero eigenvalue of the leading (n+1)-block of the certificate.
inline double lambda_n(double gamma, std::size_t n, PurityBranch branch) {
  const double nd = static_cast<double>(n);
  const double g = gamma;
  if (branch == PurityBranch::low) {
    return ((nd + 1.0) * (1.0 + 2.0 * g) + (nd + 3.0) * g * g) / (2.0 * g);
  }
  return (nd * nd + 2.0 * (nd - 1.0) - 4.0 * g + 4.0 * nd * g * g) / (2.0 * (-1.0 + 2.0 * nd * g));
}

inline double lambda_n(double gamma, std::size_t n) { return lambda_n(gamma, n, branch_of_gamma(gamma, n)); }

/// (n+2)-dimensional certificate matrix built from its four parameters.
inline RMatrix certificate_matrix(std::size_t n, const CertificateEntries& z) {
  const Index nn = static_cast<Index>(n);
  RMatrix m = RMatrix::Zero(nn + 2, nn + 2);
  const double corner = -1.0 - z.z3 + z.z4 / 2.0;
  const double edge = -0.5 - z.z3 + z.z4 / 2.0;
  const double cross = std::sqrt(z.z1 * z.z2);
  m(0, 0) = z.z1;
  for (Index k = 1; k < nn; ++k) {
    m(0, k) = m(k, 0) = cross;
    for (Index l = 1; l < nn; ++l) m(k, l) = z.z2;
    m(k, nn) = m(nn, k) = edge;
  }
  m(0, nn) = m(nn, 0) = corner;
  m(nn, nn) = z.z3;
  m(nn + 1, nn + 1) = z.z4;
  return m;
}

struct DualCertificate {
  double gamma = 0;
  CertificateEntries z;
  HermitianMatrix matrix;
  PurityBranch branch = PurityBranch::low;
};

inline DualCertificate dual_certificate(double p, std::size_t n) {
  DualCertificate c;
  c.gamma = gamma_of_purity(p, n);
  c.branch = branch_of_gamma(c.gamma, n);
  c.z = certificate_entries(c.gamma, n, c.branch);
  c.matrix = HermitianMatrix(certificate_matrix(n, c.z));
  return c;
}

struct CheckResult {
  std::string name;
  bool passed = false;
  double residual = 0;
  double tolerance = 0;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  double primal_value = 0;
  double dual_value = 0;
  double lambda_n = 0;

  const CheckResult& check(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw std::out_of_range("VerificationReport: no check named " + name);
  }
  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
  }
  /// Optimality certified by weak duality: dual feasible and d = p.
  bool certified() const { return all_passed(); }
};

inline constexpr double kCertificateTraceTolerance = 1e-10;
inline constexpr double kCertificateEigenTolerance = 1e-9;
inline constexpr double kCertificateValueTolerance = 1e-10;

/// Checks, in order:
///   trace-constraints  <F_i, Z> = c_i
///   psd                Z >= 0 and the leading block's nonzero eigenvalue is Lambda_n(gamma)
///   dual-value         d = -<F0, Z> = -1 - 2 gamma
///   weak-duality       the analytic spectrum is primal feasible with value p = d
/// Eigenvalue tolerances scale with max(1, Lambda_n).
inline VerificationReport verify_certificate(const DualCertificate& cert, double p, std::size_t n) {
  p = checked_purity(p, n);
  const Index nn = static_cast<Index>(n);
  if (cert.matrix.dim() != nn + 2) {
    throw std::invalid_argument("verify_certificate: certificate has dimension " +
                                std::to_string(cert.matrix.dim()) + ", expected n+2");
  }
  const sdp::SdpProblem prob = build_purity_sdp(p, n);
  const auto& q = prob.inequality();
  const RMatrix z = cert.matrix.matrix().real();
  const sdp::BlockDense zb{z.topLeftCorner(nn + 1, nn + 1), z.bottomRightCorner(1, 1)};

  VerificationReport rep;

  double trace_res = 0.0;
  for (Index i = 0; i < nn; ++i) trace_res = std::max(trace_res, std::abs(sdp::inner(q.f[i], zb) - q.c(i)));
  rep.checks.push_back({"trace-constraints", trace_res <= kCertificateTraceTolerance, trace_res,
                        kCertificateTraceTolerance});

  rep.lambda_n = lambda_n(cert.gamma, n, cert.branch);
  const double eig_tol = kCertificateEigenTolerance * std::max(1.0, std::abs(rep.lambda_n));
  const RVector lead = eigenvalues(RMatrix(zb[0]));
  const double min_eig = std::min(lead.minCoeff(), zb[1](0, 0));
  const double lead_res = std::abs(lead(0) - rep.lambda_n);
  double rest = 0.0;
  for (Index k = 1; k < lead.size(); ++k) rest = std::max(rest, std::abs(lead(k)));
  const double psd_res = std::max({lead_res, rest, std::max(0.0, -min_eig)});
  rep.checks.push_back({"psd", psd_res <= eig_tol, psd_res, eig_tol});

  rep.dual_value = -sdp::inner(q.f0, zb);
  const double expected = -1.0 - 2.0 * cert.gamma;
  const double dual_res = std::abs(rep.dual_value - expected);
  rep.checks.push_back({"dual-value", dual_res <= kCertificateValueTolerance, dual_res,
                        kCertificateValueTolerance});

  const PurityOptimum opt = xmems_spectrum_from_purity(p, n);
  const RVector lambda = Eigen::Map<const RVector>(opt.spectrum.data(), nn);
  const sdp::ResidualReport feas = sdp::check_feasibility(prob, lambda);
  rep.primal_value = feas.objective;
  const double wd_res = std::max(std::abs(rep.primal_value - rep.dual_value), std::max(0.0, -feas.min_slack_eigenvalue));
  rep.checks.push_back({"weak-duality", std::abs(rep.primal_value - rep.dual_value) <= kCertificateValueTolerance &&
                                            feas.min_slack_eigenvalue >= -kCertificateEigenTolerance,
                        wd_res, kCertificateValueTolerance});
  return rep;
}

}  // namespace xmems
