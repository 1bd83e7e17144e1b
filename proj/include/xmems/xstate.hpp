#pragma once

// N-qubit X-states: block parametrization, embedding into the full density
// matrix and the closed-form GM-concurrence.
//
// Block k (1-based, k = 1..n with n = 2^(N-1)) couples the basis states
// |k-1> and |2^N - k>. Its diagonal holds a_k (upper) and b_k (lower), its
// anti-diagonal r_k e^{i phi_k}.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "xmems/qmat.hpp"

namespace xmems {

inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kPsdSlack = 1e-12;

class XState {
 public:
  /// Validating constructor. Vectors share the length n = 2^(N-1), N >= 2.
  static XState make(std::vector<double> a, std::vector<double> b, std::vector<double> r,
                     std::vector<double> phi) {
    const std::size_t n = a.size();
    if (b.size() != n || r.size() != n || phi.size() != n) {
      throw std::invalid_argument("XState: a, b, r, phi must have equal length");
    }
    if (n < 2 || !is_power_of_two(static_cast<Index>(n))) {
      throw std::invalid_argument("XState: block count " + std::to_string(n) +
                                  " is not 2^(N-1) for N >= 2");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (!std::isfinite(a[k]) || !std::isfinite(b[k]) || !std::isfinite(r[k]) ||
          !std::isfinite(phi[k])) {
        throw std::invalid_argument("XState: non-finite parameter in block " + std::to_string(k + 1));
      }
      if (a[k] < 0 || b[k] < 0 || r[k] < 0) {
        throw std::invalid_argument("XState: negative entry in block " + std::to_string(k + 1));
      }
      if (r[k] > std::sqrt(a[k] * b[k]) + kPsdSlack) {
        throw std::invalid_argument("XState: PSD violation in block " + std::to_string(k + 1) +
                                    ", r > sqrt(a b)");
      }
      total += a[k] + b[k];
    }
    if (std::abs(total - 1.0) > kTraceTolerance) {
      throw std::invalid_argument("XState: normalization violated, sum(a+b) = " +
                                  std::to_string(total));
    }
    for (auto& p : phi) {
      p = std::fmod(p, 2 * std::numbers::pi);
      if (p < 0) p += 2 * std::numbers::pi;
    }
    XState x;
    x.a_ = std::move(a);
    x.b_ = std::move(b);
    x.r_ = std::move(r);
    x.phi_ = std::move(phi);
    x.qubits_ = 1 + static_cast<int>(std::lround(std::log2(static_cast<double>(n))));
    return x;
  }

  int qubits() const { return qubits_; }
  std::size_t blocks() const { return a_.size(); }
  Index dim() const { return Index{2} * static_cast<Index>(a_.size()); }

  const std::vector<double>& a() const { return a_; }
  const std::vector<double>& b() const { return b_; }
  const std::vector<double>& r() const { return r_; }
  const std::vector<double>& phi() const { return phi_; }

 private:
  XState() = default;
  std::vector<double> a_, b_, r_, phi_;
  int qubits_ = 0;
};

inline XState new_xstate(std::vector<double> a, std::vector<double> b, std::vector<double> r,
                         std::vector<double> phi) {
  return XState::make(std::move(a), std::move(b), std::move(r), std::move(phi));
}

inline HermitianMatrix to_density_matrix(const XState& x) {
  const Index d = x.dim();
  CMatrix m = CMatrix::Zero(d, d);
  for (std::size_t k = 0; k < x.blocks(); ++k) {
    const Index hi = static_cast<Index>(k);
    const Index lo = d - 1 - hi;
    m(hi, hi) = x.a()[k];
    m(lo, lo) = x.b()[k];
    m(hi, lo) = std::polar(x.r()[k], x.phi()[k]);
    m(lo, hi) = std::conj(m(hi, lo));
  }
  return HermitianMatrix(m);
}

namespace detail {

inline double gm_formula(const std::vector<double>& a, const std::vector<double>& b,
                         const std::vector<double>& r) {
  const std::size_t n = a.size();
  std::vector<double> s(n);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    s[j] = std::sqrt(std::max(0.0, a[j] * b[j]));
    total += s[j];
  }
  double best = 0.0;
  for (std::size_t k = 0; k < n; ++k) best = std::max(best, r[k] - (total - s[k]));
  return 2.0 * best;
}

}  // namespace detail

/// 2 max{0, max_k [r_k - sum_{j != k} sqrt(a_j b_j)]}.
inline double gm_concurrence_x(const XState& x) { return detail::gm_formula(x.a(), x.b(), x.r()); }

/// The same expression evaluated on the main and anti-diagonal of an
/// arbitrary 2^N density matrix; other entries are ignored.
inline double gm_lower_bound(const HermitianMatrix& rho) {
  const Index d = rho.dim();
  if (d < 4 || !is_power_of_two(d)) {
    throw std::invalid_argument("gm_lower_bound: dimension " + std::to_string(d) +
                                " is not 2^N with N >= 2");
  }
  const std::size_t n = static_cast<std::size_t>(d / 2);
  std::vector<double> a(n), b(n), r(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Index hi = static_cast<Index>(k);
    const Index lo = d - 1 - hi;
    a[k] = rho(hi, hi).real();
    b[k] = rho(lo, lo).real();
    r[k] = std::abs(rho(hi, lo));
  }
  return detail::gm_formula(a, b, r);
}

struct BlockEigenvalues {
  std::vector<double> lam_plus;
  std::vector<double> lam_minus;
  std::vector<double> dk;  // (b_k - a_k) / 2
};

inline BlockEigenvalues block_eigenvalues(const XState& x) {
  BlockEigenvalues out;
  for (std::size_t k = 0; k < x.blocks(); ++k) {
    const double mean = (x.a()[k] + x.b()[k]) / 2.0;
    const double dk = (x.b()[k] - x.a()[k]) / 2.0;
    const double rad = std::hypot(x.r()[k], dk);
    out.lam_plus.push_back(mean + rad);
    out.lam_minus.push_back(mean - rad);
    out.dk.push_back(dk);
  }
  return out;
}

}  // namespace xmems
