// Command-line front end. Exit status: 0 when every requested verification
// passes, 1 when one fails, 2 on bad input.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xmems/xmems.hpp"

namespace {

using namespace xmems;
using io::json;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kBadInput = 2;

void emit(const json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    io::write_text_file(out, j.dump(2) + "\n");
  }
}

std::size_t blocks_of(int qubits) {
  if (qubits < 2 || qubits > 30) throw std::invalid_argument("--N must be in [2, 30]");
  return std::size_t{1} << (qubits - 1);
}

int cmd_sweep(const std::vector<int>& qubits, int grid, double tol, const std::string& out_dir, bool svg) {
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  bool all_ok = true;
  for (int nq : qubits) {
    const auto rows = experiments::sweep_purity(nq, experiments::purity_grid(blocks_of(nq), grid));
    double worst = 0.0;
    int failed = 0;
    for (const auto& r : rows) {
      if (!r.ok()) ++failed;
      else if (!r.junction) worst = std::max(worst, r.concurrence_diff());
    }
    const bool ok = failed == 0 && worst <= tol;
    all_ok = all_ok && ok;
    std::cout << "N=" << nq << ": " << rows.size() << " rows, max |analytic - solved| = " << experiments::fmt(worst)
              << ", failed rows = " << failed << (ok ? "" : "  FAIL") << '\n';
    if (!out_dir.empty()) {
      const std::string base = (std::filesystem::path(out_dir) / ("sweep_N" + std::to_string(nq))).string();
      io::write_text_file(base + ".csv", experiments::sweep_csv(rows));
      if (svg) io::write_text_file(base + ".svg", experiments::sweep_svg(rows));
    }
  }
  return all_ok ? kOk : kFailed;
}

int cmd_rank_decay(int nq, const LogDetConfig& cfg, const std::string& out, const std::string& svg) {
  const auto setup = experiments::rank_decay_setup(nq);
  if (nq == 4) std::cerr << "note: N=4 takes several seconds per iteration\n";
  const LogDetResult r = logdet_minimize_rank(setup.rho, setup.target, cfg, [](const LogDetIteration& h) {
    std::cerr << "iteration " << h.iteration << ": rank " << h.complex_rank << '\n';
  });
  const std::string csv = experiments::rank_decay_csv(r);
  if (out.empty() || out == "-") std::cout << csv;
  else io::write_text_file(out, csv);
  if (!svg.empty()) io::write_text_file(svg, experiments::rank_decay_svg(r, nq));
  return kOk;
}

int cmd_mems(std::optional<double> purity, const std::string& spectrum_file, int nq, const std::string& out) {
  json j;
  bool ok = true;
  if (purity) {
    const std::size_t n = blocks_of(nq);
    const XState x = xmems_from_purity(*purity, nq);
    const VerificationReport rep = verify_certificate(dual_certificate(*purity, n), *purity, n);
    const double c = gm_concurrence_x(x);
    j = {{"xstate", io::xstate_to_json(x)},
         {"concurrence", c},
         {"purity", to_density_matrix(x).purity()},
         {"certificate", io::report_to_json(rep)}};
    ok = rep.certified() && std::abs(c - 2.0 * gamma_of_purity(*purity, n)) <= 1e-12;
  } else {
    const Spectrum s = io::spectrum_from_json(io::read_json_file(spectrum_file));
    const XState x = xmems_from_spectrum(s);
    const double c = gm_concurrence_x(x);
    j = {{"xstate", io::xstate_to_json(x)}, {"concurrence", c}, {"max_gm_for_spectrum", max_gm_for_spectrum(s)}};
    ok = std::abs(c - max_gm_for_spectrum(s)) <= 1e-12;
  }
  j["verified"] = ok;
  emit(j, out);
  return ok ? kOk : kFailed;
}

int cmd_unitary(const std::string& rho_file, const std::string& out) {
  const HermitianMatrix rho = io::hermitian_from_json(io::read_json_file(rho_file));
  const Spectrum s = Spectrum::of(rho);
  const CMatrix u = optimal_unitary(rho);
  const HermitianMatrix image = conjugate_by(u, rho);
  const HermitianMatrix expected = to_density_matrix(xmems_from_spectrum(s));
  const double residual = frobenius_distance(image, expected);
  const double unitarity = (u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).norm();
  const bool ok = residual <= 1e-9 && unitarity <= 1e-10;
  json j{{"unitary", io::matrix_to_json(u)},
         {"residual", residual},
         {"unitarity_residual", unitarity},
         {"concurrence", gm_lower_bound(image)},
         {"verified", ok}};
  emit(j, out);
  return ok ? kOk : kFailed;
}

int cmd_gm(const std::string& rho_file, const std::string& xstate_file) {
  if (!xstate_file.empty()) {
    const XState x = io::xstate_from_json(io::read_json_file(xstate_file));
    std::cout << experiments::fmt(gm_concurrence_x(x)) << '\n';
  } else {
    const HermitianMatrix rho = io::hermitian_from_json(io::read_json_file(rho_file));
    std::cout << experiments::fmt(gm_lower_bound(rho)) << '\n';
  }
  return kOk;
}

int cmd_verify_cert(double purity, int nq, const std::string& out) {
  const std::size_t n = blocks_of(nq);
  const VerificationReport rep = verify_certificate(dual_certificate(purity, n), purity, n);
  json j = io::report_to_json(rep);
  j["N"] = nq;
  j["purity"] = purity;
  j["gamma"] = gamma_of_purity(purity, n);
  emit(j, out);
  for (const auto& c : rep.checks) {
    std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << "  residual " << experiments::fmt(c.residual) << '\n';
  }
  return rep.certified() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"X-MEMS construction, certification and channel synthesis"};
  app.require_subcommand(1);

  std::vector<int> sweep_n{2, 3, 4, 5};
  int grid = 25;
  double sweep_tol = 1e-8;
  std::string sweep_out;
  bool sweep_svg = false;
  auto* sweep = app.add_subcommand("sweep-purity", "compare the purity SDP optimum with the closed form");
  sweep->add_option("--N", sweep_n, "qubit counts")->check(CLI::Range(2, 12));
  sweep->add_option("--grid", grid, "grid points per N")->check(CLI::PositiveNumber);
  sweep->add_option("--tol", sweep_tol, "allowed |analytic - solved|");
  sweep->add_option("--out", sweep_out, "output directory for sweep_N<N>.csv");
  sweep->add_flag("--svg", sweep_svg, "also write sweep_N<N>.svg");

  int rd_n = 3;
  LogDetConfig cfg;
  std::string rd_out, rd_svg, rd_initial = "collapse";
  auto* rank = app.add_subcommand("rank-decay", "log-det rank minimization from the Dicke mixture to the X-MEMS");
  rank->add_option("--N", rd_n, "qubits (2, 3 or 4)")->check(CLI::Range(2, 4));
  rank->add_option("--delta", cfg.delta, "regularization delta");
  rank->add_option("--max-iters", cfg.max_iters, "iteration budget");
  rank->add_option("--stall-window", cfg.stall_window, "stop after this many iterations without a rank change");
  rank->add_option("--rank-tol", cfg.rank_tol, "relative rank threshold");
  rank->add_option("--initial", rd_initial, "collapse or identity")->check(CLI::IsMember({"collapse", "identity"}));
  rank->add_option("--out", rd_out, "CSV path (default stdout)");
  rank->add_option("--svg", rd_svg, "SVG path");

  int mems_n = 3;
  std::optional<double> mems_p;
  std::string mems_spec, mems_out;
  auto* mems = app.add_subcommand("mems", "X-MEMS for a purity or a spectrum");
  mems->add_option("--N", mems_n, "qubits");
  auto* p_opt = mems->add_option("--purity", mems_p, "purity P in ]1/(n+1), 1]");
  auto* s_opt = mems->add_option("--spectrum", mems_spec, "Spectrum JSON file");
  p_opt->excludes(s_opt);
  mems->add_option("--out", mems_out, "output JSON (default stdout)");

  std::string un_rho, un_out;
  auto* unit = app.add_subcommand("unitary", "global unitary taking a state to its X-MEMS");
  unit->add_option("--rho", un_rho, "density matrix JSON")->required();
  unit->add_option("--out", un_out, "output JSON (default stdout)");

  std::string gm_rho, gm_x;
  auto* gm = app.add_subcommand("gm", "GM-concurrence of an X-state or lower bound for a density matrix");
  auto* gm_r = gm->add_option("--rho", gm_rho, "density matrix JSON");
  auto* gm_xo = gm->add_option("--xstate", gm_x, "XState JSON");
  gm_r->excludes(gm_xo);

  double vc_p = 0.25;
  int vc_n = 3;
  std::string vc_out;
  auto* vc = app.add_subcommand("verify-cert", "check the dual certificate for a purity");
  vc->add_option("--purity", vc_p, "purity P")->required();
  vc->add_option("--N", vc_n, "qubits");
  vc->add_option("--out", vc_out, "output JSON (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) return cmd_sweep(sweep_n, grid, sweep_tol, sweep_out, sweep_svg);
    if (*rank) {
      if (rd_initial == "identity") cfg.initial = IdentityScaledStart{};
      return cmd_rank_decay(rd_n, cfg, rd_out, rd_svg);
    }
    if (*mems) {
      if (!mems_p && mems_spec.empty()) throw std::invalid_argument("mems: give --purity or --spectrum");
      return cmd_mems(mems_p, mems_spec, mems_n, mems_out);
    }
    if (*unit) return cmd_unitary(un_rho, un_out);
    if (*gm) {
      if (gm_rho.empty() && gm_x.empty()) throw std::invalid_argument("gm: give --rho or --xstate");
      return cmd_gm(gm_rho, gm_x);
    }
    if (*vc) return cmd_verify_cert(vc_p, vc_n, vc_out);
  } catch (const LogDetFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  }
  return kBadInput;
}
