#pragma once

// Purity sweeps comparing the SDP optimum against the closed form, rank-decay
// runs of the log-det heuristic, and their CSV / SVG output.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "xmems/channel.hpp"
#include "xmems/mems.hpp"
#include "xmems/sdp.hpp"

namespace xmems::experiments {

/// 15 significant digits, the precision of every CSV cell.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

/// P_k = 1/(n+1) + k (1 - 1/(n+1)) / points, k = 1..points. The open end is
/// excluded and P = 1 is the last point.
inline std::vector<double> purity_grid(std::size_t n, int points) {
  if (points < 1) throw std::invalid_argument("purity_grid: need at least one point");
  const double lo = 1.0 / (static_cast<double>(n) + 1.0);
  std::vector<double> g;
  for (int k = 1; k <= points; ++k) g.push_back(k == points ? 1.0 : lo + (1.0 - lo) * k / points);
  return g;
}

struct SweepRow {
  int qubits = 0;
  std::size_t n = 0;
  double purity = 0;
  bool junction = false;
  double analytic = 0;  // 2 gamma(P)
  double solved = 0;    // -1 - p*
  double lambda1_analytic = 0;
  double lambda1_solved = 0;
  double g_analytic = 0;
  std::vector<double> rest_solved;  // lambda_2..n
  sdp::Status status = sdp::Status::numerical_failure;
  int sdp_iterations = 0;
  std::string error;

  bool ok() const { return error.empty(); }
  double concurrence_diff() const { return std::abs(analytic - solved); }
  double lambda1_diff() const { return std::abs(lambda1_analytic - lambda1_solved); }
  double rest_diff() const {
    double m = 0.0;
    for (double v : rest_solved) m = std::max(m, std::abs(v - g_analytic));
    return m;
  }
  /// max - min over the solved lambda_2..n
  double rest_spread() const {
    if (rest_solved.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(rest_solved.begin(), rest_solved.end());
    return *hi - *lo;
  }
};

inline SweepRow sweep_point(int qubits, double p, bool junction, const sdp::SolveOptions& opts) {
  SweepRow row;
  row.qubits = qubits;
  row.n = std::size_t{1} << (qubits - 1);
  row.purity = p;
  row.junction = junction;
  try {
    const PurityOptimum opt = xmems_spectrum_from_purity(p, row.n);
    row.analytic = opt.concurrence;
    row.lambda1_analytic = opt.spectrum[0];
    row.g_analytic = opt.g;
    const sdp::SdpSolution s = sdp::solve(build_purity_sdp(p, row.n), opts);
    row.status = s.status;
    row.sdp_iterations = s.iterations;
    row.solved = s.reported;
    row.lambda1_solved = s.primal_vector(0);
    for (Index j = 1; j < s.primal_vector.size(); ++j) row.rest_solved.push_back(s.primal_vector(j));
    if (s.status != sdp::Status::optimal) row.error = std::string("solver status ") + sdp::to_string(s.status);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

/// Runs fn(i) for i in [0, count) on at most `workers` threads.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

/// One row per grid point, plus a flagged row at the branch junction.
/// Failures are recorded on the row; the sweep always completes.
inline std::vector<SweepRow> sweep_purity(int qubits, const std::vector<double>& grid, bool add_junction = true,
                                          const sdp::SolveOptions& opts = {}, unsigned workers = default_workers()) {
  if (qubits < 2 || qubits > 12) throw std::invalid_argument("sweep_purity: N must be in [2, 12]");
  const std::size_t n = std::size_t{1} << (qubits - 1);
  std::vector<std::pair<double, bool>> points;
  for (double p : grid) points.emplace_back(p, false);
  if (add_junction) points.emplace_back(purity_junction(n), true);
  std::sort(points.begin(), points.end());

  std::vector<SweepRow> rows(points.size());
  parallel_for(points.size(), workers,
               [&](std::size_t i) { rows[i] = sweep_point(qubits, points[i].first, points[i].second, opts); });
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  const std::size_t n = rows.empty() ? 0 : rows.front().n;
  out << "N,P,junction,concurrence_analytic,concurrence_solved,concurrence_abs_diff,lambda1_analytic,"
         "lambda1_solved,lambda1_abs_diff,g_analytic";
  for (std::size_t j = 2; j <= n; ++j) out << ",lambda" << j << "_solved";
  out << ",rest_max_abs_diff,rest_spread,status,sdp_iterations,error\n";
  for (const auto& r : rows) {
    out << r.qubits << ',' << fmt(r.purity) << ',' << (r.junction ? 1 : 0) << ',' << fmt(r.analytic) << ','
        << fmt(r.solved) << ',' << fmt(r.concurrence_diff()) << ',' << fmt(r.lambda1_analytic) << ','
        << fmt(r.lambda1_solved) << ',' << fmt(r.lambda1_diff()) << ',' << fmt(r.g_analytic);
    for (std::size_t j = 0; j + 1 < n; ++j) out << ',' << (j < r.rest_solved.size() ? fmt(r.rest_solved[j]) : "");
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    out << ',' << fmt(r.rest_diff()) << ',' << fmt(r.rest_spread()) << ',' << sdp::to_string(r.status) << ','
        << r.sdp_iterations << ',' << err << '\n';
  }
  return out.str();
}

inline std::string rank_decay_csv(const LogDetResult& r) {
  std::ostringstream out;
  out << "iteration,complex_rank,objective,cptp_residual,map_residual\n";
  for (const auto& h : r.history) {
    out << h.iteration << ',' << h.complex_rank << ',' << fmt(h.objective) << ',' << fmt(h.cptp_residual) << ','
        << fmt(h.map_residual) << '\n';
  }
  return out.str();
}

/// Dicke mixture of N qubits mapped onto the X-MEMS of equal purity 1/(N+1).
struct RankDecaySetup {
  HermitianMatrix rho;
  HermitianMatrix target;
};

inline RankDecaySetup rank_decay_setup(int qubits) {
  if (qubits < 2 || qubits > 4) throw std::invalid_argument("rank decay: N must be 2, 3 or 4");
  // For two qubits 1/(N+1) is the excluded lower end 1/(n+1); use the middle of the range.
  const double purity = qubits == 2 ? 0.5 : 1.0 / (qubits + 1.0);
  return {dicke_mixture(qubits), to_density_matrix(xmems_from_purity(purity, qubits))};
}

// ---------------------------------------------------------------------------
// SVG

struct Series {
  std::string name;
  std::vector<double> x, y;
  bool line = true;
  bool markers = false;
  std::string color = "#1f77b4";
};

struct Panel {
  std::string title, xlabel, ylabel;
  std::vector<Series> series;
};

/// Panels side by side, linear axes, lines and circle markers only.
inline std::string svg_plot(const std::vector<Panel>& panels, int panel_w = 420, int panel_h = 320) {
  const int margin_l = 60, margin_b = 45, margin_t = 30, margin_r = 15;
  std::ostringstream s;
  const int width = panel_w * static_cast<int>(panels.size());
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << panel_h
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const Panel& pan = panels[p];
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& se : pan.series) {
      for (double v : se.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
      for (double v : se.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
    }
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    const double ox = p * panel_w + margin_l, oy = margin_t;
    const double w = panel_w - margin_l - margin_r, h = panel_h - margin_t - margin_b;
    auto px = [&](double v) { return ox + (v - x0) / (x1 - x0) * w; };
    auto py = [&](double v) { return oy + h - (v - y0) / (y1 - y0) * h; };

    s << "<rect x=\"" << ox << "\" y=\"" << oy << "\" width=\"" << w << "\" height=\"" << h
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double xv = x0 + (x1 - x0) * t / 4.0, yv = y0 + (y1 - y0) * t / 4.0;
      s << "<text x=\"" << px(xv) << "\" y=\"" << oy + h + 14 << "\" text-anchor=\"middle\">" << fmt(std::round(xv * 1000) / 1000)
        << "</text>\n";
      s << "<text x=\"" << ox - 4 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << fmt(std::round(yv * 1000) / 1000)
        << "</text>\n";
    }
    s << "<text x=\"" << ox + w / 2 << "\" y=\"" << oy - 10 << "\" text-anchor=\"middle\">" << pan.title << "</text>\n";
    s << "<text x=\"" << ox + w / 2 << "\" y=\"" << oy + h + 32 << "\" text-anchor=\"middle\">" << pan.xlabel
      << "</text>\n";
    s << "<text x=\"" << ox - 45 << "\" y=\"" << oy + h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 "
      << ox - 45 << ' ' << oy + h / 2 << ")\">" << pan.ylabel << "</text>\n";
    for (std::size_t k = 0; k < pan.series.size(); ++k) {
      const Series& se = pan.series[k];
      if (se.line && se.x.size() > 1) {
        s << "<polyline fill=\"none\" stroke=\"" << se.color << "\" points=\"";
        for (std::size_t i = 0; i < se.x.size(); ++i) s << px(se.x[i]) << ',' << py(se.y[i]) << ' ';
        s << "\"/>\n";
      }
      if (se.markers) {
        for (std::size_t i = 0; i < se.x.size(); ++i) {
          s << "<circle cx=\"" << px(se.x[i]) << "\" cy=\"" << py(se.y[i]) << "\" r=\"2.5\" fill=\"none\" stroke=\""
            << se.color << "\"/>\n";
        }
      }
      s << "<text x=\"" << ox + 8 << "\" y=\"" << oy + 14 + 13 * k << "\" fill=\"" << se.color << "\">" << se.name
        << "</text>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

inline std::string sweep_svg(const std::vector<SweepRow>& rows) {
  Series ca{"2 gamma(P)", {}, {}, true, false, "#1f77b4"}, cs{"SDP", {}, {}, false, true, "#d62728"};
  Series la{"f + gamma", {}, {}, true, false, "#1f77b4"}, ls{"lambda_1 SDP", {}, {}, false, true, "#d62728"};
  Series ga{"g", {}, {}, true, false, "#2ca02c"}, gs{"lambda_2..n SDP", {}, {}, false, true, "#9467bd"};
  for (const auto& r : rows) {
    if (!r.ok()) continue;
    ca.x.push_back(r.purity), ca.y.push_back(r.analytic);
    cs.x.push_back(r.purity), cs.y.push_back(r.solved);
    la.x.push_back(r.purity), la.y.push_back(r.lambda1_analytic);
    ls.x.push_back(r.purity), ls.y.push_back(r.lambda1_solved);
    ga.x.push_back(r.purity), ga.y.push_back(r.g_analytic);
    for (double v : r.rest_solved) gs.x.push_back(r.purity), gs.y.push_back(v);
  }
  const std::string tag = rows.empty() ? "" : " (N=" + std::to_string(rows.front().qubits) + ")";
  return svg_plot({{"maximal GM-concurrence" + tag, "purity P", "concurrence", {ca, cs}},
                   {"optimal spectrum" + tag, "purity P", "eigenvalue", {la, ls, ga, gs}}});
}

inline std::string rank_decay_svg(const LogDetResult& r, int qubits) {
  Series s{"complex rank", {}, {}, true, true, "#1f77b4"};
  for (const auto& h : r.history) s.x.push_back(h.iteration), s.y.push_back(static_cast<double>(h.complex_rank));
  return svg_plot({{"rank decay (N=" + std::to_string(qubits) + ")", "iteration", "rank", {s}}}, 520, 340);
}

}  // namespace xmems::experiments
