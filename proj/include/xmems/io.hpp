#pragma once

// JSON encodings shared by the CLI and tests.
//
//   matrix    {"dim": d, "re": [[...]], "im": [[...]]}   row-major
//   XState    {"N": N, "a": [...], "b": [...], "r": [...], "phi": [...]}
//   Spectrum  {"n": n, "values": [...]}
//   options   flat record of SolveOptions fields
//   problem   {"form", "block_sizes", "convention", ...} with every block
//             in the matrix encoding

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xmems/channel.hpp"
#include "xmems/mems.hpp"
#include "xmems/qmat.hpp"
#include "xmems/sdp.hpp"
#include "xmems/xstate.hpp"

namespace xmems::io {

using json = nlohmann::json;

inline json matrix_to_json(const CMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix_to_json: matrix is not square");
  json re = json::array(), im = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json rr = json::array(), ri = json::array();
    for (Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ri.push_back(m(i, j).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  return json{{"dim", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

inline json matrix_to_json(const HermitianMatrix& h) { return matrix_to_json(h.matrix()); }
inline json matrix_to_json(const RMatrix& m) { return matrix_to_json(CMatrix(m.cast<cplx>())); }

/// "im" may be omitted for real matrices.
inline CMatrix matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("re")) {
    throw std::invalid_argument("matrix JSON: expected object with \"dim\" and \"re\"");
  }
  const Index d = j.at("dim").get<Index>();
  if (d < 0) throw std::invalid_argument("matrix JSON: negative dimension");
  auto read_part = [&](const char* key, bool required) {
    RMatrix out = RMatrix::Zero(d, d);
    if (!j.contains(key)) {
      if (required) throw std::invalid_argument(std::string("matrix JSON: missing \"") + key + "\"");
      return out;
    }
    const json& rows = j.at(key);
    if (!rows.is_array() || static_cast<Index>(rows.size()) != d) {
      throw std::invalid_argument(std::string("matrix JSON: \"") + key + "\" must have dim rows");
    }
    for (Index r = 0; r < d; ++r) {
      const json& row = rows.at(static_cast<std::size_t>(r));
      if (!row.is_array() || static_cast<Index>(row.size()) != d) {
        throw std::invalid_argument(std::string("matrix JSON: row ") + std::to_string(r) + " of \"" + key +
                                    "\" must have dim entries");
      }
      for (Index c = 0; c < d; ++c) out(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return out;
  };
  CMatrix m(d, d);
  m.real() = read_part("re", true);
  m.imag() = read_part("im", false);
  return m;
}

inline HermitianMatrix hermitian_from_json(const json& j) { return HermitianMatrix(matrix_from_json(j)); }

inline json xstate_to_json(const XState& x) {
  return json{{"N", x.qubits()}, {"a", x.a()}, {"b", x.b()}, {"r", x.r()}, {"phi", x.phi()}};
}

inline XState xstate_from_json(const json& j) {
  for (const char* key : {"N", "a", "b", "r", "phi"}) {
    if (!j.contains(key)) throw std::invalid_argument(std::string("XState JSON: missing \"") + key + "\"");
  }
  XState x = XState::make(j.at("a").get<std::vector<double>>(), j.at("b").get<std::vector<double>>(),
                          j.at("r").get<std::vector<double>>(), j.at("phi").get<std::vector<double>>());
  if (x.qubits() != j.at("N").get<int>()) {
    throw std::invalid_argument("XState JSON: \"N\" does not match the block count");
  }
  return x;
}

inline json spectrum_to_json(const Spectrum& s) { return json{{"n", s.n()}, {"values", s.values()}}; }

inline Spectrum spectrum_from_json(const json& j) {
  if (!j.contains("values")) throw std::invalid_argument("Spectrum JSON: missing \"values\"");
  Spectrum s = Spectrum::make(j.at("values").get<std::vector<double>>());
  if (j.contains("n") && j.at("n").get<std::size_t>() != s.n()) {
    throw std::invalid_argument("Spectrum JSON: \"n\" does not match the number of values");
  }
  return s;
}

inline json options_to_json(const sdp::SolveOptions& o) {
  return json{{"feas_tol", o.feas_tol},         {"gap_tol", o.gap_tol},
              {"max_iters", o.max_iters},       {"step_fraction", o.step_fraction},
              {"regularization", o.regularization}, {"min_centering", o.min_centering}};
}

/// Unknown keys are rejected so that typos do not pass silently.
inline sdp::SolveOptions options_from_json(const json& j) {
  sdp::SolveOptions o;
  for (const auto& [key, value] : j.items()) {
    if (key == "feas_tol") o.feas_tol = value.get<double>();
    else if (key == "gap_tol") o.gap_tol = value.get<double>();
    else if (key == "max_iters") o.max_iters = value.get<int>();
    else if (key == "step_fraction") o.step_fraction = value.get<double>();
    else if (key == "regularization") o.regularization = value.get<double>();
    else if (key == "min_centering") o.min_centering = value.get<double>();
    else throw std::invalid_argument("solver options: unknown key \"" + key + "\"");
  }
  return o;
}

inline json block_matrix_to_json(const sdp::BlockMatrix& m) {
  json out = json::array();
  for (const auto& b : m.blocks) out.push_back(matrix_to_json(RMatrix(b)));
  return out;
}

inline sdp::BlockMatrix block_matrix_from_json(const json& j) {
  sdp::BlockDense dense;
  for (const auto& b : j) {
    const CMatrix m = matrix_from_json(b);
    if (m.imag().cwiseAbs().maxCoeff() > 0.0) {
      throw std::invalid_argument("SDP JSON: problem data must be real");
    }
    dense.push_back(m.real());
  }
  return sdp::BlockMatrix::from_dense(dense);
}

inline json problem_to_json(const sdp::SdpProblem& p) {
  json out{{"block_sizes", p.block_sizes},
           {"convention", {{"scale", p.convention.scale}, {"offset", p.convention.offset}}}};
  if (p.form() == sdp::Form::inequality) {
    const auto& q = p.inequality();
    out["form"] = "inequality";
    out["c"] = std::vector<double>(q.c.data(), q.c.data() + q.c.size());
    out["f0"] = block_matrix_to_json(q.f0);
    json f = json::array();
    for (const auto& fi : q.f) f.push_back(block_matrix_to_json(fi));
    out["f"] = std::move(f);
  } else {
    const auto& q = p.standard();
    out["form"] = "standard";
    out["rhs"] = std::vector<double>(q.rhs.data(), q.rhs.data() + q.rhs.size());
    out["cost"] = block_matrix_to_json(q.cost);
    json a = json::array();
    for (const auto& ai : q.constraints) a.push_back(block_matrix_to_json(ai));
    out["constraints"] = std::move(a);
  }
  return out;
}

inline sdp::SdpProblem problem_from_json(const json& j) {
  sdp::SdpProblem p;
  p.block_sizes = j.at("block_sizes").get<std::vector<Index>>();
  if (j.contains("convention")) {
    p.convention.scale = j.at("convention").value("scale", 1.0);
    p.convention.offset = j.at("convention").value("offset", 0.0);
  }
  const std::string form = j.at("form").get<std::string>();
  auto to_vec = [](const json& v) {
    const auto s = v.get<std::vector<double>>();
    return RVector(Eigen::Map<const RVector>(s.data(), static_cast<Index>(s.size())));
  };
  if (form == "inequality") {
    sdp::InequalityForm q;
    q.c = to_vec(j.at("c"));
    q.f0 = block_matrix_from_json(j.at("f0"));
    for (const auto& fi : j.at("f")) q.f.push_back(block_matrix_from_json(fi));
    p.data = std::move(q);
  } else if (form == "standard") {
    sdp::StandardForm q;
    q.rhs = to_vec(j.at("rhs"));
    q.cost = block_matrix_from_json(j.at("cost"));
    for (const auto& ai : j.at("constraints")) q.constraints.push_back(block_matrix_from_json(ai));
    p.data = std::move(q);
  } else {
    throw std::invalid_argument("SDP JSON: unknown form \"" + form + "\"");
  }
  sdp::validate(p);
  return p;
}

inline json solution_to_json(const sdp::SdpSolution& s) {
  json out{{"status", sdp::to_string(s.status)},
           {"iterations", s.iterations},
           {"primal_value", s.primal_value},
           {"dual_value", s.dual_value},
           {"reported", s.reported},
           {"gap", s.gap},
           {"primal_infeasibility", s.primal_infeasibility},
           {"dual_infeasibility", s.dual_infeasibility}};
  if (s.primal_vector.size()) {
    out["primal_vector"] = std::vector<double>(s.primal_vector.data(), s.primal_vector.data() + s.primal_vector.size());
  }
  if (s.dual_vector.size()) {
    out["dual_vector"] = std::vector<double>(s.dual_vector.data(), s.dual_vector.data() + s.dual_vector.size());
  }
  return out;
}

inline json report_to_json(const VerificationReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"residual", c.residual}, {"tolerance", c.tolerance}});
  }
  return json{{"certified", r.certified()},
              {"primal_value", r.primal_value},
              {"dual_value", r.dual_value},
              {"lambda_n", r.lambda_n},
              {"checks", std::move(checks)}};
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace xmems::io
