#pragma once

// JSON views of analysis results, as written by the command-line tool.

#include <cmath>

#include <json.hpp>

#include "oqrw/asymptotics.hpp"
#include "oqrw/trajectories.hpp"

namespace oqrw {

using nlohmann::json;

inline json real_to_json(double x) {
  if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
  if (std::isnan(x)) return "nan";
  return x;
}

inline json vector_to_json(const RealVector& v) {
  auto out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(real_to_json(v(i)));
  return out;
}

inline json real_matrix_to_json(const RealMatrix& m) {
  auto out = json::array();
  for (Index i = 0; i < m.rows(); ++i) out.push_back(vector_to_json(m.row(i).transpose()));
  return out;
}

inline json basis_to_json(const ComplexMatrix& basis) {
  auto out = json::array();
  for (Index c = 0; c < basis.cols(); ++c) {
    auto col = json::array();
    for (Index r = 0; r < basis.rows(); ++r)
      col.push_back({{"re", basis(r, c).real()}, {"im", basis(r, c).imag()}});
    out.push_back(std::move(col));
  }
  return out;
}

inline json to_json(const ValidationReport& v, bool choi_psd, double tol) {
  return {{"residual", v.residual},
          {"stochastic", v.stochastic(tol)},
          {"h1", v.h1_holds},
          {"h2", v.h2_holds},
          {"choi_psd", choi_psd}};
}

inline json to_json(const StructureReport& r) {
  json j;
  j["stochasticity_residual"] = r.stochasticity_residual;
  j["h1"] = r.h1;
  j["h2"] = r.h2;
  j["l_irreducible"] = r.l_irreducibility.verdict;
  j["method_agreement"] = r.l_irreducibility.method_agreement;
  j["algebra_dimension"] = r.l_irreducibility.algebra_dimension;
  j["fixed_space_dimension"] = r.l_irreducibility.fixed_space_dimension;
  if (r.period) {
    j["period"] = r.period->d;
    auto projections = json::array();
    for (const auto& p : r.period->projections) projections.push_back(detail::matrix_to_json(p));
    j["cyclic_projections"] = std::move(projections);
  } else {
    j["period"] = nullptr;
    j["cyclic_projections"] = nullptr;
  }
  j["regular"] = r.regularity.regular;
  j["regular_N_estimate"] =
      r.regularity.n_estimate ? json(*r.regularity.n_estimate) : json(nullptr);
  j["r_subspace"] = basis_to_json(r.bn.r_basis);
  j["d_subspace"] = basis_to_json(r.bn.d_basis);
  j["decomposition_supported"] = r.decomposition_supported;
  if (r.c2) {
    j["c2_situation"] = r.c2->situation;
    j["c2_basis"] = r.c2->basis ? basis_to_json(*r.c2->basis) : json(nullptr);
  } else {
    j["c2_situation"] = "not-applicable";
  }
  j["m_verdict"] = std::string(to_string(r.m_verdict));
  j["m_verdict_source"] = r.m_verdict_source;
  j["m_return_paths"] = {{"verdict", std::string(to_string(r.m_paths.verdict))},
                         {"dimension_by_length", r.m_paths.dimension_by_length},
                         {"witness", r.m_paths.witness ? basis_to_json(*r.m_paths.witness)
                                                       : json(nullptr)}};
  if (r.m_c2)
    j["m_c2_classifier"] = {{"m_irreducible", r.m_c2->m_irreducible},
                            {"m_period", r.m_c2->m_period ? json(*r.m_c2->m_period) : json(nullptr)}};
  return j;
}

inline json to_json(const AsymptoticStats& s) {
  json j;
  j["m"] = vector_to_json(s.m);
  j["C"] = real_matrix_to_json(s.C);
  auto etas = json::array();
  for (const auto& e : s.eta_basis) etas.push_back(detail::matrix_to_json(e));
  j["eta_basis"] = std::move(etas);
  j["method_residuals"] = s.method_residuals;
  return j;
}

inline json to_json(const C2Parameters& p) {
  json j{{"m", vector_to_json(p.m)}, {"C", real_matrix_to_json(p.C)}, {"situation", p.situation}};
  j["period"] = p.period ? json(*p.period) : json(nullptr);
  j["mixture_weight"] = p.mixture_weight ? json(*p.mixture_weight) : json(nullptr);
  return j;
}

inline json to_json(const Kink& k) {
  return {{"u", k.u},
          {"lambda_left_slope", k.lambda_left_slope},
          {"lambda_right_slope", k.lambda_right_slope},
          {"log_lambda_left_slope", k.log_left_slope},
          {"log_lambda_right_slope", k.log_right_slope},
          {"crossing_gap", k.crossing_gap}};
}

inline json kinks_to_json(const std::vector<Kink>& kinks) {
  auto out = json::array();
  for (const auto& k : kinks) out.push_back(to_json(k));
  return out;
}

}  // namespace oqrw
