/*
 * Copyright 2026 The pathdf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathdf/csv.hpp"
#include "pathdf/experiment.hpp"

namespace pathdf {

inline std::string to_csv(const LassoPath& path) {
  std::ostringstream out;
  out << "lambda,dim,nnz,objective\n";
  for (std::size_t k = 0; k < path.size(); ++k)
    out << format_double(path.lambdas[k]) << ',' << path.dims[k] << ','
        << path.active_sets[k].size() << ',' << format_double(path.objectives[k]) << '\n';
  return out.str();
}

inline nlohmann::json to_json(const LassoPath& path, bool include_coefficients = false) {
  nlohmann::json j;
  j["lambdas"] = path.lambdas;
  j["dims"] = path.dims;
  j["active_sets"] = path.active_sets;
  j["objectives"] = path.objectives;
  if (include_coefficients) {
    std::vector<std::vector<double>> coefs;
    coefs.reserve(path.size());
    for (const auto& beta : path.coefs)
      coefs.emplace_back(beta.data(), beta.data() + beta.size());
    j["coefficients"] = coefs;
  }
  return j;
}

inline std::string to_csv(const DfEstimate& est) {
  std::ostringstream out;
  out << "lambda,df_dim,correction,df\n";
  for (std::size_t k = 0; k < est.lambdas.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    out << format_double(est.lambdas[k]) << ',' << format_double(est.df_dim[i]) << ','
        << format_double(est.correction[i]) << ',' << format_double(est.df[i]) << '\n';
  }
  return out.str();
}

inline std::string to_csv(const std::vector<RiskCurve>& curves) {
  std::ostringstream out;
  out << "method,lambda,value\n";
  for (const auto& curve : curves)
    for (std::size_t k = 0; k < curve.lambdas.size(); ++k)
      out << to_string(curve.method) << ',' << format_double(curve.lambdas[k]) << ','
          << format_double(curve.values[static_cast<Eigen::Index>(k)]) << '\n';
  return out.str();
}

inline std::string to_csv(const StudyResult& result) {
  std::ostringstream out;
  out << "method,relative_risk,relative_risk_se,selected_mean,selected_se\n";
  for (const auto& m : result.methods)
    out << to_string(m.method) << ',' << format_double(m.rel_risk) << ','
        << format_double(m.rel_risk_se) << ',' << format_double(m.selected_mean) << ','
        << format_double(m.selected_se) << '\n';
  out << "oracle," << format_double(result.oracle_rel_risk) << ",0,0,0\n";
  return out.str();
}

inline std::string to_csv(const DfVerifyReport& report) {
  std::ostringstream out;
  out << "lambda,cov_df,cov_se,mean_dim,dim_se,mean_df_est,df_est_se";
  if (report.has_analytic) out << ",analytic_dim,analytic_df";
  out << ",flagged\n";
  for (std::size_t k = 0; k < report.lambdas.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    out << format_double(report.lambdas[k]) << ',' << format_double(report.cov_df[i]) << ','
        << format_double(report.cov_se[i]) << ',' << format_double(report.mean_dim[i]) << ','
        << format_double(report.dim_se[i]) << ',' << format_double(report.mean_df_est[i]) << ','
        << format_double(report.df_est_se[i]);
    if (report.has_analytic)
      out << ',' << format_double(report.analytic_dim[i]) << ','
          << format_double(report.analytic_df[i]);
    out << ',' << (report.flagged[k] ? 1 : 0) << '\n';
  }
  return out.str();
}

inline std::string to_csv(const MseTable& table) {
  std::ostringstream out;
  out << "method,integrated_mse,mse_at_opt,lambda_opt,clipped\n";
  for (const auto& row : table.rows)
    out << to_string(row.method) << ',' << format_double(row.integrated_mse) << ','
        << format_double(row.mse_at_opt) << ',' << format_double(row.lambda_opt) << ','
        << (row.clipped ? 1 : 0) << '\n';
  return out.str();
}

inline std::string region_grid_csv(const std::vector<double>& ys1, const std::vector<double>& ys2,
                                   const Eigen::MatrixXi& labels) {
  std::ostringstream out;
  out << "y1,y2,label\n";
  for (std::size_t i = 0; i < ys1.size(); ++i)
    for (std::size_t j = 0; j < ys2.size(); ++j)
      out << format_double(ys1[i]) << ',' << format_double(ys2[j]) << ','
          << labels(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) << '\n';
  return out.str();
}

// --- JSON configuration -----------------------------------------------------

inline DesignType design_type_from_string(const std::string& s) {
  if (s == "orthogonal") return DesignType::Orthogonal;
  if (s == "simulated_ar") return DesignType::SimulatedAR;
  if (s == "simulated_const_corr") return DesignType::SimulatedConstCorr;
  if (s == "empirical") return DesignType::Empirical;
  throw std::invalid_argument("unknown design type: " + s);
}

inline NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "gaussian") return NoiseKind::Gaussian;
  if (s == "student_t3") return NoiseKind::StudentT3;
  if (s == "skew_normal3") return NoiseKind::SkewNormal3;
  throw std::invalid_argument("unknown noise kind: " + s);
}

inline TuningMethod tuning_method_from_string(const std::string& s) {
  if (s == "df") return TuningMethod::Df;
  if (s == "df_s") return TuningMethod::DfS;
  if (s == "cv5") return TuningMethod::CV5;
  if (s == "cv10") return TuningMethod::CV10;
  if (s == "lasso") return TuningMethod::Lasso;
  throw std::invalid_argument("unknown tuning method: " + s);
}

inline nlohmann::json to_json(const StudyConfig& cfg) {
  nlohmann::json j;
  j["design"] = {{"type", to_string(cfg.design.type)},
                 {"n", cfg.design.n},
                 {"p", cfg.design.p},
                 {"rho", cfg.design.rho}};
  if (!cfg.design.empirical_source.empty()) {
    j["design"]["source"] = cfg.design.empirical_source;
    j["design"]["source_has_header"] = cfg.design.source_has_header;
  }
  j["beta"] = {{"gamma", cfg.beta.gamma}, {"alpha", cfg.beta.alpha}};
  j["noise"] = {{"kind", to_string(cfg.noise.kind)}, {"sigma", cfg.noise.sigma}};
  j["n_reps"] = cfg.n_reps;
  j["grid"] = {{"n_lambda", cfg.grid.n_lambda}, {"ratio", cfg.grid.ratio}};
  if (!cfg.grid.lambdas.empty()) j["grid"]["lambdas"] = cfg.grid.lambdas;
  std::vector<std::string> methods;
  for (TuningMethod m : cfg.methods) methods.emplace_back(to_string(m));
  j["methods"] = methods;
  j["sigma_mode"] = cfg.sigma_mode == SigmaSource::Known ? "known" : "gcv";
  j["root_seed"] = cfg.root_seed;
  j["estimator"] = cfg.estimator == DfMethod::BestSubset ? "best_subset" : "lasso_ols";
  j["threads"] = cfg.threads;
  return j;
}

inline StudyConfig study_config_from_json(const nlohmann::json& j) {
  StudyConfig cfg;
  const auto& d = j.at("design");
  cfg.design.type = design_type_from_string(d.at("type").get<std::string>());
  cfg.design.n = d.at("n").get<int>();
  cfg.design.p = d.at("p").get<int>();
  cfg.design.rho = d.value("rho", 0.0);
  cfg.design.empirical_source = d.value("source", std::string());
  cfg.design.source_has_header = d.value("source_has_header", false);
  const auto& b = j.at("beta");
  cfg.beta.gamma = b.at("gamma").get<double>();
  cfg.beta.alpha = b.at("alpha").get<double>();
  const auto& nz = j.at("noise");
  cfg.noise.kind = noise_kind_from_string(nz.at("kind").get<std::string>());
  cfg.noise.sigma = nz.at("sigma").get<double>();
  cfg.n_reps = j.at("n_reps").get<int>();
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    cfg.grid.n_lambda = g.value("n_lambda", 100);
    cfg.grid.ratio = g.value("ratio", 0.0);
    if (g.contains("lambdas")) cfg.grid.lambdas = g.at("lambdas").get<std::vector<double>>();
  }
  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const auto& m : j.at("methods"))
      cfg.methods.push_back(tuning_method_from_string(m.get<std::string>()));
  }
  const std::string sigma_mode = j.value("sigma_mode", std::string("known"));
  if (sigma_mode == "known")
    cfg.sigma_mode = SigmaSource::Known;
  else if (sigma_mode == "gcv")
    cfg.sigma_mode = SigmaSource::GcvEstimated;
  else
    throw std::invalid_argument("unknown sigma_mode: " + sigma_mode);
  cfg.root_seed = j.value("root_seed", std::uint64_t{1});
  const std::string estimator = j.value("estimator", std::string("lasso_ols"));
  if (estimator == "lasso_ols")
    cfg.estimator = DfMethod::LassoOLS;
  else if (estimator == "best_subset")
    cfg.estimator = DfMethod::BestSubset;
  else
    throw std::invalid_argument("unknown estimator: " + estimator);
  cfg.threads = j.value("threads", 0);
  return cfg;
}

inline std::uint64_t fnv1a_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Run manifest: the configuration, a hash of its canonical serialization,
/// and the library version. Timings live here rather than in the result
/// tables so rerunning a seed reproduces every table byte for byte.
inline nlohmann::json make_manifest(const StudyConfig& cfg,
                                    const std::map<std::string, double>& timings = {}) {
  nlohmann::json manifest;
  manifest["config"] = to_json(cfg);
  manifest["config_hash"] = fnv1a_hash(manifest["config"].dump());
  manifest["root_seed"] = cfg.root_seed;
  manifest["version"] = "0.1.0";
  if (!timings.empty()) manifest["timings_seconds"] = timings;
  return manifest;
}

}  // namespace pathdf
