#include "sbfa/serialize.hpp"

#include <cmath>
#include <limits>

#include "sbfa/errors.hpp"

namespace sbfa {

Json real_to_json(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double real_from_json(const Json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw ConfigError("unrecognized real encoding: " + s);
  }
  return j.get<double>();
}

Json vector_to_json(const VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(real_to_json(v[i]));
  return a;
}

VectorXd vector_from_json(const Json& j) {
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = real_from_json(j[i]);
  return v;
}

Json matrix_to_json(const MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(real_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

MatrixXd matrix_from_json(const Json& j) {
  const Eigen::Index r = j.at("rows").get<Eigen::Index>();
  const Eigen::Index c = j.at("cols").get<Eigen::Index>();
  MatrixXd m(r, c);
  const Json& data = j.at("data");
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index l = 0; l < c; ++l) m(i, l) = real_from_json(data[i][l]);
  return m;
}

std::string link_name(Link link) {
  switch (link) {
    case Link::Identity: return "identity";
    case Link::Logit: return "logit";
    case Link::Probit: return "probit";
  }
  return "identity";
}

Link link_from_name(const std::string& name) {
  if (name == "identity") return Link::Identity;
  if (name == "logit") return Link::Logit;
  if (name == "probit") return Link::Probit;
  throw ConfigError("unknown link: " + name);
}

namespace {

std::string ident_name(Identification id) {
  switch (id) {
    case Identification::LeadingOnes: return "leading_ones";
    case Identification::EfaLowerTriangular: return "efa";
    case Identification::Saturated: return "saturated";
  }
  return "leading_ones";
}

Identification ident_from_name(const std::string& s) {
  if (s == "leading_ones") return Identification::LeadingOnes;
  if (s == "efa") return Identification::EfaLowerTriangular;
  if (s == "saturated") return Identification::Saturated;
  throw ConfigError("unknown identification: " + s);
}

std::string cov_mode_name(FactorCovMode m) {
  switch (m) {
    case FactorCovMode::Identity: return "identity";
    case FactorCovMode::LkjCorrelation: return "lkj";
    case FactorCovMode::InverseWishart: return "inverse_wishart";
  }
  return "identity";
}

FactorCovMode cov_mode_from_name(const std::string& s) {
  if (s == "identity") return FactorCovMode::Identity;
  if (s == "lkj") return FactorCovMode::LkjCorrelation;
  if (s == "inverse_wishart") return FactorCovMode::InverseWishart;
  throw ConfigError("unknown factor covariance mode: " + s);
}

}  // namespace

Json spec_to_json(const ModelSpec& spec) {
  Json cells = Json::array();
  for (const auto& c : spec.loading_pattern) {
    switch (c.kind) {
      case CellKind::Free: cells.push_back("free"); break;
      case CellKind::ApproxZero: cells.push_back("approx_zero"); break;
      case CellKind::FixedValue: cells.push_back(c.value); break;
    }
  }
  Json j{{"p", spec.p},
         {"k", spec.k},
         {"link", link_name(spec.link)},
         {"identification", ident_name(spec.ident)},
         {"loading_pattern", std::move(cells)},
         {"factor_cov_mode", cov_mode_name(spec.factor_cov_mode)},
         {"lkj_eta", spec.lkj_eta},
         {"sat_lkj_eta", spec.sat_lkj_eta},
         {"iw_df", spec.iw_df},
         {"residual_mode",
          spec.residual_mode == ResidualMode::DiagonalInvGamma ? "diagonal_inv_gamma"
                                                               : "fixed_identity"},
         {"c0", spec.c0},
         {"loading_prior_sd", spec.loading_prior_sd},
         {"approx_zero_sd", spec.approx_zero_sd},
         {"intercept_prior_sd", spec.intercept_prior_sd}};
  if (spec.factor_cov_mode == FactorCovMode::InverseWishart)
    j["iw_scale"] = matrix_to_json(spec.iw_scale);
  return j;
}

ModelSpec spec_from_json(const Json& j) {
  ModelSpec spec;
  spec.p = j.at("p").get<int>();
  spec.k = j.at("k").get<int>();
  spec.link = link_from_name(j.at("link").get<std::string>());
  spec.ident = ident_from_name(j.at("identification").get<std::string>());
  for (const auto& c : j.at("loading_pattern")) {
    if (c.is_string()) {
      const std::string s = c.get<std::string>();
      if (s == "free")
        spec.loading_pattern.push_back(LoadingCell::free());
      else if (s == "approx_zero")
        spec.loading_pattern.push_back(LoadingCell::approx_zero());
      else
        throw ConfigError("unknown loading cell kind: " + s);
    } else {
      spec.loading_pattern.push_back(LoadingCell::fixed(c.get<double>()));
    }
  }
  spec.factor_cov_mode = cov_mode_from_name(j.at("factor_cov_mode").get<std::string>());
  spec.lkj_eta = j.at("lkj_eta").get<double>();
  spec.sat_lkj_eta = j.at("sat_lkj_eta").get<double>();
  spec.iw_df = j.at("iw_df").get<double>();
  if (j.contains("iw_scale")) spec.iw_scale = matrix_from_json(j.at("iw_scale"));
  spec.residual_mode = j.at("residual_mode").get<std::string>() == "diagonal_inv_gamma"
                           ? ResidualMode::DiagonalInvGamma
                           : ResidualMode::FixedIdentity;
  spec.c0 = j.at("c0").get<double>();
  spec.loading_prior_sd = j.at("loading_prior_sd").get<double>();
  spec.approx_zero_sd = j.at("approx_zero_sd").get<double>();
  spec.intercept_prior_sd = j.at("intercept_prior_sd").get<double>();
  spec.validate();
  return spec;
}

Json theta_to_json(const Theta& theta) {
  return Json{{"alpha", vector_to_json(theta.alpha)},
              {"lambda", matrix_to_json(theta.lambda)},
              {"phi", matrix_to_json(theta.phi)},
              {"psi_diag", vector_to_json(theta.psi_diag)}};
}

Theta theta_from_json(const Json& j) {
  Theta t;
  t.alpha = vector_from_json(j.at("alpha"));
  t.lambda = matrix_from_json(j.at("lambda"));
  t.phi = matrix_from_json(j.at("phi"));
  t.psi_diag = vector_from_json(j.at("psi_diag"));
  return t;
}

Json stream_to_json(const RngStream& s) {
  return Json{{"seed", s.seed}, {"stream_id", s.stream_id}, {"counter", s.counter}};
}

RngStream stream_from_json(const Json& j) {
  RngStream s = RngStream::seeded(j.at("seed").get<std::uint64_t>(),
                                  j.at("stream_id").get<std::uint64_t>());
  s.counter = j.at("counter").get<std::uint64_t>();
  return s;
}

}  // namespace sbfa
