#pragma once

#include <json.hpp>

#include "sbfa/model_spec.hpp"
#include "sbfa/rng.hpp"

namespace sbfa {

using Json = nlohmann::json;

// Doubles that may be non-finite are encoded as strings so the JSON
// round-trip is lossless (nlohmann serializes inf/nan as null).
Json real_to_json(double x);
double real_from_json(const Json& j);

Json vector_to_json(const VectorXd& v);
VectorXd vector_from_json(const Json& j);
Json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const Json& j);

Json spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const Json& j);

Json theta_to_json(const Theta& theta);
Theta theta_from_json(const Json& j);

Json stream_to_json(const RngStream& s);
RngStream stream_from_json(const Json& j);

std::string link_name(Link link);
Link link_from_name(const std::string& name);

}  // namespace sbfa
