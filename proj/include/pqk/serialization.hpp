#pragma once

// JSON documents for systems, states and almost periodic vectors.
// Rationals are "p/q" strings, complex numbers [re, im], matrices row arrays.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "pqk/almost_periodic.hpp"
#include "pqk/dpg.hpp"
#include "pqk/gaussian_states.hpp"

namespace pqk::io {

using Json = nlohmann::ordered_json;

/// Parse failures and schema violations throw MalformedInput naming the field.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& doc);

Json system_to_json(const dpg::System& sys);
/// Also runs System::validate().
dpg::System system_from_json(const Json& doc);

struct StateDocument {
  std::string label;
  GaussianMixtureState state;
};

Json state_to_json(const StateDocument& doc);
/// Checks shapes, symmetry of P, Hermiticity of R, weights and convergence.
StateDocument state_from_json(const Json& doc);

Json ap_to_json(const APVector& v);
APVector ap_from_json(const Json& doc);

/// {"source": [...], "target": [...], "matrix": [[...]]}
Json projection_to_json(const ProjectionMatrix& b);
ProjectionMatrix projection_from_json(const Json& doc);

Json assumption_report_to_json(const AssumptionReport& report);

}  // namespace pqk::io
