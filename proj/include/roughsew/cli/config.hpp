#pragma once

#include "roughsew/driver.hpp"
#include "roughsew/fields.hpp"
#include "roughsew/sampling.hpp"
#include "roughsew/schemes.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace roughsew::cli {

// One JSON document describing a study. Recognised keys:
//
//   T, p, gamma, delta_scale, control_scale
//   driver:  {kind: smooth | pure_area | piecewise_linear, ...}
//              smooth:           path (circle | line | lissajous), radius, frequency, velocity,
//                                dim, base_level, substeps, depth
//              pure_area:        area (square antisymmetric matrix)
//              piecewise_linear: vertices, depth
//   field:   {kind: linear | trig | componentwise_trig | rotation, matrices, state_dim, scale}
//   scheme or schemes, ode_substeps
//   probes, box {center, radius}, samples
//   level, min_level, galaxy_levels, tol, seed, reference (self | exp | ode), reference_steps
struct RunConfig {
    nlohmann::json raw;
    SewingParameters params;
    double control_scale = 1.0;
    nlohmann::json driver;
    nlohmann::json field;
    std::vector<SchemeSpec> schemes;
    std::vector<Vector> probes;
    SampleBox box;
    std::size_t samples = 8;
    int level = 10;
    int min_level = 2;
    std::vector<int> galaxy_levels{4, 5, 6};
    double tol = 1e-10;
    std::uint64_t seed = 1;
    std::string reference = "self";
    std::size_t reference_steps = 100000;
};

// Throws StructuralError on any malformed or out-of-range entry.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

Control build_control(const RunConfig& cfg);
RoughDriver build_driver(const RunConfig& cfg);
VectorFieldFamily build_field(const RunConfig& cfg, std::size_t driver_dim);

}  // namespace roughsew::cli
