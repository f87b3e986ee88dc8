#pragma once

#include "roughsew/analysis.hpp"
#include "roughsew/flows.hpp"
#include "roughsew/sewing.hpp"

#include <json.hpp>

#include <string>

namespace roughsew::cli {

nlohmann::json vector_json(const Vector& v);
nlohmann::json to_json(const SampleSpec& spec);
nlohmann::json to_json(const DefectReport& r);
nlohmann::json to_json(const RefinementStudy& s);
nlohmann::json to_json(const ConvergenceReport& r);
nlohmann::json to_json(const Certification& c);
nlohmann::json to_json(const CompareReport& r);

// Shortest text that reads back to the same double.
std::string format_double(double x);

// Columns: level, mesh, error, runtime_ms.
std::string rate_csv(const ConvergenceReport& r);

// Columns: t, y1, ..., yd.
std::string trajectory_csv(const SolutionPath& y);

}  // namespace roughsew::cli
