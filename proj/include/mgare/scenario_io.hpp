#pragma once

#include <string>

#include "mgare/certifier.hpp"
#include "mgare/policy.hpp"
#include "mgare/scenario.hpp"

namespace mgare {

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// JSON scenario file. Matrices are nested row arrays; channel models are
/// tagged objects. Round-trips losslessly (shortest round-trip doubles).
std::string scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const std::string& text);

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& sc, const std::string& path);

std::string existence_report_json(const Scenario& sc, const MgareSolution& sol);
std::string certificate_json(const Certificate& cert);
std::string cost_report_json(const CostReport& report, double analytic);

void write_file(const std::string& path, const std::string& text);

/// Trace CSV with columns run,k,state...,u_c...,u_a...,stage_cost.
std::string trace_csv(const PolicyTrace& trace);

}  // namespace mgare
