#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "robctl/control.hpp"
#include "robctl/models.hpp"

namespace robctl {

enum class ScenarioId {
    dip_smc,
    motorcycle_smc,
    sip_nonrobust_failure,
    sip_robust_riccati,
    sip_robust_riccati_midpoint,
    sip_interval_polynomial,
    sip_adaptive_online,
    sip_adaptive_lookup,
    sip_adaptive_sysid,
    sip_cbf,
    point2d_cbf_case1,
    point2d_cbf_case2,
    point2d_clf_cbf_case1,
    point2d_clf_cbf_case2,
};

struct ScenarioInfo {
    ScenarioId id;
    const char* name;
    const char* listing;
    TerminalEvent expected;
    double t_end;
    std::vector<std::string> state_names;
    std::vector<double> initial_state;
    std::vector<std::string> tunables; // beyond dt, t_end, decimation and state names
};

const std::vector<ScenarioInfo>& scenario_registry();
const ScenarioInfo& scenario_info(ScenarioId id);
ScenarioId parse_scenario(const std::string& name);
const char* scenario_name(ScenarioId id);

using Overrides = std::map<std::string, double>;

struct RunReport {
    std::string scenario;
    TerminalEvent terminal_event = TerminalEvent::timeout;
    Vec final_state;
    double elapsed_sim_time = 0.0;
    std::optional<double> min_h;
    std::vector<std::pair<std::string, Vec>> gains;
    std::string checksum;
    long guard_activations = 0;

    bool operator==(const RunReport& o) const;
};

struct ScenarioRun {
    Trajectory traj;
    RunReport report;
    std::vector<std::string> state_names;
    // Per-control-step diagnostics (e.g. barrier value, identified parameters); NaN when undefined.
    std::vector<std::string> aux_names;
    std::vector<std::vector<double>> aux;
};

ScenarioRun run_scenario(ScenarioId id, const Overrides& overrides = {});

// Listing-level assertion used by the CLI exit code.
bool outcome_as_expected(ScenarioId id, const RunReport& report);

std::string trajectory_checksum(const Trajectory& traj);

enum class EmitFormat { csv, json, svg };
EmitFormat parse_format(const std::string& s);

void emit(const ScenarioRun& run, EmitFormat format, const std::string& path);
std::string to_csv(const Trajectory& traj);
std::string report_to_json(const RunReport& report);
RunReport report_from_json(const std::string& text);

std::vector<SweepRow> table_rows(int which);
void emit_table(int which, const std::string& path);

// Rows on lines, whitespace-separated entries, '#' comments; a JSON array of arrays is also accepted.
Mat read_matrix_file(const std::string& path);
Mat parse_matrix_text(const std::string& text);

} // namespace robctl
