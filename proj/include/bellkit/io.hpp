#pragma once

// File formats: CSV tables, trial logs, and JSON reports.

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bellkit/behavior.hpp"
#include "bellkit/di_bounds.hpp"
#include "bellkit/interplay.hpp"
#include "bellkit/pbr.hpp"
#include "bellkit/qstate.hpp"
#include "bellkit/tomo.hpp"
#include "bellkit/trial_sim.hpp"

namespace bellkit::io {

using Json = nlohmann::ordered_json;

// CountTable CSV: header a,b,x,y,count; one row per cell.
void write_count_table(std::ostream& os, const CountTable& counts);
/// The alphabet is ternary when any label is "0" or "u", binary otherwise.
CountTable read_count_table(std::istream& is);

// Trial log: one "trial_index,x,y,a,b" record per line, no header.
void write_trial_log(std::ostream& os, std::span<const TrialRecord> log, Alphabet alphabet);
std::vector<TrialRecord> read_trial_log(std::istream& is, Alphabet alphabet);

// Trajectory CSV: theta_rad,incompat,s_alpha,l1,l2,l3,l4.
void write_trajectory(std::ostream& os, const std::vector<InterplayPoint>& traj);

// Observed calibration points: theta_rad,s_alpha.
std::vector<std::pair<double, double>> read_observed_points(std::istream& is);

// Tomography counts CSV: basis_a,basis_b,count, 36 rows.
void write_tomo_counts(std::ostream& os, const TomoCounts& counts);
TomoCounts read_tomo_counts(std::istream& is);

Json to_json(const DiBoundReport& r);
Json to_json(const CalibrationFit& f);
Json to_json(const PbrResult& r);
Json to_json(const SpacetimeMargins& m);
/// 4x4 array of [re, im] pairs.
Json to_json(const Matrix4c& m);

Matrix4c matrix_from_json(const Json& j);
/// Keys must match the field names exactly; unknown or missing keys are rejected.
SpacetimeConfig spacetime_from_json(const Json& j);
Json to_json(const SpacetimeConfig& c);

/// Shortest representation that round-trips the double.
std::string format_double(double v);

}  // namespace bellkit::io
