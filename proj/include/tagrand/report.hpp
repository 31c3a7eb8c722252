// Copyright tagrand contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration: run the selected randomness tools over a grid
// of (cipher, message-number mode) cells, add control rows (a weak cipher
// that must fail everywhere, a strong one that must pass everywhere), and
// render the verdict grid as text, CSV or JSON.

#ifndef TAGRAND_REPORT_HPP_
#define TAGRAND_REPORT_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tagrand/eacirc.hpp"
#include "tagrand/stream.hpp"
#include "tagrand/sts.hpp"

namespace tagrand {

struct PlanInvalid : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class ToolKind { kBattery, kSac, kEacirc };
const char* to_string(ToolKind tool);
ToolKind tool_from_string(const std::string& s);  // throws PlanInvalid

enum class Scale { kDesk, kPaper };
const char* to_string(Scale scale);
Scale scale_from_string(const std::string& s);  // throws PlanInvalid

// Tool workloads for a scale.  Desk keeps a full experiment in minutes;
// paper matches the published data volumes (hours).
struct ScaleProfile {
  std::size_t battery_sequences = 0;
  std::size_t battery_sequence_bits = 0;
  std::size_t sac_samples = 0;
  double sac_tolerance = 0.0;
  std::size_t eacirc_runs = 0;
  EvolutionConfig eacirc;  // per-run evolution parameters

  bool operator==(const ScaleProfile&) const = default;
};
ScaleProfile scale_profile(Scale scale);

struct ExperimentPlan {
  std::vector<std::string> ciphers;
  std::vector<PmnMode> modes = {PmnMode::kZero, PmnMode::kCounter,
                                PmnMode::kRandom};
  std::vector<ToolKind> tools = {ToolKind::kBattery, ToolKind::kSac,
                                 ToolKind::kEacirc};
  Scale scale = Scale::kDesk;
  std::uint64_t master_seed = 1;
  // Appends rows for the weak and strong control ciphers; their expected
  // verdicts gate the report's calibration flag.
  bool include_controls = true;

  bool operator==(const ExperimentPlan&) const = default;
};

enum class CellStatus { kOk, kError };
const char* to_string(CellStatus status);

struct CellResult {
  std::string cipher;
  PmnMode mode = PmnMode::kZero;
  ToolKind tool = ToolKind::kBattery;
  bool control = false;  // row added by the control sandwich
  CellStatus status = CellStatus::kOk;
  Verdict verdict = Verdict::kPass;
  // Headline number: battery = test lines passing, avalanche = max
  // deviation from one half, circuit distinguisher = rejecting proportion.
  double metric = 0.0;
  std::string headline;  // rendered headline, e.g. "9/10" or "0.013"
  std::string error;     // populated when status == kError

  bool operator==(const CellResult&) const = default;
};

struct ReportMetadata {
  std::uint64_t master_seed = 0;
  Scale scale = Scale::kDesk;
  std::size_t battery_roster = 0;
  std::size_t eacirc_runs = 0;
  std::string counter_byte_order;  // counters increment at byte 0
  std::string notes;
  std::string timestamp;  // not part of the deterministic payload

  bool operator==(const ReportMetadata&) const = default;
};

struct ExperimentReport {
  ExperimentPlan plan;
  ScaleProfile profile;
  std::vector<CellResult> cells;  // plan order: cipher, then mode, then tool
  bool calibration_ok = true;
  ReportMetadata metadata;

  bool operator==(const ExperimentReport&) const = default;
};

// Everything except the timestamp: the deterministic part of a report.
bool same_results(const ExperimentReport& a, const ExperimentReport& b);

// Validates the plan (nonempty lists, no duplicates, registered ciphers)
// without running anything.  Throws PlanInvalid.
void validate_plan(const ExperimentPlan& plan);

// Runs the full grid.  Control rows are appended unless the plan opts out
// or already names the control; a control row with the wrong verdict (or
// an error) clears calibration_ok.  A tool failure inside a cell records
// the cell as kError and continues.  The second overload substitutes a
// custom workload profile (scaled-down grids for tests).
ExperimentReport run_experiment(const ExperimentPlan& plan);
ExperimentReport run_experiment(const ExperimentPlan& plan,
                                const ScaleProfile& profile);

// Deterministic renderings: a verdict grid with one row per cipher and
// mode, a flat CSV (one line per cell), and a JSON object that re-parses
// to an equal report.
std::string render_text(const ExperimentReport& report);
std::string render_csv(const ExperimentReport& report);
std::string render_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& text);

}  // namespace tagrand

#endif  // TAGRAND_REPORT_HPP_
