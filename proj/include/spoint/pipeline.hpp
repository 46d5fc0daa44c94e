#pragma once

// Batch stages behind the command-line tool. Each stage adds a section to a
// JSON report and writes its curves as whitespace-separated CSV files.

#include "spoint/config.hpp"
#include "spoint/error.hpp"

#include "json.hpp"

#include <string>

namespace spoint {

enum class Command { kConvention, kScan, kRadial, kLevinson, kSweep, kAll };

/// Throws InputError for an unknown name.
Command parse_command(const std::string& name);
std::string to_string(Command c);

inline constexpr const char* kReportSchema = "spoints.report/1";

/// Tolerances attached to the checks in the report.
inline constexpr double kPhiAgreementTol = 0.01;
inline constexpr double kPsiResidualTol = 1e-6;
inline constexpr double kPhaseKmaxTol = 0.02;
inline constexpr double kLevinsonDefectTol = 0.02;  // times pi
inline constexpr double kPhiZeroExclusion = 0.25;   // radial band skipped in the Phi comparison

struct RunResult {
  nlohmann::ordered_json report;
  /// Wall-clock seconds per stage; kept out of the report so that it is
  /// reproducible byte for byte.
  nlohmann::ordered_json timings;
  ExitCode code = ExitCode::kOk;
  std::string message;
};

/// Runs `cmd`, writing report.json, timings.json and CSV files into cfg.out.
/// Library errors are caught and mapped to the exit code; the report is
/// written in every case.
RunResult run_pipeline(Command cmd, const RunConfig& cfg);

}  // namespace spoint
