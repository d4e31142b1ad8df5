#pragma once

// Scenario runner: synthesis, certification checks, flow verification and
// oracle replay, with a deterministic JSON report and CSV plot data.

#include "solflow/flow.hpp"
#include "solflow/oracle.hpp"
#include "solflow/synthesis.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace solflow {

enum class Check { Conditions, Tails, Envelopes, Exit, Residual, OracleReplay };

/// Checks in execution order.
inline constexpr Check all_checks[] = {Check::Conditions, Check::Tails,    Check::Envelopes,
                                       Check::Exit,       Check::Residual, Check::OracleReplay};

[[nodiscard]] const char* to_string(Check check);
/// Inverse of to_string; throws ConfigError for unknown names.
[[nodiscard]] Check parse_check(const std::string& name);

struct Tolerances {
    double residual = 1e-5;  ///< max PDE residual
    double replay = 5e-3;    ///< max replay deviation
    double envelope = 1e-12; ///< allowed envelope overshoot
    double flow = 1e-8;      ///< integrator tolerance
};

struct Scenario {
    SynthesisSpec spec;
    std::vector<Check> checks;  ///< sorted, unique, nonempty
    std::filesystem::path output_dir = "solflow-out";
    std::uint64_t seed = 0;
    Tolerances tolerances;

    FieldScale field_scale = FieldScale::Unit;  ///< scale whose exit verdict decides the check
    std::size_t exit_grid = 16;                 ///< equispaced particles: exit_grid + 1
    std::size_t exit_random = 4;                ///< extra particles drawn from the seed
    std::size_t exit_times = 5;                 ///< terminal times in [T - eps2, T]
    std::size_t envelope_samples = 16;          ///< times in [0, T]
    std::size_t residual_points = 200;
    std::size_t residual_times = 50;
    std::size_t replay_resolution = 64;
    SearchOptions search;
};

/// Parses a scenario document. Unknown keys, wrong types and invalid values
/// raise ConfigError naming the field; malformed JSON names the line and column.
[[nodiscard]] Scenario parse_scenario(const std::string& text);
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& file);
[[nodiscard]] nlohmann::ordered_json to_json(const Scenario& scenario);

struct SynthesisConfig {
    SynthesisSpec spec;
    SearchOptions search;
};

/// Spec and search keys of a document; scenario-only keys are accepted and
/// ignored, unknown keys are rejected.
[[nodiscard]] SynthesisConfig parse_synthesis(const std::string& text);

enum class CheckStatus { Pass, Fail, Skipped, Error };
[[nodiscard]] const char* to_string(CheckStatus status);

struct CheckResult {
    Check check = Check::Conditions;
    CheckStatus status = CheckStatus::Skipped;
    nlohmann::ordered_json details = nlohmann::ordered_json::object();
    std::string message;
    double seconds = 0.0;
};

struct RunArtifacts {
    std::optional<SolitonTrain> train;
    std::vector<SearchStep> trace;
    std::map<FieldScale, ExitReport> exits;
    std::optional<ReplayResult> replay;
};

struct Report {
    nlohmann::ordered_json synthesis;
    std::vector<CheckResult> checks;
    RunArtifacts artifacts;
    int exit_code = 0;  ///< 0 pass, 1 check failure, 3 numeric failure
    double synthesis_seconds = 0.0;

    [[nodiscard]] bool passed() const { return exit_code == 0; }
    /// Deterministic report; timings are excluded.
    [[nodiscard]] nlohmann::ordered_json to_json(const Scenario& scenario) const;
    [[nodiscard]] nlohmann::ordered_json timings() const;
};

struct RunOptions {
    bool keep_going = false;  ///< continue past a failed check
    bool write_files = true;  ///< report.json, timings.json and plot data in output_dir
};

/// Runs the requested checks in order. Without keep_going, a failing or
/// erroring check (or an infeasible synthesis) skips every later check.
[[nodiscard]] Report run(const Scenario& scenario, const RunOptions& options = {});

/// Peak positions of one soliton over a window of times.
struct PeakTrack {
    std::vector<double> t;
    std::vector<double> x;
};

/// Net asymptotic shift of one soliton from straight-line fits of its peak
/// before and after every collision.
struct PhaseShiftFit {
    std::size_t soliton = 0;
    double alpha = 0.0;
    double shift = 0.0;      ///< fitted
    double predicted = 0.0;  ///< from the interaction coefficients
    double speed_before = 0.0;
    double speed_after = 0.0;
    PeakTrack before;
    PeakTrack after;
};

/// (1/alpha_k) (sum over faster j of ln a(k,j) - sum over slower j of ln a(k,j)).
[[nodiscard]] double predicted_phase_shift(const NSolitonSolution& sol, std::size_t k);

/// Fits the shift of every soliton from `samples` peak positions in each of
/// the pre- and post-collision windows. Requires distinct amplitudes.
[[nodiscard]] std::vector<PhaseShiftFit> fit_phase_shifts(const NSolitonSolution& sol, std::size_t samples = 32);

/// Writes snapshots.csv (t,x,value over [0,L] x [0,T]), one
/// trajectories_<scale>.csv per exit report and replay.csv when present.
/// Throws DomainError when the run produced no solution.
void emit_plot_data(const RunArtifacts& artifacts, const std::filesystem::path& dir);

/// Writes snapshots.csv spanning every collision, peaks.csv
/// (soliton,phase,t,x) and shifts.csv (soliton,alpha,fitted,predicted).
void emit_phase_shift_data(const NSolitonSolution& sol, const std::filesystem::path& dir);

} // namespace solflow
