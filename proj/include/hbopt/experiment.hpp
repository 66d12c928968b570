#pragma once

#include "hbopt/certify.hpp"
#include "hbopt/hbf_ode.hpp"
#include "hbopt/problems.hpp"
#include "hbopt/schemes.hpp"
#include "hbopt/tuning.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hbopt {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitInvalid = 2;

/// Environment variable that overrides ExperimentConfig::output_dir.
inline constexpr const char* kOutputDirEnv = "HBOPT_OUTPUT_DIR";

enum class AlphaRule { kExplicit, kTheorem1, kCorollary1, kCorollary2 };

struct SchemeEntry {
  std::string label;
  SchemeConfig config;
  AlphaRule alpha_rule = AlphaRule::kExplicit;
  /// cor2 rule: alpha = 1 - theta.
  std::optional<double> theta;
  /// Used instead of the problem's kappa when tuning alpha.
  std::optional<double> kappa_estimate;
};

struct EmitFlags {
  bool csv = true;
  bool json_report = true;
  bool gnuplot_script = false;
};

struct OdeSection {
  /// "thm3", "prop1" or a number.
  std::string friction = "thm3";
  std::optional<double> friction_value;
  double t0 = 0.0;
  double t_end = 40.0;
  double dt = 1e-3;
  std::optional<Vector> v0;
};

struct ExperimentConfig {
  nlohmann::json problem;
  std::vector<SchemeEntry> schemes;
  std::optional<Regime> regime;
  std::filesystem::path output_dir = "hbopt_out";
  std::uint64_t seed = 0;
  long max_iter = 1000;
  double stop_gap = 0.0;
  double stop_residual = 0.0;
  bool record_wall_time = false;
  EmitFlags emit;
  std::optional<Vector> x0;
  OdeSection ode;
};

/// Parses a config document. Relative `problem_file` paths resolve against
/// `base_dir`. Throws InvalidArgument on any inconsistency.
ExperimentConfig parse_experiment(const nlohmann::json& doc,
                                  const std::filesystem::path& base_dir = ".");
ExperimentConfig load_experiment(const std::filesystem::path& path);

/// A config resolved against its problem: alpha rules applied, certificates
/// attached where the theory covers the run.
struct PreparedScheme {
  SchemeEntry entry;
  std::optional<RateCertificate> certificate;
  /// Theoretical per-iteration decrement used for ordering (certified for
  /// V-FISTA, (1/e) sqrt(k) for restart, k for FB).
  std::optional<double> theoretical_decrement;
};

struct Experiment {
  ExperimentConfig config;
  CompositeProblem problem;
  Vector x0;
  std::vector<PreparedScheme> schemes;
  std::string problem_hash;
};

Experiment prepare_experiment(const ExperimentConfig& cfg);

/// Runs every scheme, concurrently when there is more than one.
std::vector<RunResult> run_schemes(const Experiment& exp, bool keep_iterates);

inline const std::vector<double> kAccuracyGrid = {1e-4, 1e-8, 1e-12};

struct ComparisonRow {
  std::string label;
  std::string scheme;
  std::map<double, std::optional<long>> iterations_to_eps;
  std::map<double, std::optional<long>> predicted_iterations;
  RateFit fit;
  std::optional<double> certified_decrement;
  std::optional<double> theoretical_decrement;
  std::optional<bool> bound_check;
  /// fitted >= certified - 1e-3, when both exist.
  std::optional<bool> certified_consistent;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  /// Labels sorted by decreasing theoretical decrement.
  std::vector<std::string> expected_order;
  /// Iterations to 1e-8 are non-decreasing along expected_order.
  std::optional<bool> ordering_holds;
};

ComparisonReport build_comparison(const Experiment& exp, const std::vector<RunResult>& runs);
nlohmann::json to_json(const ComparisonReport& report);
void print_comparison(std::ostream& out, const ComparisonReport& report);

/// First n with f_gap <= eps.
std::optional<long> iterations_to(const RunResult& run, double eps);

nlohmann::json certificate_json(const RateCertificate& cert);

// Subcommands -------------------------------------------------------------

struct CertifyArgs {
  std::optional<double> kappa;
  std::optional<double> lipschitz;
  std::optional<double> mu;
  std::optional<double> theta;
  std::optional<std::string> regime;
  double eps = 1e-8;
};

/// Certificate JSON on `out`, human-readable summary on `err`.
int cmd_certify(const CertifyArgs& args, std::ostream& out, std::ostream& err);
int cmd_run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_compare(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
/// Exit 1 when a check fails.
int cmd_validate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_ode(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace hbopt
