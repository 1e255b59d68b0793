#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "bgw/offspring.hpp"

namespace bgw {

enum class Mode { Moment, PhaseScan, LLT, HeightMoments, TailProfile, Continuum };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

/// (alpha', beta) pair of the rescaled sum sum |t_w|^alpha' H(t_w)^beta; the
/// matching continuum toll is x^{alpha'-1} u^beta.
struct TollSpec {
  double alpha_prime = 1.0;
  double beta = 0.0;
};

struct ExperimentConfig {
  Mode mode = Mode::Moment;
  OffspringModel model = OffspringModel::catalan();
  std::vector<std::int64_t> sizes;
  std::int64_t replicates = 1000;
  std::uint64_t seed = 0;
  int workers = 1;

  std::vector<TollSpec> tolls;          // Moment, Continuum
  std::vector<double> alpha_primes;     // PhaseScan
  double beta = 0.0;                    // PhaseScan
  std::vector<double> moment_orders;    // HeightMoments

  std::size_t excursion_steps = 10000;  // Continuum grid size m
  std::size_t levels = 1024;            // Continuum level count K
  double attempt_multiplier = 10.0;

  /// Relative tolerance for rows that carry a theory value (Moment, Continuum, LLT).
  double tolerance = 0.05;
  /// Phase scan: per-decade growth factor that counts as divergence.
  double divergence_factor = 1.5;
  /// Phase scan and height moments: allowed relative change across the top decade.
  double stability_tolerance = 0.2;
  /// Phase scan: largest ratio of successive increments of the estimate that
  /// still counts as geometric convergence (used to extrapolate the limit).
  double max_contraction = 0.8;
  /// Tail profile: relative tolerance on the fitted exponent, and the window
  /// of empirical cdf values used by the fit.
  double tail_tolerance = 0.25;
  double tail_window_low = 1e-4;
  double tail_window_high = 0.8;
  /// Reports with more than this fraction of dropped replicates are invalid.
  double max_drop_fraction = 0.01;

  /// Throws std::invalid_argument when the configuration cannot be run.
  void validate() const;
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ReportRow {
  std::string mode;
  std::string family;
  double gamma = kNaN;
  double kappa = kNaN;
  std::int64_t n = 0;
  std::int64_t replicates = 0;
  double alpha_prime = kNaN;
  double beta = kNaN;
  double estimate = kNaN;
  double stderr_ = kNaN;
  double theory = kNaN;
  double zscore = kNaN;
  std::int64_t drops = 0;
  std::uint64_t seed = 0;

  // Not part of the CSV schema.
  std::string verdict;  // "", "pass", "fail", or a phase verdict
  std::string note;
  double wall_time = 0.0;
  bool failed = false;
};

struct McReport {
  std::vector<ReportRow> rows;
  std::vector<std::string> warnings;
  bool valid = true;

  bool all_passed() const;
  /// 0 = all checks pass, 2 = some verdict failed, 3 = invalid report.
  int exit_code() const;
};

/// Column header, exactly "mode,family,gamma,kappa,n,R,alpha_prime,beta,estimate,stderr,theory,zscore,drops,seed".
const std::string& csv_header();
void write_csv(std::ostream& out, const McReport& report);
/// Array of row objects with the CSV keys.
nlohmann::json to_json(const McReport& report);

struct SampleSummary {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::int64_t count = 0;
};
SampleSummary summarize(const std::vector<double>& values);

/// Least-squares fit of -log F = c y^{-a} + q log y + d (lower tail, F = cdf)
/// or -log S = c y^{a} + q log y + d (upper tail, S = survival), profiled over
/// the exponent a. Empirical F is rank / (R + 1); only points with F (or S)
/// inside [low, high] enter the fit.
struct TailFit {
  double exponent = kNaN;
  std::size_t points = 0;
  double window_low = 0.0;
  bool ok = false;
  std::string warning;
};
TailFit fit_tail_exponent(std::vector<double> samples, bool lower, double low, double high);

McReport run_moment(const ExperimentConfig& config);
McReport run_phase_scan(const ExperimentConfig& config);
McReport run_llt(const ExperimentConfig& config);
McReport run_height_moments(const ExperimentConfig& config);
McReport run_tail_profile(const ExperimentConfig& config);
McReport run_continuum(const ExperimentConfig& config);
McReport run(const ExperimentConfig& config);

}  // namespace bgw
