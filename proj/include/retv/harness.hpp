#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "retv/image.hpp"
#include "retv/noise.hpp"
#include "retv/reparam.hpp"
#include "retv/solver.hpp"

namespace retv {

struct Scaling {
  enum class Kind { None, Range, Mean };
  Kind kind = Kind::None;
  double lo = 0.0, hi = 1.0;  // Range
  double target = 1.0;        // Mean

  static Scaling none() { return {}; }
  static Scaling range(double lo, double hi) {
    return {Kind::Range, lo, hi, 1.0};
  }
  static Scaling mean(double target) {
    return {Kind::Mean, 0.0, 1.0, target};
  }
};

Image apply(const Scaling& scaling, const Image& image);

struct NamedImage {
  std::string name;
  Image image;
};

// Where the min over tau is taken in the empirical risk: per image (mean over
// realizations first) or per individual realization.
enum class TauSelection { PerImage, PerRealization };

using Sampler = std::function<Image(const NoiseModel&, const Image&, Seed)>;

struct ExperimentSpec {
  std::vector<NamedImage> images;
  NoiseModel model;
  int realizations = 20;                   // m
  std::vector<ReparamFamily> family_grid;  // usually one family kind, many k
  std::vector<double> tau_grid;
  Scaling scaling;
  std::uint64_t seed = 0;
  SolverConfig solver;  // the tau field is overridden by the grid
  TauSelection tau_selection = TauSelection::PerImage;
  bool include_baseline = true;
  bool warm_start_tau = true;  // continuation along the tau grid
  int threads = 0;             // 0 = hardware concurrency
  bool verbose = false;
  Sampler sampler;  // default: sample(); injectable for tests
};

// All aggregates are averaged in fixed index order, so reports are bitwise
// reproducible for a given spec regardless of thread count.
struct RiskReport {
  std::vector<std::string> image_names;
  std::vector<ReparamFamily> families;
  std::vector<double> tau_grid;
  bool has_baseline = false;

  // [image][family]
  std::vector<std::vector<double>> cell_rmse;       // risk cell: best-tau RMSE
  std::vector<std::vector<double>> cell_best_tau;
  std::vector<std::vector<double>> cell_iterations; // mean outer iters at best tau
  // [image][family][tau], mean over realizations
  std::vector<std::vector<std::vector<double>>> rmse_by_tau;

  std::vector<double> baseline_rmse;        // per image
  std::vector<double> baseline_best_tau;
  std::vector<double> baseline_iterations;
  std::vector<std::vector<double>> baseline_rmse_by_tau;

  std::vector<double> family_risk;  // mean over images of cell_rmse
  double baseline_risk = 0.0;

  std::vector<double> family_lipschitz;  // bound with the first observation
  std::vector<std::string> failures;     // diagnostics for excluded cells
};

std::vector<double> log_spaced(double lo, double hi, int n);
std::vector<double> default_tau_grid();  // 25 log-spaced points in [1e-2, 10]

// Shape-family grids used in the sweeps: Bernoulli 0.05..0.5, speckle
// 0.25..2.0, Poisson 10 linear points from mean/10 to mean.
std::vector<ReparamFamily> default_k_grid(NoiseModel::Kind kind,
                                          double mean_intensity);

// Rule-of-thumb shape from the observations alone.
double heuristic_k(const NoiseModel& model, const Image& y);

// Full grid experiment: families x tau grid (+ baseline), m realizations per
// image, clairvoyant tau per cell.
RiskReport sweep(const ExperimentSpec& spec);

// Risk of a single family under the spec's protocol.
double empirical_risk(const ExperimentSpec& spec, const ReparamFamily& family);

// family_risk + lambda / lipschitz_bound, per family (infinite bounds add 0).
std::vector<double> tradeoff_score(const RiskReport& report, double lambda);

void write_table_csv(const RiskReport& report, const std::string& path);
void write_curve_csv(const RiskReport& report, const std::string& path);
void write_manifest_json(const ExperimentSpec& spec, const RiskReport& report,
                         double wall_seconds, const std::string& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::string> row_names;
  std::vector<std::vector<double>> rows;  // includes the Average row last
};

// Parses a table written by write_table_csv and re-checks the Average row.
CsvTable load_table_csv(const std::string& path);

}  // namespace retv
