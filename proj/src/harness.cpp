#include "retv/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "retv/datafit.hpp"
#include "retv/rng.hpp"

namespace retv {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

Image apply(const Scaling& s, const Image& image) {
  switch (s.kind) {
    case Scaling::Kind::None:
      if (image.size() == 0 || !all_finite(image))
        throw std::invalid_argument("scaling: bad image");
      return image;
    case Scaling::Kind::Range:
      return scale_to_range(image, s.lo, s.hi);
    case Scaling::Kind::Mean:
      return scale_to_mean(image, s.target);
  }
  throw std::invalid_argument("scaling: unknown kind");
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2)
    throw std::invalid_argument("log_spaced: need 0 < lo < hi and n >= 2");
  std::vector<double> out(n);
  const double la = std::log(lo), lb = std::log(hi);
  for (int i = 0; i < n; ++i)
    out[i] = std::exp(la + (lb - la) * double(i) / double(n - 1));
  return out;
}

std::vector<double> default_tau_grid() { return log_spaced(1e-2, 10.0, 25); }

std::vector<ReparamFamily> default_k_grid(NoiseModel::Kind kind,
                                          double mean_intensity) {
  std::vector<ReparamFamily> grid;
  switch (kind) {
    case NoiseModel::Kind::Bernoulli:
      for (int i = 1; i <= 10; ++i)
        grid.push_back(ReparamFamily::bernoulli(0.05 * i));
      break;
    case NoiseModel::Kind::Poisson:
      if (!(mean_intensity > 0.0))
        throw std::invalid_argument("default_k_grid: need a positive mean");
      for (int i = 1; i <= 10; ++i)
        grid.push_back(ReparamFamily::poisson_logexp(mean_intensity * 0.1 * i));
      break;
    case NoiseModel::Kind::Speckle:
      for (int i = 1; i <= 8; ++i)
        grid.push_back(ReparamFamily::speckle(0.25 * i));
      break;
  }
  return grid;
}

double heuristic_k(const NoiseModel& model, const Image& y) {
  if (y.size() == 0 || !all_finite(y))
    throw std::invalid_argument("heuristic_k: bad observations");
  switch (model.kind) {
    case NoiseModel::Kind::Poisson:
      return 0.4 * y.mean();
    case NoiseModel::Kind::Bernoulli:
      return 0.3;
    case NoiseModel::Kind::Speckle:
      return 2.0;
  }
  throw std::invalid_argument("heuristic_k: unknown model");
}

namespace {

// One (image, method, realization): RMSE and iteration count per tau.
struct CellRun {
  std::vector<double> rmse;
  std::vector<int> iters;
  bool failed = false;
  std::string error;
};

struct Method {  // a family or the baseline
  bool baseline = false;
  ReparamFamily family;
  std::string label_;
};

void run_tau_chain(const ExperimentSpec& spec, const Method& method,
                   const Image& truth, const Image& y, CellRun& out) {
  const std::size_t nt = spec.tau_grid.size();
  out.rmse.assign(nt, kNaN);
  out.iters.assign(nt, 0);

  DataFitPtr fit = method.baseline
                       ? make_baseline_fit(spec.model, y)
                       : make_reparam_fit(method.family, spec.model, y);
  const ReparamFamily family =
      method.baseline ? ReparamFamily::identity() : method.family;
  const Image start = method.baseline ? initial_baseline(*fit, y)
                                      : initial_theta(family, y);

  // Visit taus from the smoothest down so continuation starts easy.
  std::vector<std::size_t> order(nt);
  for (std::size_t i = 0; i < nt; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return spec.tau_grid[a] > spec.tau_grid[b];
  });

  Image warm = start;
  for (std::size_t oi = 0; oi < nt; ++oi) {
    const std::size_t ti = order[oi];
    SolverConfig cfg = spec.solver;
    cfg.tau = spec.tau_grid[ti];
    const Image& init = spec.warm_start_tau ? warm : start;
    SolveResult res = method.baseline ? solve_baseline(*fit, cfg, init)
                                      : solve(*fit, family, cfg, init);
    out.rmse[ti] = rmse_relative(res.x_hat, truth);
    out.iters[ti] = res.iterations;
    if (spec.warm_start_tau) warm = std::move(res.theta_hat);
  }
}

std::string method_label(const Method& m) {
  return m.baseline ? "baseline" : label(m.family);
}

}  // namespace

RiskReport sweep(const ExperimentSpec& spec) {
  if (spec.images.empty()) throw std::invalid_argument("sweep: no images");
  if (spec.tau_grid.empty()) throw std::invalid_argument("sweep: empty tau grid");
  if (spec.realizations < 1)
    throw std::invalid_argument("sweep: need at least one realization");
  for (double t : spec.tau_grid)
    if (!(t >= 0.0) || !std::isfinite(t))
      throw std::invalid_argument("sweep: tau grid must be finite and >= 0");
  if (spec.family_grid.empty() && !spec.include_baseline)
    throw std::invalid_argument("sweep: nothing to run");

  const std::size_t ni = spec.images.size();
  const std::size_t nf = spec.family_grid.size();
  const std::size_t nm = nf + (spec.include_baseline ? 1 : 0);
  const std::size_t nr = std::size_t(spec.realizations);
  const std::size_t nt = spec.tau_grid.size();

  Sampler sampler = spec.sampler;
  if (!sampler)
    sampler = [](const NoiseModel& m, const Image& x, Seed s) {
      return sample(m, x, s);
    };

  std::vector<Method> methods;
  for (const ReparamFamily& f : spec.family_grid)
    methods.push_back({false, f, label(f)});
  if (spec.include_baseline)
    methods.push_back({true, ReparamFamily::identity(), "baseline"});

  // Truths and observations are generated up front, in index order.
  std::vector<Image> truths(ni);
  std::vector<std::vector<Image>> obs(ni);
  for (std::size_t i = 0; i < ni; ++i) {
    truths[i] = apply(spec.scaling, spec.images[i].image);
    obs[i].resize(nr);
    for (std::size_t j = 0; j < nr; ++j)
      obs[i][j] = sampler(spec.model, truths[i],
                          Seed{derive_seed(spec.seed, i, j)});
  }

  // One task per (image, method, realization); each runs the whole tau chain.
  std::vector<CellRun> runs(ni * nm * nr);
  auto slot = [&](std::size_t i, std::size_t m, std::size_t j) {
    return (i * nm + m) * nr + j;
  };

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t w = next.fetch_add(1);
      if (w >= runs.size()) return;
      const std::size_t j = w % nr;
      const std::size_t m = (w / nr) % nm;
      const std::size_t i = w / (nr * nm);
      CellRun& run = runs[w];
      try {
        run_tau_chain(spec, methods[m], truths[i], obs[i][j], run);
      } catch (const std::exception& e) {
        run.failed = true;
        run.error = e.what();
      }
      if (spec.verbose) {
        std::lock_guard<std::mutex> lock(log_mutex);
        std::fprintf(stderr, "[sweep] %s / %s / r%zu %s\n",
                     spec.images[i].name.c_str(),
                     method_label(methods[m]).c_str(), j,
                     run.failed ? "FAILED" : "done");
      }
    }
  };

  unsigned n_threads = spec.threads > 0
                           ? unsigned(spec.threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, unsigned(runs.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  // Deterministic aggregation.
  RiskReport rep;
  for (const NamedImage& im : spec.images) rep.image_names.push_back(im.name);
  rep.families = spec.family_grid;
  rep.tau_grid = spec.tau_grid;
  rep.has_baseline = spec.include_baseline;
  rep.cell_rmse.assign(ni, std::vector<double>(nf, kNaN));
  rep.cell_best_tau = rep.cell_rmse;
  rep.cell_iterations = rep.cell_rmse;
  rep.rmse_by_tau.assign(
      ni, std::vector<std::vector<double>>(nf, std::vector<double>(nt, kNaN)));
  if (spec.include_baseline) {
    rep.baseline_rmse.assign(ni, kNaN);
    rep.baseline_best_tau.assign(ni, kNaN);
    rep.baseline_iterations.assign(ni, kNaN);
    rep.baseline_rmse_by_tau.assign(ni, std::vector<double>(nt, kNaN));
  }

  for (std::size_t i = 0; i < ni; ++i) {
    for (std::size_t m = 0; m < nm; ++m) {
      // Collect surviving realizations in index order.
      std::vector<const CellRun*> ok;
      for (std::size_t j = 0; j < nr; ++j) {
        const CellRun& run = runs[slot(i, m, j)];
        if (run.failed) {
          std::ostringstream msg;
          msg << "image=" << spec.images[i].name
              << " method=" << method_label(methods[m]) << " realization=" << j
              << ": " << run.error;
          rep.failures.push_back(msg.str());
        } else {
          ok.push_back(&run);
        }
      }

      std::vector<double> mean_rmse(nt, kNaN);
      if (!ok.empty()) {
        for (std::size_t t = 0; t < nt; ++t) {
          double acc = 0.0;
          for (const CellRun* r : ok) acc += r->rmse[t];
          mean_rmse[t] = acc / double(ok.size());
        }
      }

      double best = kNaN, best_tau = kNaN, best_iter = kNaN;
      if (!ok.empty()) {
        if (spec.tau_selection == TauSelection::PerImage) {
          std::size_t bi = 0;
          for (std::size_t t = 1; t < nt; ++t)
            if (mean_rmse[t] < mean_rmse[bi]) bi = t;
          best = mean_rmse[bi];
          best_tau = spec.tau_grid[bi];
          double it = 0.0;
          for (const CellRun* r : ok) it += double(r->iters[bi]);
          best_iter = it / double(ok.size());
        } else {
          double acc = 0.0, tau_acc = 0.0, it_acc = 0.0;
          for (const CellRun* r : ok) {
            std::size_t bi = 0;
            for (std::size_t t = 1; t < nt; ++t)
              if (r->rmse[t] < r->rmse[bi]) bi = t;
            acc += r->rmse[bi];
            tau_acc += spec.tau_grid[bi];
            it_acc += double(r->iters[bi]);
          }
          best = acc / double(ok.size());
          best_tau = tau_acc / double(ok.size());
          best_iter = it_acc / double(ok.size());
        }
      }

      if (methods[m].baseline) {
        rep.baseline_rmse[i] = best;
        rep.baseline_best_tau[i] = best_tau;
        rep.baseline_iterations[i] = best_iter;
        rep.baseline_rmse_by_tau[i] = mean_rmse;
      } else {
        rep.cell_rmse[i][m] = best;
        rep.cell_best_tau[i][m] = best_tau;
        rep.cell_iterations[i][m] = best_iter;
        rep.rmse_by_tau[i][m] = mean_rmse;
      }
    }
  }

  rep.family_risk.assign(nf, kNaN);
  for (std::size_t f = 0; f < nf; ++f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < ni; ++i) acc += rep.cell_rmse[i][f];
    rep.family_risk[f] = acc / double(ni);
  }
  if (spec.include_baseline) {
    double acc = 0.0;
    for (std::size_t i = 0; i < ni; ++i) acc += rep.baseline_rmse[i];
    rep.baseline_risk = acc / double(ni);
  } else {
    rep.baseline_risk = kNaN;
  }

  rep.family_lipschitz.assign(nf, kNaN);
  if (ni > 0 && nr > 0) {
    for (std::size_t f = 0; f < nf; ++f) {
      try {
        rep.family_lipschitz[f] =
            make_reparam_fit(spec.family_grid[f], spec.model, obs[0][0])
                ->lipschitz_bound();
      } catch (const std::exception&) {
        // leave NaN
      }
    }
  }
  return rep;
}

double empirical_risk(const ExperimentSpec& spec, const ReparamFamily& family) {
  ExperimentSpec sub = spec;
  sub.family_grid = {family};
  sub.include_baseline = false;
  return sweep(sub).family_risk[0];
}

std::vector<double> tradeoff_score(const RiskReport& report, double lambda) {
  if (!(lambda >= 0.0))
    throw std::invalid_argument("tradeoff_score: lambda must be >= 0");
  std::vector<double> out(report.families.size(), kNaN);
  for (std::size_t f = 0; f < report.families.size(); ++f) {
    const double l = report.family_lipschitz[f];
    double pen = 0.0;
    if (std::isfinite(l) && l > 0.0) pen = lambda / l;
    out[f] = report.family_risk[f] + pen;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reporting
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

void write_table_csv(const RiskReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_table_csv: cannot open " + path);
  out << "image";
  if (report.has_baseline) out << ",baseline";
  for (const ReparamFamily& f : report.families) out << "," << label(f);
  out << "\n";

  const std::size_t ni = report.image_names.size();
  for (std::size_t i = 0; i < ni; ++i) {
    out << report.image_names[i];
    if (report.has_baseline) out << "," << fmt(report.baseline_rmse[i]);
    for (std::size_t f = 0; f < report.families.size(); ++f)
      out << "," << fmt(report.cell_rmse[i][f]);
    out << "\n";
  }
  out << "Average";
  if (report.has_baseline) out << "," << fmt(report.baseline_risk);
  for (std::size_t f = 0; f < report.families.size(); ++f)
    out << "," << fmt(report.family_risk[f]);
  out << "\n";
  if (!out) throw std::runtime_error("write_table_csv: write failed: " + path);
}

void write_curve_csv(const RiskReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_curve_csv: cannot open " + path);
  out << "k,risk,baseline_risk\n";
  for (std::size_t f = 0; f < report.families.size(); ++f)
    out << fmt(report.families[f].k) << "," << fmt(report.family_risk[f]) << ","
        << fmt(report.baseline_risk) << "\n";
  if (!out) throw std::runtime_error("write_curve_csv: write failed: " + path);
}

void write_manifest_json(const ExperimentSpec& spec, const RiskReport& report,
                         double wall_seconds, const std::string& path) {
  nlohmann::json j;
  j["model"] = to_string(spec.model.kind);
  j["looks"] = spec.model.looks;
  j["realizations"] = spec.realizations;
  j["seed"] = spec.seed;
  j["tau_grid"] = spec.tau_grid;
  j["tau_selection"] = spec.tau_selection == TauSelection::PerImage
                           ? "per-image"
                           : "per-realization";
  j["warm_start_tau"] = spec.warm_start_tau;
  switch (spec.scaling.kind) {
    case Scaling::Kind::None:
      j["scaling"] = {{"kind", "none"}};
      break;
    case Scaling::Kind::Range:
      j["scaling"] = {{"kind", "range"}, {"lo", spec.scaling.lo}, {"hi", spec.scaling.hi}};
      break;
    case Scaling::Kind::Mean:
      j["scaling"] = {{"kind", "mean"}, {"target", spec.scaling.target}};
      break;
  }
  j["solver"] = {{"max_outer_iters", spec.solver.max_outer_iters},
                 {"rel_tol", spec.solver.rel_tol},
                 {"inner_iters", spec.solver.inner_iters},
                 {"eta", spec.solver.eta},
                 {"memory", spec.solver.memory}};
  std::vector<std::string> fams;
  for (const ReparamFamily& f : report.families) fams.push_back(label(f));
  j["families"] = fams;
  j["images"] = nlohmann::json::array();
  for (const NamedImage& im : spec.images)
    j["images"].push_back({{"name", im.name},
                           {"rows", im.image.rows()},
                           {"cols", im.image.cols()}});
  auto risk_or_null = [](double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json();
  };
  j["family_risk"] = nlohmann::json::array();
  for (double v : report.family_risk) j["family_risk"].push_back(risk_or_null(v));
  j["family_lipschitz"] = nlohmann::json::array();
  for (double v : report.family_lipschitz)
    j["family_lipschitz"].push_back(risk_or_null(v));
  j["baseline_risk"] = risk_or_null(report.baseline_risk);
  j["failures"] = report.failures;
  j["wall_seconds"] = wall_seconds;
  j["generator"] = "retv 0.1.0";

  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_manifest_json: cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write_manifest_json: write failed: " + path);
}

CsvTable load_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_table_csv: cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("load_table_csv: empty file: " + path);
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) table.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::getline(ls, cell, ',');
    table.row_names.push_back(cell);
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() + 1 != table.header.size())
      throw std::runtime_error("load_table_csv: ragged row in " + path);
    table.rows.push_back(std::move(row));
  }
  if (table.rows.size() < 2 || table.row_names.back() != "Average")
    throw std::runtime_error("load_table_csv: missing Average row in " + path);
  const std::size_t n = table.rows.size() - 1;
  for (std::size_t c = 0; c < table.rows[0].size(); ++c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) acc += table.rows[r][c];
    if (std::fabs(acc / double(n) - table.rows[n][c]) > 1e-9)
      throw std::runtime_error("load_table_csv: Average row check failed in " +
                               path);
  }
  return table;
}

}  // namespace retv
