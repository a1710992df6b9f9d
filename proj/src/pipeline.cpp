#include "isocal/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

#include "isocal/io.hpp"
#include "isocal/simulate.hpp"
#include "isocal/threads.hpp"

namespace fs = std::filesystem;

namespace isocal {

namespace {

const char* kMethodOrder[] = {"cox", "rw", "rw+", "ht", "ht+", "dr"};

bool known_method(const std::string& m) {
  for (const char* k : kMethodOrder)
    if (m == k) return true;
  return false;
}

SurvivalDataset slice_dataset(const SurvivalDataset& ds, int lo, int hi) {
  SurvivalDataset out;
  out.p = ds.p;
  out.id.assign(ds.id.begin() + lo, ds.id.begin() + hi);
  out.time.assign(ds.time.begin() + lo, ds.time.begin() + hi);
  out.event.assign(ds.event.begin() + lo, ds.event.begin() + hi);
  out.x.assign(ds.x.begin() + static_cast<std::ptrdiff_t>(lo) * ds.p,
               ds.x.begin() + static_cast<std::ptrdiff_t>(hi) * ds.p);
  return out;
}

SimulationTruths slice_truths(const SimulationTruths& t, int lo, int hi) {
  SimulationTruths out;
  out.id.assign(t.id.begin() + lo, t.id.begin() + hi);
  out.true_time.assign(t.true_time.begin() + lo, t.true_time.begin() + hi);
  out.censor_time.assign(t.censor_time.begin() + lo, t.censor_time.begin() + hi);
  out.mu.assign(t.mu.begin() + lo, t.mu.begin() + hi);
  out.sigma.assign(t.sigma.begin() + lo, t.sigma.begin() + hi);
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("experiment config: " + what);
}

std::string path_join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_parent_dir(const std::string& file) {
  const fs::path parent = fs::path(file).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::string report_file_name(const MetricReport& r) {
  return "report_s" + std::to_string(r.seed) + "_" + r.method + "_" +
         eval_mode_name(r.mode) + ".json";
}

}  // namespace

std::string ExperimentConfig::tag() const {
  if (!dataset_tag.empty()) return dataset_tag;
  if (files) return "files";
  return "setting-" + std::to_string(setting);
}

void ExperimentConfig::validate() const {
  if (files) {
    require(!files->train.empty() && !files->cal.empty() && !files->test.empty(),
            "dataset paths must name train, cal and test files");
  } else {
    require(setting >= 1 && setting <= 6, "setting must be in 1..6");
    require(n_train > 0 && n_cal > 0 && n_test > 0,
            "split sizes must be positive");
  }
  require(!seeds.empty(), "at least one seed");
  require(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() ==
              seeds.size(),
          "seeds must be distinct");
  require(!methods.empty(), "at least one method");
  require(std::set<std::string>(methods.begin(), methods.end()).size() ==
              methods.size(),
          "methods must be distinct");
  for (const auto& m : methods)
    require(known_method(m), "unknown method '" + m + "'");
  require(!modes.empty(), "at least one metric mode");
  for (size_t i = 1; i < taus.size(); ++i)
    require(taus[i - 1] < taus[i], "quantile levels must be increasing");
  for (double t : taus)
    require(t > 0.0 && t < 1.0, "quantile levels must lie in (0,1)");
  require(grid_density >= 1, "grid density must be positive");
  require(clip_floor > 0.0 && clip_floor < 1.0, "clip floor must be in (0,1)");
  require(isr_rms > 0.0, "isotonic tolerance must be positive");
  require(ridge >= 0.0, "ridge must be non-negative");
}

SeedPipeline build_seed_pipeline(const ExperimentConfig& cfg,
                                 std::uint64_t seed,
                                 const NuisanceOverride* nuisance) {
  cfg.validate();
  SeedPipeline pipe;
  pipe.seed = seed;

  if (cfg.files) {
    pipe.train = load_dataset(cfg.files->train);
    pipe.cal = load_dataset(cfg.files->cal);
    pipe.test = load_dataset(cfg.files->test);
    if (!cfg.files->test_truths.empty()) {
      const SimulationTruths t = load_truths(cfg.files->test_truths);
      if (t.id != pipe.test.id)
        throw std::invalid_argument(
            "experiment: truths are not aligned with the test set");
      pipe.test_truths = t.true_time;
    }
  } else {
    const SimulatedData sim =
        generate(cfg.setting, cfg.n_train + cfg.n_cal + cfg.n_test, seed);
    const int a = cfg.n_train, b = cfg.n_train + cfg.n_cal;
    const int c = b + cfg.n_test;
    pipe.train = slice_dataset(sim.data, 0, a);
    pipe.cal = slice_dataset(sim.data, a, b);
    pipe.test = slice_dataset(sim.data, b, c);
    pipe.test_truths = slice_truths(sim.truths, b, c).true_time;
  }
  pipe.train.validate();
  pipe.cal.validate();
  pipe.test.validate();

  CoxOptions cox_opt;
  cox_opt.ridge = cfg.ridge;
  pipe.event_model = fit_cox(pipe.train, cox_opt);
  pipe.censoring_model = fit_censoring(pipe.train, cox_opt);
  pipe.cal_risks = risk_scores(pipe.event_model, pipe.cal);
  pipe.test_risks = risk_scores(pipe.event_model, pipe.test);
  pipe.grid = build_time_grid(pipe.train, pipe.cal, cfg.grid_density);

  pipe.s_cal = nuisance && nuisance->s_cal
                   ? *nuisance->s_cal
                   : predict_survival(pipe.event_model, pipe.cal, pipe.grid,
                                      GridRole::survival, cfg.clip_floor);
  pipe.g_cal = nuisance && nuisance->g_cal
                   ? *nuisance->g_cal
                   : predict_survival(pipe.censoring_model, pipe.cal, pipe.grid,
                                      GridRole::censoring, cfg.clip_floor);
  pipe.g_test = nuisance && nuisance->g_test
                    ? *nuisance->g_test
                    : predict_survival(pipe.censoring_model, pipe.test,
                                       pipe.grid, GridRole::censoring,
                                       cfg.clip_floor);

  RiskScores cal_rs;
  cal_rs.id = pipe.cal.id;
  cal_rs.value = pipe.cal_risks;

  const int n_cal = pipe.cal.n();
  const int K = pipe.grid.size();
  for (const std::string& name : cfg.methods) {
    MethodPredictions mp;
    mp.method = name;
    if (name == "cox") {
      mp.curves = curves_from_grid(
          predict_survival(pipe.event_model, pipe.test, pipe.grid,
                           GridRole::survival, cfg.clip_floor));
    } else {
      const Estimator e = estimator_from_name(name);
      CalibrationInputs ci;
      ci.cal_data = &pipe.cal;
      ci.cal_risks = &cal_rs;
      ci.s_hat = &pipe.s_cal;
      ci.g_hat = &pipe.g_cal;
      ci.grid = &pipe.grid;
      ci.clip_floor = cfg.clip_floor;
      DoublyMonotoneOptions opt;
      opt.tol = cfg.isr_rms * std::sqrt(double(n_cal) * K);
      CalibratedSurface surf =
          (e == Estimator::rw || e == Estimator::rw_plus)
              ? fit_rw_isr(ci, e, opt)
              : fit_pseudo_isr(ci, e, opt);
      mp.curves =
          curves_from_surface(surf, pipe.test.id, pipe.test_risks, pipe.grid);
      mp.surface = std::move(surf);
    }
    pipe.methods.push_back(std::move(mp));
  }
  return pipe;
}

std::vector<MetricReport> evaluate_seed(const ExperimentConfig& cfg,
                                        const SeedPipeline& pipe) {
  // Score only up to the last calibration event: beyond it the estimated
  // censoring survival has no event support and the IPCW integrands blow
  // up, which visibly inflates the mid- and high-tau quantile scores.
  double t_max = 0.0;
  for (int i = 0; i < pipe.cal.n(); ++i)
    if (pipe.cal.event[i]) t_max = std::max(t_max, pipe.cal.time[i]);
  if (t_max <= 0.0) t_max = pipe.grid.t_max();
  const int n = pipe.test.n();

  // A subject drops out of a tau level as soon as any method's curve fails
  // to reach it, so scores at that level stay comparable across methods.
  std::vector<std::vector<std::uint8_t>> joint;
  if (!cfg.taus.empty()) {
    joint.assign(cfg.taus.size(), std::vector<std::uint8_t>(n, 1));
    for (const MethodPredictions& m : pipe.methods) {
      const auto masks = quantile_inclusion_masks(m.curves, cfg.taus, t_max);
      for (size_t t = 0; t < joint.size(); ++t)
        for (int i = 0; i < n; ++i) joint[t][i] &= masks[t][i];
    }
  }

  std::vector<MetricReport> out;
  for (const MethodPredictions& m : pipe.methods) {
    for (EvalMode mode : cfg.modes) {
      MetricInputs in;
      in.test = &pipe.test;
      in.predicted = &m.curves;
      in.censoring = &pipe.g_test;
      in.true_event_times =
          pipe.test_truths.empty() ? nullptr : &pipe.test_truths;
      in.mode = mode;
      MetricReport r = compute_metric_report(in, pipe.test_risks, cfg.taus,
                                             t_max, joint.empty() ? nullptr
                                                                  : &joint);
      r.dataset = cfg.tag();
      r.method = m.method;
      r.seed = pipe.seed;
      out.push_back(std::move(r));
    }
  }
  return out;
}

SeedRunResult run_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                       const NuisanceOverride* nuisance) {
  SeedRunResult res;
  res.seed = seed;
  res.reports = evaluate_seed(cfg, build_seed_pipeline(cfg, seed, nuisance));
  return res;
}

std::vector<SeedRunResult> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const int S = static_cast<int>(cfg.seeds.size());
  std::vector<SeedRunResult> results(S);
  std::vector<std::exception_ptr> errors(S);

  // Seeds fan out over workers; nested parallel regions collapse to one
  // thread, so each seed's pipeline runs sequentially inside its worker and
  // the total thread count stays at the configured cap.
  const int workers = std::min(max_threads(), S);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (int si = 0; si < S; ++si) {
    try {
      results[si] = run_seed(cfg, cfg.seeds[si]);
    } catch (...) {
      errors[si] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    std::ostringstream csv;
    csv << metric_report_csv_header(results[0].reports[0]) << '\n';
    for (const SeedRunResult& r : results)
      for (const MetricReport& rep : r.reports) {
        write_text_atomic(path_join(cfg.out_dir, report_file_name(rep)),
                          metric_report_to_json(rep));
        csv << metric_report_csv_row(rep) << '\n';
      }
    write_text_atomic(path_join(cfg.out_dir, "metrics.csv"), csv.str());
  }
  return results;
}

// ---------------------------------------------------------------------------
// CLI command bodies

namespace {

void usage_check(bool ok, const std::string& msg) {
  if (!ok) throw UsageError(msg);
}

template <class Fn>
int guarded(const char* cmd, Fn&& fn) {
  try {
    fn();
    return 0;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "%s: usage error: %s\n", cmd, e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s: invalid data: %s\n", cmd, e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: numerical failure: %s\n", cmd, e.what());
    return 3;
  }
}

std::vector<double> aligned_risks(const RiskScores& rs,
                                  const SurvivalDataset& ds,
                                  const char* what) {
  if (rs.id != ds.id)
    throw std::invalid_argument(std::string(what) +
                                ": risk scores are not aligned with the data");
  return rs.value;
}

EvalMode parse_mode(const std::string& name) {
  usage_check(name == "ipcw" || name == "naive" || name == "oracle",
              "unknown mode '" + name + "' (ipcw, naive or oracle)");
  return eval_mode_from_name(name);
}

}  // namespace

int cmd_simulate(const SimulateArgs& a) {
  return guarded("simulate", [&] {
    usage_check(a.setting >= 1 && a.setting <= 6, "--setting must be in 1..6");
    usage_check(!a.out.empty(), "--out directory is required");
    usage_check(a.split.empty() || a.split.size() == 3,
                "--split takes train,cal,test");
    int total = a.n;
    if (!a.split.empty()) {
      for (int s : a.split) usage_check(s > 0, "--split sizes must be positive");
      total = a.split[0] + a.split[1] + a.split[2];
      usage_check(a.n == 0 || a.n == total, "--n disagrees with --split");
    }
    usage_check(total > 0, "--n must be positive");

    const SimulatedData sim = generate(a.setting, total, a.seed);
    fs::create_directories(a.out);
    if (a.split.empty()) {
      save_dataset(path_join(a.out, "data.csv"), sim.data);
      save_truths(path_join(a.out, "truths.csv"), sim.truths);
    } else {
      const int t0 = a.split[0], t1 = a.split[0] + a.split[1];
      save_dataset(path_join(a.out, "train.csv"),
                   slice_dataset(sim.data, 0, t0));
      save_dataset(path_join(a.out, "cal.csv"),
                   slice_dataset(sim.data, t0, t1));
      save_dataset(path_join(a.out, "test.csv"),
                   slice_dataset(sim.data, t1, total));
      save_truths(path_join(a.out, "truths_train.csv"),
                  slice_truths(sim.truths, 0, t0));
      save_truths(path_join(a.out, "truths_cal.csv"),
                  slice_truths(sim.truths, t0, t1));
      save_truths(path_join(a.out, "truths_test.csv"),
                  slice_truths(sim.truths, t1, total));
    }
    std::printf("simulate: setting=%d n=%d seed=%llu out=%s\n", a.setting,
                total, static_cast<unsigned long long>(a.seed), a.out.c_str());
  });
}

int cmd_fit(const FitArgs& a) {
  return guarded("fit", [&] {
    usage_check(!a.data.empty(), "--data is required");
    usage_check(!a.out.empty(), "--out directory is required");
    usage_check(a.role == "event" || a.role == "censoring",
                "--role must be event or censoring");
    usage_check(a.ridge >= 0.0, "--ridge must be non-negative");

    const SurvivalDataset ds = load_dataset(a.data);
    CoxOptions opt;
    opt.ridge = a.ridge;
    const CoxModel m =
        a.role == "event" ? fit_cox(ds, opt) : fit_censoring(ds, opt);
    RiskScores rs;
    rs.id = ds.id;
    rs.value = risk_scores(m, ds);

    std::vector<std::pair<std::string, RiskScores>> extra;
    for (const std::string& path : a.score) {
      const SurvivalDataset other = load_dataset(path);
      RiskScores ors;
      ors.id = other.id;
      ors.value = risk_scores(m, other);
      extra.emplace_back(
          "risks_" + fs::path(path).stem().string() + ".csv", std::move(ors));
    }

    fs::create_directories(a.out);
    save_cox_model(path_join(a.out, "model.json"), m);
    save_risks(path_join(a.out, "risks.csv"), rs);
    for (const auto& [name, scores] : extra)
      save_risks(path_join(a.out, name), scores);
    std::printf("fit: role=%s n=%d p=%d iterations=%d loglik=%.6f\n",
                a.role.c_str(), ds.n(), ds.p, m.iterations, m.loglik);
  });
}

int cmd_calibrate(const CalibrateArgs& a) {
  return guarded("calibrate", [&] {
    usage_check(!a.data.empty(), "--data is required");
    usage_check(!a.risks.empty(), "--risks is required");
    usage_check(!a.out.empty(), "--out surface file is required");
    usage_check(known_method(a.method) && a.method != "cox",
                "--method must be rw, rw+, ht, ht+ or dr");
    const Estimator e = estimator_from_name(a.method);
    usage_check(a.g_hat.empty() || a.g_model.empty(),
                "--g-hat and --g-model are mutually exclusive");
    usage_check(a.s_hat.empty() || a.s_model.empty(),
                "--s-hat and --s-model are mutually exclusive");
    usage_check(!a.g_hat.empty() || !a.g_model.empty(),
                "a censoring source is required: --g-hat or --g-model");
    if (e == Estimator::dr)
      usage_check(!a.s_hat.empty() || !a.s_model.empty(),
                  "--method dr requires --s-hat (event survival grid) or "
                  "--s-model");
    usage_check(a.grid_density >= 1, "--grid-density must be positive");

    const SurvivalDataset cal = load_dataset(a.data);
    const RiskScores rs = load_risks(a.risks);

    SurvivalProbabilityGrid g_hat, s_hat;
    const bool have_s = e == Estimator::dr;
    if (!a.g_hat.empty()) g_hat = load_grid(a.g_hat);
    if (have_s && !a.s_hat.empty()) s_hat = load_grid(a.s_hat);

    // The time axis comes from whichever grid file is present; with models
    // only, it is rebuilt from the training and calibration times.
    TimeGrid grid;
    if (!a.g_hat.empty()) {
      grid = g_hat.grid;
    } else if (have_s && !a.s_hat.empty()) {
      grid = s_hat.grid;
    } else {
      usage_check(!a.train.empty(),
                  "--train is required to build the time grid when no "
                  "probability-grid file is given");
      grid = build_time_grid(load_dataset(a.train), cal, a.grid_density);
    }
    if (!a.g_model.empty())
      g_hat = predict_survival(load_cox_model(a.g_model), cal, grid,
                               GridRole::censoring, a.clip_floor);
    if (have_s && !a.s_model.empty())
      s_hat = predict_survival(load_cox_model(a.s_model), cal, grid,
                               GridRole::survival, a.clip_floor);

    CalibrationInputs ci;
    ci.cal_data = &cal;
    ci.cal_risks = &rs;
    ci.s_hat = have_s ? &s_hat : nullptr;
    ci.g_hat = &g_hat;
    ci.grid = &grid;
    ci.clip_floor = a.clip_floor;

    const int n = cal.n(), K = grid.size();
    DoublyMonotoneOptions opt;
    opt.tol = a.isr_rms * std::sqrt(double(n) * K);
    DoublyMonotoneResult diag;
    const auto start = std::chrono::steady_clock::now();
    const CalibratedSurface surf =
        (e == Estimator::rw || e == Estimator::rw_plus)
            ? fit_rw_isr(ci, e, opt, &diag)
            : fit_pseudo_isr(ci, e, opt, &diag);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();

    ensure_parent_dir(a.out);
    save_surface(a.out, surf);
    std::fprintf(stderr,
                 "calibrate: method=%s n=%d K=%d dykstra_iterations=%d "
                 "wall=%.2fs\n",
                 a.method.c_str(), n, K, diag.iterations, wall);
  });
}

int cmd_evaluate(const EvaluateArgs& a) {
  return guarded("evaluate", [&] {
    usage_check(!a.data.empty(), "--data is required");
    usage_check(!a.out.empty(), "--out directory is required");
    usage_check(!a.surfaces.empty() || !a.model.empty(),
                "provide at least one --surface or a --model");
    usage_check(!a.modes.empty(), "--modes must name at least one mode");
    std::vector<EvalMode> modes;
    for (const auto& m : a.modes) modes.push_back(parse_mode(m));
    for (size_t i = 1; i < a.taus.size(); ++i)
      usage_check(a.taus[i - 1] < a.taus[i], "--taus must be increasing");
    for (double t : a.taus)
      usage_check(t > 0.0 && t < 1.0, "--taus must lie in (0,1)");
    usage_check(a.t_max >= 0.0 && std::isfinite(a.t_max),
                "--t-max must be a positive time");
    const bool wants_ipcw =
        std::find(modes.begin(), modes.end(), EvalMode::ipcw) != modes.end();
    const bool wants_oracle =
        std::find(modes.begin(), modes.end(), EvalMode::oracle) != modes.end();
    usage_check(a.g_hat.empty() || a.g_model.empty(),
                "--g-hat and --g-model are mutually exclusive");
    usage_check(!wants_ipcw || !a.g_hat.empty() || !a.g_model.empty(),
                "mode ipcw requires a censoring source: --g-hat or --g-model");
    usage_check(!wants_oracle || !a.truths.empty(),
                "mode oracle requires --truths");
    usage_check(!a.risks.empty() || !a.model.empty(),
                "risk ranking needs --risks or --model");

    const SurvivalDataset test = load_dataset(a.data);

    CoxModel model;
    const bool has_model = !a.model.empty();
    if (has_model) model = load_cox_model(a.model);

    std::vector<double> risks =
        a.risks.empty() ? risk_scores(model, test)
                        : aligned_risks(load_risks(a.risks), test, "evaluate");

    std::vector<CalibratedSurface> surfaces;
    for (const auto& path : a.surfaces) surfaces.push_back(load_surface(path));
    TimeGrid grid;
    if (!surfaces.empty()) {
      grid = surfaces[0].grid;
      for (const auto& s : surfaces)
        if (s.grid.times != grid.times)
          throw std::invalid_argument(
              "evaluate: surfaces disagree on the time grid");
    } else {
      grid.times = model.baseline.times;
    }
    grid.validate();

    struct Method {
      std::string name;
      PredictionCurves curves;
    };
    std::vector<Method> methods;
    if (has_model)
      methods.push_back({"cox", curves_from_grid(predict_survival(
                                    model, test, grid, GridRole::survival,
                                    a.clip_floor))});
    for (const auto& s : surfaces)
      methods.push_back({s.method,
                         curves_from_surface(s, test.id, risks, grid)});
    std::set<std::string> names;
    for (const auto& m : methods)
      if (!names.insert(m.name).second)
        throw std::invalid_argument("evaluate: duplicate method '" + m.name +
                                    "'");

    SurvivalProbabilityGrid g_hat;
    if (!a.g_hat.empty()) g_hat = load_grid(a.g_hat);
    if (!a.g_model.empty())
      g_hat = predict_survival(load_cox_model(a.g_model), test, grid,
                               GridRole::censoring, a.clip_floor);
    std::vector<double> truths;
    if (!a.truths.empty()) {
      const SimulationTruths t = load_truths(a.truths);
      if (t.id != test.id)
        throw std::invalid_argument(
            "evaluate: truths are not aligned with the test data");
      truths = t.true_time;
    }

    const double t_max = a.t_max > 0.0 ? a.t_max : grid.t_max();
    std::vector<std::vector<std::uint8_t>> joint;
    if (!a.taus.empty()) {
      joint.assign(a.taus.size(),
                   std::vector<std::uint8_t>(test.n(), 1));
      for (const auto& m : methods) {
        const auto masks = quantile_inclusion_masks(m.curves, a.taus, t_max);
        for (size_t t = 0; t < joint.size(); ++t)
          for (int i = 0; i < test.n(); ++i) joint[t][i] &= masks[t][i];
      }
    }

    const std::string tag = a.dataset_tag.empty()
                                ? fs::path(a.data).stem().string()
                                : a.dataset_tag;
    std::vector<MetricReport> reports;
    for (const auto& m : methods)
      for (EvalMode mode : modes) {
        MetricInputs in;
        in.test = &test;
        in.predicted = &m.curves;
        in.censoring = g_hat.subjects.empty() ? nullptr : &g_hat;
        in.true_event_times = truths.empty() ? nullptr : &truths;
        in.mode = mode;
        MetricReport r =
            compute_metric_report(in, risks, a.taus, t_max,
                                  joint.empty() ? nullptr : &joint);
        r.dataset = tag;
        r.method = m.name;
        r.seed = a.seed;
        reports.push_back(std::move(r));
      }

    fs::create_directories(a.out);
    std::ostringstream csv;
    csv << metric_report_csv_header(reports[0]) << '\n';
    for (const MetricReport& r : reports) {
      write_text_atomic(
          path_join(a.out, "report_" + r.method + "_" + eval_mode_name(r.mode) +
                               ".json"),
          metric_report_to_json(r));
      csv << metric_report_csv_row(r) << '\n';
    }
    write_text_atomic(path_join(a.out, "metrics.csv"), csv.str());
    for (const MetricReport& r : reports)
      for (const std::string& note : r.notes)
        std::fprintf(stderr, "evaluate: %s/%s: %s\n", r.method.c_str(),
                     eval_mode_name(r.mode).c_str(), note.c_str());
  });
}

namespace {

// One aggregation cell: mean with twice the standard error of the mean.
struct Agg {
  double sum = 0.0, sumsq = 0.0;
  int n = 0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
    ++n;
  }
  double mean() const { return n ? sum / n : std::nan(""); }
  double se2() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double var = std::max(0.0, (sumsq - n * m * m) / (n - 1));
    return 2.0 * std::sqrt(var / n);
  }
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

int mode_rank(const std::string& m) {
  if (m == "ipcw") return 0;
  if (m == "naive") return 1;
  if (m == "oracle") return 2;
  return 3;
}

int method_rank(const std::string& m) {
  for (size_t i = 0; i < std::size(kMethodOrder); ++i)
    if (m == kMethodOrder[i]) return static_cast<int>(i);
  return static_cast<int>(std::size(kMethodOrder));
}

// Orders metric columns c_index, aupit, ibs, then quantile levels ascending.
int column_rank(const std::string& c) {
  if (c == "c_index") return 0;
  if (c == "aupit") return 1;
  if (c == "ibs") return 2;
  return 3;
}

bool column_less(const std::string& a, const std::string& b) {
  const int ra = column_rank(a), rb = column_rank(b);
  if (ra != rb) return ra < rb;
  if (ra < 3) return false;  // equal fixed columns
  return std::stod(a.substr(3)) < std::stod(b.substr(3));
}

std::string format_cell(const Agg& a) {
  if (a.n == 0) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f \xc2\xb1 %.4f", a.mean(), a.se2());
  return buf;
}

}  // namespace

int cmd_report(const ReportArgs& a) {
  return guarded("report", [&] {
    usage_check(!a.dir.empty(), "--dir is required");
    usage_check(fs::is_directory(a.dir),
                "'" + a.dir + "' is not a directory");
    const std::string out_dir = a.out.empty() ? a.dir : a.out;

    // group key: dataset, mode, method
    using Key = std::tuple<std::string, std::string, std::string>;
    std::map<Key, std::map<std::string, Agg>> groups;
    std::set<std::string> columns;

    std::vector<std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(a.dir))
      if (entry.is_regular_file() && entry.path().extension() == ".csv")
        files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());

    const std::string kPrefix = "dataset,method,mode,seed,";
    for (const std::string& path : files) {
      std::ifstream in(path);
      std::string header;
      if (!std::getline(in, header)) continue;
      if (header.compare(0, kPrefix.size(), kPrefix) != 0) continue;
      const std::vector<std::string> cols = split_csv_line(header);
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != cols.size())
          throw std::invalid_argument(path + ": row width disagrees with header");
        const Key key{cells[0], cells[2], cells[1]};
        for (size_t c = 4; c < cols.size(); ++c) {
          const std::string& name = cols[c];
          const bool score_col =
              name == "c_index" || name == "aupit" || name == "ibs" ||
              (name.rfind("qs_", 0) == 0 &&
               name.find("_included") == std::string::npos &&
               name.find("_excluded") == std::string::npos);
          if (!score_col || cells[c].empty()) continue;
          groups[key][name].add(std::stod(cells[c]));
          columns.insert(name);
        }
      }
    }
    usage_check(!groups.empty(), "no metric CSVs under '" + a.dir + "'");

    std::vector<std::string> ordered(columns.begin(), columns.end());
    std::sort(ordered.begin(), ordered.end(), column_less);

    std::vector<Key> keys;
    for (const auto& [k, v] : groups) keys.push_back(k);
    std::sort(keys.begin(), keys.end(), [](const Key& x, const Key& y) {
      if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) < std::get<0>(y);
      const int mx = mode_rank(std::get<1>(x)), my = mode_rank(std::get<1>(y));
      if (mx != my) return mx < my;
      const int ax = method_rank(std::get<2>(x)), ay = method_rank(std::get<2>(y));
      if (ax != ay) return ax < ay;
      return std::get<2>(x) < std::get<2>(y);
    });

    // wide CSV: one row per group, mean/2se/count per metric column
    std::ostringstream csv;
    csv << "dataset,mode,method";
    for (const auto& c : ordered)
      csv << ',' << c << "_mean," << c << "_2se," << c << "_n";
    csv << '\n';
    for (const Key& k : keys) {
      csv << std::get<0>(k) << ',' << std::get<1>(k) << ',' << std::get<2>(k);
      for (const auto& c : ordered) {
        const auto it = groups[k].find(c);
        if (it == groups[k].end() || it->second.n == 0) {
          csv << ",,,0";
        } else {
          csv << ',' << format_double(it->second.mean()) << ','
              << format_double(it->second.se2()) << ',' << it->second.n;
        }
      }
      csv << '\n';
    }

    // aligned text table, one block per (dataset, mode)
    std::ostringstream txt;
    size_t method_w = 6;
    for (const Key& k : keys) method_w = std::max(method_w, std::get<2>(k).size());
    std::vector<size_t> widths(ordered.size());
    for (size_t c = 0; c < ordered.size(); ++c) {
      widths[c] = ordered[c].size();
      for (const Key& k : keys) {
        const auto it = groups[k].find(ordered[c]);
        if (it != groups[k].end())
          widths[c] = std::max(widths[c], format_cell(it->second).size() - 2);
      }
    }
    std::string block;
    for (const Key& k : keys) {
      const std::string head =
          "dataset=" + std::get<0>(k) + " mode=" + std::get<1>(k);
      if (head != block) {
        block = head;
        txt << head << '\n' << std::string(method_w, ' ');
        for (size_t c = 0; c < ordered.size(); ++c) {
          txt << "  ";
          txt.width(static_cast<std::streamsize>(widths[c]));
          txt << ordered[c];
        }
        txt << '\n';
      }
      txt << std::get<2>(k) << std::string(method_w - std::get<2>(k).size(), ' ');
      for (size_t c = 0; c < ordered.size(); ++c) {
        const auto it = groups[k].find(ordered[c]);
        const std::string cell =
            it == groups[k].end() ? "-" : format_cell(it->second);
        // the +- sign is two bytes of UTF-8; pad by display width
        const size_t disp = cell.size() - (cell == "-" ? 0 : 2);
        txt << "  " << std::string(widths[c] - std::min(widths[c], disp), ' ')
            << cell;
      }
      txt << '\n';
    }

    fs::create_directories(out_dir);
    write_text_atomic(path_join(out_dir, "summary.csv"), csv.str());
    write_text_atomic(path_join(out_dir, "summary.txt"), txt.str());
    std::fputs(txt.str().c_str(), stdout);
  });
}

}  // namespace isocal
