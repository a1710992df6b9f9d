#include <CLI11.hpp>

#include "isocal/pipeline.hpp"

using namespace isocal;

int main(int argc, char** argv) {
  CLI::App app{
      "isocal: censoring-aware calibration of survival predictions\n"
      "Pipeline: simulate -> fit -> calibrate -> evaluate -> report"};
  app.require_subcommand(1);

  SimulateArgs sa;
  auto* sim = app.add_subcommand(
      "simulate", "Draw a synthetic right-censored dataset (with truths)");
  sim->add_option("--setting", sa.setting, "Synthetic setting, 1-6")
      ->capture_default_str();
  sim->add_option("--n", sa.n, "Number of subjects");
  sim->add_option("--split", sa.split,
                  "train,cal,test sizes; writes one file per split")
      ->delimiter(',');
  sim->add_option("--seed", sa.seed, "RNG seed")->capture_default_str();
  sim->add_option("--out", sa.out, "Output directory");

  FitArgs fa;
  auto* fit = app.add_subcommand(
      "fit", "Fit a proportional-hazards model (event or censoring)");
  fit->add_option("--data", fa.data, "Training dataset CSV");
  fit->add_option("--role", fa.role, "event or censoring")
      ->capture_default_str();
  fit->add_option("--score", fa.score,
                  "Extra dataset CSVs to score (risks_<name>.csv, repeatable)");
  fit->add_option("--ridge", fa.ridge, "Ridge penalty on coefficients")
      ->capture_default_str();
  fit->add_option("--out", fa.out, "Output directory (model.json, risks.csv)");

  CalibrateArgs ca;
  auto* cal = app.add_subcommand(
      "calibrate", "Fit an isotonic calibration surface on calibration data");
  cal->add_option("--data", ca.data, "Calibration dataset CSV");
  cal->add_option("--risks", ca.risks, "Calibration risk scores CSV");
  cal->add_option("--method", ca.method, "rw, rw+, ht, ht+ or dr")
      ->capture_default_str();
  cal->add_option("--s-hat", ca.s_hat, "Event survival grid JSON (dr)");
  cal->add_option("--g-hat", ca.g_hat, "Censoring survival grid JSON");
  cal->add_option("--s-model", ca.s_model, "Event Cox model JSON (dr)");
  cal->add_option("--g-model", ca.g_model, "Censoring Cox model JSON");
  cal->add_option("--train", ca.train,
                  "Training dataset CSV; builds the time grid when no grid "
                  "file is given");
  cal->add_option("--grid-density", ca.grid_density,
                  "Dense-lattice points in the evaluation grid")
      ->capture_default_str();
  cal->add_option("--clip-floor", ca.clip_floor,
                  "Lower clip for nuisance survival probabilities")
      ->capture_default_str();
  cal->add_option("--isr-rms", ca.isr_rms,
                  "Projection tolerance per cell (tol = rms * sqrt(n*K))")
      ->capture_default_str();
  cal->add_option("--out", ca.out, "Output surface JSON file");

  EvaluateArgs ea;
  auto* ev = app.add_subcommand(
      "evaluate", "Score calibrated surfaces and/or a Cox model on test data");
  ev->add_option("--surface", ea.surfaces, "Surface JSON (repeatable)");
  ev->add_option("--model", ea.model, "Event Cox model JSON (method cox)");
  ev->add_option("--data", ea.data, "Test dataset CSV");
  ev->add_option("--risks", ea.risks, "Test risk scores CSV");
  ev->add_option("--g-hat", ea.g_hat, "Censoring survival grid JSON (ipcw)");
  ev->add_option("--g-model", ea.g_model, "Censoring Cox model JSON (ipcw)");
  ev->add_option("--truths", ea.truths, "Simulation truths CSV (oracle)");
  ev->add_option("--modes", ea.modes, "ipcw, naive, oracle")
      ->delimiter(',')
      ->capture_default_str();
  ev->add_option("--taus", ea.taus, "Quantile levels")
      ->delimiter(',')
      ->capture_default_str();
  ev->add_option("--t-max", ea.t_max,
                 "Evaluation horizon; 0 means the end of the grid")
      ->capture_default_str();
  ev->add_option("--clip-floor", ea.clip_floor,
                 "Lower clip for model-predicted probabilities")
      ->capture_default_str();
  ev->add_option("--seed", ea.seed, "Seed tag recorded in reports")
      ->capture_default_str();
  ev->add_option("--dataset", ea.dataset_tag, "Dataset tag in reports");
  ev->add_option("--out", ea.out, "Output directory");

  ReportArgs ra;
  auto* rep = app.add_subcommand(
      "report", "Aggregate per-seed metric CSVs into mean +- 2SE tables");
  rep->add_option("dir", ra.dir, "Directory holding metric CSVs");
  rep->add_option("--out", ra.out, "Output directory (defaults to dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (sim->parsed()) return cmd_simulate(sa);
  if (fit->parsed()) return cmd_fit(fa);
  if (cal->parsed()) return cmd_calibrate(ca);
  if (ev->parsed()) return cmd_evaluate(ea);
  if (rep->parsed()) return cmd_report(ra);
  return 1;
}
