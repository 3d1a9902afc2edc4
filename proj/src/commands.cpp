// SPDX-License-Identifier: Apache-2.0
#include "motortherm/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "motortherm/errors.hpp"
#include "motortherm/svg_plot.hpp"
#include "motortherm/synthetic.hpp"
#include "text_util.hpp"

namespace motortherm {
namespace {

using nlohmann::json;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

fs::path sibling(const fs::path& base, const std::string& suffix) {
  fs::path p = base.parent_path() / base.stem();
  p += suffix;
  return p;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path() && !p.parent_path().empty()) fs::create_directories(p.parent_path());
}

std::vector<std::string> manifest_unseen(const std::vector<fs::path>& inputs) {
  for (const auto& in : inputs) {
    const auto manifest = in / "manifest.json";
    if (fs::is_directory(in) && fs::exists(manifest)) {
      std::ifstream f(manifest);
      const json j = json::parse(f);
      return j.value("unseen_ids", std::vector<std::string>{});
    }
  }
  return {};
}

std::vector<Trajectory> load_trajectories(const std::vector<fs::path>& files, const FeatureSelection& selection) {
  std::vector<Trajectory> out;
  for (const auto& f : files) {
    const auto records = read_records(f);
    if (records.empty()) throw DataError("dataset file " + f.string() + " has no records");
    out.push_back(make_trajectory(f.stem().string(), records, selection));
  }
  return out;
}

SequenceDataset as_dataset(const std::vector<Trajectory>& trajectories, Partition tag) {
  SequenceDataset d;
  d.tag = tag;
  for (const auto& t : trajectories) {
    d.inputs.push_back(t.inputs);
    d.targets.push_back(t.targets);
    d.ids.push_back(t.id);
    d.dt = t.dt;
  }
  return d;
}

Gauss2Coefficients parse_coefficients(const std::string& text) {
  std::array<double, 6> p{};
  const auto parts = detail::split(text, ',');
  if (parts.size() != 6) throw ConfigError("--init needs six comma-separated values a1,b1,c1,a2,b2,c2");
  for (std::size_t i = 0; i < 6; ++i) {
    const auto v = detail::parse_double(parts[i]);
    if (!v) throw ConfigError("malformed coefficient '" + std::string(parts[i]) + "'");
    p[i] = *v;
  }
  auto c = Gauss2Coefficients::from_array(p);
  c.validate();
  return c;
}

json coefficients_json(const Gauss2Coefficients& c) {
  return {{"a1", c.a1}, {"b1", c.b1}, {"c1", c.c1}, {"a2", c.a2}, {"b2", c.b2}, {"c2", c.c2}};
}

json plant_json(const ThermalPlantParams& p) {
  return {{"thermal_resistance", p.thermal_resistance},
          {"thermal_capacitance", p.thermal_capacitance},
          {"heating_coefficient", p.heating_coefficient},
          {"ambient_temperature", p.ambient_temperature}};
}

}  // namespace

std::vector<fs::path> expand_data_paths(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(in)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::exists(in)) {
      out.push_back(in);
    } else {
      throw ConfigError("data path does not exist: " + in.string());
    }
  }
  if (out.empty()) throw ConfigError("no dataset files found");
  return out;
}

SimulateResult cmd_simulate(const SimulateOptions& options, std::ostream& log) {
  if (options.count < 1) throw ConfigError("--count must be >= 1");
  if (options.unseen > options.count) throw ConfigError("--unseen cannot exceed --count");
  SyntheticRobotOptions robot;
  robot.profile = parse_profile_kind(options.profile);
  robot.duration = options.duration;
  robot.dt = options.dt;
  robot.temperature_noise = options.temperature_noise;
  robot.validate();

  fs::create_directories(options.out_dir);
  SimulateResult result;
  json trajectories = json::array();
  for (std::size_t i = 0; i < options.count; ++i) {
    const std::uint64_t seed = options.seed * 1000 + i;
    const auto records = synthesize_trajectory(robot, seed);
    std::string id = "traj_";
    if (i < 10) id += '0';
    id += std::to_string(i);
    const auto path = options.out_dir / (id + ".csv");
    write_records(records, path);
    result.files.push_back(path);
    const bool unseen = i >= options.count - options.unseen;
    if (unseen) result.unseen_ids.push_back(id);
    trajectories.push_back({{"id", id}, {"file", path.filename().string()}, {"seed", seed},
                            {"samples", records.size()}, {"partition", unseen ? "unseen" : "seen"}});
  }

  json manifest;
  manifest["format"] = "motortherm-manifest/1";
  manifest["seed"] = options.seed;
  manifest["count"] = options.count;
  manifest["profile"] = std::string(to_string(robot.profile));
  manifest["duration"] = robot.duration;
  manifest["dt"] = robot.dt;
  manifest["temperature_noise"] = robot.temperature_noise;
  manifest["torque_amplitudes"] = robot.torque_amplitudes;
  json plant = json::array();
  for (const auto& p : robot.plant) plant.push_back(plant_json(p));
  manifest["plant"] = plant;
  manifest["trajectory_seed_rule"] = "seed * 1000 + index";
  manifest["unseen_ids"] = result.unseen_ids;
  manifest["trajectories"] = trajectories;
  result.manifest = options.out_dir / "manifest.json";
  write_text(result.manifest, manifest.dump(2) + "\n");
  log << "wrote " << result.files.size() << " trajectories and " << result.manifest.string() << "\n";
  return result;
}

std::string loss_history_csv(const LossHistory& history) {
  std::string out = "epoch,loss\n";
  for (std::size_t i = 0; i < history.loss.size(); ++i) {
    out += std::to_string(i + 1);
    out += ',';
    detail::append_double(out, history.loss[i]);
    out += '\n';
  }
  return out;
}

TrainRunResult cmd_train(const TrainOptions& options, std::ostream& log) {
  const auto selection = FeatureSelection::parse(options.features);

  TrainingConfig config;
  config.network.input_size = selection.width();
  config.network.hidden_size = options.hidden;
  config.network.dense_widths = options.dense;
  if (options.activations.empty()) {
    config.network.activations = options.dense.size() == 6 ? NetworkConfig{}.activations
                                                           : default_activations(options.dense.size());
  } else {
    config.network.activations.clear();
    for (const auto& a : options.activations) config.network.activations.push_back(parse_activation(a));
  }
  config.epochs = options.epochs;
  config.adam.learning_rate = options.learning_rate;
  config.dropout = options.dropout;
  config.seed = options.seed;
  config.normalize = options.normalize;
  config.window = options.window;
  config.stride = options.stride;
  config.bptt_truncation = options.bptt;
  config.clip_norm = options.clip_norm;
  config.patience = options.patience;
  config.report_every = options.report_every;
  config.validate();
  if (config.network.output_size() != kJointCount) {
    throw ConfigError("the output layer must have " + std::to_string(kJointCount) + " units");
  }

  const auto files = expand_data_paths(options.data);
  auto unseen_list = options.unseen;
  if (unseen_list.empty()) {
    unseen_list = manifest_unseen(options.data);
    if (!unseen_list.empty()) log << "holding out manifest unseen ids\n";
  }
  const std::set<std::string> unseen(unseen_list.begin(), unseen_list.end());
  const auto trajectories = load_trajectories(files, selection);
  auto split = split_seen_unseen(trajectories, unseen);
  if (split.warning) throw ConfigError(*split.warning);

  TrainRunResult run;
  run.seen_ids = split.seen.ids;
  run.unseen_ids = split.unseen.ids;
  log << "training on " << split.seen.size() << " trajectories (" << split.unseen.size() << " held out), "
      << selection.width() << " input features\n";
  config.on_report = [&log](std::size_t epoch, double loss) {
    log << "epoch " << epoch << " loss " << loss << "\n";
  };

  run.training = train(split.seen, config);
  run.model.params = run.training.params;
  run.model.normalization = run.training.normalization;
  run.model.features = selection;
  run.model.dropout = options.dropout;

  run.model_path = options.out;
  run.loss_path = options.loss_out.empty() ? sibling(options.out, "_loss.csv") : options.loss_out;
  run.stats_path = options.stats_out.empty() ? sibling(options.out, "_stats.json") : options.stats_out;
  for (const auto& p : {run.model_path, run.loss_path, run.stats_path}) ensure_parent(p);
  save_model(run.model, run.model_path);
  write_text(run.loss_path, loss_history_csv(run.training.history));
  save_norm_stats(run.model.normalization, selection, run.stats_path);
  log << "wrote " << run.model_path.string() << ", " << run.loss_path.string() << ", "
      << run.stats_path.string() << "\n";
  return run;
}

std::vector<fs::path> cmd_predict(const PredictOptions& options, std::ostream& log) {
  const auto model = load_model(options.model);
  const auto selection = options.features.empty() ? model.features : FeatureSelection::parse(options.features);
  if (selection.width() != model.params.lstm.input_size()) {
    throw ConfigError("feature width mismatch: model expects " + std::to_string(model.params.lstm.input_size()) +
                      " input features, selection '" + selection.to_string() + "' gives " +
                      std::to_string(selection.width()));
  }
  std::vector<fs::path> written;
  ensure_parent(options.out_prefix);
  for (const auto& file : expand_data_paths(options.data)) {
    const auto records = read_records(file);
    const auto traj = make_trajectory(file.stem().string(), records, selection);
    const Matrix pred = denormalize(predict(model.params, normalize(traj.inputs, model.normalization.input)),
                                    model.normalization.target);
    fs::path prefix = options.out_prefix;
    prefix += "_" + traj.id;
    auto files = emit_prediction_artifacts(pred, traj.targets, traj.dt, prefix);
    written.insert(written.end(), files.begin(), files.end());
    log << "predicted " << traj.id << " -> " << files.front().string() << "\n";
  }
  return written;
}

EvaluationReport cmd_evaluate(const EvaluateOptions& options, std::ostream& log) {
  const auto model = load_model(options.model);
  const auto tag = parse_partition(options.partition);
  const auto trajectories = load_trajectories(expand_data_paths(options.data), model.features);
  const auto dataset = as_dataset(trajectories, tag);
  const auto predictions = predict_temperatures(model.params, model.normalization, dataset);

  auto report = evaluate_predictions(predictions, dataset);
  report.model_id = content_id(serialize_model(model));
  report.stats_id = content_id(serialize_norm_stats(model.normalization, model.features));

  ensure_parent(options.out_prefix);
  fs::path report_path = options.out_prefix;
  report_path += "_report.json";
  fs::path table_path = options.out_prefix;
  table_path += "_table.csv";
  write_text(report_path, report_to_json(report));
  write_text(table_path, report_table_csv(report));
  if (options.artifacts) {
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      fs::path prefix = options.out_prefix;
      prefix += "_" + dataset.ids[i];
      emit_prediction_artifacts(predictions[i], dataset.targets[i], dataset.dt, prefix);
    }
  }
  log << "motor  rmse[degC]  maxae[degC]  (" << to_string(tag) << ", " << dataset.size() << " runs)\n";
  for (const auto& m : report.joints) {
    log << "  " << m.joint << "    " << m.rmse << "    " << m.max_abs_error << "\n";
  }
  return report;
}

std::vector<Gauss2Sample> read_xy_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<Gauss2Sample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const auto fields = detail::split(trimmed, ',');
    if (fields.size() != 2) throw ParseError("expected 2 columns (x, temperature)", line_no);
    const auto x = detail::parse_double(fields[0]);
    const auto y = detail::parse_double(fields[1]);
    if (!x || !y) {
      if (line_no == 1 && samples.empty()) continue;  // header
      throw ParseError("malformed number", line_no);
    }
    samples.push_back({*x, *y});
  }
  return samples;
}

std::string fit_report_json(const Gauss2FitReport& report) {
  json j;
  j["format"] = "motortherm-gauss2/1";
  j["model"] = "a1*exp(-((x-b1)/c1)^2) + a2*exp(-((x-b2)/c2)^2), x = sample index";
  j["coefficients"] = coefficients_json(report.coefficients);
  j["rmse"] = report.rmse;
  j["r_squared"] = report.r_squared;
  j["degenerate"] = report.degenerate;
  j["iterations"] = report.iterations;
  j["converged"] = report.converged;
  return j.dump(2) + "\n";
}

Gauss2FitReport cmd_fit_gauss2(const FitGauss2Options& options, std::ostream& log) {
  const auto samples = read_xy_csv(options.input);
  std::optional<Gauss2Coefficients> init;
  if (!options.init.empty()) init = parse_coefficients(options.init);
  const auto report = fit_gauss2(samples, init);

  ensure_parent(options.out_prefix);
  fs::path json_path = options.out_prefix;
  json_path += ".json";
  write_text(json_path, fit_report_json(report));

  LinePlot plot;
  plot.title = "Gauss2 fit";
  plot.x_label = "sample index";
  plot.y_label = "temperature [degC]";
  PlotSeries measured{"measured", "#1f77b4", {}, false};
  PlotSeries fitted{"Gauss2", "#d62728", {}, true};
  for (const auto& s : samples) {
    plot.x.push_back(s.x);
    measured.y.push_back(s.y);
    fitted.y.push_back(eval_gauss2(report.coefficients, s.x));
  }
  plot.series = {measured, fitted};
  fs::path svg_path = options.out_prefix;
  svg_path += ".svg";
  write_svg(plot, svg_path);

  const auto& c = report.coefficients;
  log << "a1 = " << c.a1 << ", b1 = " << c.b1 << ", c1 = " << c.c1 << "\n"
      << "a2 = " << c.a2 << ", b2 = " << c.b2 << ", c2 = " << c.c2 << "\n"
      << "RMSE: " << report.rmse << "\nR^2: " << report.r_squared << (report.degenerate ? " (undefined: constant data)" : "")
      << "\n" << (report.converged ? "converged" : "did not converge") << " after " << report.iterations
      << " iterations\n";
  return report;
}

bool VerifySummary::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.second; });
}

VerifySummary cmd_verify(const VerifyOptions& options, std::ostream& log) {
  VerifySummary summary;
  auto record = [&](const std::string& name, bool pass, const std::string& detail) {
    summary.checks.emplace_back(name, pass);
    log << (pass ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
  };

  {
    GradCheckOptions grad;
    const auto report = gradient_check_suite(grad);
    record("gradient check", report.passed,
           "max relative error " + detail::format_double(report.worst) + " over " + std::to_string(report.checked) +
               " parameters (" + report.worst_tensor + "), tolerance 1e-4");
  }

  {
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double worst_roundtrip = 0.0, worst_mean = 0.0, worst_std = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      Matrix x(200, 7);
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double s = scale(rng), offset = 50.0 * unit(rng);
        for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, c) = offset + s * unit(rng);
      }
      const auto stats = compute_norm_stats(x);
      const Matrix z = normalize(x, stats);
      worst_roundtrip = std::max(worst_roundtrip, (denormalize(z, stats) - x).cwiseAbs().maxCoeff());
      const auto zs = compute_norm_stats(z);
      worst_mean = std::max(worst_mean, zs.mean.cwiseAbs().maxCoeff());
      worst_std = std::max(worst_std, (zs.std.array() - 1.0).abs().maxCoeff());
    }
    const bool pass = worst_roundtrip <= 1e-12 && worst_mean < 1e-9 && worst_std < 1e-9;
    record("normalization round-trip", pass,
           "max |denormalize(normalize(x)) - x| " + detail::format_double(worst_roundtrip) + ", max |mean| " +
               detail::format_double(worst_mean) + ", max |std - 1| " + detail::format_double(worst_std));
  }

  {
    const auto plant = default_robot_plant();
    double worst = 0.0, worst_ss = 0.0;
    for (std::size_t j = 0; j < plant.size(); ++j) {
      const double tau = 3.0 + static_cast<double>(j);
      TorqueTrace trace;
      trace.dt = 1.0;
      trace.values = Matrix::Constant(10000, 1, tau);
      const double t0 = 40.0;
      const auto temps = simulate_plant(std::span(&plant[j], 1), trace, std::span(&t0, 1));
      const double eq = steady_state_temperature(plant[j], tau);
      for (Eigen::Index k = 0; k < temps.values.rows(); ++k) {
        const double exact = eq + (t0 - eq) * std::exp(-static_cast<double>(k) * trace.dt / plant[j].time_constant());
        worst = std::max(worst, std::abs(temps.values(k, 0) - exact));
      }
      const double closed = plant[j].ambient_temperature +
                            plant[j].thermal_resistance * plant[j].heating_coefficient * tau * tau;
      worst_ss = std::max(worst_ss, std::abs(eq - closed));
    }
    record("thermal plant vs closed form", worst < 1e-9 && worst_ss <= 1e-12,
           "max trajectory error " + detail::format_double(worst) + " degC over 1e4 steps, steady-state error " +
               detail::format_double(worst_ss));
  }

  log << (summary.ok() ? "all checks passed" : "verification FAILED") << "\n";
  return summary;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Model-free prediction of robot joint motor temperatures from joint torques"};
  app.set_config("--config", "", "Read options from a TOML/INI file; command-line flags take precedence");
  app.fallthrough();
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Generate synthetic trajectories in the dataset CSV schema");
  simulate->add_option("--out", sim.out_dir, "Output directory");
  simulate->add_option("--count", sim.count, "Number of trajectories")->check(CLI::PositiveNumber);
  simulate->add_option("--unseen", sim.unseen, "Trailing trajectories listed as held out in the manifest");
  simulate->add_option("--seed", sim.seed, "Master seed");
  simulate->add_option("--duration", sim.duration, "Seconds per trajectory")->check(CLI::PositiveNumber);
  simulate->add_option("--dt", sim.dt, "Sampling interval in seconds")->check(CLI::PositiveNumber);
  simulate->add_option("--profile", sim.profile, "step|trapezoid|random_walk|sinusoid_mixture|composite");
  simulate->add_option("--temperature-noise", sim.temperature_noise, "Sensor noise std in degC")->check(CLI::NonNegativeNumber);

  FitGauss2Options fit;
  auto* fit_cmd = app.add_subcommand("fit-gauss2", "Fit the two-term Gaussian profile model to (x, temperature) data");
  fit_cmd->add_option("--input", fit.input, "Two-column CSV")->required();
  fit_cmd->add_option("--out", fit.out_prefix, "Output prefix for .json and .svg");
  fit_cmd->add_option("--init", fit.init, "Initial a1,b1,c1,a2,b2,c2 (default: automatic)");

  TrainOptions tr;
  bool no_normalize = false;
  auto* train_cmd = app.add_subcommand("train", "Train the LSTM + dense network");
  train_cmd->add_option("--data", tr.data, "Dataset CSV files or directories")->required();
  train_cmd->add_option("--unseen", tr.unseen, "Trajectory ids to hold out (default: manifest)")->delimiter(',');
  train_cmd->add_option("--features", tr.features, "Comma list of position,velocity,torque,current");
  train_cmd->add_option("--hidden", tr.hidden, "LSTM hidden size")->check(CLI::PositiveNumber);
  train_cmd->add_option("--dense", tr.dense, "Dense widths, output last")->delimiter(',');
  train_cmd->add_option("--activations", tr.activations, "Activation per dense layer")->delimiter(',');
  train_cmd->add_option("--lr", tr.learning_rate, "Adam learning rate")->check(CLI::PositiveNumber);
  train_cmd->add_option("--epochs", tr.epochs, "Epoch budget")->check(CLI::PositiveNumber);
  train_cmd->add_option("--dropout", tr.dropout, "Dropout probability")->check(CLI::Range(0.0, 0.999999));
  train_cmd->add_option("--seed", tr.seed, "Seed for initialization, shuffling and dropout");
  train_cmd->add_flag("--no-normalize", no_normalize, "Train on raw units");
  train_cmd->add_option("--window", tr.window, "Window length (0: whole trajectories)");
  train_cmd->add_option("--stride", tr.stride, "Window stride")->check(CLI::PositiveNumber);
  train_cmd->add_option("--bptt", tr.bptt, "Truncated BPTT length (0: full)");
  train_cmd->add_option("--clip", tr.clip_norm, "Global gradient norm clip (0: off)")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--patience", tr.patience, "Early-stop window in epochs (0: off)");
  train_cmd->add_option("--report-every", tr.report_every, "Loss report cadence in epochs");
  train_cmd->add_option("--out", tr.out, "Model file");
  train_cmd->add_option("--loss-out", tr.loss_out, "Loss history CSV");
  train_cmd->add_option("--stats-out", tr.stats_out, "Normalization statistics file");

  PredictOptions pr;
  auto* predict_cmd = app.add_subcommand("predict", "Predict temperatures for dataset files");
  predict_cmd->add_option("--model", pr.model, "Model file")->required();
  predict_cmd->add_option("--data", pr.data, "Dataset CSV files or directories")->required();
  predict_cmd->add_option("--out", pr.out_prefix, "Output prefix");
  predict_cmd->add_option("--features", pr.features, "Override the model's feature selection");

  EvaluateOptions ev;
  bool no_artifacts = false;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Per-joint RMSE and MaxAE in degC");
  evaluate_cmd->add_option("--model", ev.model, "Model file")->required();
  evaluate_cmd->add_option("--data", ev.data, "Dataset CSV files or directories")->required();
  evaluate_cmd->add_option("--partition", ev.partition, "seen|unseen");
  evaluate_cmd->add_option("--out", ev.out_prefix, "Output prefix");
  evaluate_cmd->add_flag("--no-artifacts", no_artifacts, "Skip per-run CSV and SVG files");

  VerifyOptions ver;
  auto* verify_cmd = app.add_subcommand("verify", "Run the gradient, normalization and plant verification suites");
  verify_cmd->add_option("--seed", ver.seed, "Seed for randomized checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*simulate) {
      cmd_simulate(sim, std::cout);
    } else if (*fit_cmd) {
      cmd_fit_gauss2(fit, std::cout);
    } else if (*train_cmd) {
      tr.normalize = !no_normalize;
      cmd_train(tr, std::cout);
    } else if (*predict_cmd) {
      cmd_predict(pr, std::cout);
    } else if (*evaluate_cmd) {
      ev.artifacts = !no_artifacts;
      cmd_evaluate(ev, std::cout);
    } else if (*verify_cmd) {
      return cmd_verify(ver, std::cout).ok() ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace motortherm
