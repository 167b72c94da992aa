// potflare: peaks-over-threshold analysis of minute-cadence X-ray flux.
//
// Each subcommand runs one stage from serialized inputs to serialized
// outputs; `run` chains all of them and writes report.json.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "potflare/format.hpp"
#include "potflare/pipeline.hpp"

namespace fs = std::filesystem;
using namespace potflare;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir{"."};
  bool fixed_clock{false};
  std::vector<std::string> inputs;
  std::string series_path;
  std::string catalog_path;
  std::string excesses_path;
  std::string fit_path;
  std::optional<double> threshold;
  std::optional<std::int64_t> n_total;
  std::optional<double> fixed_shape;
  std::vector<double> levels;
  std::vector<double> years;
  SynthParams synth;
  std::string synth_output;
};

PipelineConfig load(const Options& o) {
  try {
    return o.config_path.empty() ? PipelineConfig{} : load_config(o.config_path);
  } catch (const std::exception& e) {
    throw StageError(Stage::config, e.what());
  }
}

fs::path prepare_out(const Options& o) {
  fs::create_directories(o.out_dir);
  return o.out_dir;
}

template <class F>
void stage(Stage s, F&& body) {
  try {
    body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(s, e.what());
  }
}

FluxSeries read_series(const std::string& path) {
  IngestConfig plain;
  plain.scaling_divisor = 1.0;
  return read_flux_csv(path, plain);
}

void cmd_ingest(const Options& o) {
  const auto config = load(o);
  stage(Stage::ingest, [&] {
    std::vector<InputSpec> inputs = config.inputs;
    for (const auto& p : o.inputs) inputs.push_back({p, config.ingest});
    const auto out = prepare_out(o);
    write_ingest_artifacts(out, run_ingest(inputs), true);
  });
}

void cmd_decluster(const Options& o) {
  const auto config = load(o);
  stage(Stage::decluster, [&] { write_decluster_artifacts(prepare_out(o), run_decluster(read_series(o.series_path), config)); });
}

void cmd_sweep(const Options& o) {
  const auto config = load(o);
  stage(Stage::sweep, [&] { write_sweep_artifacts(prepare_out(o), run_sweep(read_series(o.series_path), config)); });
}

void cmd_fit(const Options& o) {
  const auto config = load(o);
  stage(Stage::fit, [&] {
    if (o.catalog_path.empty() == o.excesses_path.empty()) {
      throw Error("give exactly one of --catalog or --excesses");
    }
    FitOptions opts;
    opts.min_excesses = config.min_excesses;
    opts.fixed_shape = o.fixed_shape;
    std::vector<double> excesses;
    if (!o.catalog_path.empty()) {
      const auto catalog = event_catalog_from_json(read_json_file(o.catalog_path));
      opts.threshold = o.threshold.value_or(config.gpd_threshold);
      opts.n_total = catalog.n_total_observations;
      excesses = catalog_excesses(catalog, opts.threshold);
    } else {
      excesses = read_value_list(o.excesses_path);
      opts.threshold = o.threshold.value_or(0.0);
      opts.n_total = o.n_total;
    }
    write_fit_artifacts(prepare_out(o), fit_gpd(excesses, opts), excesses);
  });
}

void cmd_diagnose(const Options& o) {
  const auto config = load(o);
  stage(Stage::diagnose, [&] {
    const auto catalog = event_catalog_from_json(read_json_file(o.catalog_path));
    const auto fit = gpd_fit_from_json(read_json_file(o.fit_path));
    write_diagnose_artifacts(prepare_out(o), run_diagnose(catalog, fit, config));
  });
}

void cmd_returns(const Options& o) {
  const auto config = load(o);
  stage(Stage::returns, [&] {
    const auto fit = gpd_fit_from_json(read_json_file(o.fit_path));
    write_returns_artifacts(prepare_out(o), run_returns(fit, config));

    const ObservationCalendar cal{config.observations_per_year};
    const CiOptions ci{config.ci_level, true};
    for (double level : o.levels) {
      std::cout << "return_period level=" << format_double(level) << " x_class=" << format_double(x_class(level));
      try {
        if (fit.covariance) {
          const auto p = return_period_ci(fit, level, cal, ci);
          std::cout << " years=" << format_double(p.period) << " ci_low_years=" << format_double(p.low)
                    << " ci_high_years=" << format_double(p.high);
        } else {
          std::cout << " years=" << format_double(return_period(fit, level, cal)) << " ci=unavailable";
        }
      } catch (const InfiniteReturnError&) {
        std::cout << " years=inf";
      }
      std::cout << '\n';
    }
    for (double m : o.years) {
      const auto level = return_level(fit, m, cal);
      std::cout << "return_level years=" << format_double(m) << " level=" << format_double(level.level)
                << " x_class=" << format_double(x_class(level.level));
      if (fit.covariance) {
        const auto c = return_level_ci(fit, m, cal, ci);
        std::cout << " ci_low=" << format_double(c.log_low) << " ci_high=" << format_double(c.log_high);
      } else {
        std::cout << " ci=unavailable";
      }
      if (level.sub_threshold) std::cout << " sub_threshold=1";
      std::cout << '\n';
    }
  });
}

void cmd_synth(const Options& o) {
  stage(Stage::ingest, [&] {
    const auto series = synth_clustered_series(o.synth);
    const fs::path target = o.synth_output.empty() ? prepare_out(o) / "synth.csv" : fs::path(o.synth_output);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    write_flux_csv(target, series);
  });
}

void cmd_run(const Options& o) {
  auto config = load(o);
  for (const auto& p : o.inputs) config.inputs.push_back({p, config.ingest});
  const auto report = run_pipeline(config, o.out_dir, RunOptions{o.fixed_clock});
  std::cout << report.path.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Peaks-over-threshold extreme-value analysis of X-ray flux series"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "Pipeline configuration (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out_dir, "Output directory")->capture_default_str();
  };

  auto* ingest = app.add_subcommand("ingest", "Parse, scale and saturation-filter flux CSV files");
  common(ingest);
  ingest->add_option("--input", o.inputs, "Flux CSV files")->check(CLI::ExistingFile);

  auto* decl = app.add_subcommand("decluster", "Runs-decluster a cleaned series into flare events");
  common(decl);
  decl->add_option("--series", o.series_path, "Cleaned series CSV")->required()->check(CLI::ExistingFile);

  auto* sweep = app.add_subcommand("sweep", "Lag-1 autocorrelation of event peaks versus declustering gap");
  common(sweep);
  sweep->add_option("--series", o.series_path, "Cleaned series CSV")->required()->check(CLI::ExistingFile);

  auto* fit = app.add_subcommand("fit", "Maximum-likelihood GPD fit");
  common(fit);
  fit->add_option("--catalog", o.catalog_path, "catalog.json from decluster")->check(CLI::ExistingFile);
  fit->add_option("--excesses", o.excesses_path, "Excess list, one value per line")->check(CLI::ExistingFile);
  fit->add_option("--threshold", o.threshold, "Threshold u (defaults: config gpd_threshold, or 0 for --excesses)");
  fit->add_option("--n-total", o.n_total, "Total observation count n for --excesses");
  fit->add_option("--fixed-shape", o.fixed_shape, "Pin the shape parameter (0 = exponential)");

  auto* diag = app.add_subcommand("diagnose", "Mean-residual-life curve and probability plot");
  common(diag);
  diag->add_option("--catalog", o.catalog_path, "catalog.json")->required()->check(CLI::ExistingFile);
  diag->add_option("--fit", o.fit_path, "fit.json")->required()->check(CLI::ExistingFile);

  auto* ret = app.add_subcommand("returns", "Return-level curve and scenario queries");
  common(ret);
  ret->add_option("--fit", o.fit_path, "fit.json")->required()->check(CLI::ExistingFile);
  ret->add_option("--level", o.levels, "Print the return period of this level (W m^-2)");
  ret->add_option("--years", o.years, "Print the return level for this period (years)");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic clustered flux series");
  common(synth);
  synth->add_option("--seed", o.synth.seed)->capture_default_str();
  synth->add_option("--scale", o.synth.scale)->capture_default_str();
  synth->add_option("--shape", o.synth.shape)->capture_default_str();
  synth->add_option("--rate", o.synth.event_rate, "Events per year")->capture_default_str();
  synth->add_option("--cluster-mean", o.synth.cluster_length_mean, "Mean cluster length (minutes)")->capture_default_str();
  synth->add_option("--years", o.synth.duration_years, "Duration (years)")->capture_default_str();
  synth->add_option("--base-threshold", o.synth.base_threshold)->capture_default_str();
  synth->add_option("--output", o.synth_output, "Output CSV (default OUT/synth.csv)");

  auto* run = app.add_subcommand("run", "Full pipeline: ingest through report");
  common(run);
  run->add_option("--input", o.inputs, "Flux CSV files (appended to config inputs)")->check(CLI::ExistingFile);
  run->add_flag("--fixed-clock", o.fixed_clock, "Fixed report timestamp for reproducible output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) cmd_ingest(o);
    else if (*decl) cmd_decluster(o);
    else if (*sweep) cmd_sweep(o);
    else if (*fit) cmd_fit(o);
    else if (*diag) cmd_diagnose(o);
    else if (*ret) cmd_returns(o);
    else if (*synth) cmd_synth(o);
    else if (*run) cmd_run(o);
  } catch (const StageError& e) {
    std::cerr << "potflare: " << e.what() << '\n';
    return exit_code(e.stage());
  } catch (const std::exception& e) {
    std::cerr << "potflare: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
