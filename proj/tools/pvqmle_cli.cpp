#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pvqmle/dgp.hpp"
#include "pvqmle/estimate.hpp"
#include "pvqmle/experiments.hpp"
#include "pvqmle/filters.hpp"
#include "pvqmle/inference.hpp"
#include "pvqmle/json_io.hpp"
#include "pvqmle/series.hpp"

namespace fs = std::filesystem;
using namespace pvq;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

void emit_json(const Json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
  write_json_file(j, out);
}

struct DataOptions {
  std::string path;
  std::string family = "inar";
  std::vector<double> rescale;  // lower upper
};

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--data", d.path, "CSV file, one observation per row")->required()->check(CLI::ExistingFile);
  cmd->add_option("--family", d.family, "inar, inar2, ..., ingarch, beta");
  cmd->add_option("--rescale", d.rescale, "map data from [lower, upper] to the unit interval (beta family)")
      ->expected(2);
}

TimeSeries load_data(const DataOptions& d, const FilterFamily& family) {
  if (!d.rescale.empty()) return rescale_to_unit(load_csv(d.path, SampleSpace::Reals), d.rescale[0], d.rescale[1]);
  return load_csv(d.path, family.kind == FamilyKind::BetaVar ? SampleSpace::UnitInterval : SampleSpace::Counts);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

Json parse_inline_or_file(const std::string& text) {
  if (!text.empty() && (text.front() == '{' || text.front() == '[')) return Json::parse(text);
  return read_json_file(text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-variance quasi-maximum likelihood estimation and testing"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate a series from a DGP spec");
  std::string sim_dgp, sim_out;
  int sim_length = 1000;
  std::uint64_t sim_seed = 1;
  bool sim_outlier = false;
  sim->add_option("--dgp", sim_dgp, "DGP JSON file or inline JSON")->required();
  sim->add_option("--length", sim_length, "series length")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_flag("--outlier", sim_outlier, "replace the middle value by mean + 3 sd");
  sim->add_option("--out", sim_out, "output CSV (stdout when omitted)");

  // fit
  auto* fit = app.add_subcommand("fit", "estimate a model");
  DataOptions fit_data;
  std::string fit_restriction = "none", fit_estimator = "PVQMLE", fit_out, fit_paths;
  add_data_options(fit, fit_data);
  fit->add_option("--restriction", fit_restriction, "restriction atoms joined by '+', or none");
  fit->add_option("--estimator", fit_estimator,
                  "PVQMLE, PVQMLE_R, PoissonQMLE, CLSE, WLSE, MLE_PoissonInar1");
  fit->add_option("--out", fit_out, "output JSON (stdout when omitted)");
  fit->add_option("--paths", fit_paths, "also write the fitted lambda / nu* paths to this CSV");

  // test
  auto* test = app.add_subcommand("test", "Wald tests of restrictions at the unrestricted estimate");
  DataOptions test_data;
  std::string test_restrictions, test_out;
  add_data_options(test, test_data);
  test->add_option("--restrictions", test_restrictions, "comma-separated restrictions")->required();
  test->add_option("--out", test_out, "output JSON (stdout when omitted)");

  // varratio
  auto* vr = app.add_subcommand("varratio", "asymptotic variance-ratio grid for Poisson INAR(1)");
  std::string vr_grid, vr_out;
  int vr_tlong = 10000, vr_threads = 0;
  std::uint64_t vr_seed = 1;
  vr->add_option("--grid", vr_grid, "JSON list of [a, omega] pairs (file or inline)")->required();
  vr->add_option("--tlong", vr_tlong, "path length per grid point")->check(CLI::PositiveNumber);
  vr->add_option("--seed", vr_seed, "base seed (grid point i uses seed + i)");
  vr->add_option("--threads", vr_threads, "worker threads (0 = all cores)");
  vr->add_option("--out", vr_out, "output CSV (stdout when omitted)");

  // mc
  auto* mc = app.add_subcommand("mc", "run a Monte Carlo design");
  std::string mc_config, mc_out = "mc_out";
  int mc_threads = -1;
  mc->add_option("--config", mc_config, "McConfig JSON")->required()->check(CLI::ExistingFile);
  mc->add_option("--out-dir", mc_out, "output directory");
  mc->add_option("--threads", mc_threads, "override worker threads");

  // power
  auto* power = app.add_subcommand("power", "power curve of the b = a test over NegBin overdispersion");
  std::string power_config, power_out;
  power->add_option("--config", power_config, "PowerConfig JSON")->required()->check(CLI::ExistingFile);
  power->add_option("--out", power_out, "output CSV (stdout when omitted)");

  // app
  auto* application = app.add_subcommand("app", "fit, test and diagnose a data set");
  DataOptions app_data;
  std::string app_restrictions, app_out = "app_out";
  double app_level = 0.05;
  int app_lags = 20;
  add_data_options(application, app_data);
  application->add_option("--restrictions", app_restrictions, "comma-separated restrictions")->required();
  application->add_option("--level", app_level, "level below which a restriction counts as rejected");
  application->add_option("--max-lag", app_lags, "residual ACF lags");
  application->add_option("--out-dir", app_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      const TimeSeries y = [&] {
        TimeSeries s = simulate(dgp_from_json(parse_inline_or_file(sim_dgp)), sim_length, sim_seed);
        return sim_outlier ? inject_outlier(s) : s;
      }();
      if (sim_out.empty())
        std::cout << to_csv(y);
      else
        write_text(sim_out, to_csv(y));
    } else if (*fit) {
      const FilterFamily family = FilterFamily::parse(fit_data.family);
      const TimeSeries y = load_data(fit_data, family);
      const EstimatorTag tag = parse_estimator_tag(fit_estimator);
      const RestrictionSpec spec = RestrictionSpec::parse(family, fit_restriction);
      if ((tag == EstimatorTag::PVQMLE_R) == spec.empty())
        throw Error("use --estimator PVQMLE_R together with a non-empty --restriction");
      Json out;
      if (tag == EstimatorTag::PVQMLE || tag == EstimatorTag::PVQMLE_R) {
        const FitResult r = fit_pvqmle(family, y, spec.empty() ? std::nullopt : std::optional(spec));
        const CovarianceResult cov = fit_covariance(r, y);
        out = fit_to_json(r, &cov);
        if (!fit_paths.empty()) write_paths_csv(run_filter(family, r.theta_hat.theta(), y, DerivLevel::None), fit_paths);
      } else {
        FitResult r;
        std::optional<CovarianceResult> cov;
        switch (tag) {
          case EstimatorTag::PoissonQMLE: r = fit_poisson_qmle(family, y); break;
          case EstimatorTag::CLSE:
            r = fit_clse(family, y);
            cov = least_squares_covariance(family, y, r.theta_hat.psi);
            break;
          case EstimatorTag::WLSE: {
            r = fit_wlse(family, y, WlseWeights::estimated_binomial());
            const auto first = fit_clse(family, y).theta_hat.psi;
            Eigen::VectorXd w(static_cast<Eigen::Index>(y.size()));
            for (int t = 0; t < w.size(); ++t) {
              w(t) = first(0);
              for (int h = 1; h <= family.lags && t - h >= 0; ++h)
                w(t) += first(h) * (1.0 - first(h)) * y[static_cast<std::size_t>(t - h)];
            }
            cov = least_squares_covariance(family, y, r.theta_hat.psi, w);
            break;
          }
          case EstimatorTag::MLE_PoissonInar1: r = fit_mle_poisson_inar1(y); break;
          default: throw Error("WLSE_unfeasible needs the true variance path and is available in mc runs only");
        }
        out = fit_to_json(r, cov ? &*cov : nullptr);
      }
      emit_json(out, fit_out);
    } else if (*test) {
      const FilterFamily family = FilterFamily::parse(test_data.family);
      const TimeSeries y = load_data(test_data, family);
      const FitResult r = fit_pvqmle(family, y);
      const ObjectiveEval ev = evaluate(family, r.theta_hat.theta(), y, EvalLevel::Full);
      Json out;
      out["fit"] = fit_to_json(r);
      out["tests"] = Json::array();
      for (const auto& name : split_list(test_restrictions)) {
        WaldResult w = wald_test(r, ev, RestrictionSpec::parse(family, name));
        w.restriction_name = name;
        out["tests"].push_back(wald_to_json(w));
      }
      emit_json(out, test_out);
    } else if (*vr) {
      std::vector<std::pair<double, double>> grid;
      for (const auto& pt : parse_inline_or_file(vr_grid)) grid.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
      const std::string csv = variance_ratio_csv(variance_ratio_grid(grid, vr_tlong, vr_seed, vr_threads));
      if (vr_out.empty())
        std::cout << csv;
      else
        write_text(vr_out, csv);
    } else if (*mc) {
      McConfig config = mc_config_from_json(read_json_file(mc_config));
      if (mc_threads >= 0) config.threads = mc_threads;
      const McResult result = run_mc(config);
      write_mc_outputs(config, result, mc_out);
      std::cout << fmt::format("{} replications x {} sample sizes in {:.1f}s -> {}\n", config.n_reps,
                               config.sample_sizes.size(), result.wall_seconds, mc_out);
    } else if (*power) {
      const std::string csv = power_csv(run_power_curve(power_config_from_json(read_json_file(power_config))));
      if (power_out.empty())
        std::cout << csv;
      else
        write_text(power_out, csv);
    } else if (*application) {
      const FilterFamily family = FilterFamily::parse(app_data.family);
      const TimeSeries y = load_data(app_data, family);
      const ApplicationReport report = run_application(y, family, split_list(app_restrictions), app_level, app_lags);
      fs::create_directories(app_out);
      write_json_file(application_to_json(report), fs::path(app_out) / "report.json");
      write_text(fs::path(app_out) / "residual_acf.csv",
                 acf_csv(report.residual_acf, static_cast<int>(report.pearson_residuals.size())));
      std::cout << application_to_json(report).dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
