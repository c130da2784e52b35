// Command-line front end for the experiment lab and the sample estimators.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ximarkov/ximarkov.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvalidConfig = 2;
constexpr int kControlFailed = 3;
constexpr int kRuntimeError = 1;

int run_lab(const std::string& experiment, const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<long long> samples, std::optional<int> grid, const std::string& out) {
  using namespace ximarkov;
  lab::ExperimentConfig config;
  try {
    config = lab::load_config(config_path);
    if (config.experiment.empty()) config.experiment = experiment;
    require(config.experiment == experiment, ErrorKind::InvalidParameter,
            "config is for '" + config.experiment + "' but '" + experiment + "' was requested");
    if (seed) config.seed = *seed;
    if (samples) config.samples = *samples;
    if (grid) config.grid = *grid;
    if (!out.empty()) config.out_dir = out;
  } catch (const Error& e) {
    std::cerr << "ximarkov: " << e.what() << '\n';
    return e.kind() == ErrorKind::Io ? kRuntimeError : kInvalidConfig;
  }

  lab::ExperimentResult result;
  try {
    result = lab::run_experiment(config);
  } catch (const Error& e) {
    std::cerr << "ximarkov: " << e.what() << '\n';
    return e.kind() == ErrorKind::InvalidParameter ? kInvalidConfig : kRuntimeError;
  }
  try {
    for (const auto& path : lab::emit_all(result, config.out_dir)) std::cout << "wrote " << path.string() << '\n';
  } catch (const Error& e) {
    std::cerr << "ximarkov: " << e.what() << '\n';
    return kRuntimeError;
  }
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& c : result.controls)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : " (" + c.detail + ")") << '\n';
  std::printf("runtime %.2f s\n", result.meta.runtime_seconds);
  return result.controls_passed() ? kOk : kControlFailed;
}

int run_estimate(const std::string& data, const std::vector<std::string>& xs, const std::vector<std::string>& ys,
                 const std::string& measure, std::uint64_t seed) {
  using namespace ximarkov;
  try {
    const auto df = lab::read_csv(data);
    const Eigen::MatrixXd x = df.select(xs), y = df.select(ys);
    if (measure == "xi") {
      require(y.cols() == 1, ErrorKind::InvalidParameter, "xi needs exactly one response column");
      const auto yv = detail::column(y, 0);
      const double v = x.cols() == 1 ? xi_n(detail::column(x, 0), yv, seed) : xi_n_knn(x, yv);
      std::cout << "xi_n " << lab::format_number(v) << '\n';
    } else if (measure == "t") {
      const auto v = t_n(x, y);
      std::cout << "t_n " << lab::format_number(v.value) << (v.clamped ? " (clamped)" : "") << '\n';
    } else if (measure == "lambda") {
      require(y.cols() == 1, ErrorKind::InvalidParameter, "lambda needs exactly one response column");
      const auto v = lambda_n(x, detail::column(y, 0));
      std::cout << "lambda_n " << lab::format_number(v.value) << (v.clamped ? " (clamped)" : "") << '\n';
    } else {
      fail(ErrorKind::InvalidParameter, "measure must be xi, t or lambda");
    }
  } catch (const Error& e) {
    std::cerr << "ximarkov: " << e.what() << '\n';
    return e.kind() == ErrorKind::InvalidParameter ? kInvalidConfig : kRuntimeError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chatterjee's xi, Markov products and elliptical models"};
  app.require_subcommand(1);

  std::string config_path, out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<long long> samples;
  std::optional<int> grid;
  std::string chosen;
  for (const auto& name : ximarkov::lab::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--samples", samples, "Monte Carlo sample size");
    sub->add_option("--grid", grid, "copula grid resolution");
    sub->add_option("--out", out, "output directory")->required();
    sub->callback([&chosen, name] { chosen = name; });
  }

  std::string data, measure = "xi";
  std::vector<std::string> xs, ys;
  std::uint64_t tie_seed = 0;
  auto* est = app.add_subcommand("estimate", "estimate xi, T or Lambda from a numeric CSV file");
  est->add_option("--data", data, "CSV with a header row")->required()->check(CLI::ExistingFile);
  est->add_option("--x", xs, "predictor columns")->required()->delimiter(',');
  est->add_option("--y", ys, "response columns")->required()->delimiter(',');
  est->add_option("--measure", measure, "xi, t or lambda")->check(CLI::IsMember({"xi", "t", "lambda"}));
  est->add_option("--seed", tie_seed, "seed for tie-breaking in x");
  est->callback([&chosen] { chosen = "estimate"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidConfig;
  }
  if (chosen == "estimate") return run_estimate(data, xs, ys, measure, tie_seed);
  return run_lab(chosen, config_path, seed, samples, grid, out);
}
