#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "parcelingam/benchmark.hpp"
#include "parcelingam/core_stats.hpp"
#include "parcelingam/csv.hpp"
#include "parcelingam/discovery.hpp"
#include "parcelingam/evaluation.hpp"
#include "parcelingam/serialize.hpp"

namespace {

namespace fs = std::filesystem;
using namespace parcelingam;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitBudget = 3;

struct RunConfig {
  double alpha = 0.05;
  std::uint64_t seed = 1;
  int subset_cap = 15;
  std::optional<int> hsic_sample_cap;
  int threads = 0;  // 0 = all hardware threads
  std::string format = "json";
  bool transpose = false;
  bool exclude_path_free = false;
};

int effective_threads(int requested) {
  if (const char* env = std::getenv("PARCELINGAM_THREADS")) {
    try {
      const int parsed = std::stoi(env);
      if (parsed > 0) return parsed;
    } catch (...) {
    }
  }
  return requested;
}

DiscoveryOptions discovery_options(const RunConfig& config) {
  DiscoveryOptions opts;
  opts.subset_cap = config.subset_cap;
  opts.hsic_sample_cap = config.hsic_sample_cap;
  opts.threads = effective_threads(config.threads);
  return opts;
}

Json config_json(const RunConfig& config) {
  Json out;
  out["alpha"] = config.alpha;
  out["seed"] = config.seed;
  out["subset_cap"] = config.subset_cap;
  out["hsic_sample_cap"] =
      config.hsic_sample_cap ? Json(*config.hsic_sample_cap) : Json(nullptr);
  out["threads"] = config.threads;
  out["format"] = config.format;
  out["transpose"] = config.transpose;
  out["exclude_path_free"] = config.exclude_path_free;
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write file: " + path);
  out << text;
}

int cmd_discover(const std::string& input, const std::string& output,
                 const RunConfig& config) {
  const CsvTable table = read_csv_file(input);
  DataMatrix data = to_data_matrix(table, config.transpose);
  data.validate();

  for (int i = 0; i < data.d(); ++i) {
    const Eigen::VectorXd row = data.values.row(i);
    const Eigen::VectorXd centered = row.array() - row.mean();
    if (sample_variance(centered) <= kDegenerateVariance)
      std::cerr << "warning: column '"
                << (config.transpose ? "row " + std::to_string(i + 1)
                                     : table.column_names[i])
                << "' is constant; treated per the degeneracy rules\n";
  }

  const DiscoveryResult result =
      algorithm3(center(data), config.alpha, discovery_options(config));

  if (config.format == "csv") {
    write_text(output, result.ordering.to_csv());
    return kExitOk;
  }

  Json doc;
  doc["schema"] = 1;
  doc["config"] = config_json(config);
  doc["variable_ids"] = data.variable_ids;
  Json names = Json::array();
  if (config.transpose)
    for (int i = 0; i < data.d(); ++i) names.push_back("x" + std::to_string(i + 1));
  else
    for (const auto& name : table.column_names) names.push_back(name);
  doc["variable_names"] = std::move(names);
  const Json result_json = to_json(result);
  for (auto it = result_json.begin(); it != result_json.end(); ++it)
    doc[it.key()] = it.value();
  write_text(output, doc.dump(2) + "\n");
  return kExitOk;
}

int cmd_simulate(const std::string& spec_path, int n, const std::string& out_csv,
                 std::optional<std::uint64_t> seed_override) {
  std::ifstream in(spec_path);
  if (!in) throw ParseError("cannot open spec file: " + spec_path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  SemSpec spec = sem_spec_from_toml(text);
  if (seed_override) spec.seed = *seed_override;

  const GeneratedData gen = generate(spec, n);

  std::ofstream csv(out_csv, std::ios::binary);
  if (!csv) throw ParseError("cannot write file: " + out_csv);
  std::vector<std::string> names;
  for (int id : gen.data.variable_ids) names.push_back("x" + std::to_string(id));
  write_csv(csv, names, gen.data.values.transpose());

  Json truth = to_json(gen.truth);
  truth["spec_name"] = spec.name;
  truth["seed"] = spec.seed;
  truth["n"] = n;
  truth["representative"] = true;  // fig-named builtins are stand-ins
  Json noise;
  noise["gauss_mix_asym"] = "0.7*N(-1.1,0.49) + 0.3*N(2.57,1)";
  noise["gauss_mix_sym"] = "0.5*N(-1.5,0.25) + 0.5*N(1.5,0.25)";
  noise["laplace"] = "standard double exponential";
  truth["noise_families"] = std::move(noise);

  fs::path truth_path(out_csv);
  truth_path.replace_extension();
  truth_path += ".truth.json";
  write_text(truth_path.string(), truth.dump(2) + "\n");

  std::cerr << "wrote " << out_csv << " and " << truth_path.string() << "\n";
  return kExitOk;
}

int cmd_benchmark(const std::string& suite, int trials, const std::string& out_dir,
                  std::vector<int> dims, std::vector<int> sizes,
                  const RunConfig& config) {
  fs::create_directories(out_dir);
  const int threads = effective_threads(config.threads);

  if (suite == "table1_4_desk") {
    if (dims.empty()) dims = {5, 10};
    if (sizes.empty()) sizes = {500, 1000};
    const fs::path csv_path = fs::path(out_dir) / "table1_4_desk.csv";
    std::ofstream out(csv_path, std::ios::binary);
    out << bench::cell_csv_header() << "\n";
    out.flush();
    for (int dim : dims) {
      BuiltinNetwork net;
      if (dim == 5) net = BuiltinNetwork::Fig2_5Var;
      else if (dim == 10) net = BuiltinNetwork::Fig3_10Var;
      else if (dim == 15) net = BuiltinNetwork::Fig4_15Var;
      else throw ParseError("benchmark dims must be drawn from {5, 10, 15}");
      for (int n : sizes) {
        bench::CellConfig cell;
        cell.network = net;
        cell.n = n;
        cell.trials = trials;
        cell.alpha = config.alpha;
        cell.seed = derive_seed(config.seed, 100 * dim + n);
        cell.discovery = discovery_options(config);
        std::cerr << "cell dim=" << dim << " n=" << n << " trials=" << trials
                  << " ..." << std::flush;
        const auto t0 = std::chrono::steady_clock::now();
        const bench::CellResult res = bench::run_cell(cell);
        const auto dt = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
        std::cerr << " done in " << dt << " s\n";
        out << bench::cell_csv_row(res) << "\n";
        out.flush();  // partial results survive interruption
      }
    }
    std::cerr << "wrote " << csv_path.string() << "\n";
    return kExitOk;
  }

  if (suite == "lemma_calibration") {
    bench::LemmaCalibrationConfig cal;
    cal.alpha = config.alpha;
    cal.seed = config.seed;
    cal.threads = threads;
    if (trials > 0) cal.lemma_trials = trials;
    const bench::LemmaCalibrationResult res = bench::run_lemma_calibration(cal);

    Json doc;
    doc["schema"] = 1;
    doc["exogenous_pass_rate"] = res.exogenous_pass_rate;
    doc["nonexogenous_reject_rate"] = res.nonexogenous_reject_rate;
    doc["sink_pass_rate"] = res.sink_pass_rate;
    doc["nonsink_reject_rate"] = res.nonsink_reject_rate;
    doc["calibration_n"] = res.ns;
    doc["gamma_fp_rate"] = res.gamma_fp_rate;
    doc["permutation_fp_rate"] = res.permutation_fp_rate;
    doc["gamma_fp_rate_shared"] = res.gamma_fp_rate_shared;

    bool pass = true;
    for (double r : res.exogenous_pass_rate) pass = pass && r >= 0.9;
    for (double r : res.nonexogenous_reject_rate) pass = pass && r >= 0.9;
    for (double r : res.sink_pass_rate) pass = pass && r >= 0.9;
    for (double r : res.nonsink_reject_rate) pass = pass && r >= 0.9;
    for (size_t i = 0; i < res.ns.size(); ++i) {
      pass = pass && res.gamma_fp_rate[i] >= 0.02 && res.gamma_fp_rate[i] <= 0.09;
      pass = pass && std::abs(res.gamma_fp_rate_shared[i] -
                              res.permutation_fp_rate[i]) <= 0.04;
    }
    doc["pass"] = pass;

    const fs::path out_path = fs::path(out_dir) / "lemma_calibration.json";
    write_text(out_path.string(), doc.dump(2) + "\n");
    std::cout << (pass ? "PASS" : "FAIL") << " lemma_calibration\n";
    std::cerr << "wrote " << out_path.string() << "\n";
    return pass ? kExitOk : 1;
  }

  throw ParseError("unknown benchmark suite: " + suite);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ParceLiNGAM: causal ordering discovery robust to latent confounders"};
  app.require_subcommand(1);

  RunConfig config;

  auto* discover = app.add_subcommand("discover", "Estimate causal orders from a CSV");
  std::string input, output;
  discover->add_option("--input", input, "CSV file (samples as rows, header row)")
      ->required();
  discover->add_option("--output", output, "output path ('-' or empty = stdout)");
  discover->add_option("--alpha", config.alpha, "significance level (default 0.05)");
  discover->add_option("--seed", config.seed, "seed echoed into the output");
  discover->add_option("--format", config.format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  discover->add_flag("--transpose", config.transpose, "input has variables as rows");
  discover->add_option("--subset-cap", config.subset_cap,
                       "max variables for subset enumeration (default 15)");
  int hsic_cap = 0;
  discover->add_option("--hsic-cap", hsic_cap,
                       "sample cap for HSIC Gram matrices (0 = none)");
  discover->add_option("--threads", config.threads, "worker threads (0 = auto)");

  auto* simulate = app.add_subcommand("simulate", "Generate data from a TOML spec");
  std::string spec_path, out_csv;
  int n = 1000;
  std::uint64_t sim_seed = 0;
  bool sim_seed_set = false;
  simulate->add_option("--spec", spec_path, "SemSpec TOML file")->required();
  simulate->add_option("--n", n, "sample count")->required();
  simulate->add_option("--out", out_csv, "output CSV path")->required();
  auto* seed_opt = simulate->add_option("--seed", sim_seed, "override the spec seed");

  auto* benchmark = app.add_subcommand("benchmark", "Run a reproduction suite");
  std::string suite, out_dir = "bench_out";
  int trials = 20;
  std::vector<int> dims, sizes;
  benchmark->add_option("--suite", suite, "table1_4_desk|lemma_calibration")->required();
  benchmark->add_option("--trials", trials, "trials per cell (default 20)");
  benchmark->add_option("--out", out_dir, "output directory");
  benchmark->add_option("--dims", dims, "dimensions (default 5 10)");
  benchmark->add_option("--sizes", sizes, "sample sizes (default 500 1000)");
  benchmark->add_option("--alpha", config.alpha, "significance level");
  benchmark->add_option("--seed", config.seed, "master seed");
  benchmark->add_option("--threads", config.threads, "worker threads (0 = auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInput;
  }

  if (hsic_cap > 0) config.hsic_sample_cap = hsic_cap;
  sim_seed_set = seed_opt->count() > 0;

  try {
    if (discover->parsed()) return cmd_discover(input, output, config);
    if (simulate->parsed())
      return cmd_simulate(spec_path, n, out_csv,
                          sim_seed_set ? std::optional<std::uint64_t>(sim_seed)
                                       : std::nullopt);
    if (benchmark->parsed())
      return cmd_benchmark(suite, trials, out_dir, dims, sizes, config);
  } catch (const SubsetBudgetExceeded& e) {
    std::cerr << "error: " << e.what()
              << "\nhint: raise --subset-cap or reduce the variable count\n";
    return kExitBudget;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
