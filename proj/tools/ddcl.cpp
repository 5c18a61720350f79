#include "ddcl/config.hpp"
#include "ddcl/csv.hpp"
#include "ddcl/data.hpp"
#include "ddcl/error.hpp"
#include "ddcl/rng.hpp"
#include "ddcl/runner.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;

namespace {

fs::path resolve_out_dir(const std::optional<std::string>& flag, const ddcl::ExperimentConfig& cfg) {
  if (flag) return *flag;
  if (cfg.output_dir) return *cfg.output_dir;
  if (const char* env = std::getenv("DDCL_OUT_DIR"); env && *env) return env;
  return fs::path("runs") / ddcl::experiment_name(cfg.kind);
}

void write_tokens(std::uint64_t seed, const std::string& out) {
  ddcl::VqConfig c;
  ddcl::Rng rng(seed);
  const auto mix = ddcl::TokenMixture::make(c.groups, c.dim, c.center_scale, c.spread, rng);
  ddcl::LabeledDataset d;
  d.X = mix.sample(c.tokens_per_epoch, rng, &d.y);
  d.num_classes = c.groups;
  for (int j = 0; j < c.dim; ++j) d.feature_names.push_back("x" + std::to_string(j));
  ddcl::write_dataset_csv(d, out);
}

int generate(const std::string& dataset, const std::string& out, std::uint64_t seed) {
  if (dataset == "debris") {
    ddcl::write_dataset_csv(ddcl::generate_debris_raw(ddcl::DebrisParams::defaults(), seed), out);
  } else if (dataset == "blobs") {
    const ddcl::AblationExperiment a;
    ddcl::write_dataset_csv(ddcl::generate_blobs(a.K, a.per_class, a.dim, a.spread, seed), out);
  } else if (dataset == "tokens") {
    write_tokens(seed, out);
  } else {
    throw ddcl::Error("unknown dataset '" + dataset + "' (expected debris, blobs or tokens)");
  }
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep dual competitive learning experiments"};
  app.set_version_flag("--version", ddcl::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out-dir", out_dir, "Output directory (default: $DDCL_OUT_DIR or runs/<experiment>)");
  run->add_option("--threads", threads, "OpenMP threads")->check(CLI::PositiveNumber);

  std::string dataset, gen_out;
  std::uint64_t gen_seed = 42;
  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
  gen->add_option("dataset", dataset, "debris, blobs or tokens")->required();
  gen->add_option("out", gen_out, "Output CSV")->required();
  gen->add_option("--seed", gen_seed, "Generator seed");

  std::uint64_t gc_seed = 42;
  bool corrupt = false;
  std::optional<std::string> gc_out;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of every analytic gradient");
  gc->add_option("--seed", gc_seed, "Instance seed");
  gc->add_option("--out-dir", gc_out, "Also write gradcheck.csv and manifest.json here");
  gc->add_flag("--corrupt-gradient", corrupt, "Perturb one analytic gradient (self-test)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      ddcl::ExperimentConfig cfg = ddcl::load_config(config_path);
      if (seed) cfg.set_seed(*seed);
      if (threads) cfg.set_threads(*threads);
      cfg.validate();
      const fs::path dir = resolve_out_dir(out_dir, cfg);
      const auto res = ddcl::run_experiment(cfg, dir, std::cout, std::cerr);
      std::cout << "outputs in " << dir.string() << "\n";
      return res.exit_code;
    }
    if (*gen) return generate(dataset, gen_out, gen_seed);
    if (*gc) {
      ddcl::ExperimentConfig cfg;
      cfg.kind = ddcl::ExperimentKind::Gradcheck;
      cfg.set_seed(gc_seed);
      cfg.gradcheck.corrupt = corrupt;
      if (gc_out) return ddcl::run_experiment(cfg, *gc_out, std::cout, std::cerr).exit_code;
      int code = 0;
      for (const auto& e : ddcl::run_gradcheck(cfg.gradcheck)) {
        std::cout << e.name << "  max rel error " << ddcl::format_double(e.max_rel_error)
                  << (e.passed() ? "  ok" : "  FAIL") << "\n";
        if (!e.passed() || e.max_rel_error > 1e-4) code = 2;
      }
      return code;
    }
  } catch (const ddcl::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
