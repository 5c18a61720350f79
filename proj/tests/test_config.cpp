#include "ddcl/config.hpp"
#include "ddcl/error.hpp"
#include "ddcl/runner.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ddcl;

TEST_CASE("minimal config uses defaults") {
  const ExperimentConfig c = parse_config(R"({"experiment": "debris"})");
  CHECK(c.kind == ExperimentKind::Debris);
  CHECK(c.seed == 42);
  CHECK(c.debris.trainer.epochs == 500);
  CHECK(c.debris.trainer.eta_P == 0.05);
  CHECK(c.debris.trainer.clip == 2.0);
  CHECK(c.debris.trainer.schedule.tau == 120.0);
}

TEST_CASE("config fields override defaults") {
  const ExperimentConfig c = parse_config(R"({
    "experiment": "ablation", "seed": 7, "threads": 2,
    "trainer": {"epochs": 12, "schedule": {"T0": 3.0, "Tmin": 0.5, "tau": 10}},
    "ablation": {"epsilons": [0.1, 1.0]}
  })");
  CHECK(c.seed == 7);
  CHECK(c.ablation.data_seed == 7);
  CHECK(c.ablation.trainer.epochs == 12);
  CHECK(c.ablation.trainer.schedule.T0 == 3.0);
  CHECK(c.ablation.epsilons == std::vector<double>{0.1, 1.0});
  CHECK(c.threads == 2);
}

TEST_CASE("vq accepts a single K or a list") {
  CHECK(parse_config(R"({"experiment": "vq", "vq": {"K": 32}})").vq.K_values == std::vector<int>{32});
  CHECK(parse_config(R"({"experiment": "vq", "vq": {"K": [8, 16]}})").vq.K_values ==
        std::vector<int>{8, 16});
}

TEST_CASE("invalid configs are rejected") {
  CHECK_THROWS_AS(parse_config(R"({"experiment": "nope"})"), Error);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "debris", "bogus": 1})"), Error);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "debris", "trainer": {"eta_p": 1}})"), Error);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "debris", "trainer": {"schedule": {"T0": 0}}})"), Error);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "debris", "trainer": {"epochs": "ten"}})"), Error);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "ablation", "ablation": {"epsilons": [0.1, -1]}})"), Error);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "gradcheck", "trainer": {}})"), Error);
  CHECK_THROWS_AS(parse_config("{not json"), Error);
}

TEST_CASE("effective config round-trips") {
  for (const char* e : {"debris", "ablation", "vq", "hierarchy", "gradcheck"}) {
    const ExperimentConfig c = parse_config(std::string(R"({"experiment": ")") + e + "\"}");
    const std::string once = config_to_json(c);
    CHECK(config_to_json(parse_config(once)) == once);
  }
}

TEST_CASE("sha256") {
  const auto path = std::filesystem::temp_directory_path() / "ddcl_sha_test.txt";
  std::ofstream(path) << "abc";
  CHECK(sha256_file(path) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  std::filesystem::remove(path);
}
