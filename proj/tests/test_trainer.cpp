#include "ddcl/data.hpp"
#include "ddcl/error.hpp"
#include "ddcl/experiments.hpp"
#include "ddcl/stability.hpp"
#include "ddcl/trainer.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace ddcl;

namespace {

struct Fixture {
  LabeledDataset data = generate_blobs(3, 20, 4, 0.3, 1);
  PcaModel pca = pca_fit(data.X, 2);
  TrainerState state;
  Fixture() {
    state.encoder = EncoderModel::fixed_pca(pca);
    state.bank = kmeans_init(pca_project(pca, data.X), 3, 3, 1);
  }
};

}  // namespace

TEST_CASE("annealing schedule") {
  const AnnealSchedule s{2.0, 0.3, 20.0};
  CHECK(anneal(s, 0) == 2.0);
  CHECK(anneal(s, 1e6) == 0.3);
  CHECK(anneal(s, 20) == doctest::Approx(0.7357588823428847).epsilon(1e-15));
  CHECK_THROWS_AS((AnnealSchedule{0.1, 0.3, 20.0}.validate()), Error);
  CHECK_THROWS_AS((AnnealSchedule{2.0, 0.0, 20.0}.validate()), Error);
  CHECK_THROWS_AS((AnnealSchedule{2.0, 0.3, 0.0}.validate()), Error);
}

TEST_CASE("fixed encoder stays fixed") {
  Fixture f;
  TrainerConfig cfg;
  cfg.epochs = 5;
  const Matrix before = f.state.bank.P;
  train(f.state, TrainingData{f.data.X, f.data.y}, cfg);
  CHECK(test::max_abs_diff(f.state.encoder.pca->components, f.pca.components) == 0.0);
  CHECK(test::max_abs_diff(f.state.bank.P, before) > 0.0);
}

TEST_CASE("zero learning rates leave the state unchanged") {
  Fixture f;
  TrainerConfig cfg;
  cfg.eta_P = 0.0;
  cfg.epochs = 3;
  const Matrix before = f.state.bank.P;
  const auto logs = train(f.state, TrainingData{f.data.X, f.data.y}, cfg);
  CHECK(logs.size() == 3);
  CHECK(test::max_abs_diff(f.state.bank.P, before) == 0.0);
}

TEST_CASE("zero epochs give an empty trajectory") {
  Fixture f;
  TrainerConfig cfg;
  cfg.epochs = 0;
  CHECK(train(f.state, TrainingData{f.data.X, f.data.y}, cfg).empty());
}

TEST_CASE("clipping bounds every update") {
  Fixture f;
  TrainerConfig cfg;
  cfg.eta_P = 1.0;
  cfg.clip = 1e-3;
  const Matrix before = f.state.bank.P;
  train_epoch(f.state, TrainingData{f.data.X, f.data.y}, cfg);
  CHECK((f.state.bank.P - before).cwiseAbs().maxCoeff() <= 1e-3 + 1e-15);
}

TEST_CASE("debris configuration first epoch") {
  DebrisExperiment exp;
  exp.trainer.epochs = 1;
  const DebrisOutcome o = run_debris(exp);
  REQUIRE(o.logs.size() == 1);
  CHECK(o.logs[0].T == 2.0);
  CHECK(o.logs[0].V_alg >= 0.0);
  CHECK(o.logs[0].epoch == 0);
}

TEST_CASE("training is deterministic for a fixed seed") {
  AblationExperiment exp;
  exp.trainer.epochs = 20;
  const AblationSetup a = make_ablation_setup(exp), b = make_ablation_setup(exp);
  TrainerConfig cfg = exp.trainer;
  cfg.eta_theta = 0.1 * cfg.eta_P;
  TrainerState sa = a.state, sb = b.state;
  const auto la = train(sa, TrainingData{a.data.X, a.data.y}, cfg);
  const auto lb = train(sb, TrainingData{b.data.X, b.data.y}, cfg);
  CHECK(test::max_abs_diff(sa.bank.P, sb.bank.P) == 0.0);
  CHECK(test::max_abs_diff(sa.encoder.W, sb.encoder.W) == 0.0);
  CHECK(la.back().L_q == lb.back().L_q);
}

TEST_CASE("single-epsilon sweep matches a plain run") {
  AblationExperiment exp;
  exp.trainer.epochs = 15;
  const AblationSetup s = make_ablation_setup(exp);
  const TrainingData data{s.data.X, s.data.y};
  const auto rows = ablation_sweep({0.1}, exp.trainer, s.state, data, 1);
  TrainerConfig cfg = exp.trainer;
  cfg.eta_theta = 0.1 * cfg.eta_P;
  TrainerState st = s.state;
  const auto logs = train(st, data, cfg);
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].logs.size() == logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i) CHECK(rows[0].logs[i].L_q == logs[i].L_q);
  CHECK(rows[0].final_S_P == prototype_separation(st.bank.P));
}

TEST_CASE("trainer config validation") {
  TrainerConfig c;
  c.eta_P = -1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = TrainerConfig{};
  c.clip = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = TrainerConfig{};
  c.epochs = -1;
  CHECK_THROWS_AS(c.validate(), Error);
}
