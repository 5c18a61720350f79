#include "ddcl/error.hpp"
#include "ddcl/experiments.hpp"
#include "ddcl/hierarchy.hpp"
#include "test_util.hpp"

using namespace ddcl;
using ddcl::test::mat;

namespace {

HierarchyConfig tiny_config(int K1, int K2, int m) {
  HierarchyConfig c;
  c.K1 = K1;
  c.K2 = K2;
  c.m1 = m;
  c.m2 = m;
  c.projection = Matrix::Identity(m, m);
  c.offset = Vector::Zero(m);
  return c;
}

TopicCorpus small_corpus() {
  TopicCorpusParams p;
  p.topics = 3;
  p.docs_per_topic = 6;
  p.tokens_per_doc = 8;
  p.dim = 6;
  p.subtopics = 2;
  return generate_topic_corpus(p, 4);
}

HierarchyConfig small_levels() {
  HierarchyConfig c;
  c.K1 = 5;
  c.m1 = 6;
  c.K2 = 3;
  c.m2 = 3;
  c.init_restarts = 3;
  return c;
}

}  // namespace

TEST_CASE("single token, single prototype per level") {
  const HierarchyConfig c = tiny_config(1, 1, 2);
  const TwoLevelResult r = two_level_forward({mat({{0.5, -1}})}, PrototypeBank(mat({{1, 1}})),
                                             PrototypeBank(mat({{0, 2}})), c, 1.0, 1.0);
  CHECK(r.audit.level1.report.V_soft == 0.0);
  CHECK(r.audit.level2.report.V_soft == 0.0);
}

TEST_CASE("identical documents share level-2 assignments") {
  const HierarchyConfig c = tiny_config(2, 2, 2);
  const Matrix doc = mat({{0, 1}, {2, -1}, {0.5, 0.5}});
  const TwoLevelResult r = two_level_forward({doc, doc}, PrototypeBank(mat({{0, 0}, {1, 1}})),
                                             PrototypeBank(mat({{0.2, 0.1}, {1, 0}})), c, 0.8, 0.8);
  CHECK(test::max_abs_diff(r.level2.Q.row(0), r.level2.Q.row(1)) == 0.0);
  CHECK_THROWS_AS(two_level_forward({doc, Matrix(0, 2)}, PrototypeBank(mat({{0, 0}, {1, 1}})),
                                    PrototypeBank(mat({{0.2, 0.1}, {1, 0}})), c, 0.8, 0.8),
                  Error);
}

TEST_CASE("total loss is the sum of the level losses") {
  const TopicCorpus corpus = small_corpus();
  TrainerConfig t;
  const HierarchyState st = init_hierarchy(corpus, small_levels(), t, 3);
  const TwoLevelResult r = two_level_forward(corpus.docs, st.bank1, st.bank2, st.cfg, 1.2, 1.2);
  CHECK(r.audit.total_L_q == r.audit.level1.report.L_q + r.audit.level2.report.L_q);
  CHECK(r.audit.level1.report.V_soft >= 0.0);
  CHECK(r.audit.level2.report.V_soft >= 0.0);
}

TEST_CASE("level-1 quantities do not depend on the level-2 bank") {
  const TopicCorpus corpus = small_corpus();
  TrainerConfig t;
  const HierarchyState st = init_hierarchy(corpus, small_levels(), t, 3);
  const auto [err, forces_equal] = hierarchy_decoupling(st, corpus, 1.0);
  CHECK(err == 0.0);
  CHECK(forces_equal);
}

TEST_CASE("zero rates keep the trajectory constant") {
  const TopicCorpus corpus = small_corpus();
  TrainerConfig t;
  t.eta_P = 0.0;
  t.eta_theta = 0.0;
  t.epochs = 3;
  t.schedule = {1.0, 1.0, 1.0};
  HierarchyState st = init_hierarchy(corpus, small_levels(), t, 3);
  const HierarchyState start = st;
  const auto audits = train_hierarchy(st, corpus, t);
  REQUIRE(audits.size() == 3);
  CHECK(audits[0].total_L_q == audits[2].total_L_q);
  CHECK(test::max_abs_diff(st.bank1.P, start.bank1.P) == 0.0);
  CHECK(test::max_abs_diff(st.bank2.P, start.bank2.P) == 0.0);
  CHECK(test::max_abs_diff(st.cfg.projection, start.cfg.projection) == 0.0);
}

TEST_CASE("static banks with a moving projection still audit cleanly") {
  const TopicCorpus corpus = small_corpus();
  TrainerConfig t;
  t.eta_P = 0.0;
  t.eta_theta = 1e-3;
  t.epochs = 3;
  HierarchyState st = init_hierarchy(corpus, small_levels(), t, 3);
  const HierarchyState start = st;
  const auto audits = train_hierarchy(st, corpus, t);
  for (const auto& a : audits) {
    CHECK(a.level1.report.V_soft >= 0.0);
    CHECK(a.level2.report.V_soft >= 0.0);
  }
  CHECK(test::max_abs_diff(st.bank2.P, start.bank2.P) == 0.0);
}

TEST_CASE("short training run keeps both levels valid") {
  const TopicCorpus corpus = small_corpus();
  TrainerConfig t;
  t.eta_P = 1e-3;
  t.eta_theta = 5e-5;
  t.lambda = 1.5;
  t.epochs = 15;
  HierarchyState st = init_hierarchy(corpus, small_levels(), t, 3);
  for (const auto& a : train_hierarchy(st, corpus, t)) {
    CHECK(a.level1.report.V_soft >= 0.0);
    CHECK(a.level2.report.V_soft >= 0.0);
    CHECK(a.level1.S_P > 0.0);
  }
}
