#include "ddcl/experiments.hpp"

#include "ddcl/error.hpp"
#include "ddcl/loss.hpp"
#include "ddcl/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace ddcl {

void DebrisExperiment::validate() const {
  data.validate();
  require(pca_dim >= 1 && pca_dim <= 7, "debris: pca_dim must be in [1, 7]");
  require(restarts >= 1, "debris: restarts must be positive");
  trainer.validate();
}

DebrisOutcome run_debris(const DebrisExperiment& exp, const EpochObserver& observer) {
  exp.validate();
  DebrisOutcome out;
  out.data = generate_debris(exp.data, exp.data_seed);
  out.pca = pca_fit(out.data.X, exp.pca_dim);
  const Matrix Z = pca_project(out.pca, out.data.X);
  const int K = static_cast<int>(exp.data.regimes.size());
  const KMeansResult km = kmeans(Z, K, exp.restarts, exp.trainer.seed);
  out.baseline = score_clustering(km.labels, out.data.y);

  TrainerState state;
  state.encoder = EncoderModel::fixed_pca(out.pca);
  state.bank = PrototypeBank(km.centroids);
  state.rng = Rng(exp.trainer.seed);
  out.logs = train(state, TrainingData{out.data.X, out.data.y}, exp.trainer, observer);
  for (std::size_t e = 0; e < out.logs.size(); ++e)
    if (out.logs[e].acc > out.logs[static_cast<std::size_t>(out.best_epoch)].acc)
      out.best_epoch = static_cast<int>(e);
  return out;
}

TrainerConfig AblationExperiment::default_trainer() {
  TrainerConfig t;
  t.eta_P = 0.5;
  t.epochs = 300;
  t.schedule = {2.0, 0.3, 20.0};
  return t;
}

void AblationExperiment::validate() const {
  require(K >= 2 && per_class >= 1, "ablation: need K >= 2 and per_class >= 1");
  require(dim >= K, "ablation: dim must be >= K");
  require(m >= 1 && m <= dim, "ablation: m must be in [1, dim]");
  require(spread >= 0.0 && input_scale > 0.0, "ablation: invalid spread or input_scale");
  require(!epsilons.empty(), "ablation: empty epsilon grid");
  for (double e : epsilons) require(e > 0.0, "ablation: epsilon values must be positive");
  require(threads >= 1, "ablation: threads must be >= 1");
  trainer.validate();
}

AblationSetup make_ablation_setup(const AblationExperiment& exp) {
  exp.validate();
  const LabeledDataset ds = generate_blobs(exp.K, exp.per_class, exp.dim, exp.spread, exp.data_seed);
  AblationSetup s;
  s.data.X = exp.input_scale * standardize_columns(ds.X);
  s.data.y = ds.y;
  const PcaModel pca = pca_fit(s.data.X, exp.m);
  s.state.encoder = EncoderModel::linear(pca.components);
  const KMeansResult km = kmeans(s.state.encoder.encode(s.data.X), exp.K, exp.restarts,
                                 exp.trainer.seed);
  s.state.bank = PrototypeBank(km.centroids);
  s.state.rng = Rng(exp.trainer.seed);
  s.baseline_acc = hungarian_accuracy(km.labels, s.data.y).acc;
  return s;
}

AblationOutcome run_ablation(const AblationExperiment& exp) {
  const AblationSetup s = make_ablation_setup(exp);
  AblationOutcome out;
  out.baseline_acc = s.baseline_acc;
  out.rows = ablation_sweep(exp.epsilons, exp.trainer, s.state, s.data, exp.threads);
  return out;
}

void LyapunovExperiment::validate() const {
  require(K >= 2 && per_class >= 1 && dim >= K, "lyapunov: invalid blob shape");
  require(eta_P > 0.0 && eta_P <= 1e-3, "lyapunov: eta_P must be in (0, 1e-3]");
  require(lambda >= 0.0, "lyapunov: lambda must be >= 0");
  require(epochs >= 1, "lyapunov: epochs must be positive");
  require(fixed_T > 0.0, "lyapunov: fixed_T must be positive");
  schedule.validate();
}

LyapunovOutcome run_lyapunov(const LyapunovExperiment& exp) {
  exp.validate();
  const LabeledDataset ds = generate_blobs(exp.K, exp.per_class, exp.dim, exp.spread, exp.data_seed);
  const TrainingData data{ds.X, ds.y};
  TrainerState init;
  init.encoder = EncoderModel::identity();
  init.bank = kmeans_init(ds.X, exp.K, 5, exp.data_seed);

  LyapunovOutcome out;
  auto run = [&](const AnnealSchedule& schedule) {
    TrainerConfig cfg;
    cfg.eta_P = exp.eta_P;
    cfg.lambda = exp.lambda;
    cfg.epochs = exp.epochs;
    cfg.schedule = schedule;
    TrainerState st = init;
    std::vector<AuditPoint> traj;
    train(st, data, cfg, [&](const EpochLog& log, const TrainerState& s) {
      traj.push_back({ds.X, s.bank.P, log.T, exp.lambda});
      out.max_abs_grad = std::max(out.max_abs_grad, log.grad_norm_P);
    });
    traj.push_back({ds.X, st.bank.P, anneal(schedule, st.epoch), exp.lambda});
    return lyapunov_audit(traj, exp.tolerance);
  };
  out.fixed_T = run({exp.fixed_T, exp.fixed_T, 1.0});
  out.annealed = run(exp.schedule);
  return out;
}

void JacobianExperiment::validate() const {
  require(K >= 2 && per_class >= 1 && dim >= K, "jacobian: invalid blob shape");
  require(T > 0.0 && lambda > 0.0, "jacobian: T and lambda must be positive");
  require(eta_P > 0.0 && epsilon > 0.0 && compare_epsilon > 0.0, "jacobian: rates must be positive");
  require(tol > 0.0 && max_steps >= 1, "jacobian: invalid stopping rule");
}

JacobianOutcome run_jacobian(const JacobianExperiment& exp) {
  exp.validate();
  const LabeledDataset ds = generate_blobs(exp.K, exp.per_class, exp.dim, exp.spread, exp.data_seed,
                                           exp.center_scale);
  LinearEncoderSystem sys;
  sys.X = ds.X;
  sys.m = 1;
  sys.K = exp.K;
  sys.T = exp.T;
  sys.repulsion.lambda = exp.lambda;

  Rng rng = Rng(exp.data_seed).split(1);
  Matrix W(1, exp.dim);
  for (int j = 0; j < exp.dim; ++j) W(0, j) = rng.normal();
  const KMeansResult km = kmeans(ds.X * W.transpose(), exp.K, 5, exp.data_seed);

  JacobianOutcome out;
  out.params = sys.n_theta() + sys.n_P();
  out.run = descend_to_stationary(sys, sys.pack(W, km.centroids), exp.eta_P, exp.epsilon, exp.tol,
                                  exp.max_steps);
  out.blocks = estimate_hessian_blocks(sys.objective(), out.run.point);
  out.blocks.grad_norm = out.run.grad_norm;
  const double eta_theta = exp.epsilon * exp.eta_P;
  out.verdict = stability_verdict(assemble_jacobian(out.blocks, eta_theta, exp.eta_P), out.blocks,
                                  eta_theta, exp.eta_P);
  const double eta_cmp = exp.compare_epsilon * exp.eta_P;
  out.compare = stability_verdict(assemble_jacobian(out.blocks, eta_cmp, exp.eta_P), out.blocks,
                                  eta_cmp, exp.eta_P);
  out.proxies = timescale_proxies(out.blocks);
  return out;
}

TrainerConfig HierarchyExperiment::default_trainer() {
  TrainerConfig t;
  t.eta_P = 1e-3;
  t.epochs = 15;
  return t;
}

void HierarchyExperiment::validate() const {
  require(corpus.topics >= 1 && corpus.docs_per_topic >= 1 && corpus.tokens_per_doc >= 1,
          "hierarchy: invalid corpus shape");
  require(corpus.dim == levels.m1, "hierarchy: corpus dim must equal m1");
  levels.validate();
  trainer.validate();
  require(!settings.empty(), "hierarchy: no (epsilon, lambda) settings");
  for (const auto& [e, l] : settings)
    require(e >= 0.0 && l >= 0.0, "hierarchy: epsilon and lambda must be >= 0");
}

std::pair<double, bool> hierarchy_decoupling(const HierarchyState& state, const TopicCorpus& corpus,
                                             double T, double h) {
  const TwoLevelResult base =
      two_level_forward(corpus.docs, state.bank1, state.bank2, state.cfg, T, T);
  const Matrix force = separation_force(state.bank1, base.level1.Q);
  double err = 0.0;
  bool same = true;
  Rng rng(7);
  // Whole-bank perturbation, then central differences on a few coordinates.
  PrototypeBank shifted = state.bank2;
  for (Eigen::Index i = 0; i < shifted.P.size(); ++i) shifted.P.data()[i] += rng.normal();
  {
    const TwoLevelResult r = two_level_forward(corpus.docs, state.bank1, shifted, state.cfg, T, T);
    err = std::max(err, std::abs(r.audit.level1.report.V_soft - base.audit.level1.report.V_soft));
    const Matrix f = separation_force(state.bank1, r.level1.Q);
    same = same && (f.array() == force.array()).all();
  }
  for (int c = 0; c < 4; ++c) {
    const auto idx = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(state.bank2.P.size())));
    PrototypeBank plus = state.bank2, minus = state.bank2;
    plus.P.data()[idx] += h;
    minus.P.data()[idx] -= h;
    const double vp =
        two_level_forward(corpus.docs, state.bank1, plus, state.cfg, T, T).audit.level1.report.V_soft;
    const double vm =
        two_level_forward(corpus.docs, state.bank1, minus, state.cfg, T, T).audit.level1.report.V_soft;
    err = std::max(err, std::abs((vp - vm) / (2.0 * h)));
  }
  return {err, same};
}

HierarchyOutcome run_hierarchy(const HierarchyExperiment& exp) {
  exp.validate();
  const TopicCorpus corpus = generate_topic_corpus(exp.corpus, exp.data_seed);
  const HierarchyState init = init_hierarchy(corpus, exp.levels, exp.trainer, exp.data_seed);

  HierarchyOutcome out;
  for (const auto& [eps, lam] : exp.settings) {
    HierarchyRun run;
    run.epsilon = eps;
    run.lambda = lam;
    TrainerConfig cfg = exp.trainer;
    cfg.lambda = lam;
    cfg.eta_theta = eps * cfg.eta_P;
    cfg.epochs = 1;
    HierarchyState st = init;
    for (int e = 0; e < exp.trainer.epochs; ++e) {
      const double T = anneal(cfg.schedule, st.epoch);
      if (e == 0 || e + 1 == exp.trainer.epochs) {
        const auto [err, same] = hierarchy_decoupling(st, corpus, T);
        run.decoupling_error = std::max(run.decoupling_error, err);
        run.separation_force_unchanged = run.separation_force_unchanged && same;
      }
      const TwoLevelResult fwd = two_level_forward(corpus.docs, st.bank1, st.bank2, st.cfg, T, T);
      const double l1 = competitive_loss(fwd.tokens, st.bank1.P, T);
      const double l2 = competitive_loss(fwd.Z2, st.bank2.P, T);
      run.additivity_error = std::max(run.additivity_error, std::abs(fwd.audit.total_L_q - (l1 + l2)));
      const std::vector<LevelAudit> a = train_hierarchy(st, corpus, cfg);
      run.audits.insert(run.audits.end(), a.begin(), a.end());
    }
    const double T = anneal(cfg.schedule, st.epoch);
    run.doc_vectors = two_level_forward(corpus.docs, st.bank1, st.bank2, st.cfg, T, T).Z2;
    run.topics = corpus.topic;
    out.runs.push_back(std::move(run));
  }
  return out;
}

}  // namespace ddcl
