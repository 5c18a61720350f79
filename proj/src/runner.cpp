#include "ddcl/runner.hpp"

#include "ddcl/csv.hpp"
#include "ddcl/error.hpp"
#include "ddcl/kernels.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ddcl {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha256: digest init failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

std::vector<std::string> with(std::vector<std::string> cols, const std::vector<std::string>& extra) {
  cols.insert(cols.end(), extra.begin(), extra.end());
  return cols;
}

void log_cells(CsvWriter& w, const EpochLog& l) {
  w.cell(l.epoch).cell(l.T).cell(l.L_q).cell(l.L_OLS).cell(l.L_soft).cell(l.V_soft).cell(l.V_alg)
      .cell(l.S_P).cell(l.H_Q).cell(l.acc).cell(l.nmi).cell(l.ari);
}

class Summary {
 public:
  explicit Summary(const std::string& path) : w_(path) { w_.header({"metric", "value"}); }
  void add(const std::string& key, double v) {
    w_.cell(key).cell(v);
    w_.end_row();
  }
  void close() { w_.close(); }

 private:
  CsvWriter w_;
};

struct Tracker {
  double max_residual = 0.0;
  double min_V_alg = std::numeric_limits<double>::infinity();
  void see(const EpochLog& l) {
    max_residual = std::max(max_residual, std::abs(l.L_q - (l.L_soft + l.V_soft)));
    min_V_alg = std::min(min_V_alg, l.V_alg);
  }
};

void run_debris_out(const ExperimentConfig& cfg, const fs::path& dir, std::vector<std::string>& files,
                    std::ostream& out) {
  const DebrisOutcome o = run_debris(cfg.debris);
  CsvWriter log((dir / "epoch_log.csv").string());
  log.header(epoch_log_columns());
  Tracker tr;
  double min_S = std::numeric_limits<double>::infinity();
  for (const auto& l : o.logs) {
    log_cells(log, l);
    log.end_row();
    tr.see(l);
    min_S = std::min(min_S, l.S_P);
  }
  log.close();
  files.push_back("epoch_log.csv");

  Summary s((dir / "summary.csv").string());
  const EpochLog& best = o.logs[static_cast<std::size_t>(o.best_epoch)];
  s.add("pca_explained_variance", o.pca.explained_variance_ratio);
  s.add("kmeans_pca_acc", o.baseline.acc);
  s.add("kmeans_pca_nmi", o.baseline.nmi);
  s.add("kmeans_pca_ari", o.baseline.ari);
  s.add("best_epoch", best.epoch);
  s.add("best_acc", best.acc);
  s.add("best_nmi", best.nmi);
  s.add("best_ari", best.ari);
  s.add("initial_H_Q", o.logs.front().H_Q);
  s.add("final_H_Q", o.logs.back().H_Q);
  s.add("min_S_P", min_S);
  s.add("max_identity_residual", tr.max_residual);
  s.add("min_V_alg", tr.min_V_alg);
  s.close();
  files.push_back("summary.csv");
  out << "debris: k-means+PCA ACC " << o.baseline.acc << ", DDCL best ACC " << best.acc
      << " (epoch " << best.epoch << "), PCA variance " << o.pca.explained_variance_ratio << "\n";
}

void run_ablation_out(const ExperimentConfig& cfg, const fs::path& dir,
                      std::vector<std::string>& files, std::ostream& out) {
  const AblationOutcome o = run_ablation(cfg.ablation);
  CsvWriter table((dir / "ablation.csv").string());
  table.header({"epsilon", "best_acc", "final_S_P", "initial_S_P", "collapse_epoch"});
  for (const auto& r : o.rows) {
    table.cell(r.epsilon).cell(r.best_acc).cell(r.final_S_P).cell(r.initial_S_P).cell(r.collapse_epoch);
    table.end_row();
  }
  table.close();
  files.push_back("ablation.csv");

  CsvWriter log((dir / "epoch_log.csv").string());
  log.header(with(epoch_log_columns(), {"epsilon"}));
  Tracker tr;
  for (const auto& r : o.rows)
    for (const auto& l : r.logs) {
      log_cells(log, l);
      log.cell(r.epsilon);
      log.end_row();
      tr.see(l);
    }
  log.close();
  files.push_back("epoch_log.csv");

  Summary s((dir / "summary.csv").string());
  s.add("kmeans_acc", o.baseline_acc);
  for (const auto& r : o.rows) {
    std::ostringstream key;
    key << "eps=" << r.epsilon;
    s.add("best_acc@" + key.str(), r.best_acc);
    s.add("final_S_P_ratio@" + key.str(), r.final_S_P / r.initial_S_P);
  }
  s.add("max_identity_residual", tr.max_residual);
  s.add("min_V_alg", tr.min_V_alg);
  s.close();
  files.push_back("summary.csv");
  for (const auto& r : o.rows)
    out << "ablation eps=" << r.epsilon << ": best ACC " << r.best_acc << ", final S(P) "
        << r.final_S_P << " (initial " << r.initial_S_P << ")\n";
}

int epochs_to_full(const std::vector<UtilizationRecord>& recs) {
  for (const auto& r : recs)
    if (r.utilization >= 1.0) return r.epoch;
  return -1;
}

void run_vq_out(const ExperimentConfig& cfg, const fs::path& dir, std::vector<std::string>& files,
                std::ostream& out) {
  CsvWriter log((dir / "epoch_log.csv").string());
  log.header(with(epoch_log_columns(), {"K", "utilization", "utilization_hard", "hard_frozen_codes",
                                        "soft_min_code_grad"}));
  Summary s((dir / "summary.csv").string());
  Tracker tr;
  for (int K : cfg.vq.K_values) {
    VqConfig c = cfg.vq.base;
    c.K = K;
    const VqComparison r = run_vq_comparison(c);
    for (std::size_t e = 0; e < r.soft_logs.size(); ++e) {
      log_cells(log, r.soft_logs[e]);
      log.cell(K).cell(r.soft[e].utilization).cell(r.hard[e].utilization)
          .cell(r.hard_frozen_codes[e]).cell(r.soft_min_code_grad[e]);
      log.end_row();
      tr.see(r.soft_logs[e]);
    }
    const std::string k = "@K=" + std::to_string(K);
    if (!r.soft.empty()) {
      s.add("soft_utilization_epoch1" + k, r.soft.front().utilization);
      s.add("hard_utilization_epoch1" + k, r.hard.front().utilization);
      s.add("soft_utilization_final" + k, r.soft.back().utilization);
      s.add("hard_utilization_final" + k, r.hard.back().utilization);
      s.add("soft_epochs_to_full" + k, epochs_to_full(r.soft));
      s.add("hard_epochs_to_full" + k, epochs_to_full(r.hard));
      s.add("hard_max_frozen_codes" + k,
            *std::max_element(r.hard_frozen_codes.begin(), r.hard_frozen_codes.end()));
      out << "vq K=" << K << ": epoch-1 utilization soft " << r.soft.front().utilization
          << ", hard " << r.hard.front().utilization << "\n";
    }
  }
  s.add("max_identity_residual", tr.max_residual);
  s.add("min_V_alg", tr.min_V_alg);
  log.close();
  s.close();
  files.push_back("epoch_log.csv");
  files.push_back("summary.csv");
}

void level_cells(CsvWriter& w, const LevelStats& s) {
  const LossReport& r = s.report;
  w.cell(r.L_q).cell(r.L_OLS).cell(r.L_soft).cell(r.V_soft).cell(r.V_alg).cell(s.S_P).cell(s.H_Q);
}

void run_hierarchy_out(const ExperimentConfig& cfg, const fs::path& dir,
                       std::vector<std::string>& files, std::ostream& out) {
  const HierarchyOutcome o = run_hierarchy(cfg.hierarchy);
  for (const auto& r : o.runs) {
    if (r.additivity_error != 0.0)
      throw InvariantViolation("hierarchy: total loss differs from the level sum by " +
                               format_double(r.additivity_error));
    if (r.decoupling_error != 0.0 || !r.separation_force_unchanged)
      throw InvariantViolation("hierarchy: level-1 quantities depend on bank 2");
  }
  std::vector<std::string> extra = {"epsilon", "lambda"};
  for (const char* lvl : {"_l1", "_l2"})
    for (const char* c : {"L_q", "L_OLS", "L_soft", "V_soft", "V_alg", "S_P", "H_Q"})
      extra.push_back(std::string(c) + lvl);
  CsvWriter log((dir / "epoch_log.csv").string());
  log.header(with(epoch_log_columns(), extra));
  Summary s((dir / "summary.csv").string());
  for (const auto& r : o.runs) {
    double min_v1 = std::numeric_limits<double>::infinity(), min_v2 = min_v1, min_s1 = min_v1;
    for (const auto& a : r.audits) {
      const LossReport& l1 = a.level1.report;
      const LossReport& l2 = a.level2.report;
      log.cell(a.epoch).cell(a.T).cell(a.total_L_q).cell(l1.L_OLS + l2.L_OLS)
          .cell(l1.L_soft + l2.L_soft).cell(l1.V_soft + l2.V_soft).cell(l1.V_alg + l2.V_alg)
          .cell(std::min(a.level1.S_P, a.level2.S_P)).cell(a.level2.H_Q).cell(a.acc).cell(a.nmi)
          .cell(a.ari).cell(r.epsilon).cell(r.lambda);
      level_cells(log, a.level1);
      level_cells(log, a.level2);
      log.end_row();
      min_v1 = std::min(min_v1, l1.V_soft);
      min_v2 = std::min(min_v2, l2.V_soft);
      min_s1 = std::min(min_s1, a.level1.S_P);
    }
    std::ostringstream key;
    key << "@eps=" << r.epsilon << ",lambda=" << r.lambda;
    s.add("min_V_soft_l1" + key.str(), min_v1);
    s.add("min_V_soft_l2" + key.str(), min_v2);
    s.add("min_S_P_l1" + key.str(), min_s1);
    s.add("final_H_Q_l2" + key.str(), r.audits.back().level2.H_Q);
    s.add("final_acc" + key.str(), r.audits.back().acc);
    s.add("additivity_error" + key.str(), r.additivity_error);
    s.add("decoupling_error" + key.str(), r.decoupling_error);
    out << "hierarchy eps=" << r.epsilon << " lambda=" << r.lambda << ": min V1 " << min_v1
        << ", min V2 " << min_v2 << ", final level-2 ACC " << r.audits.back().acc << "\n";
  }
  log.close();
  s.close();
  files.push_back("epoch_log.csv");
  files.push_back("summary.csv");

  CsvWriter vec((dir / "level2_vectors.csv").string());
  const Eigen::Index m2 = o.runs.front().doc_vectors.cols();
  std::vector<std::string> cols = {"setting", "doc", "topic"};
  for (Eigen::Index j = 0; j < m2; ++j) cols.push_back("z" + std::to_string(j));
  vec.header(cols);
  for (std::size_t i = 0; i < o.runs.size(); ++i) {
    const Matrix& Z = o.runs[i].doc_vectors;
    for (Eigen::Index d = 0; d < Z.rows(); ++d) {
      vec.cell(i).cell(static_cast<long long>(d)).cell(o.runs[i].topics[static_cast<std::size_t>(d)]);
      for (Eigen::Index j = 0; j < m2; ++j) vec.cell(Z(d, j));
      vec.end_row();
    }
  }
  vec.close();
  files.push_back("level2_vectors.csv");
}

int run_gradcheck_out(const ExperimentConfig& cfg, const fs::path& dir,
                      std::vector<std::string>& files, std::ostream& out) {
  const auto entries = run_gradcheck(cfg.gradcheck);
  CsvWriter w((dir / "gradcheck.csv").string());
  w.header({"gradient", "instances", "max_rel_error", "tolerance", "passed"});
  int code = 0;
  for (const auto& e : entries) {
    w.cell(e.name).cell(e.instances).cell(e.max_rel_error).cell(e.tolerance).cell(e.passed() ? 1 : 0);
    w.end_row();
    out << std::left << std::setw(34) << e.name << std::scientific << std::setprecision(3)
        << e.max_rel_error << (e.passed() ? "  ok" : "  FAIL") << std::defaultfloat << "\n";
    if (e.max_rel_error > 1e-4 || !e.passed()) code = 2;
  }
  w.close();
  files.push_back("gradcheck.csv");
  return code;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& out,
                         std::ostream& err) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create output directory " + out_dir.string() + ": " + ec.message());
  kernels::set_threads(cfg.threads);

  RunResult res;
  const std::string started = utc_timestamp();
  try {
    switch (cfg.kind) {
      case ExperimentKind::Debris: run_debris_out(cfg, out_dir, res.files, out); break;
      case ExperimentKind::Ablation: run_ablation_out(cfg, out_dir, res.files, out); break;
      case ExperimentKind::Vq: run_vq_out(cfg, out_dir, res.files, out); break;
      case ExperimentKind::Hierarchy: run_hierarchy_out(cfg, out_dir, res.files, out); break;
      case ExperimentKind::Gradcheck:
        res.exit_code = run_gradcheck_out(cfg, out_dir, res.files, out);
        if (res.exit_code != 0) res.error = "gradient check above tolerance";
        break;
    }
  } catch (const InvariantViolation& e) {
    res.exit_code = 2;
    res.error = e.what();
    err << "invariant violation: " << e.what() << "\n";
  }

  json manifest;
  manifest["config"] = json::parse(config_to_json(cfg));
  manifest["version"] = kVersion;
  manifest["seed"] = cfg.seed;
  manifest["started_at"] = started;
  manifest["finished_at"] = utc_timestamp();
  manifest["exit_code"] = res.exit_code;
  if (!res.error.empty()) manifest["error"] = res.error;
  json outputs = json::array();
  for (const auto& f : res.files)
    outputs.push_back({{"file", f}, {"sha256", sha256_file(out_dir / f)},
                       {"bytes", static_cast<std::uintmax_t>(fs::file_size(out_dir / f))}});
  manifest["outputs"] = outputs;
  std::ofstream m(out_dir / "manifest.json");
  if (!m) throw Error("cannot write manifest in " + out_dir.string());
  m << manifest.dump(2) << "\n";
  return res;
}

}  // namespace ddcl
