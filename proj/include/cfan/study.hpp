#pragma once
// Study orchestration behind the CLI: dataset preparation with count gates,
// resumable k-fold cross-validation over architectures, and report merging.
// Every run directory carries a manifest (config, seeds, code version,
// per-fold status) sufficient to resume or exactly reproduce it.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfan/dataset.hpp"
#include "cfan/eval.hpp"
#include "cfan/models.hpp"
#include "cfan/svg.hpp"
#include "cfan/util.hpp"

namespace cfan::study {

inline constexpr const char* kCodeVersion = "0.1.0";

namespace fs = std::filesystem;
using nlohmann::json;

// ---- configuration -----------------------------------------------------------------

inline int default_folds(dataset::Task t) { return t == dataset::Task::ecgid ? 4 : 10; }

struct StudyConfig {
  dataset::Task task = dataset::Task::mitbih;
  std::vector<models::Arch> archs;  // empty = all four
  int folds = 0;                    // 0 = task default (10, or 4 for ecgid)
  uint64_t seed = 1;
  fs::path out_dir;
  // TrainConfig overrides; negative = keep the task default
  int epochs = -1;
  int patience = -1;
  int batch_size = -1;
  int jobs = 1;

  std::vector<models::Arch> resolved_archs() const {
    if (!archs.empty()) return archs;
    return {std::begin(models::kAllArchs), std::end(models::kAllArchs)};
  }
  int resolved_folds() const { return folds > 0 ? folds : default_folds(task); }
};

namespace detail {

inline fs::path task_dir(const fs::path& out_dir, dataset::Task task) {
  return out_dir / dataset::task_name(task);
}

inline std::string fold_tag(models::Arch arch, int fold) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s_fold%02d", models::arch_name(arch), fold);
  return buf;
}

// Deterministic per-(arch,fold) seed lineage from the study seed.
inline uint64_t run_seed(uint64_t study_seed, models::Arch arch, int fold) {
  return mix_seed(study_seed, mix_seed(uint64_t(arch) + 1, uint64_t(fold) + 1));
}

}  // namespace detail

// ---- prepare -----------------------------------------------------------------------

struct PrepareOutcome {
  dataset::PrepareReport report;
  long total = 0;
  int n_classes = 0;
  bool counts_ok = false;
  std::string verdict;  // human-readable gate explanation
};

namespace detail {

inline std::string expected_records(dataset::Task task) {
  switch (task) {
    case dataset::Task::mitbih: {
      static const int ids[] = {100, 101, 102, 103, 104, 105, 106, 107, 108, 109, 111, 112,
                                113, 114, 115, 116, 117, 118, 119, 121, 122, 123, 124, 200,
                                201, 202, 203, 205, 207, 208, 209, 210, 212, 213, 214, 215,
                                217, 219, 220, 221, 222, 223, 228, 230, 231, 232, 233, 234};
      std::string s;
      for (int id : ids) {
        if (!s.empty()) s += ' ';
        s += std::to_string(id);
      }
      return s;
    }
    case dataset::Task::ecgid:
      return "Person_01 .. Person_90 (each with rec_N.hea/.dat)";
    case dataset::Task::apnea:
      return "a01 .. a20, b01 .. b05, c01 .. c10 (each with .hea/.dat/.apn)";
  }
  return "";
}

// Gate the ingestion counts against the study's published targets.
inline void apply_count_gate(dataset::Task task, PrepareOutcome& out) {
  char buf[256];
  switch (task) {
    case dataset::Task::mitbih: {
      const std::vector<long> target = {90593, 2781, 7235, 802, 8040};
      const bool exact = out.report.class_counts == target;
      out.counts_ok = exact && out.total == 109451;
      std::snprintf(buf, sizeof buf,
                    "mitbih gate: total %ld (target exactly 109451), per-class %s", out.total,
                    exact ? "match 90593/2781/7235/802/8040"
                          : "do NOT match 90593/2781/7235/802/8040");
      break;
    }
    case dataset::Task::ecgid: {
      const double tol = 0.01 * 2456.0;
      const bool total_ok = std::abs(double(out.total) - 2456.0) <= tol;
      out.counts_ok = total_ok && out.n_classes == 90;
      std::snprintf(buf, sizeof buf,
                    "ecgid gate: total %ld (target 2456 +/- 1%%), classes %d (target exactly 90)",
                    out.total, out.n_classes);
      break;
    }
    case dataset::Task::apnea: {
      const double tol = 0.02 * 15880.0;
      const bool total_ok = std::abs(double(out.total) - 15880.0) <= tol;
      const long apneic =
          out.report.class_counts.size() > 1 ? out.report.class_counts[1] : 0;
      const double frac = out.total > 0 ? double(apneic) / double(out.total) : 0.0;
      const double target_frac = 5925.0 / 15880.0;
      const bool frac_ok = std::abs(frac - target_frac) <= 0.02;
      out.counts_ok = total_ok && frac_ok;
      std::snprintf(buf, sizeof buf,
                    "apnea gate: total %ld (target 15880 +/- 2%%), apnea fraction %.4f "
                    "(target %.4f +/- 0.02)",
                    out.total, frac, target_frac);
      break;
    }
  }
  out.verdict = buf;
}

inline json report_to_json(dataset::Task task, const PrepareOutcome& out) {
  json j;
  j["task"] = dataset::task_name(task);
  j["code_version"] = kCodeVersion;
  j["records"] = out.report.records;
  j["total_segments"] = out.total;
  j["n_classes"] = out.n_classes;
  j["class_counts"] = out.report.class_counts;
  j["skipped_boundary"] = out.report.skipped_boundary;
  j["dropped_cycles"] = out.report.dropped_cycles;
  j["skipped_minutes"] = out.report.skipped_minutes;
  json unmapped = json::object();
  for (const auto& [symbol, count] : out.report.unmapped_symbols)
    unmapped[std::string(1, symbol)] = count;
  j["unmapped_symbols"] = unmapped;
  j["warnings"] = out.report.warnings;
  j["counts_ok"] = out.counts_ok;
  j["gate"] = out.verdict;
  return j;
}

}  // namespace detail

// Ingest a task's WFDB records, write the segment cache and a JSON ingestion
// report under out_dir/<task>/, and gate the counts against the study's
// targets. The cache and report are written even when the gate fails, so
// downstream commands can still run on non-reference corpora; the caller
// should exit nonzero when counts_ok is false.
inline PrepareOutcome cmd_prepare(dataset::Task task, const fs::path& data_dir,
                                  const fs::path& out_dir) {
  dataset::Prepared prepared;
  try {
    prepared = dataset::prepare_task(task, data_dir);
  } catch (const Error& e) {
    throw Error(std::string(e.what()) +
                "\nexpected records for this task: " + detail::expected_records(task));
  }

  PrepareOutcome out;
  out.report = prepared.report;
  out.total = long(prepared.set.size());
  out.n_classes = prepared.set.n_classes;
  detail::apply_count_gate(task, out);

  const fs::path dir = detail::task_dir(out_dir, task);
  fs::create_directories(dir);
  dataset::save_cache(prepared.set, dir / "cache.cfseg");
  write_file_atomic(dir / "prepare_report.json",
                    detail::report_to_json(task, out).dump(2) + "\n");
  return out;
}

// ---- cross-validation --------------------------------------------------------------

struct FoldOutcome {
  models::Arch arch = models::Arch::cnn1d;
  int fold = 0;
  double auc = 0.0;
  double acc = 0.0;
  size_t n_test = 0;
  uint64_t model_seed = 0;
  uint64_t train_seed = 0;
  int best_epoch = -1;
  int epochs_run = 0;
  bool resumed = false;  // loaded from the manifest instead of retrained
};

struct CrossvalResult {
  std::vector<FoldOutcome> folds;       // sorted by (arch, fold)
  std::vector<eval::SummaryRow> summary;
  fs::path dir;                         // out_dir/<task>
};

namespace detail {

inline json config_to_json(const StudyConfig& config) {
  json j;
  j["task"] = dataset::task_name(config.task);
  j["folds"] = config.resolved_folds();
  j["seed"] = config.seed;
  j["epochs"] = config.epochs;
  j["patience"] = config.patience;
  j["batch_size"] = config.batch_size;
  return j;
}

struct Manifest {
  json root;
  fs::path path;
  std::mutex mutex;

  void save_locked() { write_file_atomic(path, root.dump(2) + "\n"); }
};

// Score one arch x fold cell: build, train, predict, score, write artifacts.
inline FoldOutcome run_fold(const StudyConfig& config, const dataset::SegmentSet& set,
                            const dataset::FoldPlan& plan, models::Arch arch, int fold,
                            const fs::path& dir) {
  const dataset::SplitTriple split = dataset::make_split(plan, fold);

  models::ModelSpec spec = models::default_model_spec(arch, config.task);
  require(set.length == spec.segment_length, "crossval: cache segment length mismatch");
  if (set.n_classes != spec.n_classes) {  // smaller corpora (e.g. demos) shrink the head
    spec.n_classes = set.n_classes;
    spec.layers.back() = models::LayerSpec::make_head(set.n_classes);
  }

  models::TrainConfig tc = models::default_train_config(config.task);
  if (config.epochs > 0) tc.max_epochs = config.epochs;
  if (config.patience > 0) tc.patience = std::min(config.patience, tc.max_epochs);
  tc.patience = std::min(tc.patience, tc.max_epochs);
  if (config.batch_size > 0) tc.batch_size = config.batch_size;

  FoldOutcome out;
  out.arch = arch;
  out.fold = fold;
  const uint64_t base = run_seed(config.seed, arch, fold);
  out.model_seed = mix_seed(base, 1);
  out.train_seed = mix_seed(base, 2);
  tc.seed = out.train_seed;

  models::Model model = models::build_model(spec, out.model_seed);
  const models::TrainHistory history =
      models::train(model, models::subset_view(set, split.train),
                    models::subset_view(set, split.validation), tc);
  out.best_epoch = history.best_epoch;
  out.epochs_run = history.epochs_run();

  const models::DataView test = models::subset_view(set, split.test);
  const auto probabilities = models::predict(model, test);
  std::vector<int> labels(test.size());
  for (size_t i = 0; i < test.size(); ++i) labels[i] = test.label(i);
  out.n_test = test.size();

  std::vector<svg::Series> curves;
  if (config.task == dataset::Task::apnea) {
    // binary task: positive-class probability is the score, accuracy at EER
    std::vector<double> scores(test.size());
    for (size_t i = 0; i < test.size(); ++i) scores[i] = probabilities[i][1];
    out.auc = eval::roc_auc_binary(scores, labels);
    out.acc = eval::eer_accuracy(scores, labels);
    svg::Series s;
    char label[64];
    std::snprintf(label, sizeof label, "apnea (AUC=%.3f)", out.auc);
    s.label = label;
    for (auto [fpr, tpr] : eval::roc_curve(scores, labels)) {
      s.x.push_back(fpr);
      s.y.push_back(tpr);
    }
    curves.push_back(std::move(s));
  } else {
    out.auc = eval::macro_ovr_auc(probabilities, labels);
    out.acc = eval::accuracy_argmax(probabilities, labels);
    // one-vs-rest curves for the first few classes keep the plot readable
    const int n_curves = std::min(set.n_classes, 8);
    for (int c = 0; c < n_curves; ++c) {
      std::vector<double> scores(test.size());
      std::vector<int> indicator(test.size());
      int present = 0;
      for (size_t i = 0; i < test.size(); ++i) {
        scores[i] = probabilities[i][size_t(c)];
        indicator[i] = labels[i] == c ? 1 : 0;
        present += indicator[i];
      }
      if (present == 0 || present == int(test.size())) continue;
      svg::Series s;
      char label[64];
      std::snprintf(label, sizeof label, "class %d (AUC=%.3f)", c,
                    eval::roc_auc_binary(scores, indicator));
      s.label = label;
      for (auto [fpr, tpr] : eval::roc_curve(scores, indicator)) {
        s.x.push_back(fpr);
        s.y.push_back(tpr);
      }
      curves.push_back(std::move(s));
    }
  }

  // per-fold artifacts, each written atomically
  const std::string tag = fold_tag(arch, fold);
  write_file_atomic(dir / "history" / (tag + ".csv"), models::history_to_csv(history));
  tensor::save_checkpoint(model.store, dir / "checkpoints" / (tag + ".ckpt"));
  eval::FoldReport row{dataset::task_name(config.task), models::arch_name(arch), fold,
                       out.auc, out.acc, out.n_test};
  write_file_atomic(dir / "folds" / (tag + ".csv"),
                    eval::fold_reports_csv(std::span(&row, 1)));
  char title[96];
  std::snprintf(title, sizeof title, "ROC %s %s fold %d", dataset::task_name(config.task),
                models::arch_name(arch), fold);
  write_file_atomic(dir / "plots" / ("roc_" + tag + ".svg"), svg::roc_chart(title, curves));
  return out;
}

}  // namespace detail

// Run (or resume) the cross-validation study for config over the cache written
// by cmd_prepare. Completed folds recorded in the manifest are never retrained.
inline CrossvalResult cmd_crossval(const StudyConfig& config, bool quiet = false) {
  const fs::path dir = detail::task_dir(config.out_dir, config.task);
  const fs::path cache_path = dir / "cache.cfseg";
  if (!fs::exists(cache_path))
    fail("no segment cache at %s (run `prepare` first)", cache_path.string().c_str());
  const dataset::SegmentSet set = dataset::load_cache(cache_path);
  require(set.task == config.task, "crossval: cache belongs to a different task");

  const int k = config.resolved_folds();
  const std::vector<models::Arch> archs = config.resolved_archs();
  for (const auto& place : {"history", "checkpoints", "folds", "plots"})
    fs::create_directories(dir / place);

  // manifest: load-or-create, refuse to resume under a different config
  detail::Manifest manifest;
  manifest.path = dir / "manifest.json";
  const json config_json = detail::config_to_json(config);
  if (fs::exists(manifest.path)) {
    manifest.root = json::parse(read_file(manifest.path));
    if (manifest.root.value("config", json::object()) != config_json)
      fail("manifest at %s was written with a different config; use a fresh --out",
           manifest.path.string().c_str());
  } else {
    manifest.root["code_version"] = kCodeVersion;
    manifest.root["task"] = dataset::task_name(config.task);
    manifest.root["config"] = config_json;
    manifest.root["folds"] = json::object();
  }

  const uint64_t plan_seed = mix_seed(config.seed, 0x101);
  manifest.root["fold_plan_seed"] = plan_seed;
  {
    std::lock_guard lock(manifest.mutex);
    manifest.save_locked();
  }
  const dataset::FoldPlan plan = dataset::stratified_kfold(set.labels, k, plan_seed);

  // work list: every (arch, fold) not already recorded as done
  std::vector<FoldOutcome> outcomes;
  std::vector<std::pair<models::Arch, int>> todo;
  for (models::Arch arch : archs)
    for (int fold = 0; fold < k; ++fold) {
      const std::string tag = detail::fold_tag(arch, fold);
      const json& entry = manifest.root["folds"].value(tag, json::object());
      if (entry.value("status", "") == "done" &&
          fs::exists(dir / "folds" / (tag + ".csv"))) {
        FoldOutcome out;
        out.arch = arch;
        out.fold = fold;
        out.auc = entry.at("auc").get<double>();
        out.acc = entry.at("acc").get<double>();
        out.n_test = entry.at("n_test").get<size_t>();
        out.model_seed = entry.at("model_seed").get<uint64_t>();
        out.train_seed = entry.at("train_seed").get<uint64_t>();
        out.best_epoch = entry.value("best_epoch", -1);
        out.epochs_run = entry.value("epochs_run", 0);
        out.resumed = true;
        outcomes.push_back(out);
        if (!quiet)
          std::printf("[crossval] %s: already done, skipping\n", tag.c_str());
      } else {
        todo.emplace_back(arch, fold);
      }
    }

  std::mutex outcome_mutex;
  std::exception_ptr first_error;
  size_t next = 0;
  auto worker = [&] {
    for (;;) {
      models::Arch arch;
      int fold;
      {
        std::lock_guard lock(outcome_mutex);
        if (next >= todo.size() || first_error) return;
        std::tie(arch, fold) = todo[next++];
      }
      try {
        FoldOutcome out = detail::run_fold(config, set, plan, arch, fold, dir);
        const std::string tag = detail::fold_tag(arch, fold);
        {
          std::lock_guard lock(manifest.mutex);
          json entry;
          entry["status"] = "done";
          entry["auc"] = out.auc;
          entry["acc"] = out.acc;
          entry["n_test"] = out.n_test;
          entry["model_seed"] = out.model_seed;
          entry["train_seed"] = out.train_seed;
          entry["best_epoch"] = out.best_epoch;
          entry["epochs_run"] = out.epochs_run;
          manifest.root["folds"][tag] = entry;
          manifest.save_locked();
        }
        {
          std::lock_guard lock(outcome_mutex);
          outcomes.push_back(out);
        }
        if (!quiet)
          std::printf("[crossval] %s: auc %.4f acc %.4f (%d epochs, best %d)\n", tag.c_str(),
                      out.auc, out.acc, out.epochs_run, out.best_epoch + 1);
      } catch (...) {
        std::lock_guard lock(outcome_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int jobs = std::max(1, std::min(config.jobs, int(todo.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();  // barrier before the summary step
  }
  if (first_error) std::rethrow_exception(first_error);

  // summary step: deterministic ordering regardless of scheduling
  std::sort(outcomes.begin(), outcomes.end(), [](const FoldOutcome& a, const FoldOutcome& b) {
    return a.arch != b.arch ? a.arch < b.arch : a.fold < b.fold;
  });

  CrossvalResult result;
  result.folds = outcomes;
  result.dir = dir;

  std::vector<eval::FoldReport> rows;
  std::map<models::Arch, std::vector<double>> acc_by_arch, auc_by_arch;
  for (const FoldOutcome& out : outcomes) {
    rows.push_back({dataset::task_name(config.task), models::arch_name(out.arch), out.fold,
                    out.auc, out.acc, out.n_test});
    acc_by_arch[out.arch].push_back(out.acc);
    auc_by_arch[out.arch].push_back(out.auc);
  }
  write_file_atomic(dir / "folds.csv", eval::fold_reports_csv(rows));

  std::vector<std::string> arch_names;
  std::vector<double> acc_means, acc_stds;
  for (const auto& [arch, accs] : acc_by_arch) {
    const eval::MeanStd acc = eval::aggregate(accs);
    const eval::MeanStd auc = eval::aggregate(auc_by_arch.at(arch));
    result.summary.push_back({dataset::task_name(config.task), models::arch_name(arch),
                              auc.mean, auc.std, acc.mean, acc.std});
    arch_names.push_back(models::arch_name(arch));
    acc_means.push_back(acc.mean);
    acc_stds.push_back(acc.std);
  }
  write_file_atomic(dir / "summary.csv", eval::summary_csv(result.summary));

  std::vector<std::vector<double>> p(arch_names.size(),
                                     std::vector<double>(arch_names.size(), 0.5));
  size_t i = 0;
  for (const auto& [arch_a, accs_a] : acc_by_arch) {
    size_t j = 0;
    for (const auto& [arch_b, accs_b] : acc_by_arch) {
      p[i][j] = eval::t_test_one_tailed(accs_a, accs_b);
      ++j;
    }
    ++i;
  }
  write_file_atomic(dir / "p_values.csv", eval::p_value_matrix_csv(arch_names, p));

  char title[96];
  std::snprintf(title, sizeof title, "accuracy by architecture (%s, %d folds)",
                dataset::task_name(config.task), k);
  write_file_atomic(dir / "plots" / "accuracy_bars.svg",
                    svg::bar_chart(title, "accuracy", arch_names, acc_means, acc_stds));
  return result;
}

// ---- report ------------------------------------------------------------------------

struct ReportResult {
  std::string text;                    // rendered tables
  std::vector<eval::SummaryRow> rows;  // merged, sorted by (task, arch)
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

inline std::vector<eval::SummaryRow> parse_summary_csv(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<eval::SummaryRow> rows;
  size_t start = 0;
  bool header = true;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    if (header) {
      require(line == "task,arch,auc_mean,auc_std,acc_mean,acc_std",
              "unexpected summary CSV header in " + path.string());
      header = false;
      continue;
    }
    const auto fields = split_csv_line(line);
    require(fields.size() == 6, "malformed summary CSV row in " + path.string());
    rows.push_back({fields[0], fields[1], std::stod(fields[2]), std::stod(fields[3]),
                    std::stod(fields[4]), std::stod(fields[5])});
  }
  return rows;
}

}  // namespace detail

// Merge every <out_dir>/*/summary.csv (plus <out_dir>/summary.csv if present)
// into consolidated accuracy/AUC tables with rows = architectures and
// columns = tasks, append any p-value matrices, and write report.txt /
// report.csv back into out_dir.
inline ReportResult cmd_report(const fs::path& out_dir) {
  std::vector<fs::path> summaries;
  if (fs::exists(out_dir / "summary.csv")) summaries.push_back(out_dir / "summary.csv");
  if (fs::is_directory(out_dir))
    for (const auto& entry : fs::directory_iterator(out_dir))
      if (entry.is_directory() && fs::exists(entry.path() / "summary.csv"))
        summaries.push_back(entry.path() / "summary.csv");
  std::sort(summaries.begin(), summaries.end());
  if (summaries.empty())
    fail("no completed studies under %s (no summary.csv found)", out_dir.string().c_str());

  // merge keyed by (task, arch); later studies override earlier ones
  std::map<std::pair<std::string, std::string>, eval::SummaryRow> merged;
  for (const fs::path& path : summaries)
    for (const eval::SummaryRow& row : detail::parse_summary_csv(path))
      merged[{row.task, row.arch}] = row;

  ReportResult result;
  for (const auto& kv : merged) result.rows.push_back(kv.second);

  // fixed task/arch ordering for the tables
  std::vector<std::string> tasks, arch_rows;
  for (dataset::Task t : {dataset::Task::mitbih, dataset::Task::ecgid, dataset::Task::apnea})
    for (const auto& kv : merged)
      if (kv.first.first == dataset::task_name(t)) {
        tasks.push_back(kv.first.first);
        break;
      }
  for (models::Arch a : models::kAllArchs)
    for (const auto& kv : merged)
      if (kv.first.second == models::arch_name(a)) {
        arch_rows.push_back(kv.first.second);
        break;
      }

  auto render_table = [&](const char* caption, auto mean_of, auto std_of) {
    std::string s;
    s += std::string(caption) + "\n";
    char buf[64];
    s += "arch";
    for (const auto& t : tasks) s += "," + t;
    s += "\n";
    for (const auto& a : arch_rows) {
      s += a;
      for (const auto& t : tasks) {
        auto it = merged.find({t, a});
        if (it == merged.end()) {
          s += ",-";
        } else {
          std::snprintf(buf, sizeof buf, ",%.2f +/- %.2f", mean_of(it->second),
                        std_of(it->second));
          s += buf;
        }
      }
      s += "\n";
    }
    return s;
  };

  std::string text;
  text += render_table(
      "== accuracy, percent (mean +/- std across folds) ==",
      [](const eval::SummaryRow& r) { return 100.0 * r.acc_mean; },
      [](const eval::SummaryRow& r) { return 100.0 * r.acc_std; });
  text += "\n";
  text += render_table(
      "== AUC, percent (mean +/- std across folds) ==",
      [](const eval::SummaryRow& r) { return 100.0 * r.auc_mean; },
      [](const eval::SummaryRow& r) { return 100.0 * r.auc_std; });
  for (const auto& t : tasks) {
    const fs::path p_path = out_dir / t / "p_values.csv";
    if (fs::exists(p_path)) {
      text += "\n== one-tailed t-test p-values (" + t + ", row mean > column mean) ==\n";
      text += read_file(p_path);
    }
  }
  result.text = text;

  write_file_atomic(out_dir / "report.txt", text);
  write_file_atomic(out_dir / "report.csv", eval::summary_csv(result.rows));
  return result;
}

}  // namespace cfan::study
