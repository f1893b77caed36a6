// cfan: batch CLI for the ECG time/frequency classification study.
// Subcommands: synth (demo corpus), prepare (WFDB -> segment cache),
// crossval (k-fold study with resume), report (merge studies into tables).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <boost/program_options.hpp>

#include "cfan/dataset.hpp"
#include "cfan/models.hpp"
#include "cfan/study.hpp"
#include "cfan/synth.hpp"

namespace po = boost::program_options;
using cfan::dataset::Task;

namespace {

void print_usage() {
  std::printf(
      "usage: cfan <command> [options]\n"
      "\n"
      "commands:\n"
      "  synth     write a small deterministic synthetic WFDB corpus (demo/testing)\n"
      "  prepare   ingest a task's WFDB records into a segment cache + report\n"
      "  crossval  run or resume a k-fold cross-validation study\n"
      "  report    merge completed studies into consolidated tables\n"
      "\n"
      "run `cfan <command> --help` for that command's options.\n");
}

bool want_help(const po::variables_map& vm, const po::options_description& desc,
               const char* command) {
  if (!vm.count("help")) return false;
  std::cout << "usage: cfan " << command << " [options]\n" << desc << "\n";
  return true;
}

int run_synth(const std::vector<std::string>& args) {
  po::options_description desc("synth options");
  desc.add_options()                                                      //
      ("help,h", "show this help")                                        //
      ("out", po::value<std::string>()->required(), "corpus directory")   //
      ("seed", po::value<uint64_t>()->default_value(1), "generator seed")  //
      ("config", po::value<std::string>(), "config file (flags win)");
  po::variables_map vm;
  po::store(po::command_line_parser(args).options(desc).run(), vm);
  if (want_help(vm, desc, "synth")) return 0;
  po::notify(vm);

  const std::filesystem::path out = vm["out"].as<std::string>();
  cfan::synth::make_all(out, vm["seed"].as<uint64_t>());
  for (const char* task : {"mitbih", "ecgid", "apnea"}) {
    size_t headers = 0;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(out / task))
      if (entry.is_regular_file() && entry.path().extension() == ".hea") ++headers;
    std::printf("[synth] %s: %zu records under %s\n", task, headers,
                (out / task).string().c_str());
  }
  return 0;
}

int run_prepare(const std::vector<std::string>& args) {
  po::options_description desc("prepare options");
  desc.add_options()                                                          //
      ("help,h", "show this help")                                            //
      ("task", po::value<std::string>()->required(), "mitbih|ecgid|apnea")    //
      ("data-dir", po::value<std::string>()->required(), "WFDB record dir")   //
      ("out", po::value<std::string>()->required(), "study output directory")  //
      ("config", po::value<std::string>(), "config file (flags win)");
  po::variables_map vm;
  po::store(po::command_line_parser(args).options(desc).run(), vm);
  if (want_help(vm, desc, "prepare")) return 0;
  if (vm.count("config")) {
    const std::string path = vm["config"].as<std::string>();
    std::ifstream in(path);
    if (!in) throw cfan::Error("cannot open config file: " + path);
    po::store(po::parse_config_file(in, desc), vm);
  }
  po::notify(vm);

  const Task task = cfan::dataset::task_from_name(vm["task"].as<std::string>());
  const auto outcome = cfan::study::cmd_prepare(task, vm["data-dir"].as<std::string>(),
                                                vm["out"].as<std::string>());

  std::printf("[prepare] records: %ld\n", outcome.report.records);
  std::printf("[prepare] segments: %ld over %d classes\n", outcome.total, outcome.n_classes);
  std::string counts;
  for (long c : outcome.report.class_counts) {
    if (!counts.empty()) counts += '/';
    counts += std::to_string(c);
  }
  std::printf("[prepare] class counts: %s\n", counts.c_str());
  if (outcome.report.skipped_boundary)
    std::printf("[prepare] skipped (boundary): %ld\n", outcome.report.skipped_boundary);
  if (outcome.report.dropped_cycles)
    std::printf("[prepare] dropped cycles: %ld\n", outcome.report.dropped_cycles);
  if (outcome.report.skipped_minutes)
    std::printf("[prepare] skipped minutes: %ld\n", outcome.report.skipped_minutes);
  for (const auto& w : outcome.report.warnings)
    std::printf("[prepare] warning: %s\n", w.c_str());
  std::printf("[prepare] %s\n", outcome.verdict.c_str());
  std::printf("[prepare] gate: %s\n", outcome.counts_ok ? "PASS" : "FAIL");
  return outcome.counts_ok ? 0 : 1;
}

int run_crossval(const std::vector<std::string>& args) {
  po::options_description desc("crossval options");
  desc.add_options()                                                            //
      ("help,h", "show this help")                                              //
      ("task", po::value<std::string>()->required(), "mitbih|ecgid|apnea")      //
      ("out", po::value<std::string>()->required(), "study output directory")   //
      ("arch", po::value<std::vector<std::string>>(),
       "architecture, repeatable: cnn1d|fft1d|fan|cfan (default: all)")         //
      ("folds", po::value<int>()->default_value(0), "fold count (0 = task default)")  //
      ("seed", po::value<uint64_t>()->default_value(1), "study seed")           //
      ("epochs", po::value<int>()->default_value(-1), "max epochs override")    //
      ("patience", po::value<int>()->default_value(-1), "early-stop patience override")  //
      ("batch-size", po::value<int>()->default_value(-1), "batch size override")  //
      ("jobs", po::value<int>()->default_value(1), "concurrent fold trainings")  //
      ("config", po::value<std::string>(), "config file (flags win)");
  po::variables_map vm;
  po::store(po::command_line_parser(args).options(desc).run(), vm);
  if (want_help(vm, desc, "crossval")) return 0;
  if (vm.count("config")) {
    const std::string path = vm["config"].as<std::string>();
    std::ifstream in(path);
    if (!in) throw cfan::Error("cannot open config file: " + path);
    po::store(po::parse_config_file(in, desc), vm);
  }
  po::notify(vm);

  cfan::study::StudyConfig config;
  config.task = cfan::dataset::task_from_name(vm["task"].as<std::string>());
  config.out_dir = vm["out"].as<std::string>();
  if (vm.count("arch"))
    for (const auto& name : vm["arch"].as<std::vector<std::string>>())
      config.archs.push_back(cfan::models::arch_from_name(name));
  config.folds = vm["folds"].as<int>();
  config.seed = vm["seed"].as<uint64_t>();
  config.epochs = vm["epochs"].as<int>();
  config.patience = vm["patience"].as<int>();
  config.batch_size = vm["batch-size"].as<int>();
  config.jobs = vm["jobs"].as<int>();

  const auto result = cfan::study::cmd_crossval(config);
  std::printf("[crossval] wrote %s\n", (result.dir / "summary.csv").string().c_str());
  for (const auto& row : result.summary)
    std::printf("[crossval] %-6s auc %.4f +/- %.4f  acc %.4f +/- %.4f\n", row.arch.c_str(),
                row.auc_mean, row.auc_std, row.acc_mean, row.acc_std);
  return 0;
}

int run_report(const std::vector<std::string>& args) {
  po::options_description desc("report options");
  desc.add_options()                                                           //
      ("help,h", "show this help")                                             //
      ("out", po::value<std::string>()->required(), "study output directory")  //
      ("config", po::value<std::string>(), "config file (flags win)");
  po::variables_map vm;
  po::store(po::command_line_parser(args).options(desc).run(), vm);
  if (want_help(vm, desc, "report")) return 0;
  po::notify(vm);

  const auto result = cfan::study::cmd_report(vm["out"].as<std::string>());
  std::fputs(result.text.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    print_usage();
    return 1;
  }
  const std::string command = argv[1];
  const std::vector<std::string> args(argv + 2, argv + argc);
  try {
    if (command == "synth") return run_synth(args);
    if (command == "prepare") return run_prepare(args);
    if (command == "crossval") return run_crossval(args);
    if (command == "report") return run_report(args);
    if (command == "--help" || command == "-h" || command == "help") {
      print_usage();
      return 0;
    }
    std::fprintf(stderr, "error: unknown command '%s'\n\n", command.c_str());
    print_usage();
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
