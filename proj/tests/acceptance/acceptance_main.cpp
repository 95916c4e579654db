// Acceptance gate: one PASS/FAIL line per criterion.
//
//   sflab_acceptance                  criteria 1-8 and 11 (minutes)
//   sflab_acceptance --criterion 9    a single criterion (repeatable)
//   sflab_acceptance --all            every criterion, including the training runs

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "criteria.hpp"

namespace acc = sflab::acceptance;

int main(int argc, char** argv) {
  CLI::App app{"sflab acceptance criteria"};
  std::vector<int> selected;
  bool all = false, verbose = false;
  std::string work_dir = (std::filesystem::temp_directory_path() / "sflab_acceptance").string();
  app.add_option("--criterion", selected, "Criterion number (repeatable)")->check(CLI::Range(1, 11));
  app.add_flag("--all", all, "Run all eleven criteria");
  app.add_option("--work-dir", work_dir, "Directory for training runs (completed seeds are reused)");
  app.add_flag("-v,--verbose", verbose, "Log training progress");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<int, std::function<acc::Outcome(const acc::Context&)>>> criteria{
      {1, acc::gradient_correctness}, {2, acc::sf_bellman_oracle},   {3, acc::gradient_isolation},
      {4, acc::reward_decomposition}, {5, acc::controller_fidelity}, {6, acc::cw_dynamics},
      {7, acc::structural_reduction}, {8, acc::metrics_pipeline},    {9, acc::smoke_training_lander},
      {10, acc::directional_inspection}, {11, acc::determinism}};
  std::set<int> run(selected.begin(), selected.end());
  if (run.empty()) run = all ? std::set<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11} : std::set<int>{1, 2, 3, 4, 5, 6, 7, 8, 11};

  const acc::Context ctx{work_dir, verbose};
  std::filesystem::create_directories(ctx.work_dir);
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    if (!run.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    acc::Outcome out;
    try {
      out = fn(ctx);
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << id << ": " << (out.pass ? "PASS" : "FAIL") << "  " << out.detail << "  ["
              << static_cast<int>(secs + 0.5) << " s]" << std::endl;
    if (!out.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
