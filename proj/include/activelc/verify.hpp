#pragma once

// Acceptance suite: one check per property the solver must demonstrate.
// Shared by the acceptance test binary and `activelc verify`.

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace activelc::verify {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    double budget_seconds = 0.0;  ///< exceeding it fails the criterion
};

struct Options {
    std::filesystem::path scratch = std::filesystem::temp_directory_path() / "activelc_verify";
    int max_threads = 8;
};

/// Number of criteria (ids 1..count()).
[[nodiscard]] int count();

/// Runs one criterion; exceptions are caught and reported as failures.
[[nodiscard]] CriterionResult run_criterion(int id, const Options& opt = {});

/// Runs the listed ids (all when empty), calling report after each one.
std::vector<CriterionResult> run_all(const std::vector<int>& ids, const Options& opt,
                                     const std::function<void(const CriterionResult&)>& report = {});

/// "[PASS] 5 mass conservation: ... (12.3 s / 120 s)"
[[nodiscard]] std::string format(const CriterionResult& r);

}  // namespace activelc::verify
