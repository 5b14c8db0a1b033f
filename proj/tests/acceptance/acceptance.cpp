// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any failed. Optional arguments select criterion ids.

#include <cstdlib>
#include <iostream>
#include <string>

#include "activelc/verify.hpp"

int main(int argc, char** argv) {
    namespace v = activelc::verify;
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) ids.push_back(std::stoi(argv[i]));
    v::Options opt;
    int failed = 0;
    const auto results = v::run_all(ids, opt, [](const v::CriterionResult& r) { std::cout << v::format(r) << std::endl; });
    for (const auto& r : results) failed += r.passed ? 0 : 1;
    std::cout << (results.size() - static_cast<std::size_t>(failed)) << "/" << results.size() << " criteria passed\n";
    return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
