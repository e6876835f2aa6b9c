#pragma once
// Command-line entry point. Verbs: gen-data, train, eval, rank, grad-check,
// sweep-quantiles, compare. Exit codes: 0 success, 1 usage/config error,
// 2 data error, 3 numeric failure.

#include <string>
#include <vector>

namespace cqe {

int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace cqe
