#pragma once

#include <string>

#include "config.hpp"

namespace rfbm::cli {

// Exit statuses.
inline constexpr int kExitPass = 0;
inline constexpr int kExitGateFailure = 1;
inline constexpr int kExitUsage = 2;

int cmd_kernel_check(const RunConfig& config);
int cmd_simulate(const RunConfig& config);
/// which: chen, shuffle or both. An empty stack_file rebuilds the stack from
/// the config, which reproduces what simulate writes.
int cmd_verify(const RunConfig& config, const std::string& which, const std::string& stack_file);
int cmd_scaling(const RunConfig& config);
int cmd_holder(const RunConfig& config);
int cmd_ito(const RunConfig& config);

/// what: shuffles (a, b), compositions (n, k) or valleys (n, j). Tuples are
/// comma separated and 1-based. Prints a JSON array.
int cmd_enumerate(const std::string& what, const std::string& a, const std::string& b, int n, int k, int j);

}  // namespace rfbm::cli
