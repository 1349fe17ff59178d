#pragma once

#include <string>
#include <vector>

namespace cpc::cli {

// Runs the `cpc` command line; returns the process exit code. argv[0] is the
// program name.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

// Environment variable holding the endpoint API key unless --api-key-env names another.
inline constexpr const char* kDefaultApiKeyEnv = "CPC_API_KEY";

}  // namespace cpc::cli
