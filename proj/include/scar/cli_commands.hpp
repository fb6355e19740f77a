#pragma once

#include "scar/config.hpp"

#include <cstdint>
#include <string>

namespace scar {

// Subcommand bodies shared by the binary and the tests. Each writes its
// outputs under out_dir and throws on invalid input.

void run_collect(const Config& config, std::uint64_t seed, const std::string& out_dir);
void run_cluster(const Config& config, std::uint64_t seed, const std::string& out_dir);
void run_train_rbfn(const Config& config, std::uint64_t seed, const std::string& out_dir);
void run_sweep(const Config& config, std::uint64_t seed, const std::string& out_dir);
void run_train_rl(const Config& config, std::uint64_t seed, const std::string& out_dir);
void run_evaluate(const Config& config, std::uint64_t seed, const std::string& out_dir);
void run_report(const Config& config, std::uint64_t seed, const std::string& out_dir);

} // namespace scar
