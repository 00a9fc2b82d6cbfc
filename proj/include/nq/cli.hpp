#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>

#include "nq/config.hpp"

namespace nq {

/// 17 significant digits, "inf"/"-inf" for infinities.
std::string csv_number(double v);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t v);

/// Writes through a temporary sibling and renames over the target.
void atomic_write(const std::filesystem::path& path, const std::string& content);

/// Hash of everything that determines a run's results: command, spec text,
/// λ values, seed and tolerances. The output directory is excluded.
std::string config_hash(const RunConfig& config, const std::string& spec_text);

/// Executes one command, writes its artifacts plus manifest.json into the
/// output directory and returns the process exit status: 0 on success,
/// 1 for solve failures (diagnostics still written), 2 for configuration
/// errors.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace nq
