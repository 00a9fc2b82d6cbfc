#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nq/problem.hpp"

namespace nq {

/// Sections of an INI-style text file: "[name]" headers, "key = value"
/// lines, '#' or ';' comments. Keys before any header live in section "".
using IniSections = std::map<std::string, std::map<std::string, std::string>>;

IniSections parse_ini(const std::string& text);

/// Problem spec from its text form.
///
///     [problem]
///     model = convex_concave_scalar   # or indefinite_scalar, ...
///     p = 2
///     q = 1.5
///     gamma = 4
///     [grid]
///     a = 0
///     b = 1
///     n = 200
///     [weight]
///     kind = constant                 # constant | affine | step | values
///     value = 1
///
/// The general convex-concave model lists its weighted powers as
/// [term.1], [term.2], ... each with gamma and the weight keys. The linear
/// model takes [matrix] with dim and entries (row-major, comma separated) or
/// csv = path relative to the spec file. Throws ConfigError on anything
/// malformed; model validation errors keep their own kinds.
ProblemSpec parse_spec(const std::string& text, const std::filesystem::path& base_dir = {});
ProblemSpec load_spec(const std::filesystem::path& path);

/// Text form of a spec that parse_spec reads back exactly (weights are
/// written nodally, numbers with 17 significant digits).
std::string format_spec(const ProblemSpec& spec);

/// Square matrix from CSV rows.
SymmetricMatrix parse_matrix_csv(const std::string& text);

/// Tolerance and budget overrides accepted by --tol key=value.
struct Tolerances {
    int restarts = 32;
    double stationarity = 1e-10;
    double converged = 1e-7;
    double infinity = 1e12;
    double residual = 1e-7;
    double descent = 1e-12;
    double membership = 1e-8;
    int max_iter = 4000;

    /// Throws ConfigError for unknown keys or non-positive values.
    void set(const std::string& key, const std::string& value);
    std::map<std::string, double> as_map() const;
};

enum class Command { Fiber, Extremal, Solve, Sweep, Anchor, Verify };
Command parse_command(const std::string& name);
const char* to_string(Command c);

struct RunConfig {
    Command command = Command::Extremal;
    std::filesystem::path spec_path;
    std::optional<double> lambda;
    std::vector<double> lambdas;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = ".";
    Tolerances tolerances;
    std::optional<std::filesystem::path> solution_path;  // verify
};

/// λ list: numbers separated by commas, whitespace or newlines.
std::vector<double> parse_lambda_list(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace nq
