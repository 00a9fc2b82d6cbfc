#include <iostream>

#include <CLI11.hpp>

#include "nq/cli.hpp"
#include "nq/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Nehari manifold and fibered Rayleigh quotient toolkit"};
    app.require_subcommand(1, 1);

    std::string spec;
    std::optional<double> lambda;
    std::string lambdas_file, solution, out = ".";
    std::uint64_t seed = 0;
    std::vector<std::string> tols;

    struct Sub {
        const char* name;
        const char* help;
    };
    const Sub subs[] = {{"fiber", "sample r(tu) along a seeded direction"},
                        {"extremal", "compute the four extremal values"},
                        {"solve", "Nehari minimizers at one lambda"},
                        {"sweep", "Nehari minimizers over a lambda list"},
                        {"anchor", "linear matrix check against the eigenvalue oracle"},
                        {"verify", "check a stored solution"}};
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--spec", spec, "problem spec file")->required()->check(CLI::ExistingFile);
        sub->add_option("--lambda", lambda, "lambda value");
        sub->add_option("--seed", seed, "random seed");
        sub->add_option("--out", out, "output directory");
        sub->add_option("--tol", tols, "tolerance override key=value (repeatable)");
        if (std::string(s.name) == "sweep")
            sub->add_option("--lambdas", lambdas_file, "file with lambda values")->check(CLI::ExistingFile);
        if (std::string(s.name) == "verify")
            sub->add_option("--solution", solution, "solution csv")->required()->check(CLI::ExistingFile);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    nq::RunConfig config;
    try {
        config.command = nq::parse_command(app.get_subcommands().front()->get_name());
        config.spec_path = spec;
        config.lambda = lambda;
        config.seed = seed;
        config.output_dir = out;
        if (!lambdas_file.empty()) config.lambdas = nq::parse_lambda_list(nq::read_text_file(lambdas_file));
        if (!solution.empty()) config.solution_path = solution;
        for (const auto& kv : tols) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) nq::fail(nq::ErrorKind::ConfigError, "--tol expects key=value, got " + kv);
            config.tolerances.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
    } catch (const nq::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    return nq::run(config, std::cout, std::cerr);
}
