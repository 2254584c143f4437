// Command-line driver: expand, simulate, verify, certify, spectrum.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nsexp/pipeline.hpp"

namespace {

struct Common {
    std::string scenario;
    std::string out;
    std::string expansion_dir;
};

nsexp::Pipeline make_pipeline(const Common& c) {
    nsexp::Scenario sc = nsexp::load_scenario(c.scenario);
    const std::string out = c.out.empty() ? sc.output_dir : c.out;
    nsexp::Pipeline p(std::move(sc), out);
    if (!c.expansion_dir.empty()) p.override_expansion(nsexp::io::read_expansion_dir(c.expansion_dir));
    return p;
}

int report(nsexp::ExitCode code, const nsexp::Pipeline& p, const char* stage) {
    std::cout << stage << ": " << p.scenario().name << " -> " << p.dir().string() << " (exit " << static_cast<int>(code)
              << ")\n";
    return static_cast<int>(code);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asymptotic expansions of decaying Navier-Stokes flows on the periodic box"};
    app.require_subcommand(1);

    Common c;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", c.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", c.out, "Output root (overrides the scenario's output_dir)");
    };
    auto* expand = app.add_subcommand("expand", "Build q_1..q_N and write per-level polynomial documents");
    add_common(expand);
    auto* simulate = app.add_subcommand("simulate", "Integrate the truncated Galerkin system and write the trajectory");
    add_common(simulate);
    auto* verify = app.add_subcommand("verify", "Fit remainder decay rates against the expansion");
    add_common(verify);
    verify->add_option("--expansion-dir", c.expansion_dir, "Use q_<n>.json documents from this directory")
        ->check(CLI::ExistingDirectory);
    auto* certify = app.add_subcommand("certify", "Check small-data decay certificates");
    add_common(certify);
    long long nmax = 0;
    auto* spectrum = app.add_subcommand("spectrum", "Print the Stokes eigenvalues up to nmax");
    spectrum->add_option("--nmax", nmax, "Largest integer to test")->required()->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*spectrum) {
            for (auto n : nsexp::eigenvalues_up_to(nmax)) std::cout << n << "\n";
            return 0;
        }
        auto p = make_pipeline(c);
        if (*expand) return report(p.run_expand(), p, "expand");
        if (*simulate) return report(p.run_simulate(), p, "simulate");
        if (*verify) return report(p.run_verify(), p, "verify");
        if (*certify) return report(p.run_certify(), p, "certify");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
