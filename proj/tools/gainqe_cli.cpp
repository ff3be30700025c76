#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gainqe/runner.hpp"

namespace {

struct Options {
    std::string scenario;
    std::string out = ".";
    bool strict = false;
    bool lenient = false;
    std::string time_unit;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--scenario", o.scenario, "scenario file (JSON, comments allowed)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "output directory");
    auto* strict = cmd->add_flag("--strict", o.strict, "reject unknown keys (default)");
    auto* lenient = cmd->add_flag("--lenient", o.lenient, "warn about unknown keys instead of failing");
    strict->excludes(lenient);
    cmd->add_option("--time-unit", o.time_unit, "override run.time_unit")
        ->check(CLI::IsMember({"gamma0_nogain", "purcell"}));
}

int execute(const Options& o, std::optional<gainqe::RunMode> mode) {
    using namespace gainqe;
    try {
        Scenario s = load_scenario(o.scenario, o.lenient ? ParseMode::Lenient : ParseMode::Strict, mode);
        if (o.time_unit == "purcell") s.run.time_unit = TimeUnit::Purcell;
        else if (o.time_unit == "gamma0_nogain") s.run.time_unit = TimeUnit::NoGainRate;
        for (const auto& path : run(s, o.out)) std::cout << path.string() << '\n';
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const RegimeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const IntegrationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gain-modified two-emitter master equation: rates, dynamics, steady states and spectra"};
    app.require_subcommand(1);
    Options o;
    std::optional<gainqe::RunMode> mode;

    auto* run = app.add_subcommand("run", "run the mode named in the scenario");
    add_common(run, o);
    run->callback([&] { mode.reset(); });
    for (const char* name : {"rates", "dynamics", "steady", "spectrum", "sweep", "compare"}) {
        auto* cmd = app.add_subcommand(name, std::string("run the scenario in ") + name + " mode");
        add_common(cmd, o);
        cmd->callback([&mode, name] { mode = gainqe::parse_mode(name); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    return execute(o, mode);
}
