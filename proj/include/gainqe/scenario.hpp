#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gainqe/liouvillian.hpp"
#include "gainqe/observables.hpp"
#include "gainqe/qnm_rates.hpp"

namespace gainqe {

enum class ParseMode { Strict, Lenient };  // lenient turns unknown keys into warnings

enum class RunMode { Rates, Dynamics, Steady, Spectrum, Sweep, Compare };
enum class InitialKind { Ground, ExcitedA, ExcitedB, BothExcited, Plus, Minus, Custom };
// NoGainRate: rates and times in units of Gamma(0) = gamma_down_aa at alpha_g = 0.
// Purcell: the raw Gamma_0(omega0) unit of the rate model.
enum class TimeUnit { NoGainRate, Purcell };

// Either an explicit list or `points` values evenly spaced over [start, stop].
struct GridSpec {
    std::vector<double> values;
    double start = 0.0, stop = 0.0;
    std::size_t points = 0;

    static GridSpec linear(double start, double stop, std::size_t points);
    bool is_explicit() const { return !values.empty(); }
    std::vector<double> resolve() const;
};

struct EmitterBlock {
    std::size_t count = 2;
    bool symmetric = true;
    std::vector<double> dipole_scale;  // filled with ones when omitted
};

struct RunBlock {
    RunMode mode = RunMode::Dynamics;
    RunMode sweep_of = RunMode::Dynamics;  // mode repeated by a sweep
    double omega0 = 0.0;                   // eV, qnm scenarios only
    GridSpec t_grid = GridSpec::linear(0.0, 10.0, 1001);
    std::optional<GridSpec> omega_grid;  // eV for rates mode, detuning in the rate unit for spectra
    InitialKind initial_state = InitialKind::Ground;
    CMat initial_matrix;  // when initial_state is Custom
    std::vector<double> alpha_g{0.0};
    double gamma_dephase = 0.001;  // in the rate unit, qnm scenarios only
    std::vector<double> gamma_pump{0.0};
    std::vector<bool> include_cross_pump{true};
    TimeUnit time_unit = TimeUnit::NoGainRate;
    bool negativity = false;
    SpectrumMethod spectrum_method = SpectrumMethod::Resolvent;
    bool detector_weighting = false;
    double energy_unit_eV = 0.0;  // eV per rate unit, needed for detector weighting
    std::string table;            // compare mode, relative to the scenario file
    double compare_tolerance = 1e-6;
    bool parallel = true;
    std::string output;  // file stem, defaults to the scenario name
};

struct Scenario {
    std::string name = "scenario";
    std::optional<QnmModel> qnm;  // already calibrated when anchors were given
    std::optional<RateSet> rates;
    EmitterBlock emitters;
    RunBlock run;
    std::vector<std::string> notes;  // calibration report, echoed into outputs
    std::filesystem::path base_dir;  // directory of the scenario file
};

// One independent run: a point of the alpha_g x pump x cross-pump product.
struct Entry {
    double alpha_g = 0.0;
    double gamma_pump = 0.0;
    bool cross_pump = true;
};

// `mode_override` replaces run.mode before validation (the CLI subcommand).
Scenario parse_scenario(const std::string& text, ParseMode mode = ParseMode::Strict,
                        const std::string& origin = "scenario", std::optional<RunMode> mode_override = std::nullopt);
Scenario load_scenario(const std::filesystem::path& path, ParseMode mode = ParseMode::Strict,
                       std::optional<RunMode> mode_override = std::nullopt);

// Fully resolved scenario as JSON text; parsing it back gives the same run.
std::string resolved_json(const Scenario& s);

std::vector<Entry> entries(const Scenario& s);
// Gamma(0) in Purcell units, or 1 when rates are given directly or the unit is Purcell.
double rate_unit(const Scenario& s);
// Rates for one entry in the scenario's rate unit, dephasing and pump applied.
RateSet entry_rates(const Scenario& s, const Entry& e);
DensityMatrix initial_state(const Scenario& s);

const char* mode_name(RunMode m);
RunMode parse_mode(const std::string& name);

}  // namespace gainqe
