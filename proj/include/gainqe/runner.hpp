#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gainqe/csv.hpp"
#include "gainqe/rate_table.hpp"
#include "gainqe/scenario.hpp"

namespace gainqe {

// Header lines shared by every output: the resolved scenario plus calibration notes.
std::vector<std::string> header_lines(const Scenario& s);

// Per-entry tables, also used directly by tests.
CsvTable rates_table(const Scenario& s, double alpha_g);
CsvTable dynamics_table(const Scenario& s, const Entry& e);
std::vector<double> steady_row(const Scenario& s, const Entry& e);
std::vector<std::string> steady_columns(const Scenario& s);
SpectrumSeries entry_spectrum(const Scenario& s, const Entry& e, std::span<const double> grid);
std::vector<double> spectrum_grid(const Scenario& s);
std::vector<ColumnDeviation> compare_report(const Scenario& s);

// File stem for one entry, e.g. "fig4_alpha0.22".
std::string entry_tag(const Scenario& s, const Entry& e);

// Runs the scenario's mode and writes its files under out_dir; returns the paths written.
std::vector<std::filesystem::path> run(const Scenario& s, const std::filesystem::path& out_dir);

}  // namespace gainqe
