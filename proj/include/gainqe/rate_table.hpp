#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gainqe/csv.hpp"
#include "gainqe/qnm_rates.hpp"

namespace gainqe {

// Column schema shared by the rate sweep output and externally supplied tables.
inline constexpr std::array<const char*, 7> kRateColumns = {
    "omega_eV", "gamma_down_aa", "gamma_up_aa", "gamma_down_ab", "gamma_up_ab", "delta_down_ab", "delta_up_ab"};

struct RateTable {
    std::vector<double> omega;
    std::array<std::vector<double>, 6> values;  // kRateColumns[1..6]

    // Linear interpolation; throws outside the tabulated range.
    std::array<double, 6> at(double omega_eV) const;
};

// Rows of the seven-column schema for emitters (0, 1) of the model.
RateTable rate_table_from_model(const QnmModel& model, std::span<const double> omegas, bool parallel = true);
CsvTable to_csv_table(const RateTable& table);
RateTable rate_table_from_csv(const CsvTable& csv, const std::string& source = "table");
RateTable ingest_rate_table(const std::filesystem::path& path);

struct ColumnDeviation {
    std::string column;
    double max_abs = 0.0;
    double max_rel = 0.0;
    double omega_at_max = 0.0;  // where max_rel occurs
    bool flagged = false;       // max_rel > tolerance
};

// Relative deviation of the table from the model, per column, at the tabulated frequencies.
// The relative scale is max(|model|, 1e-12 * column peak) so vanishing columns stay finite.
std::vector<ColumnDeviation> compare_rates(const RateTable& table, const QnmModel& model, double tolerance = 1e-6);

}  // namespace gainqe
