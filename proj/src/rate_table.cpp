#include "gainqe/rate_table.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gainqe/kernels.hpp"

namespace gainqe {

std::array<double, 6> RateTable::at(double omega_eV) const {
    if (omega.empty() || omega_eV < omega.front() || omega_eV > omega.back()) {
        std::ostringstream os;
        os << "omega " << omega_eV << " eV is outside the tabulated range";
        throw ValidationError(os.str());
    }
    auto hi = std::lower_bound(omega.begin(), omega.end(), omega_eV);
    const auto k = static_cast<std::size_t>(hi - omega.begin());
    std::array<double, 6> out{};
    if (*hi == omega_eV) {
        for (std::size_t c = 0; c < 6; ++c) out[c] = values[c][k];
        return out;
    }
    const double w = (omega_eV - omega[k - 1]) / (omega[k] - omega[k - 1]);
    for (std::size_t c = 0; c < 6; ++c) out[c] = (1 - w) * values[c][k - 1] + w * values[c][k];
    return out;
}

RateTable rate_table_from_model(const QnmModel& model, std::span<const double> omegas, bool parallel) {
    if (model.emitter_count() < 2) throw ValidationError("rate table needs at least two emitters");
    const auto sets = parallel ? kernels::rate_sweep_omp(model, omegas) : kernels::rate_sweep_serial(model, omegas);
    RateTable t;
    t.omega.assign(omegas.begin(), omegas.end());
    for (const auto& r : sets) {
        t.values[0].push_back(r.gamma_down(0, 0));
        t.values[1].push_back(r.gamma_up(0, 0));
        t.values[2].push_back(r.gamma_down(0, 1));
        t.values[3].push_back(r.gamma_up(0, 1));
        t.values[4].push_back(r.delta_down(0, 1));
        t.values[5].push_back(r.delta_up(0, 1));
    }
    return t;
}

CsvTable to_csv_table(const RateTable& table) {
    CsvTable csv;
    csv.columns.assign(kRateColumns.begin(), kRateColumns.end());
    for (std::size_t k = 0; k < table.omega.size(); ++k) {
        std::vector<double> row{table.omega[k]};
        for (const auto& col : table.values) row.push_back(col[k]);
        csv.rows.push_back(std::move(row));
    }
    return csv;
}

RateTable rate_table_from_csv(const CsvTable& csv, const std::string& source) {
    std::array<std::size_t, 7> idx{};
    for (std::size_t c = 0; c < kRateColumns.size(); ++c) {
        auto it = std::find(csv.columns.begin(), csv.columns.end(), kRateColumns[c]);
        if (it == csv.columns.end()) throw ValidationError(source + ": missing column '" + kRateColumns[c] + "'");
        idx[c] = static_cast<std::size_t>(it - csv.columns.begin());
    }
    if (csv.rows.empty()) throw ValidationError(source + ": no data rows");
    RateTable t;
    for (const auto& row : csv.rows) {
        const double w = row[idx[0]];
        if (!t.omega.empty() && !(w > t.omega.back())) {
            std::ostringstream os;
            os << source << ": omega_eV must increase strictly (row " << t.omega.size() + 1 << ", omega " << w << ")";
            throw ValidationError(os.str());
        }
        t.omega.push_back(w);
        for (std::size_t c = 0; c < 6; ++c) t.values[c].push_back(row[idx[c + 1]]);
    }
    return t;
}

RateTable ingest_rate_table(const std::filesystem::path& path) {
    return rate_table_from_csv(read_csv(path), path.string());
}

std::vector<ColumnDeviation> compare_rates(const RateTable& table, const QnmModel& model, double tolerance) {
    const RateTable ref = rate_table_from_model(model, table.omega);
    std::vector<ColumnDeviation> out;
    for (std::size_t c = 0; c < 6; ++c) {
        ColumnDeviation d;
        d.column = kRateColumns[c + 1];
        double peak = 0;
        for (double v : ref.values[c]) peak = std::max(peak, std::abs(v));
        const double floor = std::max(1e-12 * peak, 1e-300);
        for (std::size_t k = 0; k < table.omega.size(); ++k) {
            const double diff = std::abs(table.values[c][k] - ref.values[c][k]);
            const double rel = diff / std::max(std::abs(ref.values[c][k]), floor);
            d.max_abs = std::max(d.max_abs, diff);
            if (rel > d.max_rel) {
                d.max_rel = rel;
                d.omega_at_max = table.omega[k];
            }
        }
        d.flagged = d.max_rel > tolerance;
        out.push_back(d);
    }
    return out;
}

}  // namespace gainqe
