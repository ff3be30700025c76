#include "gainqe/runner.hpp"

#include <cstdio>
#include <exception>
#include <sstream>

#include "gainqe/bloch.hpp"

namespace gainqe {

namespace {

std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string entry_note(const Entry& e) {
    std::ostringstream os;
    os.precision(17);
    os << "entry: alpha_g=" << e.alpha_g << " gamma_pump=" << e.gamma_pump << " cross_pump=" << (e.cross_pump ? 1 : 0);
    return os.str();
}

std::vector<std::string> state_columns(const Scenario& s) {
    if (s.emitters.count == 2)
        return {"rho_11", "rho_22", "rho_33",  "rho_44",  "re_rho_23", "im_rho_23", "pop_a",
                "pop_b",  "rho_GG", "rho_MM", "rho_PP", "rho_TT",    "re_rho_PM", "im_rho_PM"};
    std::vector<std::string> out;
    for (std::size_t k = 0; k < s.emitters.count; ++k) out.push_back("pop_" + std::to_string(k));
    return out;
}

std::vector<double> state_values(const Scenario& s, const CMat& rho) {
    if (s.emitters.count == 2) {
        const BareState b = bare_from_matrix(rho);
        const auto [pa, pb] = populations(b);
        const DressedState d = bare_to_dressed(b);
        return {b.rho11,  b.rho22,  b.rho33,  b.rho44,  b.rho23.real(), b.rho23.imag(), pa,
                pb,       d.rhoGG,  d.rhoMM,  d.rhoPP,  d.rhoTT,       d.rhoPM.real(), d.rhoPM.imag()};
    }
    std::vector<double> out;
    for (std::size_t k = 0; k < s.emitters.count; ++k)
        out.push_back((number_operator(s.emitters.count, k) * rho).trace().real());
    return out;
}

double split_negativity(const Scenario& s, const CMat& rho) {
    const std::size_t first[] = {0};
    return s.emitters.count < 2 ? 0.0 : log_negativity(rho, first);
}

std::string context(const Scenario& s, const Entry& e) {
    std::ostringstream os;
    os << s.name << " [alpha_g=" << e.alpha_g << ", gamma_pump=" << e.gamma_pump
       << ", cross_pump=" << (e.cross_pump ? "on" : "off") << "]: ";
    return os.str();
}

// Rethrows with the scenario entry prepended, keeping the error category.
template <class F>
auto with_context(const Scenario& s, const Entry& e, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ValidationError& x) {
        throw ValidationError(context(s, e) + x.what());
    } catch (const RegimeError& x) {
        throw RegimeError(context(s, e) + x.what());
    } catch (const IntegrationError& x) {
        throw IntegrationError(context(s, e) + x.what());
    }
}

// Evaluates f(i) for every entry, in parallel when allowed; the first failure is rethrown.
template <class T, class F>
std::vector<T> map_entries(const Scenario& s, std::size_t count, F&& f) {
    std::vector<T> out(count);
    std::vector<std::exception_ptr> errors(count);
    const auto n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic) if (s.run.parallel)
    for (long i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

CsvTable spectrum_csv(const SpectrumSeries& sp) {
    CsvTable t;
    t.columns = {"detuning", "total", "self", "cross"};
    for (std::size_t k = 0; k < sp.detuning.size(); ++k)
        t.rows.push_back({sp.detuning[k], sp.total[k], sp.self[k], sp.cross[k]});
    return t;
}

CsvTable peaks_csv(const SpectrumSeries& sp) {
    CsvTable t;
    t.columns = {"position", "height", "fwhm", "prominence"};
    for (const auto& p : sp.peaks) t.rows.push_back({p.position, p.height, p.fwhm, p.prominence});
    return t;
}

CsvTable prefixed(const CsvTable& body, const Entry& e) {
    CsvTable t;
    t.columns = {"alpha_g", "gamma_pump", "cross_pump"};
    t.columns.insert(t.columns.end(), body.columns.begin(), body.columns.end());
    for (const auto& row : body.rows) {
        std::vector<double> r{e.alpha_g, e.gamma_pump, e.cross_pump ? 1.0 : 0.0};
        r.insert(r.end(), row.begin(), row.end());
        t.rows.push_back(std::move(r));
    }
    return t;
}

std::vector<std::string> with_comments(const Scenario& s, std::vector<std::string> extra) {
    auto lines = header_lines(s);
    lines.insert(lines.end(), extra.begin(), extra.end());
    return lines;
}

}  // namespace

std::vector<std::string> header_lines(const Scenario& s) {
    std::vector<std::string> lines;
    for (const auto& n : s.notes) lines.push_back(n);
    if (s.qnm && s.run.mode != RunMode::Rates && s.run.mode != RunMode::Compare) {
        std::ostringstream os;
        os.precision(17);
        os << "rate unit: " << rate_unit(s) << " Gamma_0(omega0)";
        lines.push_back(os.str());
    }
    lines.push_back("scenario:");
    std::istringstream is(resolved_json(s));
    for (std::string line; std::getline(is, line);) lines.push_back(line);
    return lines;
}

std::string entry_tag(const Scenario& s, const Entry& e) {
    std::string tag = s.run.output;
    if (s.qnm) tag += "_alpha" + short_number(e.alpha_g);
    if (s.qnm && (s.run.gamma_pump.size() > 1 || e.gamma_pump != 0.0)) tag += "_pump" + short_number(e.gamma_pump);
    if (s.run.include_cross_pump.size() > 1) tag += e.cross_pump ? "_cross_on" : "_cross_off";
    return tag;
}

CsvTable rates_table(const Scenario& s, double alpha_g) {
    if (!s.qnm) throw ValidationError("rates mode needs a qnm block");
    QnmModel m = *s.qnm;
    m.alpha_g = alpha_g;
    const auto omegas = s.run.omega_grid->resolve();
    return to_csv_table(rate_table_from_model(m, omegas, s.run.parallel));
}

CsvTable dynamics_table(const Scenario& s, const Entry& e) {
    return with_context(s, e, [&] {
        const RateSet r = entry_rates(s, e);
        const LindbladModel model = make_model(r, {e.cross_pump});
        check_stability(liouvillian_matrix(model));
        const auto t = s.run.t_grid.resolve();
        const Trajectory traj = evolve(model, initial_state(s), t);
        CsvTable out;
        out.columns = {"t"};
        for (auto& c : state_columns(s)) out.columns.push_back(c);
        if (s.run.negativity) out.columns.push_back("log_negativity");
        for (std::size_t k = 0; k < traj.t.size(); ++k) {
            std::vector<double> row{traj.t[k]};
            for (double v : state_values(s, traj.rho[k])) row.push_back(v);
            if (s.run.negativity) row.push_back(split_negativity(s, traj.rho[k]));
            out.rows.push_back(std::move(row));
        }
        return out;
    });
}

std::vector<std::string> steady_columns(const Scenario& s) {
    std::vector<std::string> cols{"alpha_g", "gamma_pump", "cross_pump"};
    for (auto& c : state_columns(s)) cols.push_back(c);
    cols.push_back("log_negativity");
    return cols;
}

std::vector<double> steady_row(const Scenario& s, const Entry& e) {
    return with_context(s, e, [&] {
        const RateSet r = entry_rates(s, e);
        const CMat rho = steady_state(make_model(r, {e.cross_pump})).matrix();
        std::vector<double> row{e.alpha_g, e.gamma_pump, e.cross_pump ? 1.0 : 0.0};
        for (double v : state_values(s, rho)) row.push_back(v);
        row.push_back(split_negativity(s, rho));
        return row;
    });
}

std::vector<double> spectrum_grid(const Scenario& s) {
    if (s.run.omega_grid) return s.run.omega_grid->resolve();
    return default_grid(entry_rates(s, entries(s).front()));
}

SpectrumSeries entry_spectrum(const Scenario& s, const Entry& e, std::span<const double> grid) {
    return with_context(s, e, [&] {
        const RateSet r = entry_rates(s, e);
        const LindbladModel model = make_model(r, {e.cross_pump});
        SpectrumOptions o;
        o.method = s.run.spectrum_method;
        if (s.run.detector_weighting) {
            QnmModel m = *s.qnm;
            m.alpha_g = e.alpha_g;
            return optional_weighted_spectrum(model, grid, m, s.run.energy_unit_eV, o);
        }
        return spectrum_ss(model, grid, o);
    });
}

std::vector<ColumnDeviation> compare_report(const Scenario& s) {
    if (!s.qnm) throw ValidationError("compare mode needs a qnm block");
    std::filesystem::path table = s.run.table;
    if (table.is_relative()) table = s.base_dir / table;
    const RateTable t = ingest_rate_table(table);
    QnmModel m = *s.qnm;
    m.alpha_g = s.run.alpha_g.front();
    return compare_rates(t, m, s.run.compare_tolerance);
}

std::vector<std::filesystem::path> run(const Scenario& s, const std::filesystem::path& out_dir) {
    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& stem, const CsvTable& t) {
        const auto path = out_dir / (stem + ".csv");
        write_csv(path, t);
        written.push_back(path);
    };
    const auto list = entries(s);

    switch (s.run.mode) {
        case RunMode::Rates: {
            for (double a : s.run.alpha_g) {
                CsvTable t = rates_table(s, a);
                t.comments = with_comments(s, {"alpha_g: " + short_number(a)});
                emit(s.run.output + "_alpha" + short_number(a), t);
            }
            break;
        }
        case RunMode::Dynamics: {
            auto tables = map_entries<CsvTable>(s, list.size(), [&](std::size_t i) { return dynamics_table(s, list[i]); });
            for (std::size_t i = 0; i < list.size(); ++i) {
                tables[i].comments = with_comments(s, {entry_note(list[i])});
                emit(entry_tag(s, list[i]), tables[i]);
            }
            break;
        }
        case RunMode::Steady: {
            auto rows = map_entries<std::vector<double>>(s, list.size(), [&](std::size_t i) { return steady_row(s, list[i]); });
            CsvTable t;
            t.comments = header_lines(s);
            t.columns = steady_columns(s);
            t.rows = std::move(rows);
            emit(s.run.output, t);
            break;
        }
        case RunMode::Spectrum: {
            const auto grid = spectrum_grid(s);
            auto spectra =
                map_entries<SpectrumSeries>(s, list.size(), [&](std::size_t i) { return entry_spectrum(s, list[i], grid); });
            for (std::size_t i = 0; i < list.size(); ++i) {
                CsvTable t = spectrum_csv(spectra[i]);
                t.comments = with_comments(s, {entry_note(list[i])});
                emit(entry_tag(s, list[i]), t);
                CsvTable p = peaks_csv(spectra[i]);
                p.comments = t.comments;
                emit(entry_tag(s, list[i]) + "_peaks", p);
            }
            break;
        }
        case RunMode::Sweep: {
            CsvTable all;
            all.comments = header_lines(s);
            if (s.run.sweep_of == RunMode::Steady) {
                all.columns = steady_columns(s);
                all.rows = map_entries<std::vector<double>>(s, list.size(),
                                                            [&](std::size_t i) { return steady_row(s, list[i]); });
            } else {
                std::vector<double> grid;
                if (s.run.sweep_of == RunMode::Spectrum) grid = spectrum_grid(s);
                auto parts = map_entries<CsvTable>(s, list.size(), [&](std::size_t i) {
                    const CsvTable body = s.run.sweep_of == RunMode::Spectrum
                                              ? spectrum_csv(entry_spectrum(s, list[i], grid))
                                              : dynamics_table(s, list[i]);
                    return prefixed(body, list[i]);
                });
                all.columns = parts.front().columns;
                for (auto& p : parts)
                    for (auto& r : p.rows) all.rows.push_back(std::move(r));
            }
            emit(s.run.output + "_sweep", all);
            break;
        }
        case RunMode::Compare: {
            const auto report = compare_report(s);
            std::ostringstream os;
            for (const auto& line : header_lines(s)) os << "# " << line << '\n';
            os << "column,max_abs,max_rel,omega_at_max,flagged\n";
            for (const auto& d : report) {
                os << d.column << ',' << format_number(d.max_abs) << ',' << format_number(d.max_rel) << ','
                   << format_number(d.omega_at_max) << ',' << (d.flagged ? 1 : 0) << '\n';
                if (d.flagged)
                    warn("column " + d.column + " deviates from the model by up to " + short_number(d.max_rel) +
                         " (relative) at " + short_number(d.omega_at_max) + " eV");
            }
            const auto path = out_dir / (s.run.output + "_compare.csv");
            write_atomic(path, os.str());
            written.push_back(path);
            break;
        }
    }
    return written;
}

}  // namespace gainqe
