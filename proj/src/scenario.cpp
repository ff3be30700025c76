#include "gainqe/scenario.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace gainqe {

using nlohmann::json;

GridSpec GridSpec::linear(double start, double stop, std::size_t points) {
    GridSpec g;
    g.start = start;
    g.stop = stop;
    g.points = points;
    return g;
}

std::vector<double> GridSpec::resolve() const {
    if (is_explicit()) return values;
    std::vector<double> out(points);
    for (std::size_t k = 0; k < points; ++k)
        out[k] = points == 1 ? start : start + (stop - start) * double(k) / double(points - 1);
    if (points > 1) out.back() = stop;
    return out;
}

namespace {

const std::map<std::string, RunMode> kModes = {{"rates", RunMode::Rates},       {"dynamics", RunMode::Dynamics},
                                               {"steady", RunMode::Steady},     {"spectrum", RunMode::Spectrum},
                                               {"sweep", RunMode::Sweep},       {"compare", RunMode::Compare}};
const std::map<std::string, InitialKind> kStates = {
    {"ground", InitialKind::Ground}, {"e_a", InitialKind::ExcitedA}, {"e_b", InitialKind::ExcitedB},
    {"ee", InitialKind::BothExcited}, {"plus", InitialKind::Plus},   {"minus", InitialKind::Minus},
    {"custom", InitialKind::Custom}};

template <class K, class V>
K key_of(const std::map<K, V>& m, V v) {
    for (const auto& [k, x] : m)
        if (x == v) return k;
    return {};
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ValidationError(path + ": " + msg); }

// Reads one JSON object, remembering which keys were consumed.
class Reader {
public:
    Reader(const json& j, std::string path, ParseMode mode) : j_(j), path_(std::move(path)), mode_(mode) {
        if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
    std::string path(const std::string& key) const { return join(path_, key); }

    // keys that are absent or null still count as known
    void mark(const std::string& key) { seen_.insert(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key, std::optional<double> def = std::nullopt) {
        seen_.insert(key);
        if (!has(key)) {
            if (def) return *def;
            fail(path(key), "required");
        }
        return as_number(j_.at(key), path(key));
    }

    bool boolean(const std::string& key, bool def) {
        seen_.insert(key);
        if (!has(key)) return def;
        if (!j_.at(key).is_boolean()) fail(path(key), "expected true or false");
        return j_.at(key).get<bool>();
    }

    std::string string(const std::string& key, const std::string& def) {
        seen_.insert(key);
        if (!has(key)) return def;
        if (!j_.at(key).is_string()) fail(path(key), "expected a string");
        return j_.at(key).get<std::string>();
    }

    std::size_t count(const std::string& key, std::size_t def) {
        seen_.insert(key);
        if (!has(key)) return def;
        const auto& v = j_.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) fail(path(key), "expected a non-negative integer");
        return static_cast<std::size_t>(v.get<long long>());
    }

    // Unknown keys: error in strict mode, warning otherwise.
    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (seen_.count(k)) continue;
            const std::string msg = path(k) + ": unknown key";
            if (mode_ == ParseMode::Strict) throw ValidationError(msg);
            warn(msg + " (ignored)");
        }
    }

    static double as_number(const json& v, const std::string& path) {
        if (!v.is_number()) fail(path, "expected a number");
        return v.get<double>();
    }

private:
    const json& j_;
    std::string path_;
    ParseMode mode_;
    std::set<std::string> seen_;
};

cplx as_complex(const json& v, const std::string& path) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    fail(path, "expected a number or [re, im]");
}

json complex_json(cplx z) { return z.imag() == 0.0 ? json(z.real()) : json::array({z.real(), z.imag()}); }

std::vector<double> number_list(const json& v, const std::string& path) {
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) fail(path, "expected a number or a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(Reader::as_number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<bool> bool_list(const json& v, const std::string& path) {
    if (v.is_boolean()) return {v.get<bool>()};
    if (!v.is_array()) fail(path, "expected true, false or a list of them");
    std::vector<bool> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_boolean()) fail(path + "[" + std::to_string(i) + "]", "expected true or false");
        out.push_back(v[i].get<bool>());
    }
    return out;
}

CMat complex_matrix(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty list of rows");
    const auto rows = v.size();
    CMat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
    for (std::size_t i = 0; i < rows; ++i) {
        const std::string rp = path + "[" + std::to_string(i) + "]";
        if (!v[i].is_array() || v[i].size() != rows) fail(rp, "expected a row of length " + std::to_string(rows));
        for (std::size_t k = 0; k < rows; ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                as_complex(v[i][k], rp + "[" + std::to_string(k) + "]");
    }
    return m;
}

RMat real_matrix(const json& v, const std::string& path, std::size_t n) {
    const CMat c = complex_matrix(v, path);
    if (static_cast<std::size_t>(c.rows()) != n) fail(path, "expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
    if (c.imag().cwiseAbs().maxCoeff() != 0.0) fail(path, "rates must be real");
    return c.real();
}

RVec real_vector(const json& v, const std::string& path, std::size_t n) {
    auto xs = number_list(v, path);
    if (xs.size() == 1 && n > 1) xs.assign(n, xs[0]);
    if (xs.size() != n) fail(path, "expected " + std::to_string(n) + " values");
    return Eigen::Map<const RVec>(xs.data(), static_cast<Eigen::Index>(n));
}

GridSpec grid_spec(const json& v, const std::string& path, ParseMode mode) {
    GridSpec g;
    if (v.is_array()) {
        g.values = number_list(v, path);
    } else {
        Reader r(v, path, mode);
        g.start = r.number("start");
        g.stop = r.number("stop");
        g.points = r.count("points", 0);
        r.finish();
    }
    const auto xs = g.resolve();
    if (xs.size() < 2) fail(path, "needs at least two points");
    for (std::size_t k = 1; k < xs.size(); ++k)
        if (!(xs[k] > xs[k - 1])) fail(path, "must increase strictly");
    return g;
}

json grid_json(const GridSpec& g) {
    if (g.is_explicit()) return g.values;
    return {{"start", g.start}, {"stop", g.stop}, {"points", g.points}};
}

json matrix_json(const RMat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(row);
    }
    return rows;
}

json vector_json(const RVec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void parse_qnm(Reader& root, Scenario& s, ParseMode mode) {
    Reader q(root.raw("qnm"), "qnm", mode);
    QnmModel m;
    m.omega_c = q.number("omega_c");
    m.gamma_c = q.number("gamma_c");
    m.gain_overlap = q.number("gain_overlap", 0.0);
    m.n_b = q.number("n_b", 1.5);
    if (!q.has("mode_amp")) fail(q.path("mode_amp"), "required");
    // a list of per-emitter values, each a number or [re, im]; a bare number is shared
    const json& amps = q.raw("mode_amp");
    if (amps.is_array()) {
        for (std::size_t i = 0; i < amps.size(); ++i)
            m.mode_amp.push_back(as_complex(amps[i], q.path("mode_amp") + "[" + std::to_string(i) + "]"));
    } else {
        m.mode_amp.push_back(as_complex(amps, q.path("mode_amp")));
    }
    if (m.mode_amp.size() == 1 && s.emitters.count > 1) {
        if (!s.emitters.symmetric) fail(q.path("mode_amp"), "one amplitude given but emitters.symmetric is false");
        m.mode_amp.assign(s.emitters.count, m.mode_amp[0]);
    }
    if (m.mode_amp.size() != s.emitters.count)
        fail(q.path("mode_amp"), "expected " + std::to_string(s.emitters.count) + " amplitudes (emitters.count)");
    if (s.emitters.symmetric)
        for (const auto& f : m.mode_amp)
            if (f != m.mode_amp[0]) fail(q.path("mode_amp"), "amplitudes differ but emitters.symmetric is true");
    if (q.has("detector_amp")) m.detector_amp = as_complex(q.raw("detector_amp"), q.path("detector_amp"));
    m.dipole_scale = s.emitters.dipole_scale;

    std::vector<Anchor> anchors;
    if (q.has("calibrate")) {
        const json& list = q.raw("calibrate");
        if (!list.is_array()) fail(q.path("calibrate"), "expected a list of anchors");
        for (std::size_t i = 0; i < list.size(); ++i) {
            Reader a(list[i], q.path("calibrate") + "[" + std::to_string(i) + "]", mode);
            Anchor an;
            an.omega = a.number("omega");
            an.target = a.number("target");
            an.alpha_g = a.number("alpha_g", 0.0);
            const std::string kind = a.string("kind", "gamma_down");
            if (kind == "gamma_down") an.kind = AnchorKind::GammaDown;
            else if (kind == "gamma_up") an.kind = AnchorKind::GammaUp;
            else fail(a.path("kind"), "expected gamma_down or gamma_up");
            an.emitter = a.count("emitter", 0);
            if (an.emitter >= s.emitters.count) fail(a.path("emitter"), "no such emitter");
            a.finish();
            anchors.push_back(an);
        }
    } else {
        q.mark("calibrate");
    }
    q.finish();

    try {
        m.validate();
    } catch (const ValidationError& e) {
        fail("qnm", e.what());
    }
    if (!anchors.empty()) {
        try {
            const auto res = calibrate(m, anchors);
            m = res.model;
            std::ostringstream os;
            os.precision(17);
            os << "calibrated: amplitude scale " << res.amp_scale << ", gain overlap scale " << res.overlap_scale;
            for (std::size_t i = 0; i < anchors.size(); ++i)
                os << "; anchor " << anchors[i].omega << " eV -> " << anchors[i].target << " (residual "
                   << res.residuals[i] << ")";
            s.notes.push_back(os.str());
        } catch (const ValidationError& e) {
            fail(q.path("calibrate"), e.what());
        }
    }
    s.qnm = m;
}

void parse_rates(Reader& root, Scenario& s, ParseMode mode, bool count_given) {
    Reader r(root.raw("rates"), "rates", mode);
    if (!r.has("gamma_down")) fail(r.path("gamma_down"), "required");
    const std::size_t n = count_given ? s.emitters.count : complex_matrix(r.raw("gamma_down"), r.path("gamma_down")).rows();
    s.emitters.count = n;
    RateSet rs = RateSet::zeros(n, r.number("omega0", 0.0));
    rs.gamma_down = real_matrix(r.raw("gamma_down"), r.path("gamma_down"), n);
    if (r.has("gamma_up")) rs.gamma_up = real_matrix(r.raw("gamma_up"), r.path("gamma_up"), n);
    else r.mark("gamma_up");
    if (r.has("delta_down")) rs.delta_down = real_matrix(r.raw("delta_down"), r.path("delta_down"), n);
    else r.mark("delta_down");
    if (r.has("delta_up")) rs.delta_up = real_matrix(r.raw("delta_up"), r.path("delta_up"), n);
    else r.mark("delta_up");
    if (r.has("gamma_dephase")) rs.gamma_dephase = real_vector(r.raw("gamma_dephase"), r.path("gamma_dephase"), n);
    else r.mark("gamma_dephase");
    if (r.has("gamma_pump")) rs.gamma_pump = real_vector(r.raw("gamma_pump"), r.path("gamma_pump"), n);
    else r.mark("gamma_pump");
    r.finish();
    try {
        rs.validate();
    } catch (const ValidationError& e) {
        fail("rates", e.what());
    }
    if (s.emitters.symmetric) {
        const double scale = std::max(1.0, rs.gamma_down.cwiseAbs().maxCoeff());
        for (std::size_t i = 1; i < n; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            if (std::abs(rs.gamma_down(k, k) - rs.gamma_down(0, 0)) > 1e-12 * scale ||
                std::abs(rs.gamma_up(k, k) - rs.gamma_up(0, 0)) > 1e-12 * scale)
                fail("rates", "diagonal rates differ but emitters.symmetric is true");
        }
    }
    s.rates = rs;
}

RunMode mode_from(const std::string& name, const std::string& path) {
    auto it = kModes.find(name);
    if (it == kModes.end()) fail(path, "unknown mode '" + name + "'");
    return it->second;
}

void parse_run(Reader& root, Scenario& s, ParseMode mode, std::optional<RunMode> mode_override) {
    if (!root.has("run")) fail("run", "required");
    Reader r(root.raw("run"), "run", mode);
    RunBlock& run = s.run;
    run.mode = mode_from(r.string("mode", "dynamics"), r.path("mode"));
    if (mode_override) run.mode = *mode_override;
    run.sweep_of = mode_from(r.string("sweep_of", "dynamics"), r.path("sweep_of"));
    if (run.sweep_of != RunMode::Dynamics && run.sweep_of != RunMode::Steady && run.sweep_of != RunMode::Spectrum)
        fail(r.path("sweep_of"), "a sweep repeats dynamics, steady or spectrum");
    const bool direct = s.rates.has_value();

    auto qnm_only = [&](const std::string& key) {
        if (direct && r.has(key))
            fail(r.path(key), "conflicts with the rates block; set it there or use a qnm block");
    };
    qnm_only("omega0");
    qnm_only("alpha_g");
    qnm_only("gamma_dephase");
    qnm_only("gamma_pump");

    const bool needs_omega0 = !direct && run.mode != RunMode::Rates && run.mode != RunMode::Compare;
    run.omega0 = direct ? s.rates->omega0 : r.number("omega0", needs_omega0 ? std::nullopt : std::optional<double>(0.0));
    if (needs_omega0 && !(run.omega0 > 0)) fail(r.path("omega0"), "must be positive");

    if (r.has("t_grid")) run.t_grid = grid_spec(r.raw("t_grid"), r.path("t_grid"), mode);
    else r.mark("t_grid");
    if (run.t_grid.resolve().front() < 0) fail(r.path("t_grid"), "times must be non-negative");
    if (r.has("omega_grid")) run.omega_grid = grid_spec(r.raw("omega_grid"), r.path("omega_grid"), mode);
    else r.mark("omega_grid");
    if (run.mode == RunMode::Rates && !run.omega_grid) fail(r.path("omega_grid"), "required for mode rates");
    if (run.mode == RunMode::Rates && direct) fail("rates", "mode rates sweeps a qnm model; rates cannot be given directly");
    if (run.mode == RunMode::Compare && direct) fail("rates", "mode compare needs a qnm model");

    const std::string st = r.string("initial_state", "ground");
    auto it = kStates.find(st);
    if (it == kStates.end()) fail(r.path("initial_state"), "unknown state '" + st + "'");
    run.initial_state = it->second;
    if (r.has("initial_matrix")) {
        if (run.initial_state != InitialKind::Custom) fail(r.path("initial_matrix"), "only used with initial_state custom");
        run.initial_matrix = complex_matrix(r.raw("initial_matrix"), r.path("initial_matrix"));
    } else {
        r.mark("initial_matrix");
        if (run.initial_state == InitialKind::Custom) fail(r.path("initial_matrix"), "required for initial_state custom");
    }

    r.mark("alpha_g");
    r.mark("gamma_pump");
    if (!direct) {
        if (r.has("alpha_g")) run.alpha_g = number_list(r.raw("alpha_g"), r.path("alpha_g"));
        if (run.alpha_g.empty()) fail(r.path("alpha_g"), "list is empty");
        for (double a : run.alpha_g)
            if (!(a >= 0)) fail(r.path("alpha_g"), "values must be non-negative");
        run.gamma_dephase = r.number("gamma_dephase", 0.001);
        if (!(run.gamma_dephase >= 0)) fail(r.path("gamma_dephase"), "must be non-negative");
        if (r.has("gamma_pump")) run.gamma_pump = number_list(r.raw("gamma_pump"), r.path("gamma_pump"));
        if (run.gamma_pump.empty()) fail(r.path("gamma_pump"), "list is empty");
        for (double p : run.gamma_pump)
            if (!(p >= 0)) fail(r.path("gamma_pump"), "values must be non-negative");
    } else {
        run.alpha_g = {0.0};
        run.gamma_dephase = 0.0;
        run.gamma_pump = {s.rates->gamma_pump.size() ? s.rates->gamma_pump(0) : 0.0};
    }
    if (r.has("include_cross_pump")) run.include_cross_pump = bool_list(r.raw("include_cross_pump"), r.path("include_cross_pump"));
    else r.mark("include_cross_pump");
    if (run.include_cross_pump.empty()) fail(r.path("include_cross_pump"), "list is empty");

    const std::string unit = r.string("time_unit", "gamma0_nogain");
    if (unit == "gamma0_nogain") run.time_unit = TimeUnit::NoGainRate;
    else if (unit == "purcell") run.time_unit = TimeUnit::Purcell;
    else fail(r.path("time_unit"), "expected gamma0_nogain or purcell");

    run.negativity = r.boolean("negativity", false);
    const std::string method = r.string("spectrum_method", "resolvent");
    if (method == "resolvent") run.spectrum_method = SpectrumMethod::Resolvent;
    else if (method == "time_domain") run.spectrum_method = SpectrumMethod::TimeDomain;
    else fail(r.path("spectrum_method"), "expected resolvent or time_domain");

    const std::string weighting = r.string("spectrum_weighting", "none");
    if (weighting == "detector") run.detector_weighting = true;
    else if (weighting != "none") fail(r.path("spectrum_weighting"), "expected none or detector");
    run.energy_unit_eV = r.number("energy_unit_eV", 0.0);
    if (run.detector_weighting) {
        if (direct || !s.qnm->detector_amp) fail(r.path("spectrum_weighting"), "detector weighting needs qnm.detector_amp");
        if (!(run.energy_unit_eV > 0)) fail(r.path("energy_unit_eV"), "must be positive for detector weighting");
    }

    run.table = r.string("table", "");
    if (run.mode == RunMode::Compare && run.table.empty()) fail(r.path("table"), "required for mode compare");
    run.compare_tolerance = r.number("compare_tolerance", 1e-6);
    run.parallel = r.boolean("parallel", true);
    run.output = r.string("output", s.name);
    r.finish();
}

}  // namespace

const char* mode_name(RunMode m) {
    for (const auto& [k, v] : kModes)
        if (v == m) return k.c_str();
    return "dynamics";
}

RunMode parse_mode(const std::string& name) { return mode_from(name, "mode"); }

Scenario parse_scenario(const std::string& text, ParseMode mode, const std::string& origin,
                        std::optional<RunMode> mode_override) {
    json doc;
    try {
        doc = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ValidationError(origin + ": " + e.what());
    }
    try {
        Scenario s;
        Reader root(doc, "", mode);
        s.name = root.string("name", "scenario");
        const bool has_qnm = root.has("qnm"), has_rates = root.has("rates");
        if (has_qnm && has_rates) fail("qnm/rates", "give either a qnm block or a rates block, not both");
        if (!has_qnm && !has_rates) fail("qnm/rates", "one of the qnm or rates blocks is required");

        bool count_given = false;
        if (root.has("emitters")) {
            Reader e(root.raw("emitters"), "emitters", mode);
            count_given = e.has("count");
            s.emitters.count = e.count("count", 2);
            s.emitters.symmetric = e.boolean("symmetric", true);
            if (e.has("dipole_scale")) {
                const auto xs = number_list(e.raw("dipole_scale"), e.path("dipole_scale"));
                s.emitters.dipole_scale = xs.size() == 1 ? std::vector<double>(s.emitters.count, xs[0]) : xs;
            } else {
                e.mark("dipole_scale");
            }
            e.finish();
        } else {
            root.mark("emitters");
        }
        if (s.emitters.count < 1 || s.emitters.count > 6) fail("emitters.count", "between 1 and 6 emitters are supported");
        if (s.emitters.dipole_scale.empty()) s.emitters.dipole_scale.assign(s.emitters.count, 1.0);
        if (s.emitters.dipole_scale.size() != s.emitters.count)
            fail("emitters.dipole_scale", "expected " + std::to_string(s.emitters.count) + " values");
        for (double d : s.emitters.dipole_scale)
            if (!(d > 0)) fail("emitters.dipole_scale", "values must be positive");
        if (s.emitters.symmetric)
            for (double d : s.emitters.dipole_scale)
                if (d != s.emitters.dipole_scale[0]) fail("emitters.dipole_scale", "scales differ but emitters.symmetric is true");

        if (has_qnm) parse_qnm(root, s, mode);
        else root.mark("qnm");
        if (has_rates) {
            parse_rates(root, s, mode, count_given);
            if (s.emitters.dipole_scale.size() != s.emitters.count) s.emitters.dipole_scale.assign(s.emitters.count, 1.0);
        } else {
            root.mark("rates");
        }
        parse_run(root, s, mode, mode_override);
        root.finish();

        if (s.run.initial_state == InitialKind::Custom) {
            try {
                DensityMatrix rho(s.run.initial_matrix);
                if (rho.dim() != (std::size_t{1} << s.emitters.count)) fail("run.initial_matrix", "dimension must be 2^count");
            } catch (const ValidationError& e) {
                const std::string what = e.what();
                if (what.rfind("run.", 0) == 0) throw;
                fail("run.initial_matrix", what);
            }
        }
        if ((s.run.initial_state == InitialKind::Plus || s.run.initial_state == InitialKind::Minus ||
             s.run.initial_state == InitialKind::ExcitedB) &&
            s.emitters.count < 2)
            fail("run.initial_state", "needs at least two emitters");
        if ((s.run.initial_state == InitialKind::Plus || s.run.initial_state == InitialKind::Minus) && s.emitters.count != 2)
            fail("run.initial_state", "plus and minus are defined for two emitters");
        return s;
    } catch (const ValidationError& e) {
        throw ValidationError(origin + ": " + e.what());
    }
}

Scenario load_scenario(const std::filesystem::path& path, ParseMode mode, std::optional<RunMode> mode_override) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scenario " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    Scenario s = parse_scenario(os.str(), mode, path.string(), mode_override);
    s.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    return s;
}

std::string resolved_json(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["emitters"] = {{"count", s.emitters.count}, {"symmetric", s.emitters.symmetric}, {"dipole_scale", s.emitters.dipole_scale}};
    if (s.qnm) {
        const QnmModel& m = *s.qnm;
        json amps = json::array();
        for (auto f : m.mode_amp) amps.push_back(complex_json(f));
        j["qnm"] = {{"omega_c", m.omega_c}, {"gamma_c", m.gamma_c},   {"mode_amp", amps},
                    {"gain_overlap", m.gain_overlap}, {"n_b", m.n_b}, {"calibrate", json::array()}};
        if (m.detector_amp) j["qnm"]["detector_amp"] = complex_json(*m.detector_amp);
    }
    if (s.rates) {
        const RateSet& r = *s.rates;
        j["rates"] = {{"omega0", r.omega0},
                      {"gamma_down", matrix_json(r.gamma_down)},
                      {"gamma_up", matrix_json(r.gamma_up)},
                      {"delta_down", matrix_json(r.delta_down)},
                      {"delta_up", matrix_json(r.delta_up)},
                      {"gamma_dephase", vector_json(r.gamma_dephase)},
                      {"gamma_pump", vector_json(r.gamma_pump)}};
    }
    const RunBlock& run = s.run;
    json jr;
    jr["mode"] = mode_name(run.mode);
    jr["sweep_of"] = mode_name(run.sweep_of);
    jr["t_grid"] = grid_json(run.t_grid);
    if (run.omega_grid) jr["omega_grid"] = grid_json(*run.omega_grid);
    jr["initial_state"] = key_of(kStates, run.initial_state);
    if (run.initial_state == InitialKind::Custom) {
        json rows = json::array();
        for (Eigen::Index i = 0; i < run.initial_matrix.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index k = 0; k < run.initial_matrix.cols(); ++k) row.push_back(complex_json(run.initial_matrix(i, k)));
            rows.push_back(row);
        }
        jr["initial_matrix"] = rows;
    }
    if (s.qnm) {
        jr["omega0"] = run.omega0;
        jr["alpha_g"] = run.alpha_g;
        jr["gamma_dephase"] = run.gamma_dephase;
        jr["gamma_pump"] = run.gamma_pump;
    }
    jr["include_cross_pump"] = run.include_cross_pump;
    jr["time_unit"] = run.time_unit == TimeUnit::NoGainRate ? "gamma0_nogain" : "purcell";
    jr["negativity"] = run.negativity;
    jr["spectrum_method"] = run.spectrum_method == SpectrumMethod::Resolvent ? "resolvent" : "time_domain";
    jr["spectrum_weighting"] = run.detector_weighting ? "detector" : "none";
    jr["energy_unit_eV"] = run.energy_unit_eV;
    jr["table"] = run.table;
    jr["compare_tolerance"] = run.compare_tolerance;
    jr["parallel"] = run.parallel;
    jr["output"] = run.output;
    j["run"] = jr;
    return j.dump(2);
}

std::vector<Entry> entries(const Scenario& s) {
    std::vector<Entry> out;
    for (double a : s.run.alpha_g)
        for (double p : s.run.gamma_pump)
            for (bool c : s.run.include_cross_pump) out.push_back({a, p, c});
    return out;
}

double rate_unit(const Scenario& s) {
    if (!s.qnm || s.run.time_unit == TimeUnit::Purcell) return 1.0;
    QnmModel m = *s.qnm;
    m.alpha_g = 0.0;
    if (!(s.run.omega0 > 0)) throw ValidationError("run.omega0: needed for the Gamma(0) rate unit");
    return gamma_down_total(s.run.omega0, m, 0, 0);
}

RateSet entry_rates(const Scenario& s, const Entry& e) {
    if (s.rates) return *s.rates;
    QnmModel m = *s.qnm;
    m.alpha_g = e.alpha_g;
    const double unit = rate_unit(s);
    if (!(unit > 0)) throw ValidationError("rate unit Gamma(0) is not positive at run.omega0");
    RateSet r = rates_at(s.run.omega0, m).scaled(1.0 / unit);
    r.gamma_dephase.setConstant(s.run.gamma_dephase);
    r.gamma_pump.setConstant(e.gamma_pump);
    r.validate();
    return r;
}

DensityMatrix initial_state(const Scenario& s) {
    const std::size_t n = s.emitters.count;
    const std::size_t d = std::size_t{1} << n;
    switch (s.run.initial_state) {
        case InitialKind::Ground: return DensityMatrix::ground(n);
        case InitialKind::ExcitedA: return DensityMatrix::basis_state(n, std::size_t{1} << (n - 1));
        case InitialKind::ExcitedB: return DensityMatrix::basis_state(n, std::size_t{1} << (n - 2));
        case InitialKind::BothExcited: return DensityMatrix::basis_state(n, d - 1);
        case InitialKind::Plus:
        case InitialKind::Minus: {
            CVec psi = CVec::Zero(4);
            psi(2) = 1.0 / std::sqrt(2.0);
            psi(1) = (s.run.initial_state == InitialKind::Plus ? 1.0 : -1.0) / std::sqrt(2.0);
            return DensityMatrix::pure(psi);
        }
        case InitialKind::Custom: return DensityMatrix(s.run.initial_matrix);
    }
    return DensityMatrix::ground(n);
}

}  // namespace gainqe
