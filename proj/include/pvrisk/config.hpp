#ifndef PVRISK_CONFIG_HPP
#define PVRISK_CONFIG_HPP

#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pvrisk/cir.hpp"
#include "pvrisk/cloud.hpp"
#include "pvrisk/errors.hpp"
#include "pvrisk/grid.hpp"
#include "pvrisk/io.hpp"
#include "pvrisk/montecarlo.hpp"
#include "pvrisk/problem.hpp"

namespace pvrisk {

/// Fully resolved run description. Every key has a default, so an empty
/// config is valid; the echo writer emits the complete resolved key set with
/// round-trip-exact numbers, and re-running on the echoed file reproduces the
/// original run.
struct RunConfig {
    // [cloud]
    CloudParams cloud; // defaults: Kanazawa station fit
    // [battery]
    BatteryConfig battery;
    // [penalty]
    PenaltyWeights weights;
    // [target]
    double lambda = 0.05;
    std::string schedule; // "t:v;t:v" overrides the constant when nonempty
    // [orlicz]
    std::string orlicz_kind = "power";
    double orlicz_p = 1.5;
    double orlicz_mu = 1.0;
    double orlicz_phi1 = 1.5;
    double orlicz_phi2 = 0.75;
    double eta = 0.1;
    // [influx]
    InfluxParams influx;
    // [irradiance]
    std::string irr_mode = "builtin";
    double latitude = 36.59;
    double tilt = 45.0;
    double azimuth = 0.0;
    std::string irr_table; // CSV path, external mode
    // [grid]
    int nx = 300;
    int ny = 300;
    double dt = 1.0 / 36000.0; // requested step; solver uses horizon / nt
    double horizon = 2.0;
    double t_start = 0.0;
    // [scheme]
    std::string gradient = "godunov";
    double eps_guard = 1e-10;
    int max_slices = 601;
    // [sim]
    SimConfig sim;
    std::string sim_fields; // optional fields dump to reuse
    // [fit]
    std::string fit_data;
    CloudParams fit_init{0.6, 0.7, 2.0};
    int fit_bins = 20;
    int fit_cells = 60;
    int fit_max_iter = 500;
    // [cir]
    CIRParams cir;
    double cir_x_max = 4.0;
    int cir_nx = 400;
    double cir_dt_factor = 0.9; // fraction of the stability bound
    // [output]
    std::string slices; // comma-separated times
    std::string probes; // "t,x,y;t,x,y"
    bool dump_fields = false;

    static RunConfig parse(std::istream& in, const std::string& origin = "<config>");
    static RunConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw validation_error("cannot open config '" + path + "'");
        return parse(in, path);
    }

    void echo(std::ostream& os) const;

    TargetSchedule make_target() const;
    ProblemSpec make_problem() const;
    Grid make_grid() const;
    SchemeOptions make_scheme() const;
    FitOptions make_fit_options() const;
    std::vector<double> slice_times() const;
    std::vector<std::array<double, 3>> probe_points() const;
};

namespace detail {

inline double cfg_double(const std::string& v, const std::string& where) {
    double d = 0.0;
    if (!parse_double(v, d) || !std::isfinite(d))
        throw validation_error(where + ": expected a number, got '" + v + "'");
    return d;
}

inline long cfg_long(const std::string& v, const std::string& where) {
    const double d = cfg_double(v, where);
    const long l = static_cast<long>(std::llround(d));
    if (d != static_cast<double>(l))
        throw validation_error(where + ": expected an integer, got '" + v + "'");
    return l;
}

inline bool cfg_bool(const std::string& v, const std::string& where) {
    const std::string t = trim(v);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw validation_error(where + ": expected true/false, got '" + v + "'");
}

} // namespace detail

inline RunConfig RunConfig::parse(std::istream& in, const std::string& origin) {
    RunConfig c;
    std::string line, section;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        if (t.front() == '[') {
            if (t.back() != ']')
                throw validation_error(where + ": malformed section header '" + t + "'");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw validation_error(where + ": expected 'key = value', got '" + t + "'");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        const std::string sk = section + "." + key;

        auto d = [&]() { return detail::cfg_double(val, where); };
        auto l = [&]() { return detail::cfg_long(val, where); };
        auto b = [&]() { return detail::cfg_bool(val, where); };

        if (sk == "cloud.r") c.cloud.r = d();
        else if (sk == "cloud.a") c.cloud.a = d();
        else if (sk == "cloud.sigma") c.cloud.sigma = d();
        else if (sk == "battery.capacity") c.battery.capacity = d();
        else if (sk == "battery.discharge_cap") c.battery.discharge_cap = d();
        else if (sk == "penalty.w1") c.weights.w1 = d();
        else if (sk == "penalty.w2") c.weights.w2 = d();
        else if (sk == "target.lambda") c.lambda = d();
        else if (sk == "target.schedule") c.schedule = val;
        else if (sk == "orlicz.kind") c.orlicz_kind = val;
        else if (sk == "orlicz.p") c.orlicz_p = d();
        else if (sk == "orlicz.mu") c.orlicz_mu = d();
        else if (sk == "orlicz.phi1") c.orlicz_phi1 = d();
        else if (sk == "orlicz.phi2") c.orlicz_phi2 = d();
        else if (sk == "orlicz.eta") c.eta = d();
        else if (sk == "influx.eps_area") c.influx.eps_area = d();
        else if (sk == "influx.f0") c.influx.f0 = d();
        else if (sk == "influx.f1") c.influx.f1 = d();
        else if (sk == "irradiance.mode") c.irr_mode = val;
        else if (sk == "irradiance.latitude") c.latitude = d();
        else if (sk == "irradiance.tilt") c.tilt = d();
        else if (sk == "irradiance.azimuth") c.azimuth = d();
        else if (sk == "irradiance.table") c.irr_table = val;
        else if (sk == "grid.nx") c.nx = static_cast<int>(l());
        else if (sk == "grid.ny") c.ny = static_cast<int>(l());
        else if (sk == "grid.dt") c.dt = d();
        else if (sk == "grid.horizon") c.horizon = d();
        else if (sk == "grid.t_start") c.t_start = d();
        else if (sk == "scheme.gradient") c.gradient = val;
        else if (sk == "scheme.eps_guard") c.eps_guard = d();
        else if (sk == "scheme.max_slices") c.max_slices = static_cast<int>(l());
        else if (sk == "sim.n_paths") c.sim.n_paths = l();
        else if (sk == "sim.dt") c.sim.dt = d();
        else if (sk == "sim.seed") c.sim.seed = static_cast<std::uint64_t>(l());
        else if (sk == "sim.distortion") {
            if (val == "none") c.sim.distortion = SimConfig::Distortion::none;
            else if (val == "phi-star") c.sim.distortion = SimConfig::Distortion::phi_star;
            else throw validation_error(where + ": distortion must be none or phi-star");
        } else if (sk == "sim.policy") {
            if (val == "u-star") c.sim.policy = SimConfig::Policy::u_star;
            else if (val == "constant") c.sim.policy = SimConfig::Policy::constant;
            else throw validation_error(where + ": policy must be u-star or constant");
        } else if (sk == "sim.v_const") c.sim.v_const = d();
        else if (sk == "sim.x0") c.sim.x0 = d();
        else if (sk == "sim.y0") c.sim.y0 = d();
        else if (sk == "sim.record_paths") c.sim.record_paths = b();
        else if (sk == "sim.record_stride") c.sim.record_stride = l();
        else if (sk == "sim.fields") c.sim_fields = val;
        else if (sk == "fit.data") c.fit_data = val;
        else if (sk == "fit.init_r") c.fit_init.r = d();
        else if (sk == "fit.init_a") c.fit_init.a = d();
        else if (sk == "fit.init_sigma") c.fit_init.sigma = d();
        else if (sk == "fit.n_bins") c.fit_bins = static_cast<int>(l());
        else if (sk == "fit.fk_cells") c.fit_cells = static_cast<int>(l());
        else if (sk == "fit.max_iter") c.fit_max_iter = static_cast<int>(l());
        else if (sk == "cir.a") c.cir.a = d();
        else if (sk == "cir.r") c.cir.r = d();
        else if (sk == "cir.sigma") c.cir.sigma = d();
        else if (sk == "cir.p") c.cir.p = d();
        else if (sk == "cir.eta_prime") c.cir.eta_prime = d();
        else if (sk == "cir.horizon") c.cir.horizon = d();
        else if (sk == "cir.x_max") c.cir_x_max = d();
        else if (sk == "cir.nx") c.cir_nx = static_cast<int>(l());
        else if (sk == "cir.dt_factor") c.cir_dt_factor = d();
        else if (sk == "output.slices") c.slices = val;
        else if (sk == "output.probes") c.probes = val;
        else if (sk == "output.dump_fields") c.dump_fields = b();
        else
            throw validation_error(where + ": unknown key '" + key + "' in section [" + section + "]");
    }
    return c;
}

inline void RunConfig::echo(std::ostream& os) const {
    auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << "\n"; };
    auto kd = [&](const char* k, double v) { kv(k, format_full(v)); };
    auto ki = [&](const char* k, long v) { kv(k, std::to_string(v)); };
    auto kb = [&](const char* k, bool v) { kv(k, v ? "true" : "false"); };

    os << "[cloud]\n";
    kd("r", cloud.r); kd("a", cloud.a); kd("sigma", cloud.sigma);
    os << "\n[battery]\n";
    kd("capacity", battery.capacity); kd("discharge_cap", battery.discharge_cap);
    os << "\n[penalty]\n";
    kd("w1", weights.w1); kd("w2", weights.w2);
    os << "\n[target]\n";
    kd("lambda", lambda); kv("schedule", schedule);
    os << "\n[orlicz]\n";
    kv("kind", orlicz_kind); kd("p", orlicz_p); kd("mu", orlicz_mu);
    kd("phi1", orlicz_phi1); kd("phi2", orlicz_phi2); kd("eta", eta);
    os << "\n[influx]\n";
    kd("eps_area", influx.eps_area); kd("f0", influx.f0); kd("f1", influx.f1);
    os << "\n[irradiance]\n";
    kv("mode", irr_mode); kd("latitude", latitude); kd("tilt", tilt);
    kd("azimuth", azimuth); kv("table", irr_table);
    os << "\n[grid]\n";
    ki("nx", nx); ki("ny", ny); kd("dt", dt); kd("horizon", horizon); kd("t_start", t_start);
    os << "\n[scheme]\n";
    kv("gradient", gradient); kd("eps_guard", eps_guard); ki("max_slices", max_slices);
    os << "\n[sim]\n";
    ki("n_paths", sim.n_paths); kd("dt", sim.dt); ki("seed", static_cast<long>(sim.seed));
    kv("distortion", sim.distortion == SimConfig::Distortion::none ? "none" : "phi-star");
    kv("policy", sim.policy == SimConfig::Policy::u_star ? "u-star" : "constant");
    kd("v_const", sim.v_const); kd("x0", sim.x0); kd("y0", sim.y0);
    kb("record_paths", sim.record_paths); ki("record_stride", sim.record_stride);
    kv("fields", sim_fields);
    os << "\n[fit]\n";
    kv("data", fit_data); kd("init_r", fit_init.r); kd("init_a", fit_init.a);
    kd("init_sigma", fit_init.sigma); ki("n_bins", fit_bins); ki("fk_cells", fit_cells);
    ki("max_iter", fit_max_iter);
    os << "\n[cir]\n";
    kd("a", cir.a); kd("r", cir.r); kd("sigma", cir.sigma); kd("p", cir.p);
    kd("eta_prime", cir.eta_prime); kd("horizon", cir.horizon); kd("x_max", cir_x_max);
    ki("nx", cir_nx); kd("dt_factor", cir_dt_factor);
    os << "\n[output]\n";
    kv("slices", slices); kv("probes", probes); kb("dump_fields", dump_fields);
}

inline TargetSchedule RunConfig::make_target() const {
    TargetSchedule ts;
    if (trim(schedule).empty()) {
        ts.pieces = {{0.0, lambda}};
        return ts;
    }
    ts.pieces.clear();
    for (const std::string& piece : split(schedule, ';')) {
        const auto parts = split(piece, ':');
        if (parts.size() != 2)
            throw validation_error("target.schedule: expected 't:value' pieces, got '" + piece + "'");
        ts.pieces.emplace_back(detail::cfg_double(parts[0], "target.schedule"),
                               detail::cfg_double(parts[1], "target.schedule"));
    }
    return ts;
}

inline ProblemSpec RunConfig::make_problem() const {
    ProblemSpec s;
    s.cloud = cloud;
    s.battery = battery;
    s.weights = weights;
    s.target = make_target();
    s.influx = influx;
    s.eta = eta;
    s.t_start = t_start;

    if (orlicz_kind == "identity") s.orlicz = OrliczSpec::identity();
    else if (orlicz_kind == "power") s.orlicz = OrliczSpec::power(orlicz_p);
    else if (orlicz_kind == "scaled-exponential") s.orlicz = OrliczSpec::scaled_exponential(orlicz_mu);
    else if (orlicz_kind == "custom") s.orlicz = OrliczSpec::custom(orlicz_phi1, orlicz_phi2);
    else throw validation_error("orlicz.kind: unknown kind '" + orlicz_kind + "'");

    if (irr_mode == "builtin") {
        s.irr.mode = IrradianceConfig::Mode::builtin;
        s.irr.latitude_deg = latitude;
        s.irr.tilt_deg = tilt;
        s.irr.azimuth_deg = azimuth;
    } else if (irr_mode == "external") {
        s.irr.mode = IrradianceConfig::Mode::external;
        if (trim(irr_table).empty())
            throw validation_error("irradiance.table: external mode needs a table path");
        std::ifstream in(irr_table);
        if (!in) throw validation_error("cannot open irradiance table '" + irr_table + "'");
        std::string line;
        long line_no = 0;
        bool header = false;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            if (!header) {
                if (t != "t,irradiance")
                    throw validation_error(irr_table + ":" + std::to_string(line_no) +
                                           ": expected header 't,irradiance'");
                header = true;
                continue;
            }
            const auto parts = split(t, ',');
            if (parts.size() != 2)
                throw validation_error(irr_table + ":" + std::to_string(line_no) + ": expected 2 fields");
            const std::string where = irr_table + ":" + std::to_string(line_no);
            s.irr.table.emplace_back(detail::cfg_double(parts[0], where),
                                     detail::cfg_double(parts[1], where));
        }
    } else {
        throw validation_error("irradiance.mode: unknown mode '" + irr_mode + "'");
    }

    validate(s);
    return s;
}

inline Grid RunConfig::make_grid() const {
    if (!(dt > 0.0)) throw validation_error("grid.dt must be positive");
    if (!(horizon > 0.0)) throw validation_error("grid.horizon must be positive");
    Grid g;
    g.nx = nx;
    g.ny = ny;
    g.horizon = horizon;
    g.capacity = battery.capacity;
    g.t_start = t_start;
    g.nt = std::max<long>(1, static_cast<long>(std::ceil(horizon / dt - 1e-9)));
    validate(g);
    return g;
}

inline SchemeOptions RunConfig::make_scheme() const {
    SchemeOptions o;
    if (gradient == "godunov") o.gradient = GradientScheme::godunov;
    else if (gradient == "central") o.gradient = GradientScheme::central;
    else throw validation_error("scheme.gradient: unknown scheme '" + gradient + "'");
    o.eps_guard = eps_guard;
    o.max_stored_slices = max_slices;
    validate(o);
    return o;
}

inline FitOptions RunConfig::make_fit_options() const {
    FitOptions o;
    o.n_bins = fit_bins;
    o.fk_cells = fit_cells;
    o.max_iter = fit_max_iter;
    return o;
}

inline std::vector<double> RunConfig::slice_times() const {
    std::vector<double> out;
    if (trim(slices).empty()) return out;
    for (const std::string& s : split(slices, ','))
        out.push_back(detail::cfg_double(s, "output.slices"));
    return out;
}

inline std::vector<std::array<double, 3>> RunConfig::probe_points() const {
    std::vector<std::array<double, 3>> out;
    if (trim(probes).empty()) return out;
    for (const std::string& p : split(probes, ';')) {
        const auto parts = split(p, ',');
        if (parts.size() != 3)
            throw validation_error("output.probes: expected 't,x,y' triples, got '" + p + "'");
        out.push_back({detail::cfg_double(parts[0], "output.probes"),
                       detail::cfg_double(parts[1], "output.probes"),
                       detail::cfg_double(parts[2], "output.probes")});
    }
    return out;
}

} // namespace pvrisk

#endif
