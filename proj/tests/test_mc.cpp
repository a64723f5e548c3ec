#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "pvrisk/cloud.hpp"
#include "pvrisk/hjb.hpp"
#include "pvrisk/montecarlo.hpp"

using namespace pvrisk;
using Catch::Approx;

namespace {

CloudParams kanazawa() { return CloudParams{0.580, 0.766, 2.27}; }

ProblemSpec sunny_spec() {
    ProblemSpec s;
    s.cloud = kanazawa();
    s.orlicz = OrliczSpec::identity();
    s.eta = 0.65;
    return s;
}

// No irradiance ever: the storage axis decouples and Y moves only through u.
ProblemSpec dark_spec() {
    ProblemSpec s = sunny_spec();
    s.irr.mode = IrradianceConfig::Mode::external;
    s.irr.table = {{0.0, 0.0}, {1e6, 0.0}};
    return s;
}

// Fields with constant policy/distortion tables, for exercising the
// tabulated lookups against their closed-loop effect.
SolutionFields constant_fields(const Grid& g, double u, double phi) {
    SolutionFields f;
    f.grid = g;
    f.layers = {0, g.nt};
    f.times = {g.t(0), g.t(g.nt)};
    f.psi.assign(2, std::vector<double>(g.vertex_count(), 0.0));
    f.u_star.assign(2, std::vector<double>(g.vertex_count(), u));
    f.phi_star.assign(2, std::vector<double>(g.vertex_count(), phi));
    return f;
}

} // namespace

TEST_CASE("seeded reproducibility") {
    ProblemSpec s = sunny_spec();
    SimConfig cfg;
    cfg.n_paths = 50;
    cfg.dt = 1e-3;
    cfg.policy = SimConfig::Policy::constant;
    cfg.v_const = 0.1;

    const PathBundle a = simulate_paths(s, nullptr, 0.5, cfg);
    const PathBundle b = simulate_paths(s, nullptr, 0.5, cfg);
    REQUIRE(a.objective.size() == b.objective.size());
    for (std::size_t p = 0; p < a.objective.size(); ++p) {
        CHECK(a.objective[p] == b.objective[p]);
        CHECK(a.final_x[p] == b.final_x[p]);
        CHECK(a.final_y[p] == b.final_y[p]);
    }

    cfg.seed = 99;
    const PathBundle c = simulate_paths(s, nullptr, 0.5, cfg);
    bool differs = false;
    for (std::size_t p = 0; p < a.final_x.size(); ++p) differs |= (a.final_x[p] != c.final_x[p]);
    CHECK(differs);
}

TEST_CASE("dark sky, no discharge: storage frozen, cost deterministic") {
    ProblemSpec s = dark_spec();
    SimConfig cfg;
    cfg.n_paths = 3;
    cfg.dt = 1e-3;
    cfg.policy = SimConfig::Policy::constant;
    cfg.v_const = 0.0;

    const double T = 1.0;
    const PathBundle b = simulate_paths(s, nullptr, T, cfg);
    // f = 0 and u = 0 freeze Y; no distortion keeps the discount at one;
    // the running cost is the constant lambda^2/2 + w1 U^2/2 at interior y
    const double d0 = 0.05 * 0.05 / 2.0 + 0.1 * 0.2 * 0.2 / 2.0;
    for (long p = 0; p < cfg.n_paths; ++p) {
        CHECK(b.final_y[p] == 0.5);
        CHECK(b.final_discount[p] == 1.0);
        CHECK(b.objective[p] == Approx(d0 * T).epsilon(1e-10));
    }
    const ObjectiveEstimate e = estimate_objective(b);
    CHECK(e.mean == Approx(d0 * T).epsilon(1e-10));
    CHECK(e.std_error < 1e-14);
}

TEST_CASE("boundary states move with the exact drift") {
    // at x = 0 or 1 the noise amplitude vanishes, so one Euler step is the
    // deterministic drift step for every path
    ProblemSpec s = dark_spec();
    SimConfig cfg;
    cfg.n_paths = 2;
    cfg.dt = 0.01;
    cfg.policy = SimConfig::Policy::constant;
    cfg.x0 = 0.0;
    PathBundle b = simulate_paths(s, nullptr, 0.01, cfg);
    REQUIRE(b.n_steps == 1);
    CHECK(b.final_x[0] == 0.580 * 0.766 * 0.01);
    CHECK(b.final_x[1] == b.final_x[0]);

    cfg.x0 = 1.0;
    b = simulate_paths(s, nullptr, 0.01, cfg);
    CHECK(b.final_x[0] == 1.0 + 0.580 * (0.766 - 1.0) * 0.01);
}

TEST_CASE("a year of paths reproduces the stationary density") {
    ProblemSpec s = sunny_spec();
    SimConfig cfg;
    cfg.n_paths = 10000;
    cfg.dt = 0.02;
    cfg.policy = SimConfig::Policy::constant;
    cfg.v_const = 0.0;
    cfg.x0 = 0.5;

    const PathBundle b = simulate_paths(s, nullptr, 365.0, cfg);
    const int nc = 20;
    std::vector<double> hist(nc, 0.0);
    for (double x : b.final_x)
        hist[std::min(static_cast<int>(x * nc), nc - 1)] += nc / static_cast<double>(cfg.n_paths);

    const DensityTable ref = rebin_linear(stationary_pdf(s.cloud, 2000), nc);
    double l1 = 0.0;
    for (int c = 0; c < nc; ++c) l1 += std::abs(hist[c] - ref.values[c]) / nc;
    // observed 0.049 at this seed; sampling noise alone is ~0.03
    CHECK(l1 < 0.1);
}

TEST_CASE("clamp events fade as the step shrinks") {
    // the continuous process never exits [0, 1]; overshoots are pure
    // discretization artifacts and must become rarer with dt
    long events[2];
    int idx = 0;
    for (double dt : {1e-2, 1e-3}) {
        ProblemSpec s = sunny_spec();
        SimConfig cfg;
        cfg.n_paths = 10000;
        cfg.dt = dt;
        cfg.policy = SimConfig::Policy::constant;
        cfg.x0 = 0.5;
        events[idx++] = simulate_paths(s, nullptr, 15.0, cfg).clamp_events_x;
    }
    CHECK(events[0] > 0);  // 6 at this seed
    CHECK(2 * events[1] <= events[0]);
}

TEST_CASE("tabulated policy lookup matches its constant closed loop") {
    ProblemSpec s = sunny_spec();
    Grid g{10, 4, 4, 0.5, 1.0, 0.0};
    const SolutionFields f = constant_fields(g, 0.07, 0.0);

    SimConfig tab;
    tab.n_paths = 20;
    tab.dt = 1e-3;
    tab.policy = SimConfig::Policy::u_star;
    SimConfig cst = tab;
    cst.policy = SimConfig::Policy::constant;
    cst.v_const = 0.07;

    const PathBundle a = simulate_paths(s, &f, 0.5, tab);
    const PathBundle b = simulate_paths(s, nullptr, 0.5, cst);
    for (std::size_t p = 0; p < a.objective.size(); ++p) {
        CHECK(a.objective[p] == b.objective[p]);
        CHECK(a.final_x[p] == b.final_x[p]);
        CHECK(a.final_y[p] == b.final_y[p]);
    }
}

TEST_CASE("tabulated distortion accumulates the entropy discount") {
    ProblemSpec s = sunny_spec();
    s.eta = 0.5;  // identity: eta' = 0.5
    Grid g{10, 4, 4, 0.8, 1.0, 0.0};
    const SolutionFields f = constant_fields(g, 0.05, 0.25);

    SimConfig cfg;
    cfg.n_paths = 10;
    cfg.dt = 1e-3;
    cfg.policy = SimConfig::Policy::u_star;
    cfg.distortion = SimConfig::Distortion::phi_star;

    const double T = 0.8;
    const PathBundle b = simulate_paths(s, &f, T, cfg);
    const double expect = std::exp(-0.25 * 0.25 / (2.0 * 0.5) * T);
    for (long p = 0; p < cfg.n_paths; ++p) {
        CHECK(b.final_discount[p] == Approx(expect).epsilon(1e-12));
        CHECK(b.final_discount[p] > 0.0);
        CHECK(b.final_discount[p] <= 1.0);
    }

    // the same run without distortion sees different noise-free drift
    cfg.distortion = SimConfig::Distortion::none;
    const PathBundle c = simulate_paths(s, &f, T, cfg);
    bool drift_shift_seen = false;
    for (long p = 0; p < cfg.n_paths; ++p) {
        CHECK(c.final_discount[p] == 1.0);
        drift_shift_seen |= (c.final_x[p] != b.final_x[p]);
    }
    CHECK(drift_shift_seen);
}

TEST_CASE("policy evaluation tracks the grid value in a deterministic case") {
    // dark problem: the cost dynamics are purely in y and deterministic, so
    // the sampled objective has zero variance and the comparison with the
    // grid value is exact arithmetic. The grid value sits above the sampled
    // policy cost by its O(dy) smearing of the empty-reservoir spike; both
    // approach the true optimum under refinement.
    ProblemSpec s = dark_spec();
    s.orlicz = OrliczSpec::custom(1.0, 0.0);
    s.eta = 0.01;
    Grid g{1, 50, 50, 0.25, 1.0, 0.0};
    g.nt = static_cast<long>(std::ceil(g.horizon / (0.5 * monotone_dt_bound(s, g))));
    const SolutionFields f = solve_hjb(s, g);
    const double psi0 = f.psi_at(0.0, 0.5, 0.04);  // vertex-exact lookup
    CHECK(psi0 > 3.5e-4);
    CHECK(psi0 < 4.3e-4);  // observed 3.884e-4

    SimConfig cfg;
    cfg.n_paths = 20;
    cfg.dt = 2e-4;
    cfg.policy = SimConfig::Policy::u_star;
    cfg.distortion = SimConfig::Distortion::phi_star;
    cfg.x0 = 0.5;
    cfg.y0 = 0.04;
    const PathBundle b = simulate_paths(s, &f, g.horizon, cfg);
    const ObjectiveEstimate e = estimate_objective(b);
    CHECK(e.std_error < 1e-15);
    CHECK(e.mean < psi0);
    CHECK(e.mean > 0.6 * psi0);  // observed ratio 0.70
}

TEST_CASE("objective statistics") {
    PathBundle b;
    b.objective = {1.0, 2.0, 3.0};
    const ObjectiveEstimate e = estimate_objective(b);
    CHECK(e.mean == Approx(2.0).epsilon(1e-15));
    CHECK(e.std_error == Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));

    b.objective = {4.2};
    const ObjectiveEstimate single = estimate_objective(b);
    CHECK(single.mean == 4.2);
    CHECK(single.std_error == 0.0);

    b.objective.clear();
    CHECK_THROWS_AS(estimate_objective(b), validation_error);
}

TEST_CASE("trace recording") {
    ProblemSpec s = sunny_spec();
    SimConfig cfg;
    cfg.n_paths = 2;
    cfg.dt = 1e-3;
    cfg.policy = SimConfig::Policy::constant;
    cfg.v_const = 0.05;
    cfg.record_paths = true;
    cfg.record_stride = 3;

    const PathBundle b = simulate_paths(s, nullptr, 0.01, cfg);
    REQUIRE(b.n_steps == 10);
    // steps 0, 3, 6, 9 per path
    REQUIRE(b.trace_t.size() == 8);

    double last_discount = 2.0;
    long last_path = -1;
    for (std::size_t i = 0; i < b.trace_t.size(); ++i) {
        CHECK(b.trace_x[i] >= 0.0);
        CHECK(b.trace_x[i] <= 1.0);
        CHECK(b.trace_y[i] >= 0.0);
        CHECK(b.trace_y[i] <= 1.0);
        CHECK(b.trace_discount[i] > 0.0);
        CHECK(b.trace_discount[i] <= 1.0);
        if (b.trace_path[i] == last_path) CHECK(b.trace_discount[i] <= last_discount);
        last_path = b.trace_path[i];
        last_discount = b.trace_discount[i];
    }

    std::ostringstream os;
    write_paths_csv(os, b);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "path_id,t,x,y,u,phi,discount");
    std::size_t rows = 0;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 8);
}

TEST_CASE("simulation input validation") {
    ProblemSpec s = sunny_spec();
    SimConfig cfg;
    cfg.policy = SimConfig::Policy::constant;

    SECTION("tabulated modes need fields") {
        SimConfig c = cfg;
        c.policy = SimConfig::Policy::u_star;
        CHECK_THROWS_AS(simulate_paths(s, nullptr, 1.0, c), validation_error);
        c.policy = SimConfig::Policy::constant;
        c.distortion = SimConfig::Distortion::phi_star;
        CHECK_THROWS_AS(simulate_paths(s, nullptr, 1.0, c), validation_error);
    }
    SECTION("fields capacity must match the battery") {
        Grid g{10, 4, 4, 1.0, 1.0, 0.0};
        const SolutionFields f = constant_fields(g, 0.0, 0.0);
        ProblemSpec s2 = s;
        s2.battery.capacity = 2.0;
        SimConfig c = cfg;
        c.policy = SimConfig::Policy::u_star;
        CHECK_THROWS_WITH(simulate_paths(s2, &f, 1.0, c),
                          Catch::Matchers::ContainsSubstring("capacity"));
    }
    SECTION("config bounds") {
        SimConfig c = cfg;
        c.n_paths = 0;
        CHECK_THROWS_AS(simulate_paths(s, nullptr, 1.0, c), validation_error);
        c = cfg;
        c.dt = 0.0;
        CHECK_THROWS_AS(simulate_paths(s, nullptr, 1.0, c), validation_error);
        c = cfg;
        c.x0 = 1.5;
        CHECK_THROWS_AS(simulate_paths(s, nullptr, 1.0, c), validation_error);
        c = cfg;
        c.y0 = 2.0;
        CHECK_THROWS_AS(simulate_paths(s, nullptr, 1.0, c), validation_error);
        c = cfg;
        c.record_stride = 0;
        CHECK_THROWS_AS(simulate_paths(s, nullptr, 1.0, c), validation_error);
        CHECK_THROWS_AS(simulate_paths(s, nullptr, 0.0, cfg), validation_error);
    }
}
