#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "bohmion/ensemble.hpp"
#include "bohmion/error.hpp"
#include "bohmion/integrals.hpp"
#include "bohmion/interpolation.hpp"

using namespace bohmion;
namespace fs = std::filesystem;

namespace {

BohmianState at(double t, double x1, double x2) {
    BohmianState s;
    s.time = t;
    s.x = {x1, x2};
    return s;
}

WaveField correlated_gaussian(const Grid2D& g) {
    auto f = WaveField::sample(g, [](double x1, double x2) {
        return std::exp(-0.35 * (x1 * x1 + x2 * x2) + 0.2 * x1 * x2 - 0.1 * (x1 + x2));
    });
    const double scale = 1.0 / std::sqrt(total_norm(f));
    for (auto& z : f.mutable_buffer()) z *= scale;
    return f;
}

/// Small strong-field run that ionizes within a few cycles.
RunSetup small_setup() {
    RunSetup s;
    s.grid = make_grid(-24, 24, 96);
    s.model = MolecularModel{2.0};
    s.intensity_w_cm2 = 6e14;
    s.pulse = LaserPulse::from_lab(800.0, s.intensity_w_cm2, 1.0);
    s.pulse.t_end = 2.5 * s.pulse.period();
    s.tracer.tracking_limit = 19.0;
    return s;
}

const WaveField& small_ground() {
    static const WaveField g = [] {
        WaveField w = relax_eigenstates(small_setup().grid, small_setup().model, 1).states.front();
        w.set_time(0.0);
        return w;
    }();
    return g;
}

} // namespace

TEST_CASE("deterministic seeds partition the norm") {
    const Grid2D g = make_grid(-10, 10, 80);
    const auto f = correlated_gaussian(g);
    const SeedSet set = sample_seeds(f, SeedOptions{});
    double sum = 0.0;
    for (const double w : set.weights) {
        CHECK(w >= 0.0);
        sum += w;
    }
    CHECK(std::abs(sum - region_norm(f, 10.0)) < 1e-10);
    CHECK(set.tail_mass >= 0.0);
    CHECK(set.size() < (80 / 4) * (80 / 4));
}

TEST_CASE("seeds of a symmetric state are exchange symmetric") {
    const SeedSet set = sample_seeds(small_ground(), SeedOptions{});
    std::map<std::pair<long, long>, double> by_pos;
    const auto key = [](Point p) { return std::make_pair(std::lround(p.x1 * 1e6), std::lround(p.x2 * 1e6)); };
    for (std::size_t i = 0; i < set.size(); ++i) {
        by_pos[key(set.seeds[i])] = set.weights[i];
    }
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto mirror = by_pos.find(key(Point{set.seeds[i].x2, set.seeds[i].x1}));
        REQUIRE(mirror != by_pos.end());
        CHECK(mirror->second == doctest::Approx(set.weights[i]).epsilon(1e-10));
    }
}

TEST_CASE("a cutoff above the peak leaves no seeds") {
    const Grid2D g = make_grid(-10, 10, 40);
    SeedOptions o;
    o.relative_cutoff = 1.0;
    try {
        sample_seeds(correlated_gaussian(g), o);
        FAIL("expected empty_seed_set");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::empty_seed_set);
    }
}

TEST_CASE("Monte Carlo seeds follow the density (chi-square)") {
    const Grid2D g = make_grid(-10, 10, 80);
    const auto f = correlated_gaussian(g);
    SeedOptions o;
    o.scheme = SeedScheme::monte_carlo;
    o.mc_count = 100000;
    const SeedSet set = sample_seeds(f, o);
    REQUIRE(set.size() == o.mc_count);
    CHECK(set.weights.front() == doctest::Approx(1e-5));

    // 10 x 10 bins on [-4, 4)^2 plus one overflow bin. Expected mass from a
    // fine quadrature of the interpolated density the sampler targets.
    const int nb = 10;
    const double lo = -4, hi = 4, w = (hi - lo) / nb;
    std::vector<double> expected(nb * nb + 1, 0.0);
    double total = 0.0;
    const int sub = 6;
    const double hq = g.spacing() / sub;
    for (double x1 = g.x_min() + hq / 2; x1 < g.last_node(); x1 += hq) {
        for (double x2 = g.x_min() + hq / 2; x2 < g.last_node(); x2 += hq) {
            const double rho = std::norm(interpolate(g, f.values(), Point{x1, x2}));
            total += rho;
            const int b1 = static_cast<int>(std::floor((x1 - lo) / w));
            const int b2 = static_cast<int>(std::floor((x2 - lo) / w));
            const bool inside = b1 >= 0 && b1 < nb && b2 >= 0 && b2 < nb;
            expected[inside ? b1 * nb + b2 : nb * nb] += rho;
        }
    }
    std::vector<double> observed(expected.size(), 0.0);
    for (const Point& p : set.seeds) {
        const int b1 = static_cast<int>(std::floor((p.x1 - lo) / w));
        const int b2 = static_cast<int>(std::floor((p.x2 - lo) / w));
        const bool inside = b1 >= 0 && b1 < nb && b2 >= 0 && b2 < nb;
        observed[inside ? b1 * nb + b2 : nb * nb] += 1.0;
    }
    double chi2 = 0.0;
    int df = -1;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const double e = expected[i] / total * static_cast<double>(set.size());
        if (e < 5.0) continue;
        chi2 += (observed[i] - e) * (observed[i] - e) / e;
        ++df;
    }
    // Wilson-Hilferty 99th percentile.
    const double z = 2.3263;
    const double a = 2.0 / (9.0 * df);
    const double critical = df * std::pow(1 - a + z * std::sqrt(a), 3);
    MESSAGE("chi2 = " << chi2 << " with " << df << " dof, 1% critical " << critical);
    CHECK(chi2 < critical);
}

TEST_CASE("classification rule") {
    const ClassifyOptions o;
    CHECK(classify_partner(Direction::left, 2.1, o) == IonizationType::type2);
    CHECK(classify_partner(Direction::left, -1.2, o) == IonizationType::type1);
    CHECK(classify_partner(Direction::right, 2.1, o) == IonizationType::type1);
    CHECK(classify_partner(Direction::right, -1.2, o) == IonizationType::type2);
    CHECK(classify_partner(Direction::left, 0.1, o) == IonizationType::ambiguous);
    CHECK(classify_partner(Direction::right, -0.29, o) == IonizationType::ambiguous);
}

TEST_CASE("detect_and_classify on recorded trajectories") {
    Trajectory t;
    t.samples = {at(0, 1.0, -1.0), at(1, 1.5, -10.0), at(2, 2.1, -20.0), at(3, 2.0, -30.0)};
    auto e = detect_and_classify(t);
    REQUIRE(e.has_value());
    CHECK(e->electron == 2);
    CHECK(e->direction == Direction::left);
    CHECK(e->time == doctest::Approx(1.5));
    CHECK(e->partner_position == doctest::Approx(1.8));
    CHECK(e->type == IonizationType::type2);

    t.samples = {at(0, -1.0, 1.0), at(1, -1.2, -14.0), at(2, -1.2, -16.0)};
    e = detect_and_classify(t);
    REQUIRE(e.has_value());
    CHECK(e->time == doctest::Approx(1.5));
    CHECK(e->type == IonizationType::type1);

    t.samples = {at(0, 1.0, -1.0), at(1, 14.9, -14.9), at(2, 3.0, 2.0)};
    CHECK_FALSE(detect_and_classify(t).has_value());

    // Earliest crossing wins when both leave in the same step.
    t.samples = {at(0, 10.0, -14.0), at(1, 20.0, -16.0)};
    e = detect_and_classify(t);
    REQUIRE(e.has_value());
    CHECK(e->electron == 1);
    CHECK(e->direction == Direction::right);
    CHECK(e->time == doctest::Approx(0.5));
    CHECK(e->type == IonizationType::type2);
}

TEST_CASE("aggregate weighted sums") {
    const RunMetadata meta{2.0, 1e14, TrajectoryMode::full(), 10.0};
    std::vector<SeedOutcome> none(3);
    const auto r0 = aggregate(none, 0.0, meta);
    CHECK(r0.P_type1 == 0.0);
    CHECK(r0.P_type2 == 0.0);
    CHECK(r0.P_traj == 0.0);

    std::vector<SeedOutcome> outs(4);
    outs[0].weight = 0.1;
    outs[0].event = IonizationEvent{1, 5.0, Direction::right, 1.0, IonizationType::type1};
    outs[1].weight = 0.2;
    outs[1].event = IonizationEvent{2, 6.0, Direction::left, 1.0, IonizationType::type2};
    outs[2].weight = 0.05;
    outs[2].event = IonizationEvent{2, 6.0, Direction::left, 0.1, IonizationType::ambiguous};
    outs[3].weight = 0.65;
    const auto r = aggregate(outs, 0.36, meta);
    CHECK(r.P_traj == doctest::Approx(0.35));
    CHECK(r.P_type1 == doctest::Approx(0.1));
    CHECK(r.P_type2 == doctest::Approx(0.2));
    CHECK(r.P_ambiguous == doctest::Approx(0.05));
    CHECK(r.P_type1 + r.P_type2 <= r.P_traj);
    CHECK(r.P_norm == 0.36);

    const auto map = seed_map(r);
    CHECK(map[0].label == "Type1");
    CHECK(map[1].label == "Type2");
    CHECK(map[2].label == "ambiguous");
    CHECK(map[3].label == "none");
    const auto path = fs::temp_directory_path() / "bohmion_seed_map.csv";
    write_seed_map_csv(path, map);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "X1,X2,weight,label,eject_time,cycle");
    fs::remove(path);
}

TEST_CASE("strong-field run: exchange symmetric map, restart equivalence, sweep consistency") {
    const RunSetup setup = small_setup();
    const WaveField& ground = small_ground();
    const SeedSet seeds = sample_seeds(ground, SeedOptions{});
    const double t_end = setup.pulse.t_end;

    EnsembleSimulation full(setup, ground, seeds);
    full.run_until(t_end);
    const auto result = full.result();
    MESSAGE("P_norm " << result.P_norm << " P_traj " << result.P_traj << " T1 " << result.P_type1 << " T2 "
                      << result.P_type2);
    CHECK(result.P_norm > 0.01);
    CHECK(result.P_traj > 0.0);
    CHECK(result.P_type1 + result.P_type2 + result.P_ambiguous == doctest::Approx(result.P_traj));

    SUBCASE("map is exchange symmetric") {
        std::map<std::pair<long, long>, const SeedOutcome*> by_pos;
        const auto key = [](Point p) { return std::make_pair(std::lround(p.x1 * 1e6), std::lround(p.x2 * 1e6)); };
        for (const auto& o : result.outcomes) by_pos[key(o.seed)] = &o;
        int events = 0;
        for (const auto& o : result.outcomes) {
            const SeedOutcome* m = by_pos.at(key(Point{o.seed.x2, o.seed.x1}));
            REQUIRE(o.event.has_value() == m->event.has_value());
            if (o.event) {
                ++events;
                CHECK(o.event->type == m->event->type);
                if (m != &o) {  // diagonal seeds are their own mirror image
                    CHECK(o.event->electron != m->event->electron);
                }
                CHECK(o.event->time == doctest::Approx(m->event->time).epsilon(1e-6));
            }
        }
        CHECK(events > 0);
    }

    SUBCASE("checkpoint restart reproduces the uninterrupted run") {
        EnsembleSimulation first(setup, ground, seeds);
        first.run_until(setup.pulse.period());
        const auto dir = fs::temp_directory_path() / "bohmion_test_checkpoint";
        fs::remove_all(dir);
        write_checkpoint(dir, first.checkpoint());
        EnsembleSimulation resumed(setup, seeds, read_checkpoint(dir));
        CHECK(resumed.time() == doctest::Approx(first.time()));
        resumed.run_until(t_end);
        const auto r2 = resumed.result();
        CHECK(std::abs(r2.P_norm - result.P_norm) < 1e-10);
        CHECK(std::abs(r2.P_traj - result.P_traj) < 1e-10);
        CHECK(r2.P_type1 == result.P_type1);
        fs::remove_all(dir);
    }

    SUBCASE("single-R sweep equals a direct run") {
        RunSetup base = setup;
        const double Rs[] = {2.0};
        const double Is[] = {setup.intensity_w_cm2};
        const auto rows = sweep(base, Rs, Is, SeedOptions{}, RelaxOptions{});
        REQUIRE(rows.size() == 1);
        REQUIRE(rows[0].result.has_value());
        const auto direct = run_point(base, 2.0, setup.intensity_w_cm2, SeedOptions{}, RelaxOptions{});
        CHECK(rows[0].result->P_norm == direct.P_norm);
        CHECK(rows[0].result->P_traj == direct.P_traj);
        CHECK(std::abs(direct.P_norm - result.P_norm) < 1e-10);

        const auto path = fs::temp_directory_path() / "bohmion_pr_curve.csv";
        write_pr_curve_csv(path, rows);
        std::ifstream in(path);
        std::string header;
        std::getline(in, header);
        CHECK(header == "R,intensity,P_total_norm,P_traj,P_type1,P_type2");
        fs::remove(path);
    }
}

TEST_CASE("observers fire at the requested step") {
    RunSetup setup = small_setup();
    const SeedSet seeds = sample_seeds(small_ground(), SeedOptions{});
    EnsembleSimulation sim(setup, small_ground(), seeds);
    double seen = -1.0;
    sim.at_time(1.0, [&](const EnsembleSimulation& s) { seen = s.time(); });
    sim.run_until(2.0);
    CHECK(seen == doctest::Approx(1.0));
    CHECK(sim.step_count() == 100);
}

TEST_CASE("recorded trajectories sample at the record interval") {
    RunSetup setup = small_setup();
    setup.recorded = {0, 3};
    setup.record_interval = 0.5;
    const SeedSet seeds = sample_seeds(small_ground(), SeedOptions{});
    EnsembleSimulation sim(setup, small_ground(), seeds);
    sim.run_until(5.0);
    REQUIRE(sim.recorded().size() == 2);
    CHECK(sim.recorded()[0].samples.size() == 11);
    CHECK(sim.recorded()[1].samples.back().time == doctest::Approx(5.0));
    CHECK(sim.recorded()[1].seed.x1 == seeds.seeds[3].x1);
}
