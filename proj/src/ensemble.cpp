#include "bohmion/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "bohmion/error.hpp"
#include "bohmion/field_io.hpp"
#include "bohmion/integrals.hpp"
#include "bohmion/interpolation.hpp"

namespace bohmion {

namespace {

using nlohmann::json;

SeedSet deterministic_seeds(const WaveField& ground, const SeedOptions& options) {
    const Grid2D& grid = ground.grid();
    const std::size_t n = grid.n();
    const std::size_t s = std::max<std::size_t>(options.stride, 1);
    const auto values = ground.values();
    double peak = 0.0;
    double total = 0.0;
    for (const Complex z : values) {
        peak = std::max(peak, std::norm(z));
        total += std::norm(z);
    }
    total *= grid.cell_area();
    const double cutoff = options.relative_cutoff * peak;

    SeedSet set;
    set.scheme = SeedScheme::deterministic_grid;
    double kept = 0.0;
    for (std::size_t b1 = 0; b1 < n; b1 += s) {
        for (std::size_t b2 = 0; b2 < n; b2 += s) {
            const std::size_t e1 = std::min(b1 + s, n);
            const std::size_t e2 = std::min(b2 + s, n);
            double mass = 0.0;
            double block_peak = 0.0;
            for (std::size_t i1 = b1; i1 < e1; ++i1) {
                for (std::size_t i2 = b2; i2 < e2; ++i2) {
                    const double rho = std::norm(values[grid.index(i1, i2)]);
                    mass += rho;
                    block_peak = std::max(block_peak, rho);
                }
            }
            if (block_peak <= cutoff) {
                continue;
            }
            mass *= grid.cell_area();
            const double c1 = 0.5 * (grid.node(b1) + grid.node(e1 - 1));
            const double c2 = 0.5 * (grid.node(b2) + grid.node(e2 - 1));
            set.seeds.push_back({c1, c2});
            set.weights.push_back(mass);
            kept += mass;
        }
    }
    if (set.seeds.empty() || !(kept > 0.0)) {
        throw Error(ErrorKind::empty_seed_set, "density cutoff excludes every seed block");
    }
    set.tail_mass = total - kept;
    const double scale = total / kept;
    for (double& w : set.weights) {
        w *= scale;
    }
    return set;
}

SeedSet monte_carlo_seeds(const WaveField& ground, const SeedOptions& options) {
    const Grid2D& grid = ground.grid();
    const auto values = ground.values();
    double peak = 0.0;
    for (const Complex z : values) {
        peak = std::max(peak, std::norm(z));
    }
    const double cutoff = options.relative_cutoff * peak;
    double lo = grid.last_node();
    double hi = grid.x_min();
    for (std::size_t i1 = 0; i1 < grid.n(); ++i1) {
        for (std::size_t i2 = 0; i2 < grid.n(); ++i2) {
            if (std::norm(values[grid.index(i1, i2)]) > cutoff) {
                lo = std::min({lo, grid.node(i1), grid.node(i2)});
                hi = std::max({hi, grid.node(i1), grid.node(i2)});
            }
        }
    }
    if (options.mc_count == 0 || !(hi > lo)) {
        throw Error(ErrorKind::empty_seed_set, "no region above the density cutoff to sample from");
    }
    // One cell of margin on each side, clipped to the interpolation domain.
    lo = std::max(lo - grid.spacing(), grid.x_min());
    hi = std::min(hi + grid.spacing(), grid.last_node());
    std::mt19937_64 rng(options.rng_seed);
    std::uniform_real_distribution<double> coord(lo, hi);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double bound = 1.1 * peak;
    SeedSet set;
    set.scheme = SeedScheme::monte_carlo;
    while (set.seeds.size() < options.mc_count) {
        const Point p{coord(rng), coord(rng)};
        const double rho = std::norm(interpolate(grid, values, p));
        if (unit(rng) * bound < rho) {
            set.seeds.push_back(p);
        }
    }
    set.weights.assign(set.seeds.size(), 1.0 / static_cast<double>(set.seeds.size()));
    return set;
}

json event_to_json(const std::optional<IonizationEvent>& e) {
    if (!e) {
        return nullptr;
    }
    return json{{"electron", e->electron},
                {"time", e->time},
                {"direction", e->direction == Direction::left ? "left" : "right"},
                {"partner", e->partner_position},
                {"type", to_string(e->type)}};
}

std::optional<IonizationEvent> event_from_json(const json& j) {
    if (j.is_null()) {
        return std::nullopt;
    }
    IonizationEvent e;
    e.electron = j.at("electron").get<int>();
    e.time = j.at("time").get<double>();
    e.direction = j.at("direction").get<std::string>() == "left" ? Direction::left : Direction::right;
    e.partner_position = j.at("partner").get<double>();
    const auto type = j.at("type").get<std::string>();
    e.type = type == "Type1" ? IonizationType::type1
             : type == "Type2" ? IonizationType::type2
                               : IonizationType::ambiguous;
    return e;
}

json state_to_json(const BohmianState& s) {
    return json::array({s.x.x1, s.x.x2, s.v.v1, s.v.v2, s.time, s.alive1, s.alive2});
}

BohmianState state_from_json(const json& j) {
    BohmianState s;
    s.x = {j.at(0).get<double>(), j.at(1).get<double>()};
    s.v = {j.at(2).get<double>(), j.at(3).get<double>()};
    s.time = j.at(4).get<double>();
    s.alive1 = j.at(5).get<bool>();
    s.alive2 = j.at(6).get<bool>();
    return s;
}

} // namespace

SeedScheme parse_seed_scheme(const std::string& text) {
    if (text == "deterministic-grid" || text == "deterministic_grid" || text == "grid") {
        return SeedScheme::deterministic_grid;
    }
    if (text == "monte-carlo" || text == "monte_carlo" || text == "mc") {
        return SeedScheme::monte_carlo;
    }
    throw Error(ErrorKind::validation, "seed_scheme must be deterministic-grid or monte-carlo, got '" + text + "'");
}

std::string to_string(SeedScheme scheme) {
    return scheme == SeedScheme::deterministic_grid ? "deterministic-grid" : "monte-carlo";
}

SeedSet sample_seeds(const WaveField& ground, const SeedOptions& options) {
    return options.scheme == SeedScheme::deterministic_grid ? deterministic_seeds(ground, options)
                                                            : monte_carlo_seeds(ground, options);
}

std::string to_string(IonizationType type) {
    switch (type) {
    case IonizationType::type1: return "Type1";
    case IonizationType::type2: return "Type2";
    case IonizationType::ambiguous: return "ambiguous";
    }
    return "ambiguous";
}

IonizationType classify_partner(Direction direction, double partner_position,
                                const ClassifyOptions& options) {
    if (std::abs(partner_position) < options.dead_band) {
        return IonizationType::ambiguous;
    }
    const bool partner_left = partner_position < 0.0;
    const bool same_side = (direction == Direction::left) == partner_left;
    return same_side ? IonizationType::type1 : IonizationType::type2;
}

void EventTracker::observe(const BohmianState& previous, const BohmianState& current) {
    if (event_) {
        return;
    }
    const double thr = options_.threshold;
    std::optional<IonizationEvent> best;
    double best_fraction = 2.0;
    for (int e = 1; e <= 2; ++e) {
        const double p = e == 1 ? previous.x.x1 : previous.x.x2;
        const double c = e == 1 ? current.x.x1 : current.x.x2;
        if (std::abs(c) <= thr) {
            continue;
        }
        double f = 0.0;
        if (std::abs(p) <= thr) {
            const double target = std::copysign(thr, c);
            f = (target - p) / (c - p);
        }
        if (f < best_fraction) {
            best_fraction = f;
            const double pp = e == 1 ? previous.x.x2 : previous.x.x1;
            const double pc = e == 1 ? current.x.x2 : current.x.x1;
            IonizationEvent ev;
            ev.electron = e;
            ev.time = previous.time + f * (current.time - previous.time);
            ev.direction = c < 0.0 ? Direction::left : Direction::right;
            ev.partner_position = pp + f * (pc - pp);
            ev.type = classify_partner(ev.direction, ev.partner_position, options_);
            best = ev;
        }
    }
    event_ = best;
}

std::optional<IonizationEvent> detect_and_classify(const Trajectory& trajectory,
                                                   const ClassifyOptions& options) {
    EventTracker tracker(options);
    const auto& samples = trajectory.samples;
    if (samples.empty()) {
        return std::nullopt;
    }
    tracker.observe(samples.front(), samples.front());
    for (std::size_t i = 1; i < samples.size() && !tracker.event(); ++i) {
        tracker.observe(samples[i - 1], samples[i]);
    }
    return tracker.event();
}

EnsembleResult aggregate(std::vector<SeedOutcome> outcomes, double P_norm, RunMetadata metadata) {
    EnsembleResult r;
    r.P_norm = P_norm;
    r.metadata = metadata;
    for (const auto& o : outcomes) {
        if (!o.event) {
            continue;
        }
        r.P_traj += o.weight;
        switch (o.event->type) {
        case IonizationType::type1: r.P_type1 += o.weight; break;
        case IonizationType::type2: r.P_type2 += o.weight; break;
        case IonizationType::ambiguous: r.P_ambiguous += o.weight; break;
        }
    }
    r.outcomes = std::move(outcomes);
    return r;
}

std::vector<SeedMapEntry> seed_map(const EnsembleResult& result) {
    std::vector<SeedMapEntry> map;
    map.reserve(result.outcomes.size());
    for (const auto& o : result.outcomes) {
        SeedMapEntry e;
        e.seed = o.seed;
        e.weight = o.weight;
        e.label = o.event ? to_string(o.event->type) : "none";
        e.eject_time = o.event ? o.event->time : 0.0;
        e.cycle = o.cycle;
        map.push_back(e);
    }
    return map;
}

void write_seed_map_csv(const std::filesystem::path& path, const std::vector<SeedMapEntry>& map) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
    }
    out << "X1,X2,weight,label,eject_time,cycle\n" << std::setprecision(12);
    for (const auto& e : map) {
        out << e.seed.x1 << ',' << e.seed.x2 << ',' << e.weight << ',' << e.label << ',' << e.eject_time
            << ',' << e.cycle << '\n';
    }
    if (!out) {
        throw Error(ErrorKind::io, "write failed for " + path.string());
    }
}

PropagatorOptions effective_propagation(const RunSetup& setup) {
    PropagatorOptions options = setup.propagation;
    if (setup.mode.kind == ModeKind::coulomb_off_after) {
        options.coulomb_off_after = setup.mode.t_switch;
    }
    return options;
}

void write_checkpoint(const std::filesystem::path& dir, const Checkpoint& checkpoint) {
    std::filesystem::create_directories(dir);
    write_field(dir / "field.bin", checkpoint.field);
    json j;
    j["step"] = checkpoint.step;
    j["t0"] = checkpoint.t0;
    j["states"] = json::array();
    for (const auto& s : checkpoint.states) {
        j["states"].push_back(state_to_json(s));
    }
    j["events"] = json::array();
    for (const auto& e : checkpoint.events) {
        j["events"].push_back(event_to_json(e));
    }
    j["recorded"] = json::array();
    for (const auto& t : checkpoint.recorded) {
        json samples = json::array();
        for (const auto& s : t.samples) {
            samples.push_back(state_to_json(s));
        }
        j["recorded"].push_back({{"seed", {t.seed.x1, t.seed.x2}},
                                 {"mode", to_string(t.mode.kind)},
                                 {"t_switch", t.mode.t_switch},
                                 {"samples", samples}});
    }
    std::ofstream out(dir / "state.json");
    if (!out) {
        throw Error(ErrorKind::io, "cannot open " + (dir / "state.json").string());
    }
    out << j.dump();
}

Checkpoint read_checkpoint(const std::filesystem::path& dir) {
    Checkpoint cp;
    cp.field = read_field(dir / "field.bin");
    std::ifstream in(dir / "state.json");
    if (!in) {
        throw Error(ErrorKind::io, "cannot open " + (dir / "state.json").string());
    }
    json j;
    try {
        in >> j;
        cp.step = j.at("step").get<std::uint64_t>();
        cp.t0 = j.at("t0").get<double>();
        for (const auto& s : j.at("states")) {
            cp.states.push_back(state_from_json(s));
        }
        for (const auto& e : j.at("events")) {
            cp.events.push_back(event_from_json(e));
        }
        for (const auto& t : j.at("recorded")) {
            Trajectory traj;
            traj.seed = {t.at("seed").at(0).get<double>(), t.at("seed").at(1).get<double>()};
            traj.mode = {parse_mode_kind(t.at("mode").get<std::string>()), t.at("t_switch").get<double>()};
            for (const auto& s : t.at("samples")) {
                traj.samples.push_back(state_from_json(s));
            }
            cp.recorded.push_back(std::move(traj));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse, "malformed checkpoint " + (dir / "state.json").string() + ": " + e.what());
    }
    return cp;
}

EnsembleSimulation::EnsembleSimulation(RunSetup setup, WaveField initial, SeedSet seeds)
    : setup_(std::move(setup)), seeds_(std::move(seeds)),
      propagator_(setup_.grid, setup_.model, setup_.pulse, effective_propagation(setup_)),
      spectral_(setup_.grid), field_(std::move(initial)) {
    if (!(field_.grid() == setup_.grid)) {
        throw Error(ErrorKind::grid_mismatch, "initial field does not live on the run grid");
    }
    setup_.mode.validate();
    t0_ = field_.time();
    frame_ = VelocityFrame(field_, spectral_);
    states_ = seed_states(seeds_.seeds, t0_);
    refresh_velocities(states_, frame_, setup_.tracer);
    trackers_.assign(states_.size(), EventTracker(setup_.classify));
    for (std::size_t i = 0; i < states_.size(); ++i) {
        trackers_[i].observe(states_[i], states_[i]);
    }
    for (const std::size_t idx : setup_.recorded) {
        if (idx >= states_.size()) {
            throw Error(ErrorKind::validation, "recorded seed index out of range");
        }
        recorded_.push_back(Trajectory{seeds_.seeds[idx], setup_.mode, {states_[idx]}});
    }
    record_stride_ = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::llround(setup_.record_interval / propagator_.dt())));
}

EnsembleSimulation::EnsembleSimulation(RunSetup setup, SeedSet seeds, Checkpoint checkpoint)
    : setup_(std::move(setup)), seeds_(std::move(seeds)),
      propagator_(setup_.grid, setup_.model, setup_.pulse, effective_propagation(setup_)),
      spectral_(setup_.grid), field_(std::move(checkpoint.field)) {
    if (!(field_.grid() == setup_.grid) || checkpoint.states.size() != seeds_.size() ||
        checkpoint.events.size() != seeds_.size()) {
        throw Error(ErrorKind::validation, "checkpoint does not match the run setup");
    }
    t0_ = checkpoint.t0;
    step_ = checkpoint.step;
    frame_ = VelocityFrame(field_, spectral_);
    states_ = std::move(checkpoint.states);
    trackers_.assign(states_.size(), EventTracker(setup_.classify));
    for (std::size_t i = 0; i < trackers_.size(); ++i) {
        trackers_[i].restore(checkpoint.events[i]);
    }
    recorded_ = std::move(checkpoint.recorded);
    record_stride_ = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::llround(setup_.record_interval / propagator_.dt())));
}

std::uint64_t EnsembleSimulation::step_for_time(double t) const {
    const double steps = std::round((t - t0_) / propagator_.dt());
    return steps <= 0.0 ? 0 : static_cast<std::uint64_t>(steps);
}

void EnsembleSimulation::at_time(double time, Observer observer) {
    const auto target = step_for_time(time);
    if (target == step_) {
        observer(*this);
        return;
    }
    if (target > step_) {
        pending_.push_back({target, std::move(observer)});
    }
}

void EnsembleSimulation::step() {
    const std::vector<BohmianState> previous = states_;
    propagator_.advance(field_);
    VelocityFrame next(field_, spectral_);
    advance_trajectories(states_, frame_, next, setup_.model, setup_.pulse, setup_.mode, setup_.tracer);
    for (std::size_t i = 0; i < states_.size(); ++i) {
        trackers_[i].observe(previous[i], states_[i]);
    }
    frame_ = std::move(next);
    ++step_;
    if (step_ % record_stride_ == 0) {
        record_samples();
    }
    fire_observers();
}

void EnsembleSimulation::run_until(double t_end) {
    const auto last = step_for_time(t_end);
    while (step_ < last) {
        step();
    }
}

void EnsembleSimulation::record_samples() {
    for (std::size_t k = 0; k < recorded_.size(); ++k) {
        auto& samples = recorded_[k].samples;
        const BohmianState& s = states_[setup_.recorded[k]];
        if (!samples.empty() && !samples.back().active() && !s.active() &&
            samples.back().time == s.time) {
            continue;
        }
        samples.push_back(s);
    }
}

void EnsembleSimulation::fire_observers() {
    for (auto it = pending_.begin(); it != pending_.end();) {
        if (it->step == step_) {
            auto observer = std::move(it->observer);
            it = pending_.erase(it);
            observer(*this);
        } else {
            ++it;
        }
    }
}

std::vector<SeedOutcome> EnsembleSimulation::outcomes() const {
    std::vector<SeedOutcome> out;
    out.reserve(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i) {
        SeedOutcome o;
        o.seed = seeds_.seeds[i];
        o.weight = seeds_.weights[i];
        o.event = trackers_[i].event();
        o.cycle = o.event ? setup_.pulse.cycle_index(o.event->time) : 0;
        out.push_back(o);
    }
    return out;
}

EnsembleResult EnsembleSimulation::result() const {
    const double p_norm = 1.0 - region_norm(field_, setup_.classify.threshold);
    return aggregate(outcomes(), p_norm,
                     RunMetadata{setup_.model.R, setup_.intensity_w_cm2, setup_.mode, time()});
}

Checkpoint EnsembleSimulation::checkpoint() const {
    Checkpoint cp;
    cp.field = field_;
    cp.step = step_;
    cp.t0 = t0_;
    cp.states = states_;
    for (const auto& t : trackers_) {
        cp.events.push_back(t.event());
    }
    cp.recorded = recorded_;
    return cp;
}

EnsembleResult run_point(const RunSetup& base, double R, double intensity_w_cm2,
                         const SeedOptions& seed_options, const RelaxOptions& relax) {
    RunSetup setup = base;
    setup.model.R = R;
    setup.intensity_w_cm2 = intensity_w_cm2;
    setup.pulse.E0 = field_from_intensity(intensity_w_cm2);
    MolecularModel field_free = setup.model;
    field_free.interelectronic_on = true;
    const EigenSet ground = relax_eigenstates(setup.grid, field_free, 1, relax);
    WaveField initial = ground.states.front();
    initial.set_time(0.0);
    SeedSet seeds = sample_seeds(initial, seed_options);
    EnsembleSimulation sim(setup, std::move(initial), std::move(seeds));
    sim.run_until(setup.pulse.t_end);
    return sim.result();
}

std::vector<SweepRow> sweep(const RunSetup& base, std::span<const double> R_values,
                            std::span<const double> intensities, const SeedOptions& seeds,
                            const RelaxOptions& relax) {
    if (R_values.empty()) {
        throw Error(ErrorKind::validation, "sweep needs at least one R value");
    }
    std::vector<SweepRow> rows;
    for (const double intensity : intensities) {
        for (const double R : R_values) {
            SweepRow row{R, intensity, std::nullopt, {}};
            try {
                row.result = run_point(base, R, intensity, seeds, relax);
                spdlog::info("sweep R = {} I = {:.3e}: P = {:.5f}", R, intensity, row.result->P_norm);
            } catch (const std::exception& e) {
                row.failure = e.what();
                spdlog::error("sweep R = {} I = {:.3e} failed: {}", R, intensity, e.what());
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_pr_curve_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
    }
    out << "R,intensity,P_total_norm,P_traj,P_type1,P_type2\n" << std::setprecision(12);
    for (const auto& row : rows) {
        out << row.R << ',' << row.intensity_w_cm2 << ',';
        if (row.result) {
            out << row.result->P_norm << ',' << row.result->P_traj << ',' << row.result->P_type1 << ','
                << row.result->P_type2 << '\n';
        } else {
            out << "nan,nan,nan,nan\n";
        }
    }
    if (!out) {
        throw Error(ErrorKind::io, "write failed for " + path.string());
    }
}

} // namespace bohmion
