#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bohmion/bohm.hpp"
#include "bohmion/grid.hpp"
#include "bohmion/model.hpp"
#include "bohmion/propagator.hpp"

namespace bohmion {

enum class SeedScheme { deterministic_grid, monte_carlo };

SeedScheme parse_seed_scheme(const std::string& text);
std::string to_string(SeedScheme scheme);

struct SeedOptions {
    SeedScheme scheme = SeedScheme::deterministic_grid;
    std::size_t stride = 4;            ///< grid cells per seed along each axis (deterministic)
    double relative_cutoff = 1e-6;     ///< blocks below this fraction of the peak density are dropped
    std::size_t mc_count = 2000;       ///< draws for the Monte Carlo scheme
    std::uint64_t rng_seed = 20140601;
};

/// Initial positions with their probability weights.
struct SeedSet {
    std::vector<Point> seeds;
    std::vector<double> weights;
    SeedScheme scheme = SeedScheme::deterministic_grid;
    /// Mass of the blocks below the cutoff; it is spread over the kept seeds
    /// in proportion to their own mass so the weights partition the full norm.
    double tail_mass = 0.0;

    std::size_t size() const noexcept { return seeds.size(); }
};

/// Throws Error{empty_seed_set} when the cutoff removes every block.
SeedSet sample_seeds(const WaveField& ground, const SeedOptions& options);

enum class IonizationType { type1, type2, ambiguous };
enum class Direction { left, right };

std::string to_string(IonizationType type);

struct ClassifyOptions {
    double threshold = 15.0;  ///< |x| beyond which an electron counts as ejected
    double dead_band = 0.3;   ///< partner closer than this to the origin: ambiguous
};

struct IonizationEvent {
    int electron = 0;  ///< 1 or 2
    double time = 0.0;
    Direction direction = Direction::left;
    double partner_position = 0.0;
    IonizationType type = IonizationType::ambiguous;
};

/// Type from the partner's side at the moment of ejection: same side as the
/// ejection direction is Type 1 (up-field core), opposite side Type 2.
IonizationType classify_partner(Direction direction, double partner_position,
                                const ClassifyOptions& options);

/// Online detector: feed consecutive states, it keeps the first ejection.
class EventTracker {
public:
    explicit EventTracker(ClassifyOptions options = {}) : options_(options) {}

    void observe(const BohmianState& previous, const BohmianState& current);
    const std::optional<IonizationEvent>& event() const noexcept { return event_; }
    void restore(std::optional<IonizationEvent> event) { event_ = event; }

private:
    ClassifyOptions options_;
    std::optional<IonizationEvent> event_;
};

/// First electron with |x| > threshold defines the event; none if neither does.
std::optional<IonizationEvent> detect_and_classify(const Trajectory& trajectory,
                                                   const ClassifyOptions& options = {});

struct SeedOutcome {
    Point seed;
    double weight = 0.0;
    std::optional<IonizationEvent> event;
    int cycle = 0;  ///< optical cycle of the ejection, 0 without event
};

struct RunMetadata {
    double R = 0.0;
    double intensity_w_cm2 = 0.0;
    TrajectoryMode mode;
    double t_end = 0.0;
};

struct EnsembleResult {
    std::vector<SeedOutcome> outcomes;
    double P_norm = 0.0;       ///< 1 - mass inside |x1|, |x2| < threshold
    double P_traj = 0.0;       ///< weighted mass of ionized seeds
    double P_type1 = 0.0;
    double P_type2 = 0.0;
    double P_ambiguous = 0.0;
    RunMetadata metadata;
};

/// Weighted sums in seed order, so the reduction is reproducible.
EnsembleResult aggregate(std::vector<SeedOutcome> outcomes, double P_norm, RunMetadata metadata);

struct SeedMapEntry {
    Point seed;
    double weight = 0.0;
    std::string label;  ///< Type1, Type2, ambiguous or none
    double eject_time = 0.0;
    int cycle = 0;
};

std::vector<SeedMapEntry> seed_map(const EnsembleResult& result);

void write_seed_map_csv(const std::filesystem::path& path, const std::vector<SeedMapEntry>& map);

/// Everything one (R, intensity) run needs besides the initial state.
struct RunSetup {
    Grid2D grid;
    MolecularModel model;
    LaserPulse pulse;
    double intensity_w_cm2 = 0.0;
    PropagatorOptions propagation;
    TrajectoryMode mode;
    TracerOptions tracer;
    ClassifyOptions classify;
    /// Seeds whose full trajectories are recorded, with this sampling interval.
    std::vector<std::size_t> recorded;
    double record_interval = 1.0;
};

/// Applies the run mode to the propagator options (the Coulomb-off ablation
/// removes the repulsion from the Hamiltonian).
PropagatorOptions effective_propagation(const RunSetup& setup);

/// State of a run that can be written out and resumed bit-for-bit.
struct Checkpoint {
    WaveField field;
    std::uint64_t step = 0;
    double t0 = 0.0;
    std::vector<BohmianState> states;
    std::vector<std::optional<IonizationEvent>> events;
    std::vector<Trajectory> recorded;
};

void write_checkpoint(const std::filesystem::path& dir, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& dir);

/// Real-time propagation with synchronous tracer integration: after every
/// propagator step the field pair (t, t + dt) is published and all tracers
/// advance across it.
class EnsembleSimulation {
public:
    using Observer = std::function<void(const EnsembleSimulation&)>;

    EnsembleSimulation(RunSetup setup, WaveField initial, SeedSet seeds);
    EnsembleSimulation(RunSetup setup, SeedSet seeds, Checkpoint checkpoint);

    /// Calls `observer` once when the run reaches the step nearest to `time`.
    void at_time(double time, Observer observer);

    void step();
    void run_until(double t_end);

    double time() const noexcept { return field_.time(); }
    std::uint64_t step_count() const noexcept { return step_; }
    const WaveField& field() const noexcept { return field_; }
    const RunSetup& setup() const noexcept { return setup_; }
    const SeedSet& seeds() const noexcept { return seeds_; }
    std::span<const BohmianState> states() const noexcept { return states_; }
    const std::vector<Trajectory>& recorded() const noexcept { return recorded_; }

    std::vector<SeedOutcome> outcomes() const;
    EnsembleResult result() const;
    Checkpoint checkpoint() const;

private:
    struct Pending {
        std::uint64_t step;
        Observer observer;
    };

    void record_samples();
    void fire_observers();
    std::uint64_t step_for_time(double t) const;

    RunSetup setup_;
    SeedSet seeds_;
    SplitStepPropagator propagator_;
    Spectral spectral_;
    WaveField field_;
    VelocityFrame frame_;
    std::vector<BohmianState> states_;
    std::vector<EventTracker> trackers_;
    std::vector<Trajectory> recorded_;
    std::vector<Pending> pending_;
    std::uint64_t step_ = 0;
    double t0_ = 0.0;
    std::uint64_t record_stride_ = 1;
};

struct SweepRow {
    double R = 0.0;
    double intensity_w_cm2 = 0.0;
    std::optional<EnsembleResult> result;
    std::string failure;  ///< empty on success
};

/// Builds and runs one (R, intensity) point from `base`: relaxes the ground
/// state, samples seeds and propagates to the pulse's t_end.
EnsembleResult run_point(const RunSetup& base, double R, double intensity_w_cm2,
                         const SeedOptions& seeds, const RelaxOptions& relax);

/// Independent runs over R x intensity; failures are recorded per row.
std::vector<SweepRow> sweep(const RunSetup& base, std::span<const double> R_values,
                            std::span<const double> intensities, const SeedOptions& seeds,
                            const RelaxOptions& relax);

/// pr_curve.csv: R, intensity, P_total_norm, P_traj, P_type1, P_type2.
void write_pr_curve_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

} // namespace bohmion
