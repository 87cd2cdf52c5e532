#include "bohmion/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "bohmion/analytic_gaussian.hpp"
#include "bohmion/error.hpp"
#include "bohmion/field_io.hpp"
#include "bohmion/integrals.hpp"
#include "bohmion/trajectory_io.hpp"

#ifndef BOHMION_VERSION
#define BOHMION_VERSION "unknown"
#endif

namespace bohmion {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex(const unsigned char* data, std::size_t n) {
    std::ostringstream os;
    for (std::size_t i = 0; i < n; ++i) {
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(data[i]);
    }
    return os.str();
}

std::string sha256_text(const std::string& text) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr);
    return hex(digest, length);
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw Error(ErrorKind::io, "cannot create output directory " + dir.string() + ": " + ec.message());
    }
    const fs::path probe = dir / ".write_probe";
    {
        std::ofstream out(probe);
        if (!out) {
            throw Error(ErrorKind::io, "output directory " + dir.string() + " is not writable");
        }
    }
    fs::remove(probe, ec);
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw Error(ErrorKind::io, "write failed for " + path.string());
    }
}

std::string number_tag(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

/// Inventory of files a run writes, in write order.
class OutputLog {
public:
    explicit OutputLog(fs::path root) : root_(std::move(root)) {}

    void add(const fs::path& path) { files_.push_back(path); }
    void add(const std::vector<fs::path>& paths) { files_.insert(files_.end(), paths.begin(), paths.end()); }

    std::vector<FileRecord> records() const {
        std::vector<FileRecord> out;
        for (const auto& f : files_) {
            if (!fs::exists(f)) {
                continue;
            }
            out.push_back({fs::relative(f, root_).generic_string(), sha256_file(f), fs::file_size(f)});
        }
        return out;
    }

    const fs::path& root() const noexcept { return root_; }

private:
    fs::path root_;
    std::vector<fs::path> files_;
};

json records_json(const std::vector<FileRecord>& records) {
    json files = json::array();
    for (const auto& r : records) {
        files.push_back({{"path", r.path}, {"sha256", r.sha256}, {"bytes", r.bytes}});
    }
    return files;
}

/// Eigenstates for (config, R), reused from `dir` when a matching set exists.
EigenSet load_or_relax(const RunConfig& config, double R, const fs::path& dir, OutputLog& log) {
    const Grid2D grid = make_grid_with_spacing(config.box_half_extent, config.spacing);
    const json key = {{"R", R},
                      {"alpha", config.alpha},
                      {"p", config.p},
                      {"box_half_extent", config.box_half_extent},
                      {"spacing", config.spacing},
                      {"states", config.relax_states},
                      {"relax_dt", config.relax_dt},
                      {"relax_tolerance", config.relax_tolerance}};
    const fs::path meta = dir / "eigenset.json";
    if (fs::exists(meta)) {
        try {
            std::ifstream in(meta);
            const json stored = json::parse(in);
            if (stored == key) {
                EigenSet set = read_eigenset(dir);
                if (set.states.size() == config.relax_states && set.states.front().grid() == grid) {
                    spdlog::info("reusing eigenstates from {}", dir.string());
                    return set;
                }
            }
        } catch (const std::exception& e) {
            spdlog::warn("ignoring unreadable eigenset in {}: {}", dir.string(), e.what());
        }
    }
    spdlog::info("relaxing {} eigenstates at R = {}", config.relax_states, R);
    EigenSet set = relax_eigenstates(grid, model_from(config, R), config.relax_states, relax_options_from(config));
    for (std::size_t k = 0; k < set.energies.size(); ++k) {
        spdlog::info("  E{} = {:.10f}", k, set.energies[k]);
    }
    ensure_directory(dir);
    write_eigenset(dir, set);
    write_json(meta, key);
    for (std::size_t k = 0; k < set.states.size(); ++k) {
        log.add(dir / ("state_" + std::to_string(k) + ".bin"));
    }
    log.add(dir / "energies.csv");
    log.add(meta);
    return set;
}

struct ProjectionRow {
    double time;
    Projection projection;
};

json projections_json(const std::vector<ProjectionRow>& rows) {
    json j = json::array();
    for (const auto& r : rows) {
        j.push_back({{"t", r.time}, {"a", r.projection.amplitudes}, {"phi", r.projection.phases}});
    }
    return j;
}

std::vector<ProjectionRow> projections_from_json(const json& j) {
    std::vector<ProjectionRow> rows;
    for (const auto& r : j) {
        rows.push_back({r.at("t").get<double>(),
                        Projection{r.at("a").get<std::vector<double>>(), r.at("phi").get<std::vector<double>>()}});
    }
    return rows;
}

void write_projections_csv(const fs::path& path, const std::vector<ProjectionRow>& rows,
                           const std::vector<double>& energies) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
    }
    out << "t,state,energy,amplitude,phase\n" << std::setprecision(12);
    for (const auto& r : rows) {
        for (std::size_t k = 0; k < r.projection.amplitudes.size(); ++k) {
            out << r.time << ',' << k << ',' << energies[k] << ',' << r.projection.amplitudes[k] << ','
                << r.projection.phases[k] << '\n';
        }
    }
}

std::vector<std::size_t> nearest_seeds(const SeedSet& seeds, const std::vector<Point>& points) {
    std::vector<std::size_t> indices;
    for (const Point& p : points) {
        std::size_t best = 0;
        double best_d = INFINITY;
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            const double d = std::hypot(seeds.seeds[i].x1 - p.x1, seeds.seeds[i].x2 - p.x2);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        indices.push_back(best);
    }
    return indices;
}

void write_summary(const fs::path& path, const EnsembleResult& r, std::size_t seed_count) {
    write_json(path, {{"R", r.metadata.R},
                      {"intensity_W_cm2", r.metadata.intensity_w_cm2},
                      {"mode", mode_label(r.metadata.mode)},
                      {"t_end", r.metadata.t_end},
                      {"seeds", seed_count},
                      {"P_total_norm", r.P_norm},
                      {"P_traj", r.P_traj},
                      {"P_type1", r.P_type1},
                      {"P_type2", r.P_type2},
                      {"P_ambiguous", r.P_ambiguous}});
}

void run_relax(const RunConfig& config, OutputLog& log) {
    const double R = config.R.value_or(config.R_values.front());
    load_or_relax(config, R, log.root() / "eigenset", log);
}

void run_propagate(const RunConfig& config, OutputLog& log) {
    const double R = config.R.value_or(config.R_values.front());
    const EigenSet eig = load_or_relax(config, R, log.root() / "eigenset", log);
    const RunSetup setup = setup_from(config, R, config.intensity_w_cm2);
    const SplitStepPropagator propagator(setup.grid, setup.model, setup.pulse, setup.propagation);
    WaveField field = eig.states.front();
    field.set_time(0.0);

    const fs::path snap_dir = log.root() / "snapshots";
    ensure_directory(snap_dir);
    const auto steps_per_snapshot =
        std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(config.snapshot_stride / config.dt)));
    const auto total_steps = static_cast<std::uint64_t>(std::llround(config.t_end / config.dt));

    const fs::path norm_path = log.root() / "norm.csv";
    std::ofstream norm(norm_path);
    if (!norm) {
        throw Error(ErrorKind::io, "cannot open " + norm_path.string() + " for writing");
    }
    norm << "t,norm,P_total_norm\n" << std::setprecision(12);
    log.add(norm_path);

    std::size_t index = 0;
    auto take_snapshot = [&] {
        std::ostringstream stem;
        stem << "snap_" << std::setw(5) << std::setfill('0') << index++;
        const SnapshotRecord rec = snapshot(field, &eig, snap_dir / stem.str(), config.snapshot_csv_stride);
        log.add(rec.field_path);
        log.add(rec.grid_csv_path);
        if (rec.projection_path) {
            log.add(*rec.projection_path);
        }
        norm << field.time() << ',' << rec.norm << ',' << 1.0 - region_norm(field, config.threshold) << '\n';
    };
    take_snapshot();
    for (std::uint64_t s = 1; s <= total_steps; ++s) {
        propagator.advance(field);
        if (s % steps_per_snapshot == 0 || s == total_steps) {
            take_snapshot();
        }
    }
    norm.close();
    if (!norm) {
        throw Error(ErrorKind::io, "write failed for " + norm_path.string());
    }
}

void write_pr_row(const fs::path& path, double R, double intensity, const EnsembleResult& r) {
    SweepRow row{R, intensity, r, {}};
    write_pr_curve_csv(path, {row});
}

void run_trajectories(const RunConfig& config, OutputLog& log) {
    const double R = config.R.value_or(config.R_values.front());
    const PointRun run = run_trajectory_point(config, R, config.intensity_w_cm2, log.root());
    log.add(run.files);
    const fs::path pr = log.root() / "pr_curve.csv";
    write_pr_row(pr, R, config.intensity_w_cm2, run.result);
    log.add(pr);
}

void run_sweep(const RunConfig& config, OutputLog& log) {
    std::vector<double> Rs = config.R_values;
    if (Rs.empty()) {
        Rs.push_back(*config.R);
    }
    std::vector<SweepRow> rows;
    std::vector<std::string> failures;
    std::optional<ErrorKind> first_kind;
    for (const double intensity : config.intensities) {
        for (const double R : Rs) {
            const std::string tag = "R" + number_tag(R) + "_I" + number_tag(intensity);
            SweepRow row{R, intensity, std::nullopt, {}};
            try {
                const PointRun run = run_trajectory_point(config, R, intensity, log.root() / tag, "");
                log.add(run.files);
                row.result = run.result;
                spdlog::info("sweep {}: P = {:.6f}, P_traj = {:.6f}", tag, run.result.P_norm, run.result.P_traj);
            } catch (const Error& e) {
                row.failure = e.what();
                failures.push_back(tag + ": " + e.what());
                if (!first_kind) {
                    first_kind = e.kind();
                }
                spdlog::error("sweep {} failed: {}", tag, e.what());
            }
            rows.push_back(std::move(row));
        }
    }
    const fs::path pr = log.root() / "pr_curve.csv";
    write_pr_curve_csv(pr, rows);
    log.add(pr);
    if (!failures.empty()) {
        std::string message = std::to_string(failures.size()) + " sweep point(s) failed";
        for (const auto& f : failures) {
            message += "; " + f;
        }
        throw Error(*first_kind, message);
    }
}

void run_demo(const RunConfig&, OutputLog& log) {
    const analytic::DemoOptions options;
    const analytic::DemoResult demo = analytic::run_appendix_demo(options);
    const fs::path sym = log.root() / "appendix_symmetrized.csv";
    const fs::path prod = log.root() / "appendix_product.csv";
    write_trajectory_csv(sym, demo.symmetrized);
    write_trajectory_csv(prod, demo.product);
    const auto packet = [](const analytic::GaussianPacketParams& g) {
        return json{{"alpha0", g.alpha0}, {"p", g.p}, {"xc0", g.xc0}};
    };
    const fs::path params = log.root() / "appendix_params.json";
    write_json(params, {{"packet1", packet(options.packet1)},
                        {"packet2", packet(options.packet2)},
                        {"t_end", options.t_end},
                        {"dt", options.dt},
                        {"sample_every", options.sample_every},
                        {"integrator", "rk4"},
                        {"min_separation_symmetrized", check_non_crossing(demo.symmetrized)},
                        {"min_separation_product", check_non_crossing(demo.product)}});
    log.add({sym, prod, params});
}

} // namespace

Command parse_command(const std::string& text) {
    if (text == "relax") return Command::relax;
    if (text == "propagate") return Command::propagate;
    if (text == "trajectories") return Command::trajectories;
    if (text == "sweep") return Command::sweep;
    if (text == "appendix-demo") return Command::appendix_demo;
    throw Error(ErrorKind::validation, "unknown command '" + text + "'");
}

std::string to_string(Command command) {
    switch (command) {
    case Command::relax: return "relax";
    case Command::propagate: return "propagate";
    case Command::trajectories: return "trajectories";
    case Command::sweep: return "sweep";
    case Command::appendix_demo: return "appendix-demo";
    }
    return "unknown";
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io, "cannot read " + path.string() + " for checksumming");
    }
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    std::vector<char> buffer(1 << 16);
    while (in) {
        in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
        EVP_DigestUpdate(ctx, buffer.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_DigestFinal_ex(ctx, digest, &length);
    EVP_MD_CTX_free(ctx);
    return hex(digest, length);
}

std::string config_fingerprint(const RunConfig& config, double R, double intensity_w_cm2) {
    auto view = describe(config);
    view.erase("output_dir");
    view.erase("R_values");
    view.erase("intensities");
    view["R"] = number_tag(R);
    view["intensity_W_cm2"] = number_tag(intensity_w_cm2);
    std::string points;
    for (const Point& p : config.record_points) {
        points += number_tag(p.x1) + ":" + number_tag(p.x2) + ",";
    }
    view["record_points"] = points;
    view["record_interval"] = number_tag(config.record_interval);
    return sha256_text(json(view).dump());
}

PointRun run_trajectory_point(const RunConfig& config, double R, double intensity_w_cm2, const fs::path& dir,
                              const std::string& file_suffix, std::optional<double> halt_after) {
    ensure_directory(dir);
    OutputLog log(dir);
    const EigenSet eig = load_or_relax(config, R, dir / "eigenset", log);

    RunSetup setup = setup_from(config, R, intensity_w_cm2);
    WaveField initial = eig.states.front();
    initial.set_time(0.0);
    SeedSet seeds = sample_seeds(initial, seed_options_from(config));
    setup.recorded = nearest_seeds(seeds, config.record_points);
    spdlog::info("R = {}, I = {:.3e}: {} seeds, tail mass {:.2e}", R, intensity_w_cm2, seeds.size(), seeds.tail_mass);

    const fs::path cp_dir = dir / "checkpoint";
    const std::string fingerprint = config_fingerprint(config, R, intensity_w_cm2);
    std::vector<ProjectionRow> projections;
    std::optional<EnsembleSimulation> sim;
    PointRun run;
    if (fs::exists(cp_dir / "meta.json")) {
        try {
            std::ifstream in(cp_dir / "meta.json");
            const json meta = json::parse(in);
            if (meta.at("fingerprint").get<std::string>() == fingerprint) {
                projections = projections_from_json(meta.at("projections"));
                sim.emplace(setup, seeds, read_checkpoint(cp_dir));
                run.resumed = true;
                spdlog::info("resuming from checkpoint at t = {:.3f}", sim->time());
            } else {
                spdlog::warn("checkpoint in {} belongs to a different configuration, starting over", cp_dir.string());
            }
        } catch (const std::exception& e) {
            spdlog::warn("ignoring unreadable checkpoint in {}: {}", cp_dir.string(), e.what());
        }
    }
    if (!sim) {
        sim.emplace(setup, initial, seeds);
    }

    for (const double t : config.projection_times) {
        if (t > sim->time() + 0.5 * config.dt && t <= config.t_end) {
            sim->at_time(t, [&projections, &eig](const EnsembleSimulation& s) {
                projections.push_back({s.time(), project(s.field(), eig)});
            });
        } else if (!run.resumed && std::abs(t - sim->time()) <= 0.5 * config.dt) {
            projections.push_back({sim->time(), project(sim->field(), eig)});
        }
    }

    const double interval = config.checkpoint_interval;
    while (sim->time() < config.t_end - 0.5 * config.dt) {
        const double next = std::min(config.t_end, (std::floor(sim->time() / interval + 1e-9) + 1.0) * interval);
        sim->run_until(next);
        if (sim->time() < config.t_end - 0.5 * config.dt) {
            const fs::path tmp = dir / "checkpoint.tmp";
            fs::remove_all(tmp);
            write_checkpoint(tmp, sim->checkpoint());
            write_json(tmp / "meta.json", {{"fingerprint", fingerprint}, {"projections", projections_json(projections)}});
            fs::remove_all(cp_dir);
            fs::rename(tmp, cp_dir);
            const auto r = sim->result();
            spdlog::info("t = {:.1f}: P = {:.6f}, P_traj = {:.6f}", sim->time(), r.P_norm, r.P_traj);
            if (halt_after && sim->time() >= *halt_after - 0.5 * config.dt) {
                run.halted = true;
                run.result = r;
                return run;
            }
        }
    }

    run.result = sim->result();
    const fs::path seed_map_path = dir / ("seed_map" + file_suffix + ".csv");
    write_seed_map_csv(seed_map_path, seed_map(run.result));
    log.add(seed_map_path);

    const auto& recorded = sim->recorded();
    if (!recorded.empty()) {
        if (config.trajectory_files == TrajectoryFiles::concatenated) {
            const fs::path path = dir / ("trajectories" + file_suffix + ".csv");
            write_trajectories_csv(path, recorded, setup.recorded);
            log.add(path);
        } else {
            for (std::size_t k = 0; k < recorded.size(); ++k) {
                const fs::path path = dir / ("trajectory" + file_suffix + "_seed" + std::to_string(setup.recorded[k]) + ".csv");
                write_trajectory_csv(path, recorded[k]);
                log.add(path);
            }
        }
    }
    if (!projections.empty()) {
        const fs::path path = dir / ("projections" + file_suffix + ".csv");
        write_projections_csv(path, projections, eig.energies);
        log.add(path);
    }
    const fs::path summary = dir / ("summary" + file_suffix + ".json");
    write_summary(summary, run.result, seeds.size());
    log.add(summary);
    fs::remove_all(cp_dir);

    for (const auto& rec : log.records()) {
        run.files.push_back(dir / rec.path);
    }
    return run;
}

RunManifest run_pipeline(const RunConfig& config, Command command) {
    validate_config(config);
    const auto start = std::chrono::steady_clock::now();
    ensure_directory(config.output_dir);
    OutputLog log(config.output_dir);
    fs::remove(config.output_dir / "manifest.json");
    fs::remove(config.output_dir / "failure.json");

    RunManifest manifest;
    manifest.command = to_string(command);
    manifest.config = describe(config);
    manifest.version = BOHMION_VERSION;
    try {
        switch (command) {
        case Command::relax: run_relax(config, log); break;
        case Command::propagate: run_propagate(config, log); break;
        case Command::trajectories: run_trajectories(config, log); break;
        case Command::sweep: run_sweep(config, log); break;
        case Command::appendix_demo: run_demo(config, log); break;
        }
    } catch (const std::exception& e) {
        const auto* err = dynamic_cast<const Error*>(&e);
        write_json(config.output_dir / "failure.json",
                   {{"command", manifest.command},
                    {"kind", err ? static_cast<int>(err->kind()) : -1},
                    {"exit_code", err ? exit_code_for(err->kind()) : 1},
                    {"message", e.what()},
                    {"partial_files", records_json(log.records())}});
        throw;
    }
    manifest.files = log.records();
    manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_json(config.output_dir / "manifest.json", {{"command", manifest.command},
                                                     {"version", manifest.version},
                                                     {"wall_seconds", manifest.wall_seconds},
                                                     {"config", manifest.config},
                                                     {"files", records_json(manifest.files)}});
    return manifest;
}

} // namespace bohmion
