#include "bohmion/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "bohmion/error.hpp"
#include "bohmion/grid.hpp"

namespace bohmion {

namespace {

struct Entry {
    std::string value;
    std::size_t line = 0;
};

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, sep)) {
        part = trim(part);
        if (!part.empty()) {
            parts.push_back(part);
        }
    }
    return parts;
}

[[noreturn]] void bad_value(const std::string& origin, const std::string& key, const Entry& e,
                            const std::string& expected) {
    throw Error(ErrorKind::parse, origin + ":" + std::to_string(e.line) + ": " + key + " = '" + e.value +
                                      "': expected " + expected);
}

bool parse_number(const std::string& text, double& out) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

class Reader {
public:
    Reader(std::map<std::string, Entry> entries, std::string origin)
        : entries_(std::move(entries)), origin_(std::move(origin)) {}

    void number(const std::string& key, double& out) {
        if (auto* e = take(key)) {
            if (!parse_number(e->value, out)) {
                bad_value(origin_, key, *e, "a number");
            }
        }
    }

    void number(const std::string& key, std::optional<double>& out) {
        if (auto* e = take(key)) {
            double v = 0.0;
            if (!parse_number(e->value, v)) {
                bad_value(origin_, key, *e, "a number");
            }
            out = v;
        }
    }

    template <class Int>
    void integer(const std::string& key, Int& out) {
        if (auto* e = take(key)) {
            const char* last = e->value.data() + e->value.size();
            auto [ptr, ec] = std::from_chars(e->value.data(), last, out);
            if (ec != std::errc() || ptr != last) {
                bad_value(origin_, key, *e, "a non-negative integer");
            }
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (auto* e = take(key)) {
            std::string v = e->value;
            std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
            if (v == "true" || v == "1" || v == "yes" || v == "on") {
                out = true;
            } else if (v == "false" || v == "0" || v == "no" || v == "off") {
                out = false;
            } else {
                bad_value(origin_, key, *e, "true or false");
            }
        }
    }

    /// A time in a.u. or in optical periods with a trailing T.
    void time(const std::string& key, double period, std::optional<double>& out) {
        if (auto* e = take(key)) {
            out = parse_time(key, *e, period);
        }
    }

    void time(const std::string& key, double period, double& out) {
        if (auto* e = take(key)) {
            out = parse_time(key, *e, period);
        }
    }

    void times(const std::string& key, double period, std::vector<double>& out) {
        if (auto* e = take(key)) {
            out.clear();
            for (const auto& part : split(e->value, ',')) {
                out.push_back(parse_time(key, Entry{part, e->line}, period));
            }
        }
    }

    void numbers(const std::string& key, std::vector<double>& out) {
        if (auto* e = take(key)) {
            out.clear();
            for (const auto& part : split(e->value, ',')) {
                double v = 0.0;
                if (!parse_number(part, v)) {
                    bad_value(origin_, key, *e, "a comma-separated list of numbers");
                }
                out.push_back(v);
            }
        }
    }

    void points(const std::string& key, std::vector<Point>& out) {
        if (auto* e = take(key)) {
            out.clear();
            for (const auto& part : split(e->value, ',')) {
                const auto xy = split(part, ':');
                Point p;
                if (xy.size() != 2 || !parse_number(xy[0], p.x1) || !parse_number(xy[1], p.x2)) {
                    bad_value(origin_, key, *e, "a comma-separated list of x1:x2 pairs");
                }
                out.push_back(p);
            }
        }
    }

    template <class T>
    void enumeration(const std::string& key, T& out, const std::function<T(const std::string&)>& parse) {
        if (auto* e = take(key)) {
            try {
                out = parse(e->value);
            } catch (const Error& err) {
                throw Error(ErrorKind::validation,
                            origin_ + ":" + std::to_string(e->line) + ": " + key + ": " + err.what());
            }
        }
    }

    void text(const std::string& key, std::filesystem::path& out) {
        if (auto* e = take(key)) {
            out = e->value;
        }
    }

    void reject_unknown() const {
        for (const auto& [key, e] : entries_) {
            if (!used_.contains(key)) {
                throw Error(ErrorKind::parse,
                            origin_ + ":" + std::to_string(e.line) + ": unknown key '" + key + "'");
            }
        }
    }

private:
    const Entry* take(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            return nullptr;
        }
        used_.insert(key);
        return &it->second;
    }

    double parse_time(const std::string& key, const Entry& e, double period) const {
        std::string v = e.value;
        double scale = 1.0;
        if (!v.empty() && (v.back() == 'T' || v.back() == 't')) {
            v.pop_back();
            v = trim(v);
            scale = period;
        }
        double x = 0.0;
        if (!parse_number(v, x)) {
            bad_value(origin_, key, e, "a time in a.u. or optical periods (e.g. 6.2T)");
        }
        return x * scale;
    }

    std::map<std::string, Entry> entries_;
    std::string origin_;
    std::set<std::string> used_;
};

[[noreturn]] void invalid(const std::string& key, const std::string& what) {
    throw Error(ErrorKind::validation, "invalid value for " + key + ": " + what);
}

void require_positive(const std::string& key, double v) {
    if (!(v > 0.0)) {
        invalid(key, "must be positive, got " + std::to_string(v));
    }
}

TrajectoryFiles parse_trajectory_files(const std::string& text) {
    if (text == "concatenated") {
        return TrajectoryFiles::concatenated;
    }
    if (text == "per_seed" || text == "per-seed") {
        return TrajectoryFiles::per_seed;
    }
    throw Error(ErrorKind::validation, "expected concatenated or per_seed, got '" + text + "'");
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += (i ? "," : "") + fmt(v[i]);
    }
    return s;
}

} // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
    std::map<std::string, Entry> entries;
    std::vector<std::pair<std::string, std::string>> raw;
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string body = trim(line);
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::parse, origin + ":" + std::to_string(number) + ": expected key = value, got '" +
                                              body + "'");
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) {
            throw Error(ErrorKind::parse, origin + ":" + std::to_string(number) + ": missing key before '='");
        }
        if (value.empty()) {
            throw Error(ErrorKind::parse, origin + ":" + std::to_string(number) + ": missing value for " + key);
        }
        if (entries.contains(key)) {
            throw Error(ErrorKind::parse, origin + ":" + std::to_string(number) + ": duplicate key " + key +
                                              " (first on line " + std::to_string(entries[key].line) + ")");
        }
        entries[key] = Entry{value, number};
        raw.emplace_back(key, value);
    }

    RunConfig c;
    c.raw = std::move(raw);
    Reader r(std::move(entries), origin);
    // Period-suffixed times need the wavelength first.
    r.number("wavelength_nm", c.wavelength_nm);
    require_positive("wavelength_nm", c.wavelength_nm);
    c.omega = omega_from_wavelength_nm(c.wavelength_nm);
    c.period = 2.0 * 3.14159265358979323846 / c.omega;

    r.number("R", c.R);
    r.number("alpha", c.alpha);
    r.number("p", c.p);
    r.number("intensity_W_cm2", c.intensity_w_cm2);
    r.number("ramp_cycles", c.ramp_cycles);
    r.enumeration<RampShape>("ramp_shape", c.ramp_shape, parse_ramp_shape);
    r.time("t_end", c.period, c.t_end);
    r.number("box_half_extent", c.box_half_extent);
    r.number("spacing", c.spacing);
    r.number("dt", c.dt);
    r.boolean("absorber_on", c.absorber_on);
    r.number("absorber_fraction", c.absorber_fraction);
    r.number("absorber_power", c.absorber_power);
    r.integer("relax_states", c.relax_states);
    r.number("relax_dt", c.relax_dt);
    r.number("relax_tolerance", c.relax_tolerance);
    r.integer("relax_max_iterations", c.relax_max_iterations);
    r.enumeration<ModeKind>("mode", c.mode, parse_mode_kind);
    r.time("t_switch", c.period, c.t_switch);
    r.time("coulomb_off_after", c.period, c.coulomb_off_after);
    r.enumeration<SeedScheme>("seed_scheme", c.seed_scheme, parse_seed_scheme);
    r.integer("seed_stride", c.seed_stride);
    r.number("seed_cutoff", c.seed_cutoff);
    r.integer("mc_count", c.mc_count);
    r.integer("rng_seed", c.rng_seed);
    r.number("tracking_limit", c.tracking_limit);
    r.number("threshold", c.threshold);
    r.number("dead_band", c.dead_band);
    r.points("record_points", c.record_points);
    r.time("record_interval", c.period, c.record_interval);
    r.enumeration<TrajectoryFiles>("trajectory_files", c.trajectory_files, parse_trajectory_files);
    r.times("projection_times", c.period, c.projection_times);
    r.time("snapshot_stride", c.period, c.snapshot_stride);
    r.integer("snapshot_csv_stride", c.snapshot_csv_stride);
    r.time("checkpoint_interval", c.period, c.checkpoint_interval);
    r.numbers("R_values", c.R_values);
    r.numbers("intensities", c.intensities);
    r.text("output_dir", c.output_dir);
    r.reject_unknown();

    if (c.snapshot_stride == 0.0) {
        c.snapshot_stride = 0.05 * c.period;
    }
    if (c.checkpoint_interval == 0.0) {
        c.checkpoint_interval = c.period;
    }
    if (c.intensities.empty()) {
        c.intensities.push_back(c.intensity_w_cm2);
    }
    c.E0 = field_from_intensity(c.intensity_w_cm2);
    validate_config(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::io, "cannot read config file " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.string());
}

void validate_config(const RunConfig& c) {
    if (!c.R && c.R_values.empty()) {
        invalid("R", "required (or give R_values for a sweep)");
    }
    if (c.R && !(*c.R >= 0.0)) {
        invalid("R", "must be non-negative");
    }
    for (const double R : c.R_values) {
        if (!(R >= 0.0)) {
            invalid("R_values", "entries must be non-negative");
        }
    }
    for (const double I : c.intensities) {
        if (!(I >= 0.0)) {
            invalid("intensities", "entries must be non-negative");
        }
    }
    require_positive("alpha", c.alpha);
    require_positive("p", c.p);
    require_positive("wavelength_nm", c.wavelength_nm);
    if (!(c.intensity_w_cm2 >= 0.0)) {
        invalid("intensity_W_cm2", "must be non-negative");
    }
    if (!(c.ramp_cycles >= 0.0)) {
        invalid("ramp_cycles", "must be non-negative");
    }
    require_positive("t_end", c.t_end);
    require_positive("box_half_extent", c.box_half_extent);
    require_positive("spacing", c.spacing);
    require_positive("dt", c.dt);
    if (!(c.absorber_fraction > 0.0 && c.absorber_fraction < 1.0)) {
        invalid("absorber_fraction", "must lie in (0, 1)");
    }
    require_positive("absorber_power", c.absorber_power);
    if (c.relax_states == 0) {
        invalid("relax_states", "must be at least 1");
    }
    require_positive("relax_dt", c.relax_dt);
    require_positive("relax_tolerance", c.relax_tolerance);
    if (c.mode != ModeKind::full && !c.t_switch) {
        invalid("t_switch", "required for mode " + to_string(c.mode));
    }
    if (c.mode == ModeKind::full && c.t_switch) {
        invalid("t_switch", "only meaningful for the ablation modes");
    }
    if (c.t_switch && !(*c.t_switch >= 0.0)) {
        invalid("t_switch", "must be non-negative");
    }
    if (c.seed_stride == 0) {
        invalid("seed_stride", "must be at least 1");
    }
    if (!(c.seed_cutoff >= 0.0 && c.seed_cutoff < 1.0)) {
        invalid("seed_cutoff", "must lie in [0, 1)");
    }
    if (c.seed_scheme == SeedScheme::monte_carlo && c.mc_count == 0) {
        invalid("mc_count", "must be at least 1");
    }
    require_positive("threshold", c.threshold);
    require_positive("tracking_limit", c.tracking_limit);
    if (c.tracking_limit <= c.threshold) {
        invalid("tracking_limit", "must exceed threshold");
    }
    if (!(c.dead_band >= 0.0)) {
        invalid("dead_band", "must be non-negative");
    }
    require_positive("record_interval", c.record_interval);
    require_positive("snapshot_stride", c.snapshot_stride);
    require_positive("checkpoint_interval", c.checkpoint_interval);
    if (c.snapshot_csv_stride == 0) {
        invalid("snapshot_csv_stride", "must be at least 1");
    }
    for (const double t : c.projection_times) {
        if (!(t >= 0.0)) {
            invalid("projection_times", "entries must be non-negative");
        }
    }
    if (c.output_dir.empty()) {
        invalid("output_dir", "must not be empty");
    }
    try {
        (void)make_grid_with_spacing(c.box_half_extent, c.spacing);
    } catch (const Error& e) {
        invalid("box_half_extent", e.what());
    }
    if (c.threshold >= c.box_half_extent * (1.0 - c.absorber_fraction)) {
        invalid("threshold", "must lie inside the absorber onset");
    }
}

MolecularModel model_from(const RunConfig& c, double R) {
    MolecularModel m{R, c.alpha, c.p, true};
    m.validate();
    return m;
}

LaserPulse pulse_from(const RunConfig& c, double intensity_w_cm2) {
    return LaserPulse::from_lab(c.wavelength_nm, intensity_w_cm2, c.ramp_cycles, c.ramp_shape, c.t_end);
}

TrajectoryMode mode_from(const RunConfig& c) {
    TrajectoryMode mode{c.mode, c.t_switch.value_or(0.0)};
    mode.validate();
    return mode;
}

RunSetup setup_from(const RunConfig& c, double R, double intensity_w_cm2) {
    RunSetup s;
    s.grid = make_grid_with_spacing(c.box_half_extent, c.spacing);
    s.model = model_from(c, R);
    s.pulse = pulse_from(c, intensity_w_cm2);
    s.intensity_w_cm2 = intensity_w_cm2;
    s.propagation.dt = c.dt;
    s.propagation.absorber = AbsorberOptions{c.absorber_on, c.absorber_fraction, c.absorber_power};
    s.propagation.coulomb_off_after = c.coulomb_off_after;
    s.mode = mode_from(c);
    s.tracer.dt = c.dt;
    s.tracer.tracking_limit = c.tracking_limit;
    s.classify = ClassifyOptions{c.threshold, c.dead_band};
    s.record_interval = c.record_interval;
    return s;
}

SeedOptions seed_options_from(const RunConfig& c) {
    return SeedOptions{c.seed_scheme, c.seed_stride, c.seed_cutoff, c.mc_count, c.rng_seed};
}

RelaxOptions relax_options_from(const RunConfig& c) {
    RelaxOptions r;
    r.dt = c.relax_dt;
    r.tolerance = c.relax_tolerance;
    r.max_iterations = c.relax_max_iterations;
    return r;
}

std::map<std::string, std::string> describe(const RunConfig& c) {
    std::map<std::string, std::string> m;
    m["R"] = c.R ? fmt(*c.R) : "";
    m["alpha"] = fmt(c.alpha);
    m["p"] = fmt(c.p);
    m["wavelength_nm"] = fmt(c.wavelength_nm);
    m["intensity_W_cm2"] = fmt(c.intensity_w_cm2);
    m["ramp_cycles"] = fmt(c.ramp_cycles);
    m["ramp_shape"] = to_string(c.ramp_shape);
    m["t_end"] = fmt(c.t_end);
    m["box_half_extent"] = fmt(c.box_half_extent);
    m["spacing"] = fmt(c.spacing);
    m["dt"] = fmt(c.dt);
    m["absorber_on"] = c.absorber_on ? "true" : "false";
    m["absorber_fraction"] = fmt(c.absorber_fraction);
    m["absorber_power"] = fmt(c.absorber_power);
    m["relax_states"] = std::to_string(c.relax_states);
    m["mode"] = to_string(c.mode);
    m["t_switch"] = c.t_switch ? fmt(*c.t_switch) : "";
    m["coulomb_off_after"] = c.coulomb_off_after ? fmt(*c.coulomb_off_after) : "";
    m["seed_scheme"] = to_string(c.seed_scheme);
    m["seed_stride"] = std::to_string(c.seed_stride);
    m["seed_cutoff"] = fmt(c.seed_cutoff);
    m["mc_count"] = std::to_string(c.mc_count);
    m["rng_seed"] = std::to_string(c.rng_seed);
    m["threshold"] = fmt(c.threshold);
    m["dead_band"] = fmt(c.dead_band);
    m["tracking_limit"] = fmt(c.tracking_limit);
    m["R_values"] = join(c.R_values);
    m["intensities"] = join(c.intensities);
    m["projection_times"] = join(c.projection_times);
    m["snapshot_stride"] = fmt(c.snapshot_stride);
    m["checkpoint_interval"] = fmt(c.checkpoint_interval);
    m["output_dir"] = c.output_dir.string();
    m["derived.omega"] = fmt(c.omega);
    m["derived.E0"] = fmt(c.E0);
    m["derived.period"] = fmt(c.period);
    return m;
}

} // namespace bohmion
