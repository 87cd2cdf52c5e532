#include "bohmion/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include "bohmion/error.hpp"
#include "bohmion/field_io.hpp"
#include "bohmion/integrals.hpp"
#include "bohmion/kernels.hpp"

namespace bohmion {

namespace {

constexpr Complex kI(0.0, 1.0);

std::vector<Complex> kinetic_factor(const Spectral& spectral, Complex exponent_per_k2) {
    const auto k = spectral.wavenumbers();
    const std::size_t n = k.size();
    const double scale = 1.0 / static_cast<double>(n * n);
    std::vector<Complex> out(n * n);
    for (std::size_t i1 = 0; i1 < n; ++i1) {
        for (std::size_t i2 = 0; i2 < n; ++i2) {
            const double k2 = k[i1] * k[i1] + k[i2] * k[i2];
            out[i1 * n + i2] = std::exp(exponent_per_k2 * (0.5 * k2)) * scale;
        }
    }
    return out;
}

std::vector<Complex> phase_table(const Grid2D& grid, const MolecularModel& model, double dt) {
    const auto v = potential_table(grid, model);
    std::vector<Complex> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(-kI * v[i] * (0.5 * dt));
    }
    return out;
}

void symmetrize(ComplexBuffer& psi, std::size_t n) {
    for (std::size_t i1 = 0; i1 < n; ++i1) {
        for (std::size_t i2 = i1 + 1; i2 < n; ++i2) {
            const Complex avg = 0.5 * (psi[i1 * n + i2] + psi[i2 * n + i1]);
            psi[i1 * n + i2] = avg;
            psi[i2 * n + i1] = avg;
        }
    }
}

void drop_imaginary(ComplexBuffer& psi) {
    for (auto& z : psi) {
        z = Complex(z.real(), 0.0);
    }
}

double buffer_norm(const ComplexBuffer& psi, const Grid2D& grid) {
    const std::vector<double> w(grid.n(), grid.spacing());
    return kernels::weighted_norm(psi, w, grid.n());
}

Complex buffer_overlap(const ComplexBuffer& a, const ComplexBuffer& b, const Grid2D& grid) {
    return kernels::inner_product(a, b, grid.n()) * grid.cell_area();
}

void gram_schmidt(std::vector<ComplexBuffer>& states, const Grid2D& grid) {
    for (std::size_t j = 0; j < states.size(); ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            const Complex c = buffer_overlap(states[i], states[j], grid);
            auto& sj = states[j];
            const auto& si = states[i];
            for (std::size_t idx = 0; idx < sj.size(); ++idx) {
                sj[idx] -= c * si[idx];
            }
        }
        const double norm = buffer_norm(states[j], grid);
        if (!(norm > 0.0)) {
            throw Error(ErrorKind::non_convergence, "relaxation seed collapsed to zero");
        }
        const double s = 1.0 / std::sqrt(norm);
        for (auto& z : states[j]) {
            z *= s;
        }
    }
}

// Symmetric-sector seeds built from Gaussians sitting in the two wells.
std::vector<ComplexBuffer> relaxation_seeds(const Grid2D& grid, const MolecularModel& model,
                                            std::size_t count) {
    const double c = std::max(0.5 * model.R, 0.5);
    const auto gl = [c](double x) { return std::exp(-0.5 * (x + c) * (x + c)); };
    const auto gr = [c](double x) { return std::exp(-0.5 * (x - c) * (x - c)); };
    const std::size_t n = grid.n();
    std::vector<ComplexBuffer> seeds;
    for (std::size_t m = 0; m < count; ++m) {
        ComplexBuffer psi(grid.size());
        const std::size_t family = m % 4;
        const auto power = static_cast<int>(m / 4);
        for (std::size_t i1 = 0; i1 < n; ++i1) {
            const double x1 = grid.node(i1);
            for (std::size_t i2 = 0; i2 < n; ++i2) {
                const double x2 = grid.node(i2);
                double v = 0.0;
                switch (family) {
                case 0: v = gl(x1) * gr(x2); break;
                case 1: v = gl(x1) * gl(x2) - gr(x1) * gr(x2); break;
                case 2: v = gl(x1) * gl(x2) + gr(x1) * gr(x2); break;
                default: v = gl(x1) * gr(x2) * (x1 + x2); break;
                }
                v *= std::pow(x1 * x1 + x2 * x2, power);
                psi[i1 * n + i2] = v;
            }
        }
        symmetrize(psi, n);
        seeds.push_back(std::move(psi));
    }
    return seeds;
}

struct RitzResult {
    std::vector<double> energies;
};

// Rotates the (orthonormal, real) states onto Ritz vectors of H in their span.
RitzResult rayleigh_ritz(std::vector<ComplexBuffer>& states, const Spectral& spectral,
                         std::span<const double> potential) {
    const Grid2D& grid = spectral.grid();
    const std::size_t k = states.size();
    std::vector<ComplexBuffer> h_states;
    h_states.reserve(k);
    for (const auto& s : states) {
        h_states.push_back(apply_field_free_hamiltonian(spectral, potential, s));
    }
    Eigen::MatrixXd h(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            const double v = buffer_overlap(states[i], h_states[j], grid).real();
            h(i, j) = v;
            h(j, i) = v;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    const Eigen::MatrixXd& vecs = solver.eigenvectors();
    std::vector<ComplexBuffer> rotated(k, ComplexBuffer(grid.size(), Complex(0.0, 0.0)));
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t j = 0; j < k; ++j) {
            const double c = vecs(j, a);
            for (std::size_t idx = 0; idx < grid.size(); ++idx) {
                rotated[a][idx] += c * states[j][idx];
            }
        }
    }
    states = std::move(rotated);
    RitzResult result;
    for (std::size_t a = 0; a < k; ++a) {
        result.energies.push_back(solver.eigenvalues()(a));
    }
    return result;
}

// Fixes the global sign so the largest-magnitude node is positive.
void fix_sign(ComplexBuffer& psi) {
    const auto it = std::max_element(psi.begin(), psi.end(), [](Complex a, Complex b) {
        return std::abs(a.real()) < std::abs(b.real());
    });
    if (it != psi.end() && it->real() < 0.0) {
        for (auto& z : psi) {
            z = -z;
        }
    }
}

} // namespace

std::vector<double> potential_table(const Grid2D& grid, const MolecularModel& model) {
    const std::size_t n = grid.n();
    std::vector<double> nuc(n);
    for (std::size_t i = 0; i < n; ++i) {
        nuc[i] = nuclear_potential(model, grid.node(i));
    }
    std::vector<double> v(grid.size());
    for (std::size_t i1 = 0; i1 < n; ++i1) {
        for (std::size_t i2 = 0; i2 < n; ++i2) {
            v[i1 * n + i2] =
                nuc[i1] + nuc[i2] + interelectronic_potential(model, grid.node(i1), grid.node(i2));
        }
    }
    return v;
}

std::vector<double> absorber_profile(const Grid2D& grid, const AbsorberOptions& options) {
    std::vector<double> mask(grid.n(), 1.0);
    if (!options.enabled || options.fraction <= 0.0) {
        return mask;
    }
    const double centre = 0.5 * (grid.x_min() + grid.x_max());
    const double half = 0.5 * grid.length();
    const double onset = (1.0 - options.fraction) * half;
    for (std::size_t i = 0; i < grid.n(); ++i) {
        const double d = std::abs(grid.node(i) - centre);
        if (d > onset) {
            const double s = std::min((d - onset) / (half - onset), 1.0);
            mask[i] = std::pow(std::cos(0.5 * std::numbers::pi * s), options.power);
        }
    }
    return mask;
}

SplitStepPropagator::SplitStepPropagator(const Grid2D& grid, const MolecularModel& model,
                                         const LaserPulse& pulse, PropagatorOptions options)
    : grid_(grid), model_(model), pulse_(pulse), options_(options), spectral_(grid) {
    if (!(options_.dt > 0.0)) {
        throw Error(ErrorKind::validation, "time step must be positive");
    }
    model_.validate();
    kinetic_ = kinetic_factor(spectral_, -kI * options_.dt);
    MolecularModel on = model_;
    on.interelectronic_on = true;
    static_phase_on_ = phase_table(grid_, model_.interelectronic_on ? on : model_, options_.dt);
    if (options_.coulomb_off_after || !model_.interelectronic_on) {
        MolecularModel off = model_;
        off.interelectronic_on = false;
        static_phase_off_ = phase_table(grid_, off, options_.dt);
    }
    mask_ = absorber_profile(grid_, options_.absorber);
}

const std::vector<Complex>& SplitStepPropagator::potential_table(double t) const {
    const MolecularModel m = model_at(model_, options_.coulomb_off_after, t);
    return m.interelectronic_on ? static_phase_on_ : static_phase_off_;
}

void SplitStepPropagator::advance(WaveField& field) const {
    if (!(field.grid() == grid_)) {
        throw Error(ErrorKind::grid_mismatch, "field grid differs from propagator grid");
    }
    const double dt = options_.dt;
    const double t_mid = field.time() + 0.5 * dt;
    const double e = pulse_.field(t_mid);
    const std::size_t n = grid_.n();
    std::vector<Complex> axis(n);
    for (std::size_t i = 0; i < n; ++i) {
        axis[i] = std::exp(-kI * (e * grid_.node(i) * 0.5 * dt));
    }
    const auto& table = potential_table(t_mid);
    auto& psi = field.mutable_buffer();
    kernels::potential_kick(psi, table, axis, n);
    spectral_.forward(psi);
    kernels::multiply(psi, kinetic_);
    spectral_.inverse(psi);
    kernels::potential_kick(psi, table, axis, n);
    if (options_.absorber.enabled) {
        kernels::separable_mask(psi, mask_, n);
    }
    field.set_time(field.time() + dt);
}

WaveField SplitStepPropagator::step(WaveField field) const {
    advance(field);
    return field;
}

WaveField step_real_time(WaveField field, const MolecularModel& model, const LaserPulse& pulse,
                         double dt) {
    PropagatorOptions options;
    options.dt = dt;
    options.absorber.enabled = false;
    const SplitStepPropagator propagator(field.grid(), model, pulse, options);
    propagator.advance(field);
    return field;
}

ComplexBuffer apply_field_free_hamiltonian(const Spectral& spectral, std::span<const double> potential,
                                           std::span<const Complex> psi) {
    ComplexBuffer out = spectral.laplacian(psi);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = -0.5 * out[i] + potential[i] * psi[i];
    }
    return out;
}

double field_free_energy(const WaveField& field, const MolecularModel& model) {
    const Spectral spectral(field.grid());
    const auto v = potential_table(field.grid(), model);
    const auto h_psi = apply_field_free_hamiltonian(spectral, v, field.values());
    const Complex num = kernels::inner_product(field.values(), h_psi, field.grid().n());
    const Complex den = kernels::inner_product(field.values(), field.values(), field.grid().n());
    return num.real() / den.real();
}

EigenSet relax_eigenstates(const Grid2D& grid, const MolecularModel& model, std::size_t count,
                           RelaxOptions options) {
    if (count == 0) {
        throw Error(ErrorKind::validation, "relaxation needs at least one state");
    }
    if (!(options.dt > 0.0) || options.check_interval == 0) {
        throw Error(ErrorKind::validation, "relaxation needs dt > 0 and check_interval > 0");
    }
    model.validate();
    const Spectral spectral(grid);
    const auto v = potential_table(grid, model);
    const std::size_t n = grid.n();

    auto states = relaxation_seeds(grid, model, count);
    gram_schmidt(states, grid);
    auto ritz = rayleigh_ritz(states, spectral, v);

    std::size_t total_iterations = 0;
    double dt = options.dt;
    for (std::size_t stage = 0; stage <= options.refinement_stages; ++stage) {
        std::vector<Complex> kinetic = kinetic_factor(spectral, Complex(-dt, 0.0));
        std::vector<Complex> half_v(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            half_v[i] = std::exp(-0.5 * dt * v[i]);
        }
        // Convergence is judged per base step so refinement stages are held to
        // the same rate of change in imaginary time.
        const double per_step_scale = options.dt / dt;
        bool converged = false;
        std::size_t stage_iterations = 0;
        while (!converged) {
            for (std::size_t it = 0; it < options.check_interval; ++it) {
                for (auto& psi : states) {
                    kernels::multiply(psi, half_v);
                    spectral.forward(psi);
                    kernels::multiply(psi, kinetic);
                    spectral.inverse(psi);
                    kernels::multiply(psi, half_v);
                    drop_imaginary(psi);
                    symmetrize(psi, n);
                }
                gram_schmidt(states, grid);
            }
            stage_iterations += options.check_interval;
            total_iterations += options.check_interval;
            auto next = rayleigh_ritz(states, spectral, v);
            double change = 0.0;
            for (std::size_t j = 0; j < count; ++j) {
                change = std::max(change, std::abs(next.energies[j] - ritz.energies[j]));
            }
            ritz = std::move(next);
            converged = change / static_cast<double>(options.check_interval) * per_step_scale <
                        options.tolerance;
            if (!converged && total_iterations >= options.max_iterations) {
                std::ostringstream msg;
                msg << "imaginary-time relaxation did not converge after " << total_iterations
                    << " iterations (last energy change " << change << ")";
                throw Error(ErrorKind::non_convergence, msg.str());
            }
        }
        spdlog::debug("relaxation stage {} (dt = {}) converged after {} iterations", stage, dt,
                      stage_iterations);
        dt *= 0.25;
    }

    EigenSet set;
    set.iterations = total_iterations;
    for (std::size_t j = 0; j < count; ++j) {
        fix_sign(states[j]);
        set.states.emplace_back(grid, std::move(states[j]), 0.0);
        set.energies.push_back(ritz.energies[j]);
    }
    return set;
}

Projection project(const WaveField& field, const EigenSet& eigenset) {
    Projection out;
    std::vector<Complex> coefficients;
    for (const auto& state : eigenset.states) {
        if (!(state.grid() == field.grid())) {
            throw Error(ErrorKind::grid_mismatch, "projection onto eigenstates of another grid");
        }
        coefficients.push_back(overlap(state, field));
    }
    const double reference = coefficients.empty() ? 0.0 : std::arg(coefficients.front());
    for (const Complex c : coefficients) {
        out.amplitudes.push_back(std::abs(c));
        out.phases.push_back(std::remainder(std::arg(c) - reference, 2.0 * std::numbers::pi));
    }
    return out;
}

CurrentDensity current_density(const WaveField& field) {
    const Spectral spectral(field.grid());
    ComplexBuffer d1;
    ComplexBuffer d2;
    spectral.gradient(field.values(), d1, d2);
    CurrentDensity j{RealBuffer(field.grid().size()), RealBuffer(field.grid().size())};
    kernels::current(field.values(), d1, j.j1);
    kernels::current(field.values(), d2, j.j2);
    return j;
}

SnapshotRecord snapshot(const WaveField& field, const EigenSet* eigenset,
                        const std::filesystem::path& stem, std::size_t csv_stride) {
    if (csv_stride == 0) {
        csv_stride = 1;
    }
    SnapshotRecord record;
    record.field_path = stem;
    record.field_path += ".bin";
    write_field(record.field_path, field);
    record.norm = total_norm(field);

    record.grid_csv_path = stem;
    record.grid_csv_path += "_grid.csv";
    const auto j = current_density(field);
    {
        std::ofstream out(record.grid_csv_path);
        if (!out) {
            throw Error(ErrorKind::io, "cannot open " + record.grid_csv_path.string());
        }
        out << "x1,x2,density,j1,j2\n" << std::setprecision(10);
        const Grid2D& g = field.grid();
        for (std::size_t i1 = 0; i1 < g.n(); i1 += csv_stride) {
            for (std::size_t i2 = 0; i2 < g.n(); i2 += csv_stride) {
                const std::size_t idx = g.index(i1, i2);
                out << g.node(i1) << ',' << g.node(i2) << ',' << std::norm(field.values()[idx]) << ','
                    << j.j1[idx] << ',' << j.j2[idx] << '\n';
            }
        }
        if (!out) {
            throw Error(ErrorKind::io, "write failed for " + record.grid_csv_path.string());
        }
    }

    if (eigenset != nullptr) {
        record.projection = project(field, *eigenset);
        std::filesystem::path path = stem;
        path += "_projection.csv";
        std::ofstream out(path);
        if (!out) {
            throw Error(ErrorKind::io, "cannot open " + path.string());
        }
        out << "state,energy,amplitude,phase\n" << std::setprecision(12);
        for (std::size_t k = 0; k < record.projection->amplitudes.size(); ++k) {
            out << k << ',' << eigenset->energies[k] << ',' << record.projection->amplitudes[k] << ','
                << record.projection->phases[k] << '\n';
        }
        if (!out) {
            throw Error(ErrorKind::io, "write failed for " + path.string());
        }
        record.projection_path = path;
    }
    return record;
}

void write_eigenset(const std::filesystem::path& dir, const EigenSet& set) {
    std::filesystem::create_directories(dir);
    std::ofstream energies(dir / "energies.csv");
    if (!energies) {
        throw Error(ErrorKind::io, "cannot open " + (dir / "energies.csv").string());
    }
    energies << "state,energy\n" << std::setprecision(17);
    for (std::size_t k = 0; k < set.states.size(); ++k) {
        write_field(dir / ("state_" + std::to_string(k) + ".bin"), set.states[k]);
        energies << k << ',' << set.energies[k] << '\n';
    }
}

EigenSet read_eigenset(const std::filesystem::path& dir) {
    std::ifstream energies(dir / "energies.csv");
    if (!energies) {
        throw Error(ErrorKind::io, "cannot open " + (dir / "energies.csv").string());
    }
    EigenSet set;
    std::string line;
    std::getline(energies, line);
    while (std::getline(energies, line)) {
        if (line.empty()) {
            continue;
        }
        const auto comma = line.find(',');
        const auto k = std::stoul(line.substr(0, comma));
        set.energies.push_back(std::stod(line.substr(comma + 1)));
        set.states.push_back(read_field(dir / ("state_" + std::to_string(k) + ".bin")));
    }
    return set;
}

} // namespace bohmion
