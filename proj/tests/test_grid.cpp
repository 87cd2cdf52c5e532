#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "bohmion/error.hpp"
#include "bohmion/field_io.hpp"
#include "bohmion/grid.hpp"
#include "bohmion/integrals.hpp"
#include "bohmion/interpolation.hpp"
#include "bohmion/spectral.hpp"

using namespace bohmion;

namespace {

double max_error(std::span<const Complex> got, const WaveField& expected) {
    double err = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        err = std::max(err, std::abs(got[i] - expected.values()[i]));
    }
    return err;
}

ErrorKind kind_of(const auto& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::io;
}

} // namespace

TEST_CASE("make_grid spacing and node positions") {
    const Grid2D a = make_grid(-150, 150, 1500);
    CHECK(a.spacing() == doctest::Approx(0.2).epsilon(1e-14));
    const Grid2D b = make_grid(-10, 10, 100);
    CHECK(b.spacing() == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(std::abs(b.node(50)) < 1e-14);
    CHECK(b.node(0) == -10.0);
    CHECK(b.size() == 10000);
}

TEST_CASE("make_grid rejects bad extents and counts") {
    CHECK(kind_of([] { make_grid(5, -5, 100); }) == ErrorKind::invalid_extent);
    CHECK(kind_of([] { make_grid(1, 1, 100); }) == ErrorKind::invalid_extent);
    CHECK(kind_of([] { make_grid(-5, 5, 101); }) == ErrorKind::invalid_count);
    CHECK(kind_of([] { make_grid(-5, 5, 6); }) == ErrorKind::invalid_count);
}

TEST_CASE("make_grid_with_spacing keeps the spacing and an even count") {
    const Grid2D g = make_grid_with_spacing(60, 0.3);
    CHECK(g.n() == 400);
    CHECK(g.spacing() == doctest::Approx(0.3));
    CHECK(g.n() % 2 == 0);
}

TEST_CASE("spectral derivative of a plane wave") {
    const Grid2D g = make_grid(-10, 10, 64);
    const double k = 2.0 * M_PI * 3.0 / g.length();
    const auto psi = WaveField::sample(g, [k](double x1, double) { return std::exp(Complex(0, k * x1)); });
    const auto d = partial_derivative(psi, Axis::x1, 1);
    const auto expected =
        WaveField::sample(g, [k](double x1, double) { return Complex(0, k) * std::exp(Complex(0, k * x1)); });
    CHECK(max_error(d, expected) < 1e-11);
    const auto d2 = partial_derivative(psi, Axis::x2, 1);
    for (const Complex z : d2) {
        CHECK(std::abs(z) < 1e-11);
    }
}

TEST_CASE("spectral second derivative of a Gaussian") {
    const Grid2D g = make_grid(-12, 12, 96);
    const auto psi = WaveField::sample(g, [](double x1, double) { return std::exp(-0.5 * x1 * x1); });
    const auto expected =
        WaveField::sample(g, [](double x1, double) { return (x1 * x1 - 1.0) * std::exp(-0.5 * x1 * x1); });
    CHECK(max_error(partial_derivative(psi, Axis::x1, 2), expected) < 1e-8);
    const auto psi2 = WaveField::sample(g, [](double, double x2) { return std::exp(-0.5 * x2 * x2); });
    const auto expected2 =
        WaveField::sample(g, [](double, double x2) { return (x2 * x2 - 1.0) * std::exp(-0.5 * x2 * x2); });
    CHECK(max_error(partial_derivative(psi2, Axis::x2, 2), expected2) < 1e-8);
}

TEST_CASE("derivative of a constant vanishes") {
    const Grid2D g = make_grid(-5, 5, 32);
    const auto c = WaveField::sample(g, [](double, double) { return Complex(0.7, -0.2); });
    for (const Axis axis : {Axis::x1, Axis::x2}) {
        for (const int order : {1, 2}) {
            for (const Complex z : partial_derivative(c, axis, order)) {
                CHECK(std::abs(z) < 1e-13);
            }
        }
    }
}

TEST_CASE("first derivative twice equals the second derivative") {
    const Grid2D g = make_grid(-12, 12, 128);
    const auto psi = WaveField::sample(g, [](double x1, double x2) {
        return std::exp(-0.3 * (x1 - 1) * (x1 - 1) - 0.5 * x2 * x2) * std::exp(Complex(0, 0.8 * x1 - 0.4 * x2));
    });
    const Spectral s(g);
    for (const Axis axis : {Axis::x1, Axis::x2}) {
        const auto once = s.derivative(psi.values(), axis, 1);
        const auto twice = s.derivative(once, axis, 1);
        const auto direct = s.derivative(psi.values(), axis, 2);
        double err = 0.0;
        for (std::size_t i = 0; i < twice.size(); ++i) {
            err = std::max(err, std::abs(twice[i] - direct[i]));
        }
        CHECK(err < 1e-9);
    }
}

TEST_CASE("edge mass warning triggers for fields reaching the boundary") {
    const Grid2D g = make_grid(-4, 4, 32);
    const auto wide = WaveField::sample(g, [](double x1, double x2) { return std::exp(-0.01 * (x1 * x1 + x2 * x2)); });
    const auto narrow = WaveField::sample(g, [](double x1, double x2) { return std::exp(-3.0 * (x1 * x1 + x2 * x2)); });
    CHECK(warn_if_edge_mass(wide));
    CHECK_FALSE(warn_if_edge_mass(narrow));
}

TEST_CASE("interpolation reproduces node values") {
    const Grid2D g = make_grid(-6, 6, 48);
    const auto psi = WaveField::sample(g, [](double x1, double x2) { return Complex(std::sin(x1) * x2, std::cos(x2 + x1)); });
    for (std::size_t i1 : {0ul, 7ul, 24ul, 47ul}) {
        for (std::size_t i2 : {0ul, 13ul, 30ul, 47ul}) {
            const Complex v = interpolate(g, psi.values(), Point{g.node(i1), g.node(i2)});
            CHECK(std::abs(v - psi.at(i1, i2)) < 1e-15);
        }
    }
}

TEST_CASE("interpolation is exact for bilinear functions in the interior") {
    const Grid2D g = make_grid(-6, 6, 48);
    const auto f = [](double x1, double x2) { return Complex(0.3 + 1.7 * x1 - 0.9 * x2 + 0.25 * x1 * x2, 2.0 - x2); };
    const auto psi = WaveField::sample(g, f);
    std::mt19937_64 rng(7);
    // Interior: the cubic stencil needs one node on each side.
    std::uniform_real_distribution<double> u(g.node(1), g.node(g.n() - 3));
    for (int i = 0; i < 200; ++i) {
        const Point p{u(rng), u(rng)};
        CHECK(std::abs(interpolate(g, psi.values(), p) - f(p.x1, p.x2)) < 1e-12);
    }
}

TEST_CASE("interpolation outside the grid is an error") {
    const Grid2D g = make_grid(-6, 6, 48);
    const auto psi = WaveField::sample(g, [](double, double) { return 1.0; });
    CHECK(kind_of([&] { interpolate(g, psi.values(), Point{g.x_max() + 1, 0}); }) == ErrorKind::out_of_bounds);
    CHECK(kind_of([&] { interpolate(g, psi.values(), Point{0, g.x_min() - 0.01}); }) == ErrorKind::out_of_bounds);
}

TEST_CASE("interpolation error converges at fourth order") {
    const auto f = [](double x1, double x2) { return std::exp(-0.2 * (x1 * x1 + x2 * x2)) * std::cos(x1 - 0.5 * x2); };
    const auto error_for = [&](std::size_t n) {
        const Grid2D g = make_grid(-8, 8, n);
        const auto psi = WaveField::sample(g, f);
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-3, 3);
        double err = 0.0;
        for (int i = 0; i < 400; ++i) {
            const Point p{u(rng), u(rng)};
            err = std::max(err, std::abs(interpolate(g, psi.values(), p) - f(p.x1, p.x2)));
        }
        return err;
    };
    const double coarse = error_for(64);
    const double fine = error_for(128);
    const double order = std::log2(coarse / fine);
    MESSAGE("observed interpolation order " << order);
    CHECK(order > 3.5);
}

TEST_CASE("region norm of a localized normalized state") {
    const Grid2D g = make_grid(-30, 30, 200);
    const auto psi = WaveField::sample(g, [](double x1, double x2) {
        return std::exp(-0.5 * (x1 * x1 + x2 * x2)) / std::sqrt(M_PI);
    });
    CHECK(total_norm(psi) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(region_norm(psi, 15.0) - 1.0) < 1e-6);
    CHECK(region_norm(psi, 30.0) == doctest::Approx(total_norm(psi)).epsilon(1e-14));
}

TEST_CASE("region norm of a uniform density") {
    const double L = 10.0;
    const Grid2D g = make_grid(-L, L, 80);
    const double c = 0.37;
    const auto psi = WaveField::sample(g, [c](double, double) { return std::sqrt(c); });
    CHECK(region_norm(psi, L / 2) == doctest::Approx(c * L * L).epsilon(1e-12));
    // Off-node half-width: the hat-function weights still integrate exactly.
    CHECK(region_norm(psi, 3.1) == doctest::Approx(c * 6.2 * 6.2).epsilon(1e-12));
}

TEST_CASE("region norm is monotone in the half-width") {
    const Grid2D g = make_grid(-10, 10, 64);
    const auto psi = WaveField::sample(g, [](double x1, double x2) { return std::exp(-0.1 * (x1 * x1 + 2 * x2 * x2) + 0.1 * x1); });
    double previous = 0.0;
    for (double w = 0.05; w <= 10.0; w += 0.137) {
        const double r = region_norm(psi, w);
        CHECK(r >= previous - 1e-15);
        previous = r;
    }
}

TEST_CASE("overlap rejects fields on different grids") {
    const auto a = WaveField::sample(make_grid(-5, 5, 32), [](double, double) { return 1.0; });
    const auto b = WaveField::sample(make_grid(-5, 5, 34), [](double, double) { return 1.0; });
    CHECK(kind_of([&] { overlap(a, b); }) == ErrorKind::grid_mismatch);
}

TEST_CASE("binary field round trip is bit-identical") {
    const Grid2D g = make_grid(-7.5, 7.5, 40);
    const auto psi = WaveField::sample(
        g, [](double x1, double x2) { return std::exp(Complex(-0.1 * x1 * x1, 0.3 * x2)) / 3.0; }, 12.345);
    const auto path = std::filesystem::temp_directory_path() / "bohmion_test_field.bin";
    write_field(path, psi);
    const auto back = read_field(path);
    CHECK(back.grid() == g);
    CHECK(back.time() == psi.time());
    CHECK(std::memcmp(back.values().data(), psi.values().data(), psi.values().size_bytes()) == 0);

    std::ifstream in(path, std::ios::binary);
    char magic[4];
    in.read(magic, 4);
    CHECK(std::string(magic, 4) == "BOHM");
    CHECK(std::filesystem::file_size(path) == 4 + 4 + 8 + 3 * 8 + g.size() * 16);

    std::ofstream(path, std::ios::binary) << "JUNKJUNKJUNK";
    CHECK(kind_of([&] { read_field(path); }) == ErrorKind::io);
    std::filesystem::remove(path);
}
