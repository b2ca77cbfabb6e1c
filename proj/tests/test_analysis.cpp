#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hvlab/analysis.hpp"
#include "support.hpp"

using namespace hvlab;

namespace {

/// Flip angle found by bisection on the rotated A axis, built from a plain 2-D rotation.
double bisection_threshold(double omega)
{
    double const target = kPi * (1 - std::cos(omega)) / 2;  // omega_hat without sin^2
    double const shift = (target - omega) / 2;
    auto rotated_z = [&](double theta) { return std::cos(theta + shift); };  // a at theta, moved away from b
    double lo = 0.0;
    double hi = kPi / 2;
    for (int i = 0; i < 200; ++i)
    {
        double const mid = (lo + hi) / 2;
        (rotated_z(mid) > 0 ? lo : hi) = mid;
    }
    return (lo + hi) / 2;
}

}  // namespace

TEST_CASE("correlation endpoints are exact for gr")
{
    auto const z = UnitVector::z_axis();
    auto const e0 = correlation(Model::gr(), z, z, 20000, 1);
    CHECK(e0.value == -1.0);
    CHECK(e0.std_error == 0.0);
    auto const epi = correlation(Model::gr(), z, -z, 20000, 1);
    CHECK(epi.value == 1.0);
}

TEST_CASE("gr correlation at pi/2")
{
    auto const e = correlation(Model::gr(), UnitVector::z_axis(), UnitVector::x_axis(), 1000000, 2, 0);
    CHECK(std::abs(e.value) < 0.004);
    CHECK(e.samples == 1000000);
}

TEST_CASE("correlation curve and quantum equivalence at moderate N")
{
    std::vector<double> omegas;
    for (int i = 0; i <= 8; ++i)
    {
        omegas.push_back(kPi * i / 8);
    }
    for (auto const& model : {Model::gr(), Model::bell(), Model::qm()})
    {
        auto const eq = quantum_equivalence(model, omegas, 100000, 3, 4.0, 0);
        for (auto const& p : eq)
        {
            CAPTURE(model.name());
            CAPTURE(p.point.omega);
            CHECK(p.pass);
            CHECK(p.point.analytic == doctest::Approx(-std::cos(p.point.omega)));
        }
    }
    auto const curve = correlation_curve(Model::gr(), {0.5, 1.5}, 1000, 4);
    std::ostringstream csv;
    write_curve_csv(csv, curve);
    CHECK(csv.str().rfind("omega,E,E_analytic,stderr,N\n0.5,", 0) == 0);
}

TEST_CASE("CHSH of the singlet and of local mixtures")
{
    auto const s = ChshSettings::optimal_planar();
    CHECK(chsh_singlet(s) == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-12));

    auto const qm = chsh(Model::qm(), s, 200000, 5, 0);
    CHECK(std::abs(qm.value - 2 * std::sqrt(2.0)) < 4 * qm.std_error + 1e-3);
    auto const gr = chsh(Model::gr(), s, 200000, 6, 0);
    CHECK(std::abs(gr.value - 2 * std::sqrt(2.0)) < 4 * gr.std_error + 1e-3);

    // every deterministic strategy, and random mixtures of them, stay at or below 2
    std::vector<std::string> const la{"a0", "a1"};
    std::vector<std::string> const lb{"b0", "b1"};
    auto const all = LocalDetMixture::all_deterministic(la, lb);
    for (auto const& strat : all)
    {
        CHECK(chsh_local_mixture(LocalDetMixture({strat}), "a0", "a1", "b0", "b1") == doctest::Approx(2.0));
    }
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i)
    {
        auto mix = all;
        for (auto& m : mix)
        {
            m.weight = u(rng);
        }
        CHECK(chsh_local_mixture(LocalDetMixture(mix), "a0", "a1", "b0", "b1") <= 2.0 + 1e-12);
    }

    auto const local = Model::localdet(LocalDetMixture({all[5]}));
    auto const sampled = chsh(local, s, 10000, 8);
    CHECK(sampled.value == doctest::Approx(2.0));
    CHECK_THROWS_AS(chsh(Model::gr(), SettingsGrid::single_pair(1.0), 10, 1), std::invalid_argument);
}

TEST_CASE("signaling threshold")
{
    double const t = signaling_threshold(AngleRad(3 * kPi / 4)).radians();
    CHECK(std::abs(t - 1.4081) < 1e-4);
    CHECK(std::abs(t - bisection_threshold(3 * kPi / 4)) < 1e-9);
    CHECK(signaling_threshold(AngleRad(kPi / 2 + 1e-9)).radians() == doctest::Approx(kPi / 2));
    CHECK(signaling_threshold(AngleRad(kPi - 1e-9)).radians() == doctest::Approx(kPi / 2));
    CHECK_THROWS_AS(signaling_threshold(AngleRad(kPi / 2)), DomainError);
    CHECK_THROWS_AS(signaling_threshold(AngleRad(kPi)), DomainError);
    CHECK_THROWS_AS(signaling_threshold(AngleRad(1.0)), DomainError);
}

TEST_CASE("threshold stays below pi/2 on a dense sweep")
{
    for (int i = 1; i < 100000; ++i)
    {
        double const w = kPi / 2 + (kPi / 2) * i / 100000.0;
        double const t = signaling_threshold(AngleRad(w)).radians();
        REQUIRE(t < kPi / 2);
        if (i % 1000 == 0)
        {
            CHECK(std::abs(t - bisection_threshold(w)) < 1e-9);
        }
    }
}

TEST_CASE("signaling witness examples")
{
    std::mt19937_64 rng(9);
    for (int i = 0; i < 500; ++i)
    {
        auto const [a, b] = hvlab::testing::random_pair(rng, kPi / 2);
        CHECK_FALSE(signaling_witness(a, b, hvlab::testing::random_direction(rng)).flip);
    }
    auto const at85 = coplanar_configuration(3 * kPi / 4, 85.0 * kPi / 180);
    CHECK(signaling_witness(at85.a, at85.b, at85.lambda).flip);
    auto const at70 = coplanar_configuration(3 * kPi / 4, 70.0 * kPi / 180);
    CHECK_FALSE(signaling_witness(at70.a, at70.b, at70.lambda).flip);
    CHECK(angle_between(at85.a, at85.b).radians() == doctest::Approx(3 * kPi / 4));
    CHECK(angle_between(at85.a, at85.lambda).radians() == doctest::Approx(85.0 * kPi / 180));

    auto const edge = coplanar_configuration(3 * kPi / 4, kPi / 2);
    CHECK(signaling_witness(edge.a, edge.b, edge.lambda).boundary);
}

TEST_CASE("region map agrees with the analytic threshold")
{
    auto const map = region_map(default_region_omegas(50), default_region_thetas(50));
    CHECK(map.cells.size() == 2500);
    CHECK(map.compared() >= 2490);
    CHECK(map.all_agree());
    for (double w : map.omegas)
    {
        CHECK(w > kPi / 2);
        CHECK(w < kPi);
    }
    CHECK(map.thetas.back() == kPi / 2);

    auto const single = region_map({3 * kPi / 4, 3 * kPi / 4 + 0.01}, {85.0 * kPi / 180, 70.0 * kPi / 180});
    CHECK(single.cells[0].mc);
    CHECK(single.cells[0].analytic);
    CHECK_FALSE(single.cells[1].mc);
    CHECK_THROWS_AS(region_map({1.0}, {0.5, 1.0}), std::invalid_argument);

    std::ostringstream csv;
    write_region_csv(csv, single);
    CHECK(csv.str().rfind("omega,theta,analytic,mc\n", 0) == 0);
    std::ostringstream svg;
    write_region_svg(svg, single);
    CHECK(svg.str().find("<svg") == 0);
    CHECK(svg.str().find("<rect") != std::string::npos);
}

TEST_CASE("extended region: no flips below pi/2, extrapolation labeled above")
{
    std::vector<double> low;
    for (int i = 1; i < 40; ++i)
    {
        low.push_back((kPi / 2) * i / 40);
    }
    std::vector<double> thetas;
    for (int j = 1; j <= 40; ++j)
    {
        thetas.push_back((kPi / 2) * j / 40);
    }
    auto const map = region_map(low, thetas);
    for (auto const& c : map.cells)
    {
        if (!c.sign_boundary)
        {
            CHECK_FALSE(c.mc);
        }
    }

    auto const high = region_map(default_region_omegas(10), {1.7, 2.0, 2.5});
    for (auto const& c : high.cells)
    {
        CHECK(c.extrapolated);
        CHECK(c.mc == c.analytic);
    }
}
