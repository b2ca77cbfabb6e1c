#include "hvlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace hvlab {
namespace {

// Unchecked right-hand side of the threshold: pi/2 minus the rotation (omega_hat - omega)/2.
double threshold_formula(double omega)
{
    double const c = std::cos(omega / 2);
    return kPi / 2 * c * c + omega / 2;
}

// (omega_hat - omega) / 2 written directly from the trigonometric form.
double rotation_amount(double omega)
{
    double const s = std::sin(omega / 2);
    return kPi / 2 * s * s - omega / 2;
}

constexpr double kBoundaryBand = 1e-6;

}  // namespace

CorrelationEstimate correlation(Model const& model,
                                UnitVector const& a,
                                UnitVector const& b,
                                std::uint64_t samples,
                                std::uint64_t seed,
                                unsigned threads)
{
    return correlation(model, SettingsGrid({{"a0", a}}, {{"b0", b}}), 0, 0, samples, seed, threads);
}

CorrelationEstimate correlation(Model const& model,
                                SettingsGrid const& grid,
                                std::size_t a_index,
                                std::size_t b_index,
                                std::uint64_t samples,
                                std::uint64_t seed,
                                unsigned threads)
{
    RunConfig cfg;
    cfg.model = model;
    cfg.grid = grid;
    cfg.samples = samples;
    cfg.seed = seed;
    cfg.setting_policy = FixedSettings{a_index, b_index};
    cfg.threads = threads;

    std::int64_t sum = 0;
    run_experiment(cfg, [&sum](std::span<EventRecord const> records) {
        for (auto const& r : records)
        {
            sum += r.x * r.y;
        }
    });
    CorrelationEstimate est;
    est.samples = samples;
    est.value = static_cast<double>(sum) / static_cast<double>(samples);
    est.std_error = std::sqrt(std::max(0.0, 1.0 - est.value * est.value) / static_cast<double>(samples));
    return est;
}

std::vector<CurvePoint> correlation_curve(Model const& model,
                                          std::vector<double> const& omegas,
                                          std::uint64_t samples,
                                          std::uint64_t seed,
                                          unsigned threads)
{
    std::vector<CurvePoint> curve;
    for (std::size_t i = 0; i < omegas.size(); ++i)
    {
        double const w = omegas[i];
        auto const est = correlation(model, UnitVector::z_axis(), UnitVector::in_xz_plane(w), samples,
                                     derive_seed(seed, i, 0), threads);
        curve.push_back({w, est.value, -std::cos(w), est.std_error, samples});
    }
    return curve;
}

std::vector<EquivalencePoint> quantum_equivalence(Model const& model,
                                                  std::vector<double> const& omegas,
                                                  std::uint64_t samples,
                                                  std::uint64_t seed,
                                                  double sigmas,
                                                  unsigned threads)
{
    auto within = [sigmas](CurvePoint const& p) {
        double const band = sigmas * std::max(p.std_error, 1.0 / static_cast<double>(p.samples));
        return std::abs(p.estimate - p.analytic) <= band;
    };
    std::vector<EquivalencePoint> out;
    auto const curve = correlation_curve(model, omegas, samples, seed, threads);
    for (std::size_t i = 0; i < curve.size(); ++i)
    {
        EquivalencePoint ep{curve[i], false, within(curve[i])};
        if (!ep.pass)
        {
            double const w = omegas[i];
            auto const est = correlation(model, UnitVector::z_axis(), UnitVector::in_xz_plane(w), 4 * samples,
                                         derive_seed(seed, i, 1), threads);
            ep.point = {w, est.value, -std::cos(w), est.std_error, 4 * samples};
            ep.rerun = true;
            ep.pass = within(ep.point);
        }
        out.push_back(ep);
    }
    return out;
}

ChshSettings ChshSettings::optimal_planar()
{
    return {UnitVector::in_xz_plane(0.0), UnitVector::in_xz_plane(kPi / 2), UnitVector::in_xz_plane(kPi / 4),
            UnitVector::in_xz_plane(3 * kPi / 4)};
}

SettingsGrid ChshSettings::grid() const
{
    return SettingsGrid({{"a0", a}, {"a1", a_prime}}, {{"b0", b}, {"b1", b_prime}});
}

ChshResult chsh(Model const& model,
                ChshSettings const& s,
                std::uint64_t samples,
                std::uint64_t seed,
                unsigned threads)
{
    return chsh(model, s.grid(), samples, seed, threads);
}

ChshResult chsh(Model const& model,
                SettingsGrid const& grid,
                std::uint64_t samples,
                std::uint64_t seed,
                unsigned threads)
{
    if (grid.wing_a().size() != 2 || grid.wing_b().size() != 2)
    {
        throw std::invalid_argument("CHSH needs exactly two settings per wing");
    }
    ChshResult r;
    r.e_ab = correlation(model, grid, 0, 0, samples, derive_seed(seed, 0, 0), threads);
    r.e_ab_prime = correlation(model, grid, 0, 1, samples, derive_seed(seed, 1, 0), threads);
    r.e_a_prime_b = correlation(model, grid, 1, 0, samples, derive_seed(seed, 2, 0), threads);
    r.e_a_prime_b_prime = correlation(model, grid, 1, 1, samples, derive_seed(seed, 3, 0), threads);
    r.value = std::abs(r.e_ab.value - r.e_ab_prime.value + r.e_a_prime_b.value + r.e_a_prime_b_prime.value);
    double var = 0.0;
    for (auto const* e : {&r.e_ab, &r.e_ab_prime, &r.e_a_prime_b, &r.e_a_prime_b_prime})
    {
        var += e->std_error * e->std_error;
    }
    r.std_error = std::sqrt(var);
    return r;
}

double chsh_singlet(ChshSettings const& s)
{
    auto e = [](UnitVector const& u, UnitVector const& v) { return -std::clamp(u.dot(v), -1.0, 1.0); };
    return std::abs(e(s.a, s.b) - e(s.a, s.b_prime) + e(s.a_prime, s.b) + e(s.a_prime, s.b_prime));
}

double chsh_local_mixture(LocalDetMixture const& mixture,
                          std::string const& a,
                          std::string const& a_prime,
                          std::string const& b,
                          std::string const& b_prime)
{
    double sum = 0.0;
    for (auto const& s : mixture.strategies())
    {
        double const term = s.a(a) * s.b(b) - s.a(a) * s.b(b_prime) + s.a(a_prime) * s.b(b)
                            + s.a(a_prime) * s.b(b_prime);
        sum += s.weight * term;
    }
    return std::abs(sum);
}

AngleRad signaling_threshold(AngleRad omega)
{
    double const w = omega.radians();
    if (!(w > kPi / 2 && w < kPi))
    {
        throw DomainError("signaling_threshold: omega " + std::to_string(w) + " outside (pi/2, pi)");
    }
    return AngleRad(threshold_formula(w));
}

WitnessResult signaling_witness(UnitVector const& a, UnitVector const& b, UnitVector const& lambda)
{
    UnitVector const a_hat = rotate_pair(a, b).a_hat;
    double const single = a.dot(lambda);
    double const joint = a_hat.dot(lambda);
    WitnessResult w;
    w.boundary = std::abs(single) < kSignEpsilon || std::abs(joint) < kSignEpsilon;
    w.flip = sign_of(single) != sign_of(joint);
    return w;
}

CoplanarConfig coplanar_configuration(double omega, double theta)
{
    return {UnitVector::in_xz_plane(theta), UnitVector::in_xz_plane(theta - omega), UnitVector::z_axis()};
}

bool analytic_flip(double omega, double theta)
{
    if (omega > kPi / 2 && omega < kPi && theta <= kPi / 2)
    {
        return theta > signaling_threshold(AngleRad(omega)).radians();
    }
    // Outside the analyzed range: compare which side of lambda's equator a
    // sits on before and after the rotation.
    double const rotated = theta + rotation_amount(omega);
    bool const single_positive = theta <= kPi / 2;
    bool const joint_positive = rotated >= -kPi / 2 && rotated <= kPi / 2;
    return single_positive != joint_positive;
}

std::size_t RegionMap::compared() const
{
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](RegionCell const& c) { return !c.near_boundary; }));
}

std::size_t RegionMap::agreements() const
{
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](RegionCell const& c) {
        return !c.near_boundary && c.analytic == c.mc;
    }));
}

std::vector<double> default_region_omegas(std::size_t n)
{
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i)
    {
        out.push_back(kPi / 2 + static_cast<double>(i + 1) * (kPi / 2) / static_cast<double>(n + 1));
    }
    return out;
}

std::vector<double> default_region_thetas(std::size_t n)
{
    std::vector<double> out;
    for (std::size_t j = 0; j < n; ++j)
    {
        out.push_back(static_cast<double>(j + 1) * (kPi / 2) / static_cast<double>(n));
    }
    if (!out.empty())
    {
        out.back() = kPi / 2;
    }
    return out;
}

RegionMap region_map(std::vector<double> const& omegas, std::vector<double> const& thetas)
{
    if (omegas.size() < 2 || thetas.size() < 2)
    {
        throw std::invalid_argument("region map needs at least 2 points on each axis");
    }
    RegionMap map;
    map.omegas = omegas;
    map.thetas = thetas;
    map.cells.reserve(omegas.size() * thetas.size());
    for (double const w : omegas)
    {
        for (double const t : thetas)
        {
            auto const cfg = coplanar_configuration(w, t);
            auto const witness = signaling_witness(cfg.a, cfg.b, cfg.lambda);
            RegionCell cell;
            cell.omega = w;
            cell.theta = t;
            cell.analytic = analytic_flip(w, t);
            cell.mc = witness.flip;
            cell.sign_boundary = witness.boundary;
            cell.near_boundary = std::abs(t - threshold_formula(w)) <= kBoundaryBand;
            cell.extrapolated = t > kPi / 2;
            map.cells.push_back(cell);
        }
    }
    return map;
}

void write_curve_csv(std::ostream& out, std::vector<CurvePoint> const& curve)
{
    out << "omega,E,E_analytic,stderr,N\n";
    for (auto const& p : curve)
    {
        out << format_double(p.omega) << ',' << format_double(p.estimate) << ',' << format_double(p.analytic) << ','
            << format_double(p.std_error) << ',' << p.samples << '\n';
    }
}

void write_region_csv(std::ostream& out, RegionMap const& map)
{
    out << "omega,theta,analytic,mc\n";
    for (auto const& c : map.cells)
    {
        out << format_double(c.omega) << ',' << format_double(c.theta) << ',' << (c.analytic ? 1 : 0) << ','
            << (c.mc ? 1 : 0) << '\n';
    }
}

void write_region_svg(std::ostream& out, RegionMap const& map)
{
    constexpr int kCell = 8;
    int const width = static_cast<int>(map.omegas.size()) * kCell;
    int const height = static_cast<int>(map.thetas.size()) * kCell;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    for (std::size_t i = 0; i < map.omegas.size(); ++i)
    {
        for (std::size_t j = 0; j < map.thetas.size(); ++j)
        {
            auto const& c = map.cells[i * map.thetas.size() + j];
            char const* fill = c.analytic != c.mc ? "#000000" : (c.mc ? "#c0392b" : "#ecf0f1");
            // theta grows upward
            int const y = height - static_cast<int>(j + 1) * kCell;
            out << "<rect x=\"" << i * kCell << "\" y=\"" << y << "\" width=\"" << kCell << "\" height=\"" << kCell
                << "\" fill=\"" << fill << "\"/>\n";
        }
    }
    out << "</svg>\n";
}

}  // namespace hvlab
