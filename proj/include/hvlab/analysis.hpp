#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hvlab/geometry.hpp"
#include "hvlab/models.hpp"
#include "hvlab/sampling.hpp"

namespace hvlab {

struct CorrelationEstimate
{
    double value = 0.0;   //!< mean of x*y
    double std_error = 0.0; //!< sqrt((1 - E^2) / N)
    std::uint64_t samples = 0;
};

/// E over `samples` joint runs of one pair of `grid`, by index.
CorrelationEstimate correlation(Model const& model,
                                SettingsGrid const& grid,
                                std::size_t a_index,
                                std::size_t b_index,
                                std::uint64_t samples,
                                std::uint64_t seed,
                                unsigned threads = 1);

/// E(a, b) over `samples` joint runs; the pair is labeled a0, b0.
CorrelationEstimate correlation(Model const& model,
                                UnitVector const& a,
                                UnitVector const& b,
                                std::uint64_t samples,
                                std::uint64_t seed,
                                unsigned threads = 1);

struct CurvePoint
{
    double omega = 0.0;
    double estimate = 0.0;
    double analytic = 0.0;  //!< -cos(omega)
    double std_error = 0.0;
    std::uint64_t samples = 0;
};

/// a = +z and b in the xz-plane at each omega; point i uses seed derive_seed(seed, i, 0).
std::vector<CurvePoint> correlation_curve(Model const& model,
                                          std::vector<double> const& omegas,
                                          std::uint64_t samples,
                                          std::uint64_t seed,
                                          unsigned threads = 1);

/*!
 * Per-point comparison against -cos(omega) at `sigmas` standard errors.
 *
 * A point outside the band is rerun once with 4x the samples (fresh seed)
 * before it is declared failed. Standard errors are floored at 1/N so the
 * exact endpoints (E = -1 at omega = 0, E = +1 at omega = pi) still compare
 * against a nonzero band.
 */
struct EquivalencePoint
{
    CurvePoint point;
    bool rerun = false;
    bool pass = false;
};
std::vector<EquivalencePoint> quantum_equivalence(Model const& model,
                                                  std::vector<double> const& omegas,
                                                  std::uint64_t samples,
                                                  std::uint64_t seed,
                                                  double sigmas = 4.0,
                                                  unsigned threads = 1);

struct ChshSettings
{
    UnitVector a;
    UnitVector a_prime;
    UnitVector b;
    UnitVector b_prime;

    /// Planar (0, pi/2; pi/4, 3pi/4).
    static ChshSettings optimal_planar();

    /// 2x2 grid labeled a0 = a, a1 = a', b0 = b, b1 = b'.
    SettingsGrid grid() const;
};

struct ChshResult
{
    double value = 0.0;
    double std_error = 0.0;  //!< propagated from the four correlators
    CorrelationEstimate e_ab;
    CorrelationEstimate e_ab_prime;
    CorrelationEstimate e_a_prime_b;
    CorrelationEstimate e_a_prime_b_prime;
};

/// S = |E(a,b) - E(a,b') + E(a',b) + E(a',b')| with `samples` runs per correlator.
ChshResult chsh(Model const& model,
                ChshSettings const& settings,
                std::uint64_t samples,
                std::uint64_t seed,
                unsigned threads = 1);

/// Same over a grid with exactly two settings per wing, in the order (a, a'; b, b').
ChshResult chsh(Model const& model,
                SettingsGrid const& grid,
                std::uint64_t samples,
                std::uint64_t seed,
                unsigned threads = 1);

/// Same combination with the singlet correlator -cos(omega).
double chsh_singlet(ChshSettings const& settings);

/// Exact CHSH value of a local mixture over labels (a, a'; b, b').
double chsh_local_mixture(LocalDetMixture const& mixture,
                          std::string const& a,
                          std::string const& a_prime,
                          std::string const& b,
                          std::string const& b_prime);

/*!
 * Smallest lambda-to-a angle at which a joint measurement flips wing A's
 * outcome: (pi/2) cos^2(omega/2) + omega/2. Only defined for
 * pi/2 < omega < pi, where it stays below pi/2. Throws DomainError otherwise.
 */
AngleRad signaling_threshold(AngleRad omega);

struct WitnessResult
{
    bool flip = false;      //!< joint-mode A outcome differs from the single-mode one
    bool boundary = false;  //!< a projection was within the sign epsilon
};

/// Compares sgn(a_hat . lambda) with sgn(a . lambda) for the symmetric model.
/// Boundary projections resolve to +1 and are flagged.
WitnessResult signaling_witness(UnitVector const& a, UnitVector const& b, UnitVector const& lambda);

/// Coplanar placement: lambda = +z, a at angle theta from lambda, b at angle
/// omega from a on the far side of lambda, so lambda lies between a and b.
struct CoplanarConfig
{
    UnitVector a;
    UnitVector b;
    UnitVector lambda;
};
CoplanarConfig coplanar_configuration(double omega, double theta);

/// Analytic flip for the coplanar placement: the outward (or inward) rotation
/// of a by (omega_hat - omega)/2 carries it across the equator of lambda.
/// For theta <= pi/2 this is theta > (pi/2) cos^2(omega/2) + omega/2.
bool analytic_flip(double omega, double theta);

struct RegionCell
{
    double omega = 0.0;
    double theta = 0.0;
    bool analytic = false;
    bool mc = false;
    bool near_boundary = false;  //!< |theta - theta*(omega)| <= 1e-6
    bool sign_boundary = false;  //!< witness hit a zero projection
    bool extrapolated = false;   //!< theta > pi/2, outside the analyzed range
};

struct RegionMap
{
    std::vector<double> omegas;
    std::vector<double> thetas;
    std::vector<RegionCell> cells;  //!< omega-major

    std::size_t compared() const;
    std::size_t agreements() const;
    bool all_agree() const { return agreements() == compared(); }
};

/// Default grid: omega at n interior points of (pi/2, pi), theta = (j+1)(pi/2)/n.
std::vector<double> default_region_omegas(std::size_t n);
std::vector<double> default_region_thetas(std::size_t n);

/// Throws std::invalid_argument unless both axes have at least 2 points.
RegionMap region_map(std::vector<double> const& omegas, std::vector<double> const& thetas);

void write_curve_csv(std::ostream& out, std::vector<CurvePoint> const& curve);
void write_region_csv(std::ostream& out, RegionMap const& map);
void write_region_svg(std::ostream& out, RegionMap const& map);

}  // namespace hvlab
