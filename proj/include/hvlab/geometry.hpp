#pragma once

#include <stdexcept>
#include <string>

namespace hvlab {

inline constexpr double kPi = 3.14159265358979323846;

/// Raised when an argument lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

/// Angle in radians. Pair angles and lambda-axis angles live in [0, pi].
class AngleRad
{
  public:
    constexpr AngleRad() = default;
    constexpr explicit AngleRad(double radians) : value_(radians) {}

    constexpr double radians() const { return value_; }
    double degrees() const { return value_ * 180.0 / kPi; }

    friend constexpr bool operator==(AngleRad, AngleRad) = default;
    friend constexpr auto operator<=>(AngleRad, AngleRad) = default;

  private:
    double value_ = 0.0;
};

/// A point on the unit 2-sphere.
///
/// Every factory renormalizes, so |v| = 1 holds to rounding (well inside
/// 1e-12) for every instance that can be observed.
class UnitVector
{
  public:
    /// Defaults to +z.
    UnitVector() = default;

    /// Normalizes (x, y, z). Throws DomainError for a (near-)zero vector.
    static UnitVector from_components(double x, double y, double z);

    /// Spherical coordinates: polar angle from +z, azimuth from +x toward +y.
    static UnitVector from_spherical(double polar, double azimuth);

    /// Direction in the xz-plane at signed angle `angle` from +z toward +x.
    static UnitVector in_xz_plane(double angle);

    static UnitVector x_axis() { return UnitVector(1.0, 0.0, 0.0); }
    static UnitVector y_axis() { return UnitVector(0.0, 1.0, 0.0); }
    static UnitVector z_axis() { return UnitVector(0.0, 0.0, 1.0); }

    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }

    double dot(UnitVector const& other) const
    {
        return x_ * other.x_ + y_ * other.y_ + z_ * other.z_;
    }

    double norm() const;

    UnitVector operator-() const { return UnitVector(-x_, -y_, -z_); }

    friend bool operator==(UnitVector const&, UnitVector const&) = default;

    std::string to_string() const;

  private:
    UnitVector(double x, double y, double z) : x_(x), y_(y), z_(z) {}

    double x_ = 0.0;
    double y_ = 0.0;
    double z_ = 1.0;
};

/// arccos of the clamped dot product, evaluated as atan2(|u x v|, u . v); symmetric.
AngleRad angle_between(UnitVector const& u, UnitVector const& v);

/// Effective angle of the rotated pair: pi * sin^2(omega / 2).
///
/// Monotone on [0, pi] with fixed points 0, pi/2 and pi. Throws DomainError
/// when omega is outside [0, pi] by more than 1e-9.
AngleRad omega_hat(AngleRad omega);

struct RotatedPair
{
    UnitVector a_hat;
    UnitVector b_hat;
};

/*!
 * Rotate (a, b) within their common plane, symmetrically about their
 * bisector, so that the new pair subtends omega_hat(angle(a, b)).
 *
 * a_hat stays on a's side of the bisector. Each vector moves by
 * |omega_hat - omega| / 2: away from the bisector when omega > pi/2, toward
 * it when omega < pi/2.
 *
 * Degenerate inputs: a == b returns the bisector twice (omega_hat = 0), and
 * an antipodal pair is returned unchanged since omega_hat(pi) = pi and the
 * rotation vanishes, so no plane is needed.
 */
RotatedPair rotate_pair(UnitVector const& a, UnitVector const& b);

/// Scalar triple product det[u, v, w].
double triple_product(UnitVector const& u, UnitVector const& v, UnitVector const& w);

/// Normalized a + b. Throws DomainError for an antipodal pair.
UnitVector bisector(UnitVector const& a, UnitVector const& b);

}  // namespace hvlab
