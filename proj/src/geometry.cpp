#include "hvlab/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace hvlab {
namespace {

using Vec3 = std::array<double, 3>;

// Below this length a difference or sum of unit vectors has no usable direction.
constexpr double kDegenerateLength = 1e-12;

Vec3 components(UnitVector const& v)
{
    return {v.x(), v.y(), v.z()};
}

double length(Vec3 const& v)
{
    return std::hypot(v[0], v[1], v[2]);
}

Vec3 combine(double s, Vec3 const& u, double t, Vec3 const& v)
{
    return {s * u[0] + t * v[0], s * u[1] + t * v[1], s * u[2] + t * v[2]};
}

UnitVector normalized(Vec3 const& v)
{
    return UnitVector::from_components(v[0], v[1], v[2]);
}

}  // namespace

UnitVector UnitVector::from_components(double x, double y, double z)
{
    double const n = std::hypot(x, y, z);
    if (!(n > 1e-300) || !std::isfinite(n))
    {
        throw DomainError("cannot normalize a zero or non-finite vector");
    }
    UnitVector v(x / n, y / n, z / n);
    // One refinement step keeps |v| - 1 at the ulp level.
    double const n2 = std::hypot(v.x_, v.y_, v.z_);
    v.x_ /= n2;
    v.y_ /= n2;
    v.z_ /= n2;
    return v;
}

UnitVector UnitVector::from_spherical(double polar, double azimuth)
{
    double const s = std::sin(polar);
    return from_components(s * std::cos(azimuth), s * std::sin(azimuth), std::cos(polar));
}

UnitVector UnitVector::in_xz_plane(double angle)
{
    return from_components(std::sin(angle), 0.0, std::cos(angle));
}

double UnitVector::norm() const
{
    return std::hypot(x_, y_, z_);
}

std::string UnitVector::to_string() const
{
    char buf[96];
    std::snprintf(buf, sizeof(buf), "(%.17g, %.17g, %.17g)", x_, y_, z_);
    return buf;
}

AngleRad angle_between(UnitVector const& u, UnitVector const& v)
{
    // Same value as the clamped arccos, without its loss of precision near 0 and pi.
    double const cx = u.y() * v.z() - u.z() * v.y();
    double const cy = u.z() * v.x() - u.x() * v.z();
    double const cz = u.x() * v.y() - u.y() * v.x();
    return AngleRad(std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), std::clamp(u.dot(v), -1.0, 1.0)));
}

AngleRad omega_hat(AngleRad omega)
{
    double w = omega.radians();
    if (!(w >= -1e-9 && w <= kPi + 1e-9))
    {
        throw DomainError("omega_hat: angle " + std::to_string(w) + " outside [0, pi]");
    }
    w = std::clamp(w, 0.0, kPi);
    // Exact at the fixed points so callers can compare without slack.
    if (w == 0.0 || w == kPi || w == kPi / 2)
    {
        return AngleRad(w);
    }
    double const s = std::sin(w / 2);
    return AngleRad(kPi * s * s);
}

UnitVector bisector(UnitVector const& a, UnitVector const& b)
{
    Vec3 const sum = combine(1.0, components(a), 1.0, components(b));
    if (length(sum) < kDegenerateLength)
    {
        throw DomainError("bisector undefined for antipodal vectors");
    }
    return normalized(sum);
}

RotatedPair rotate_pair(UnitVector const& a, UnitVector const& b)
{
    Vec3 const va = components(a);
    Vec3 const vb = components(b);
    Vec3 const sum = combine(1.0, va, 1.0, vb);
    Vec3 const diff = combine(1.0, va, -1.0, vb);

    if (length(sum) < kDegenerateLength)
    {
        // omega = pi: omega_hat = pi, zero rotation.
        return {a, b};
    }
    UnitVector const mid = normalized(sum);
    if (length(diff) < kDegenerateLength)
    {
        return {mid, mid};
    }

    // In-plane orthonormal frame: mid along the bisector, side toward a.
    Vec3 const m = components(mid);
    Vec3 const side = components(normalized(diff));

    double const half_hat = omega_hat(angle_between(a, b)).radians() / 2;
    double const c = std::cos(half_hat);
    double const s = std::sin(half_hat);
    return {normalized(combine(c, m, s, side)), normalized(combine(c, m, -s, side))};
}

double triple_product(UnitVector const& u, UnitVector const& v, UnitVector const& w)
{
    return u.x() * (v.y() * w.z() - v.z() * w.y()) - u.y() * (v.x() * w.z() - v.z() * w.x())
           + u.z() * (v.x() * w.y() - v.y() * w.x());
}

}  // namespace hvlab
