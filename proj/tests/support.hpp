#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hvlab/geometry.hpp"
#include "hvlab/tables.hpp"

namespace hvlab::testing {

/// Uniform direction from a test-owned generator (inverse-CDF on z, not the library's Gaussian method).
inline UnitVector random_direction(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double const z = 2.0 * u(rng) - 1.0;
    double const phi = 2.0 * kPi * u(rng);
    double const r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return UnitVector::from_components(r * std::cos(phi), r * std::sin(phi), z);
}

/// Random pair at a given angle, in a random plane.
inline std::pair<UnitVector, UnitVector> random_pair(std::mt19937_64& rng, double omega)
{
    UnitVector const a = random_direction(rng);
    UnitVector w = random_direction(rng);
    double const d = a.dot(w);
    w = UnitVector::from_components(w.x() - d * a.x(), w.y() - d * a.y(), w.z() - d * a.z());
    UnitVector const b = UnitVector::from_components(std::cos(omega) * a.x() + std::sin(omega) * w.x(),
                                                     std::cos(omega) * a.y() + std::sin(omega) * w.y(),
                                                     std::cos(omega) * a.z() + std::sin(omega) * w.z());
    return {a, b};
}

inline std::vector<std::string> labels(char const* prefix, std::size_t n)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i)
    {
        out.push_back(prefix + std::to_string(i));
    }
    return out;
}

/// Exact (A, B, C, X, Y, Z) table from an unnormalized weight function of label indices.
inline JointTable exact_table(std::size_t na,
                              std::size_t nb,
                              std::size_t nc,
                              std::size_t nz,
                              std::function<double(std::size_t, std::size_t, std::size_t, int, int, std::size_t)> const& w)
{
    std::vector<Variable> vars{{"A", labels("a", na)}, {"B", labels("b", nb)},  {"C", labels("c", nc)},
                               {"X", {"-1", "+1"}},    {"Y", {"-1", "+1"}},     {"Z", labels("z", nz)}};
    std::vector<double> p;
    double sum = 0.0;
    for (std::size_t a = 0; a < na; ++a)
        for (std::size_t b = 0; b < nb; ++b)
            for (std::size_t c = 0; c < nc; ++c)
                for (int x = 0; x < 2; ++x)
                    for (int y = 0; y < 2; ++y)
                        for (std::size_t z = 0; z < nz; ++z)
                        {
                            p.push_back(w(a, b, c, 2 * x - 1, 2 * y - 1, z));
                            sum += p.back();
                        }
    for (double& v : p)
    {
        v /= sum;
    }
    return JointTable(std::move(vars), std::move(p));
}

}  // namespace hvlab::testing
