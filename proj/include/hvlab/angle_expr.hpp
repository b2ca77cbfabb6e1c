#pragma once

#include <string_view>
#include <vector>

namespace hvlab {

/// Evaluates an angle written in radians with `pi` literals: "3pi/4",
/// "-pi/2", "2*pi/3 + 0.1", "0.25". Throws std::invalid_argument on syntax
/// errors.
double parse_angle(std::string_view text);

/// "lo:hi:n" -> n evenly spaced values from lo to hi inclusive (n >= 1; n = 1
/// yields lo). Endpoints go through parse_angle.
std::vector<double> parse_angle_grid(std::string_view text);

}  // namespace hvlab
