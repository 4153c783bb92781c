#pragma once

#include <array>
#include <cmath>
#include <functional>

namespace ctp {

using Vec3 = std::array<double, 3>;

inline constexpr double kPi = 3.14159265358979323846;

/// Radius of a unit-volume ball: sigma = (3/(4*pi))^(1/3).  A body of volume
/// V has radius sigma * V^(1/3).
inline const double kSigma = std::cbrt(3.0 / (4.0 * kPi));

/// Angular weight of the collision kernel integrated over the contact
/// hemisphere: int_0^{pi/2} sin t cos t dt * int_0^{2pi} dphi = pi.
inline constexpr double kAngularWeight = kPi;

/// Collision rate per unit speed and unit squared radius sum:
/// pi * sigma^2 = pi * (3/(4*pi))^{2/3}.  The total jump intensity at volume
/// V is U * kRatePrefactor * E[(V^{1/3} + v^{1/3})^2].
inline const double kRatePrefactor = kAngularWeight * kSigma * kSigma;

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

/// Unit contact direction for polar angle theta (from the drift axis e1) and
/// azimuth phi around it.
inline Vec3 contact_direction(double theta, double phi) {
    return {std::cos(theta), std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi)};
}

/// Adaptive Simpson quadrature with a relative tolerance.  Recursion depth is
/// bounded; the estimate on the deepest interval is returned unrefined, which
/// keeps the routine total on integrable endpoint singularities (v^{1/3} at 0
/// and the like).
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, int max_depth = 40);

}  // namespace ctp
