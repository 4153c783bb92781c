#include "ctp/math.hpp"

#include <cmath>

namespace ctp {

namespace {

double simpson(double fa, double fm, double fb, double h) {
    return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double b, double fa, double fm,
             double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(fa, flm, fm, m - a);
    const double right = simpson(fm, frm, fb, b - m);
    const double refined = left + right;
    if (depth <= 0 || std::abs(refined - whole) <= 15.0 * tol) {
        return refined + (refined - whole) / 15.0;
    }
    return adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, int max_depth) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = simpson(fa, fm, fb, b - a);
    // Convert the relative tolerance into an absolute one using a coarse
    // magnitude estimate; fall back to the coarse value for zero integrals.
    const double scale = std::max(std::abs(whole), 1e-300);
    return adapt(f, a, b, fa, fm, fb, whole, rel_tol * scale, max_depth);
}

}  // namespace ctp
