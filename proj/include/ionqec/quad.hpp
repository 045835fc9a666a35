#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace ionqec {

// Cumulative trapezoid over a uniform grid. out[0] = 0, out[k] = integral up to t[k].
template <typename T>
std::vector<T> cumtrapz(double dt, std::span<const T> f) {
    std::vector<T> out(f.size(), T{});
    for (size_t k = 1; k < f.size(); ++k)
        out[k] = out[k - 1] + (f[k - 1] + f[k]) * (dt / 2.0);
    return out;
}

// Composite Simpson on [a, b] with n subintervals (n forced even).
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i)
        s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Trapezoid weights for a uniform grid of k+1 samples: dt on interior, dt/2 at ends.
inline double trapezoid_weight(size_t k, size_t last, double dt) {
    return (k == 0 || k == last) ? dt / 2.0 : dt;
}

// dt^2 Richardson estimate of the cumulative-trapezoid error for an integrand
// sampled on the grid: |I_h - I_{h/2}| is ~3/4 of the h-grid error, so the
// coarse-vs-fine difference itself is the reported bound (conservative by 4/3).
template <typename T>
double richardson_tolerance(double dt, std::span<const T> f) {
    // second-difference bound: err <= dt^2/12 * integral |f''| ~ dt/12 * sum |d2f|
    double acc = 0.0;
    for (size_t k = 1; k + 1 < f.size(); ++k)
        acc += std::abs(f[k + 1] - 2.0 * f[k] + f[k - 1]);
    return acc * dt / 12.0;
}

}  // namespace ionqec
