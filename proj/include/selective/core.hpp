#pragma once

// Shared numeric helpers, error types and the score domain used by every
// selective-loss module.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace selective {

// Error hierarchy. Everything thrown by the library derives from Error so
// callers (the CLI in particular) can map failures onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidSpec : public Error {
public:
    using Error::Error;
};

class NonFiniteInput : public Error {
public:
    using Error::Error;
};

class NonInjectiveLink : public Error {
public:
    using Error::Error;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class DegenerateDomain : public Error {
public:
    using Error::Error;
};

class RootNotBracketed : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class Diverged : public Error {
public:
    using Error::Error;
};

// Arguments to exp() are clamped to this magnitude; results saturate at
// roughly 1e304 instead of overflowing.
inline constexpr double kExpClamp = 700.0;

// Bisection settings shared by the root finders.
inline constexpr double kRootTolerance = 1e-12;
inline constexpr int kMaxBisections = 200;

namespace detail {

inline double clamp_exp_arg(double x, bool* saturated = nullptr) {
    if (x > kExpClamp) {
        if (saturated) *saturated = true;
        return kExpClamp;
    }
    if (x < -kExpClamp) {
        if (saturated) *saturated = true;
        return -kExpClamp;
    }
    return x;
}

inline double safe_exp(double x, bool* saturated = nullptr) {
    return std::exp(clamp_exp_arg(x, saturated));
}

inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// log(1 + e^x) without overflow.
inline double softplus(double x) {
    if (x > 0.0) {
        return x + std::log1p(std::exp(-x));
    }
    return std::log1p(std::exp(x));
}

// log(cosh(x)) without overflow.
inline double log_cosh(double x) {
    const double a = std::fabs(x);
    return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

inline double sign_right(double x) { return x >= 0.0 ? 1.0 : -1.0; }

inline void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw NonFiniteInput(std::string(what) + " must be finite");
    }
}

}  // namespace detail

// Compact score interval [s_min, s_max] sampled on a uniform grid.
struct ScoreDomain {
    double s_min = -5.0;
    double s_max = 5.0;
    std::size_t grid_points = 4096;

    ScoreDomain() = default;
    ScoreDomain(double lo, double hi, std::size_t points)
        : s_min(lo), s_max(hi), grid_points(points) {
        validate();
    }

    void validate() const {
        if (!std::isfinite(s_min) || !std::isfinite(s_max) || !(s_min < s_max)) {
            throw InvalidSpec("domain: s_min must be < s_max");
        }
        if (grid_points < 2) {
            throw InvalidSpec("domain: grid_points must be >= 2");
        }
    }

    double width() const { return s_max - s_min; }
    double step() const { return width() / static_cast<double>(grid_points - 1); }

    double at(std::size_t i) const {
        if (i + 1 == grid_points) return s_max;
        return s_min + step() * static_cast<double>(i);
    }

    std::vector<double> grid() const {
        std::vector<double> g(grid_points);
        for (std::size_t i = 0; i < grid_points; ++i) g[i] = at(i);
        return g;
    }

    ScoreDomain refined(std::size_t factor) const {
        return ScoreDomain(s_min, s_max, (grid_points - 1) * factor + 1);
    }

    bool contains(double z) const { return z >= s_min && z <= s_max; }
};

// Monotone bisection on [lo, hi] for an increasing function g with
// g(lo) <= 0 <= g(hi). Stops when the residual drops below tol or the
// bracket collapses to adjacent doubles.
template <class F>
double bisect_increasing(F&& g, double lo, double hi, double tol = kRootTolerance,
                         int max_iter = kMaxBisections) {
    double g_lo = g(lo);
    double g_hi = g(hi);
    if (g_lo > 0.0 || g_hi < 0.0) {
        throw RootNotBracketed("root is not bracketed by [" + std::to_string(lo) + ", " +
                               std::to_string(hi) + "]");
    }
    if (g_lo == 0.0) return lo;
    if (g_hi == 0.0) return hi;
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double gm = g(mid);
        if (gm == 0.0) return mid;
        if (gm < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (std::fabs(gm) < tol && (hi - lo) < tol * (1.0 + std::fabs(mid))) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace selective
