#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace regmdp {

namespace bounding_detail {
inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}
}  // namespace bounding_detail

/// Bounding functions applied to advantage terms. Valid variants are
/// non-decreasing, sign-preserving maps h with x >= h(x) >= 0 for x >= 0,
/// x <= h(x) <= 0 for x <= 0, h(0) = 0, and codomain inside [-c_h, c_h].
/// Sign violates the magnitude condition and is kept only for
/// ablations; solvers reject it unless explicitly allowed.
struct BoundingFn {
    enum class Variant { kIdentity, kZero, kClip, kTanh, kSign, kTimeDependentClip };

    Variant variant = Variant::kIdentity;
    double scale = 1.0;    // clip / tanh
    double lo = -1.0;      // clip
    double hi = 1.0;       // clip
    double t1 = 1e6;       // tdclip
    double t2 = 10.0;      // tdclip

    static BoundingFn identity() { return {}; }
    static BoundingFn zero() { return {Variant::kZero}; }
    static BoundingFn clip(double scale, double lo, double hi) {
        if (!(scale > 0.0) || lo > hi)
            throw std::invalid_argument("BoundingFn::clip: need scale > 0 and lo <= hi");
        return {Variant::kClip, scale, lo, hi};
    }
    static BoundingFn tanh_fn(double scale) {
        if (!(scale > 0.0)) throw std::invalid_argument("BoundingFn::tanh_fn: need scale > 0");
        return {Variant::kTanh, scale};
    }
    static BoundingFn sign_fn() { return {Variant::kSign}; }
    static BoundingFn time_dependent_clip(double t1, double t2) {
        if (!(t1 > 0.0) || t2 < 0.0)
            throw std::invalid_argument("BoundingFn::time_dependent_clip: need T1 > 0, T2 >= 0");
        BoundingFn fn{Variant::kTimeDependentClip};
        fn.t1 = t1;
        fn.t2 = t2;
        return fn;
    }

    /// Codomain bound over all inputs and steps; +infinity for Identity and
    /// TimeDependentClip (whose per-step bound grows without limit).
    double c_h() const {
        switch (variant) {
            case Variant::kIdentity: return std::numeric_limits<double>::infinity();
            case Variant::kZero: return 0.0;
            case Variant::kClip: return std::max(std::abs(lo), std::abs(hi));
            case Variant::kTanh: return 1.0;
            case Variant::kSign: return 1.0;
            case Variant::kTimeDependentClip: return std::numeric_limits<double>::infinity();
        }
        return std::numeric_limits<double>::infinity();
    }

    /// Structural validity against the bounding-function conditions.
    /// Clip and Tanh need scale >= 1 (otherwise |h(x)| can exceed |x|) and
    /// Clip needs lo <= 0 <= hi for sign preservation.
    bool is_valid() const {
        switch (variant) {
            case Variant::kIdentity:
            case Variant::kZero:
            case Variant::kTimeDependentClip: return true;
            case Variant::kClip: return scale >= 1.0 && lo <= 0.0 && hi >= 0.0;
            case Variant::kTanh: return scale >= 1.0;
            case Variant::kSign: return false;
        }
        return false;
    }

    std::string name() const {
        using bounding_detail::num;
        switch (variant) {
            case Variant::kIdentity: return "identity";
            case Variant::kZero: return "zero";
            case Variant::kClip:
                return "clip(" + num(scale) + "," + num(lo) + "," + num(hi) + ")";
            case Variant::kTanh: return "tanh(" + num(scale) + ")";
            case Variant::kSign: return "sign";
            case Variant::kTimeDependentClip:
                return "tdclip(" + num(t1) + "," + num(t2) + ")";
        }
        return "?";
    }

    bool operator==(const BoundingFn&) const = default;
};

/// Evaluates a bounding function. step enters only TimeDependentClip:
/// with tau = (step + T1)/T1 and rho = tau/(tau + T2), the output is
/// clip(x * rho, -tau, tau), which approaches the identity as step grows.
inline double bound_eval(const BoundingFn& fn, double x, long step = 0) {
    switch (fn.variant) {
        case BoundingFn::Variant::kIdentity: return x;
        case BoundingFn::Variant::kZero: return 0.0;
        case BoundingFn::Variant::kClip: return std::clamp(x / fn.scale, fn.lo, fn.hi);
        case BoundingFn::Variant::kTanh: return std::tanh(x / fn.scale);
        case BoundingFn::Variant::kSign: return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
        case BoundingFn::Variant::kTimeDependentClip: {
            const double tau = (static_cast<double>(step) + fn.t1) / fn.t1;
            const double rho = tau / (tau + fn.t2);
            return std::clamp(x * rho, -tau, tau);
        }
    }
    return x;
}

struct BoundingValidityReport {
    bool non_decreasing = true;
    bool sign_and_magnitude = true;  // x >= h(x) >= 0 for x >= 0, mirrored for x <= 0
    bool within_c_h = true;
    bool zero_at_zero = true;

    bool all_passed() const {
        return non_decreasing && sign_and_magnitude && within_c_h && zero_at_zero;
    }
};

/// Samples the bounding-function conditions on a grid (expected to cover a
/// symmetric range including 0). Sign fails sign_and_magnitude on any grid
/// containing a point in (0, 1).
inline BoundingValidityReport validate_bounding(const BoundingFn& fn,
                                                std::span<const double> grid, long step = 0) {
    BoundingValidityReport report;
    const double c = fn.c_h();
    double prev_x = -std::numeric_limits<double>::infinity();
    double prev_h = -std::numeric_limits<double>::infinity();
    for (double x : grid) {
        const double h = bound_eval(fn, x, step);
        if (x >= prev_x && h < prev_h - 1e-15) report.non_decreasing = false;
        if (x >= 0.0 && !(h >= -1e-15 && h <= x + 1e-15)) report.sign_and_magnitude = false;
        if (x <= 0.0 && !(h <= 1e-15 && h >= x - 1e-15)) report.sign_and_magnitude = false;
        if (std::isfinite(c) && std::abs(h) > c + 1e-15) report.within_c_h = false;
        prev_x = x;
        prev_h = h;
    }
    if (std::abs(bound_eval(fn, 0.0, step)) > 1e-15) report.zero_at_zero = false;
    return report;
}

/// Degree of entropy-bonus reduction,
///   delta_bar = sup_{z<0} (1 - g(alpha z)/(alpha z)),
/// 0 for Identity, 1 for Zero, and numerically 1 for any bounded variant.
/// The supremum is taken over a fixed log-spaced grid of the function
/// argument y = alpha z in [-1e6, -1e-9] (the sup itself does not depend on
/// alpha, since alpha z spans all negatives as z does), so results are
/// reproducible. Time-dependent variants are evaluated at step 0.
inline double delta_bar(const BoundingFn& fn, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("delta_bar: alpha must be positive");
    if (fn.variant == BoundingFn::Variant::kIdentity) return 0.0;
    if (fn.variant == BoundingFn::Variant::kZero) return 1.0;
    constexpr int kPoints = 601;
    constexpr double kExpLo = -9.0, kExpHi = 6.0;
    double sup = 0.0;
    for (int i = 0; i < kPoints; ++i) {
        const double e = kExpLo + (kExpHi - kExpLo) * i / (kPoints - 1);
        const double y = -std::pow(10.0, e);
        sup = std::max(sup, 1.0 - bound_eval(fn, y, 0) / y);
    }
    return std::clamp(sup, 0.0, 1.0);
}

}  // namespace regmdp
