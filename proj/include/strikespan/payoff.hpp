#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "strikespan/error.hpp"
#include "strikespan/quadrature.hpp"

namespace strikespan {

using ScalarFn = std::function<double(double)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Largest number of boundary points a payoff may carry.
inline constexpr std::size_t kMaxBoundaries = 10000;

/// Descriptor of a closed-form segment, kept so payoffs can be echoed back
/// into JSON. An empty kind marks a hand-built segment.
struct SegmentSpec {
    std::string kind;
    std::vector<double> coeffs;
};

/// One maximal C1 piece of a payoff on the open interval (lo, hi).
/// `value` and `deriv` must be defined on the closed interval so that the
/// one-sided limits at the ends are obtained by plain evaluation.
struct Segment {
    double lo = 0.0;
    double hi = kInf;
    ScalarFn value;
    ScalarFn deriv;
    ScalarFn second; // may be empty
    SegmentSpec spec;

    [[nodiscard]] bool has_second() const { return static_cast<bool>(second); }

    static Segment polynomial(double lo, double hi, std::vector<double> coeffs) {
        if (coeffs.empty()) {
            coeffs.push_back(0.0);
        }
        auto horner = [](const std::vector<double>& c) {
            return [c](double x) {
                double s = 0.0;
                for (auto it = c.rbegin(); it != c.rend(); ++it) {
                    s = s * x + *it;
                }
                return s;
            };
        };
        auto differentiate = [](const std::vector<double>& c) {
            std::vector<double> d;
            for (std::size_t i = 1; i < c.size(); ++i) {
                d.push_back(c[i] * static_cast<double>(i));
            }
            if (d.empty()) {
                d.push_back(0.0);
            }
            return d;
        };
        const auto d1 = differentiate(coeffs);
        const auto d2 = differentiate(d1);
        return Segment{lo, hi, horner(coeffs), horner(d1), horner(d2), {"poly", std::move(coeffs)}};
    }

    static Segment constant(double lo, double hi, double c) { return polynomial(lo, hi, {c}); }

    /// scale * exp(rate * x)
    static Segment exponential(double lo, double hi, double scale, double rate) {
        return Segment{lo,
                       hi,
                       [=](double x) { return scale * std::exp(rate * x); },
                       [=](double x) { return scale * rate * std::exp(rate * x); },
                       [=](double x) { return scale * rate * rate * std::exp(rate * x); },
                       {"exp", {scale, rate}}};
    }

    /// Straight line through (x0, y0) and (x1, y1), written in interpolation
    /// form so the endpoint values are reproduced exactly. Extends linearly
    /// when hi is infinite.
    static Segment line(double lo, double hi, double x0, double y0, double x1, double y1) {
        const double h = x1 - x0;
        const double slope = (y1 - y0) / h;
        auto seg = Segment{lo,
                           hi,
                           [=](double x) { return y0 * ((x1 - x) / h) + y1 * ((x - x0) / h); },
                           [=](double) { return slope; },
                           [](double) { return 0.0; },
                           {"poly", {y0 - slope * x0, slope}}};
        return seg;
    }
};

/// A boundary point of a payoff with both one-sided jumps.
struct Jump {
    double strike = 0.0;
    double left = 0.0;  // f(s) - f(s-)
    double right = 0.0; // f(s+) - f(s)
};

/// Payoff function on [0, inf): an ordered list of segments partitioning
/// (0, inf) at 0 = s_0 < s_1 < ... < s_N plus the value at every s_k, which
/// may differ from both one-sided limits.
class Payoff {
public:
    Payoff() = default;

    explicit Payoff(std::vector<Segment> segments, std::vector<std::pair<double, double>> point_values = {},
                    std::string label = {})
        : segments_(std::move(segments)), label_(std::move(label)) {
        require(!segments_.empty(), ErrorKind::BadParams, "payoff needs at least one segment");
        require(segments_.size() <= kMaxBoundaries, ErrorKind::BadParams, "too many segments");
        require(segments_.front().lo == 0.0, ErrorKind::BadParams, "first segment must start at 0");
        require(segments_.back().hi == kInf, ErrorKind::BadParams, "last segment must extend to infinity");
        for (std::size_t i = 0; i < segments_.size(); ++i) {
            const auto& s = segments_[i];
            require(s.lo < s.hi, ErrorKind::BadParams, "segment with lo >= hi");
            require(static_cast<bool>(s.value) && static_cast<bool>(s.deriv), ErrorKind::BadParams,
                    "segment needs value and derivative");
            if (i + 1 < segments_.size()) {
                require(s.hi == segments_[i + 1].lo, ErrorKind::BadParams, "segments must be contiguous");
            }
            boundaries_.push_back(s.lo);
            point_values_.push_back(s.value(s.lo));
        }
        for (const auto& [s, v] : point_values) {
            auto it = std::find(boundaries_.begin(), boundaries_.end(), s);
            require(it != boundaries_.end(), ErrorKind::BadParams,
                    "point value given at " + std::to_string(s) + " which is not a segment boundary");
            point_values_[static_cast<std::size_t>(it - boundaries_.begin())] = v;
        }
    }

    [[nodiscard]] const std::vector<Segment>& segments() const { return segments_; }
    [[nodiscard]] std::span<const double> boundaries() const { return boundaries_; }
    [[nodiscard]] std::span<const double> point_values() const { return point_values_; }
    [[nodiscard]] const std::string& label() const { return label_; }

    [[nodiscard]] std::size_t segment_index(double x) const {
        auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), x);
        return static_cast<std::size_t>(it - boundaries_.begin()) - 1;
    }

    /// f(x); at a boundary point returns the stored point value.
    [[nodiscard]] double eval(double x) const {
        assert(x >= 0.0);
        const std::size_t k = segment_index(x);
        if (x == boundaries_[k]) {
            return point_values_[k];
        }
        return segments_[k].value(x);
    }

    double operator()(double x) const { return eval(x); }

    /// f'(x) inside a segment; at a boundary the right derivative.
    [[nodiscard]] double deriv(double x) const { return segments_[segment_index(x)].deriv(x); }

    [[nodiscard]] bool has_second_derivative() const {
        return std::all_of(segments_.begin(), segments_.end(), [](const Segment& s) { return s.has_second(); });
    }

    [[nodiscard]] double second(double x) const {
        const auto& seg = segments_[segment_index(x)];
        require(seg.has_second(), ErrorKind::SecondDerivativeUnavailable,
                "segment at " + std::to_string(x) + " has no second derivative");
        return seg.second(x);
    }

    /// One-sided limits at the boundary s_k (k indexes boundaries()).
    [[nodiscard]] double left_limit(std::size_t k) const {
        return k == 0 ? point_values_[0] : segments_[k - 1].value(boundaries_[k]);
    }
    [[nodiscard]] double right_limit(std::size_t k) const { return segments_[k].value(boundaries_[k]); }
    [[nodiscard]] double left_deriv(std::size_t k) const {
        return k == 0 ? 0.0 : segments_[k - 1].deriv(boundaries_[k]);
    }
    [[nodiscard]] double right_deriv(std::size_t k) const { return segments_[k].deriv(boundaries_[k]); }

    /// f(x-) for any x > 0 (equals f(x) away from boundaries).
    [[nodiscard]] double eval_left(double x) const {
        if (x <= 0.0) {
            return eval(0.0);
        }
        auto it = std::lower_bound(boundaries_.begin(), boundaries_.end(), x);
        const std::size_t k = static_cast<std::size_t>(it - boundaries_.begin()) - 1;
        return segments_[k].value(x);
    }

private:
    std::vector<Segment> segments_;
    std::vector<double> boundaries_;
    std::vector<double> point_values_;
    std::string label_;
};

namespace detail {

inline bool negligible_jump(double jump, double scale) {
    return std::abs(jump) <= 1e-12 * std::max(1.0, std::abs(scale));
}

/// Sampling window used for checks on a segment; unbounded segments are
/// probed on [lo, lo + 16 max(1, lo)].
inline std::pair<double, double> probe_window(const Segment& s) {
    const double hi = std::isfinite(s.hi) ? s.hi : s.lo + 16.0 * std::max(1.0, s.lo);
    return {s.lo, hi};
}

} // namespace detail

/// All boundary points with a non-zero jump. The left jump at s_0 = 0 is 0.
inline std::vector<Jump> jumps(const Payoff& p) {
    std::vector<Jump> out;
    const auto b = p.boundaries();
    const auto pv = p.point_values();
    for (std::size_t k = 0; k < b.size(); ++k) {
        double left = k == 0 ? 0.0 : pv[k] - p.left_limit(k);
        double right = p.right_limit(k) - pv[k];
        if (detail::negligible_jump(left, pv[k])) {
            left = 0.0;
        }
        if (detail::negligible_jump(right, pv[k])) {
            right = 0.0;
        }
        if (left != 0.0 || right != 0.0) {
            out.push_back({b[k], left, right});
        }
    }
    return out;
}

/// Largest relative mismatch between deriv and a central difference of value
/// (and between second and a difference of deriv, when present) over random
/// interior points of every segment. Relative to max(1, |derivative|).
inline double verify_derivatives(const Payoff& p, int samples_per_segment = 100, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (const auto& s : p.segments()) {
        const auto [lo, hi] = detail::probe_window(s);
        std::uniform_real_distribution<double> pick(lo, hi);
        for (int i = 0; i < samples_per_segment; ++i) {
            const double a = pick(rng);
            const double h = 1e-5 * std::max(1.0, a);
            if (a - h <= lo || a + h >= hi) {
                continue;
            }
            const double fd = (s.value(a + h) - s.value(a - h)) / (2.0 * h);
            const double d = s.deriv(a);
            worst = std::max(worst, std::abs(fd - d) / std::max(1.0, std::abs(d)));
            if (s.has_second()) {
                const double fd2 = (s.deriv(a + h) - s.deriv(a - h)) / (2.0 * h);
                const double d2 = s.second(a);
                worst = std::max(worst, std::abs(fd2 - d2) / std::max(1.0, std::abs(d2)));
            }
        }
    }
    return worst;
}

struct KinkAtom {
    double strike = 0.0;
    double mass = 0.0;
};

/// f(x) = f0 + slope0 x + sum_i m_i (x - a_i)^+ + int (x - a)^+ density(a) da
struct ConvexDecomposition {
    double f0 = 0.0;
    double slope0 = 0.0;
    std::vector<KinkAtom> atoms;
    ScalarFn density;                 // absolutely continuous part of the kink measure
    std::vector<double> density_breaks; // points where density may be discontinuous

    [[nodiscard]] double density_at(double a) const { return density ? density(a) : 0.0; }

    [[nodiscard]] double reconstruct(double x) const {
        double v = f0 + slope0 * x;
        for (const auto& atom : atoms) {
            v += atom.mass * std::max(x - atom.strike, 0.0);
        }
        if (density && x > 0.0) {
            const auto nodes = quad::make_partition(0.0, x, density_breaks, 4);
            const auto r = quad::gauss_legendre([&](double a) { return (x - a) * density(a); }, nodes,
                                                1e-12 * (1.0 + std::abs(v)), 20000);
            v += r.value;
        }
        return v;
    }
};

struct ConvexityCheck {
    bool convex = true;
    std::string reason;
};

/// Sample-based convexity test: 1024 points per segment plus every kink.
inline ConvexityCheck check_convex(const Payoff& p) {
    constexpr int kSamples = 1024;
    if (!jumps(p).empty()) {
        const auto j = jumps(p).front();
        return {false, "value jump at " + std::to_string(j.strike)};
    }
    const auto b = p.boundaries();
    for (std::size_t k = 0; k < p.segments().size(); ++k) {
        const auto& s = p.segments()[k];
        const auto [lo, hi] = detail::probe_window(s);
        double prev = s.deriv(lo);
        const double scale = std::max(1.0, std::abs(prev));
        for (int i = 1; i <= kSamples; ++i) {
            const double a = lo + (hi - lo) * static_cast<double>(i) / kSamples;
            const double d = s.deriv(a);
            if (d < prev - 1e-12 * std::max(scale, std::abs(d))) {
                return {false, "derivative decreases near " + std::to_string(a)};
            }
            prev = d;
        }
        if (k > 0) {
            const double dl = p.left_deriv(k);
            const double dr = p.right_deriv(k);
            if (dr < dl - 1e-12 * std::max(1.0, std::abs(dl))) {
                return {false, "concave kink at " + std::to_string(b[k])};
            }
        }
    }
    return {};
}

/// Kink-measure representation of a convex payoff: atoms at the kinks with
/// the slope change as mass, density f'' on the smooth pieces.
inline ConvexDecomposition convex_decompose(const Payoff& p) {
    const auto check = check_convex(p);
    require(check.convex, ErrorKind::NotConvex, check.reason);

    ConvexDecomposition d;
    d.f0 = p.eval(0.0);
    d.slope0 = p.right_deriv(0);
    const auto b = p.boundaries();
    for (std::size_t k = 1; k < b.size(); ++k) {
        const double mass = p.right_deriv(k) - p.left_deriv(k);
        if (mass > 0.0 && !detail::negligible_jump(mass, p.right_deriv(k))) {
            d.atoms.push_back({b[k], mass});
        }
    }
    bool curved = false;
    for (const auto& s : p.segments()) {
        if (!s.has_second()) {
            throw Error(ErrorKind::SecondDerivativeUnavailable, "convex decomposition needs f'' on every segment");
        }
        if (s.spec.kind != "poly" || s.spec.coeffs.size() > 2) {
            curved = true;
        }
    }
    if (curved) {
        d.density = [p](double a) { return std::max(0.0, p.second(a)); };
        d.density_breaks.assign(b.begin() + 1, b.end());
    }
    return d;
}

} // namespace strikespan
