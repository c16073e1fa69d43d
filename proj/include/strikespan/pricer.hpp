#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "strikespan/curve.hpp"
#include "strikespan/error.hpp"
#include "strikespan/payoff.hpp"
#include "strikespan/quadrature.hpp"

namespace strikespan {

/// Quadrature and truncation controls. Unset tolerances scale with the
/// discounted forward: tol = 1e-6 max(1, lambda(0)), tail_tol = 1e-9 max(1, lambda(0)).
struct QuadConfig {
    std::optional<double> tol;
    std::optional<double> tail_tol;
    std::size_t max_nodes = 200000;
    std::size_t base_cells = 64;
    /// Lower bound on the truncation strike (the geometric-grid rule may pick a larger one).
    double min_truncation = 0.0;
    /// When nonempty the Stieltjes sum is taken on exactly these nodes.
    std::vector<double> fixed_partition;
    /// Record the final partition in the report.
    bool keep_partition = false;
};

struct ResolvedQuad {
    double tol;
    double tail_tol;
    std::size_t max_nodes;
    std::size_t base_cells;
    double min_truncation;
};

inline ResolvedQuad resolve(const QuadConfig& cfg, const CallCurve& c) {
    const double scale = std::max(1.0, c.forward());
    ResolvedQuad r{cfg.tol.value_or(1e-6 * scale), cfg.tail_tol.value_or(1e-9 * scale), cfg.max_nodes,
                   std::max<std::size_t>(1, cfg.base_cells), cfg.min_truncation};
    require(r.tol > 0.0, ErrorKind::BadParams, "quadrature tol must be > 0");
    require(r.tail_tol > 0.0, ErrorKind::BadParams, "tail tol must be > 0");
    return r;
}

/// Value of f(X_T) with the contribution of each summand kept separately.
/// value is the sum of the term fields, in declaration order.
struct PriceReport {
    std::string form;
    double value = 0.0;
    double cash_term = 0.0;
    double linear_term = 0.0;    // convex form: f'_+(0) lambda(0)
    double integral_term = 0.0;
    double kink_term = 0.0;      // Bick / convex forms: slope-change terms
    double jump_left_term = 0.0;
    double jump_right_term = 0.0;
    double truncation = 0.0;
    double tail_bound = 0.0;
    std::size_t n_quadrature = 0;
    double error_estimate = 0.0;
    std::vector<double> partition;

    [[nodiscard]] double sum_of_terms() const {
        return cash_term + linear_term + integral_term + kink_term + jump_left_term + jump_right_term;
    }
};

struct TailSample {
    double strike = 0.0;
    double digital = 0.0;
    double product = 0.0; // |f(a-)| Q(X_T >= a)
};

/// Outcome of the admissibility checks for pricing f against a curve.
struct ValidityReport {
    bool tail_ok = true;       // |f(x-)| Q(X_T >= x) -> 0
    bool integrable_ok = true; // f(X_T) in L1
    bool stieltjes_ok = true;  // f' finite so the Stieltjes integral exists
    std::vector<TailSample> tail_grid;
    std::vector<std::string> messages;

    [[nodiscard]] bool ok() const { return tail_ok && integrable_ok && stieltjes_ok; }
};

namespace detail {

/// Start of the geometric strike grid used by the tail checks.
inline double tail_grid_start(const CallCurve& c) {
    return std::max(1.0, c.forward() / c.discount());
}

template <class AbsF>
std::vector<TailSample> tail_grid(AbsF&& abs_f_left, const CallCurve& c) {
    std::vector<TailSample> grid;
    double a = tail_grid_start(c);
    for (int m = 0; m <= 100; ++m, a *= 2.0) {
        const double dig = c.digital_ge(a);
        const double fa = abs_f_left(a);
        double product = 0.0;
        if (dig > 0.0) {
            product = std::isfinite(fa) ? fa * dig : kInf;
        }
        grid.push_back({a, dig, product});
        if (dig == 0.0 || !std::isfinite(product)) {
            break;
        }
    }
    return grid;
}

inline bool tail_decays(const std::vector<TailSample>& grid, double tail_tol) {
    const auto& last = grid.back();
    if (last.digital == 0.0) {
        return std::isfinite(last.product);
    }
    if (!(last.product < tail_tol)) {
        return false;
    }
    const std::size_t n = grid.size();
    for (std::size_t i = n >= 3 ? n - 2 : 1; i < n; ++i) {
        if (grid[i].product > grid[i - 1].product) {
            return false;
        }
    }
    return true;
}

/// Smallest strike on the tail grid where Q(X_T >= a) < 1e-9 and
/// |f(a-)| Q(X_T >= a) < tail_tol.
template <class AbsF>
double truncation_point(AbsF&& abs_f_left, const CallCurve& c, const ResolvedQuad& q) {
    double a = tail_grid_start(c);
    for (int m = 0; m <= 200; ++m, a *= 2.0) {
        const double dig = c.digital_ge(a);
        if (dig < 1e-9 && (dig == 0.0 || abs_f_left(a) * dig < q.tail_tol)) {
            return std::max(a, q.min_truncation);
        }
    }
    throw Error(ErrorKind::TailConditionFailed,
                "tail condition lim |f(x-)| Q(X_T >= x) = 0: no truncation strike found on the geometric grid");
}

inline std::vector<double> forced_nodes(const Payoff& p, const CallCurve& c, double lo, double hi,
                                        std::size_t max_nodes) {
    std::vector<double> forced;
    for (double s : p.boundaries()) {
        if (s > lo && s < hi) {
            forced.push_back(s);
        }
    }
    const auto bp = c.breakpoints();
    const auto first = std::upper_bound(bp.begin(), bp.end(), lo);
    const auto last = std::lower_bound(bp.begin(), bp.end(), hi);
    if (first < last && static_cast<std::size_t>(last - first) <= max_nodes / 2) {
        forced.insert(forced.end(), first, last);
    }
    return forced;
}

inline void jump_terms(const Payoff& p, const CallCurve& c, double& left_term, double& right_term) {
    double left = 0.0;
    double right = 0.0;
    for (const auto& j : jumps(p)) {
        left += j.left * c.digital_ge(j.strike);
        right += j.right * c.digital_gt(j.strike);
    }
    left_term = c.discount() * left;
    right_term = c.discount() * right;
}

inline void finish(PriceReport& r) { r.value = r.sum_of_terms(); }

inline void require_converged(const quad::Result& q, const std::string& what) {
    if (!q.converged) {
        throw Error(ErrorKind::QuadratureNoConvergence,
                    what + ": error estimate " + std::to_string(q.error_estimate) + " after " +
                        std::to_string(q.cells) + " cells");
    }
}

} // namespace detail

/// Checks the admissibility conditions for pricing p against c: tail decay
/// on a geometric grid, integrability of f(X_T), and finiteness of f' (so
/// the Stieltjes integral exists).
inline ValidityReport validate_class(const Payoff& p, const CallCurve& c, const QuadConfig& cfg = {}) {
    const auto q = resolve(cfg, c);
    ValidityReport rep;
    auto abs_f_left = [&](double a) { return std::abs(p.eval_left(a)); };
    rep.tail_grid = detail::tail_grid(abs_f_left, c);
    rep.tail_ok = detail::tail_decays(rep.tail_grid, q.tail_tol);
    if (!rep.tail_ok) {
        const auto& last = rep.tail_grid.back();
        rep.messages.push_back("tail condition lim |f(x-)| Q(X_T >= x) = 0 fails: |f(a-)| Q(X_T >= a) = " +
                               std::to_string(last.product) + " at a = " + std::to_string(last.strike));
    }

    if (const auto* emp = dynamic_cast<const EmpiricalCurve*>(&c)) {
        long double all = 0.0L;
        long double half = 0.0L;
        const auto xs = emp->samples();
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double v = std::abs(p.eval(xs[i]));
            all += v;
            if (i % 2 == 0) {
                half += v;
            }
        }
        rep.integrable_ok = std::isfinite(static_cast<double>(all)) && std::isfinite(static_cast<double>(half));
    } else if (c.has_density()) {
        // Lognormal-type tails have every moment: polynomial growth suffices.
        for (std::size_t i = 0; i < rep.tail_grid.size(); ++i) {
            const auto& g = rep.tail_grid[i];
            const double fa = std::abs(p.eval_left(g.strike));
            if (g.digital > 0.0 && !std::isfinite(fa)) {
                rep.integrable_ok = false;
            }
            if (i > 0) {
                const double prev = std::abs(p.eval_left(rep.tail_grid[i - 1].strike));
                if (prev > 0.0 && std::isfinite(fa) && std::log2(fa / prev) > 64.0) {
                    rep.integrable_ok = false;
                }
            }
        }
    } else {
        for (const auto& g : rep.tail_grid) {
            if (g.digital > 0.0 && !std::isfinite(p.eval_left(g.strike))) {
                rep.integrable_ok = false;
            }
        }
        for (double b : c.breakpoints()) {
            if (!std::isfinite(p.eval(b))) {
                rep.integrable_ok = false;
            }
        }
    }
    if (!rep.integrable_ok) {
        rep.messages.push_back("integrability E_Q|f(X_T)| < inf fails");
    }

    const double reach = rep.tail_grid.back().strike;
    for (const auto& s : p.segments()) {
        if (s.lo >= reach) {
            break;
        }
        const double hi = std::min(std::isfinite(s.hi) ? s.hi : reach, reach);
        for (int i = 1; i < 16; ++i) {
            const double a = s.lo + (hi - s.lo) * i / 16.0;
            if (!std::isfinite(s.deriv(a))) {
                rep.stieltjes_ok = false;
            }
        }
    }
    if (!rep.stieltjes_ok) {
        rep.messages.push_back("Stieltjes integral of f' against the call curve does not exist (f' not finite)");
    }
    return rep;
}

/// Throws TailConditionFailed naming every failed condition.
inline void enforce_class(const Payoff& p, const CallCurve& c, const QuadConfig& cfg = {}) {
    const auto rep = validate_class(p, c, cfg);
    if (!rep.ok()) {
        std::string msg;
        for (const auto& m : rep.messages) {
            msg += (msg.empty() ? "" : "; ") + m;
        }
        throw Error(ErrorKind::TailConditionFailed, msg);
    }
}

namespace detail {

/// Stieltjes form over a curve; `cash_weight` is Q(Y in C) for barrier curves.
inline PriceReport stieltjes_form(const Payoff& p, const CallCurve& c, const QuadConfig& cfg, double cash_weight,
                                  std::string form) {
    const auto q = resolve(cfg, c);
    enforce_class(p, c, cfg);
    PriceReport r;
    r.form = std::move(form);
    quad::Result integral;
    auto deriv = [&](double a) { return p.deriv(a); };
    auto lam = [&](double a) { return c.lambda(a); };
    if (!cfg.fixed_partition.empty()) {
        r.truncation = cfg.fixed_partition.back();
        integral = quad::stieltjes_fixed(deriv, lam, cfg.fixed_partition);
    } else {
        r.truncation = truncation_point([&](double a) { return std::abs(p.eval_left(a)); }, c, q);
        const auto forced = forced_nodes(p, c, 0.0, r.truncation, q.max_nodes);
        const auto nodes = quad::make_partition(0.0, r.truncation, forced, q.base_cells);
        integral = quad::stieltjes_midpoint(deriv, lam, nodes, q.tol, q.max_nodes, cfg.keep_partition);
        require_converged(integral, "Stieltjes integral of f' against the call curve");
    }
    r.cash_term = c.discount() * p.eval(0.0) * cash_weight;
    r.integral_term = -integral.value;
    jump_terms(p, c, r.jump_left_term, r.jump_right_term);
    r.tail_bound = c.discount() * std::abs(p.eval_left(r.truncation)) * c.digital_ge(r.truncation);
    r.n_quadrature = integral.cells;
    r.error_estimate = integral.error_estimate;
    r.partition = std::move(integral.partition);
    finish(r);
    return r;
}

} // namespace detail

/// Primary form: B_T^{-1} f(0) - int f'(a) lambda(da)
///   + B_T^{-1} sum Delta_- f(s_k) Q(X_T >= s_k) + B_T^{-1} sum Delta_+ f(s_k) Q(X_T > s_k).
/// The Stieltjes integral is a midpoint-in-f' sum against exact curve
/// increments on an adaptively refined partition that always contains the
/// payoff's boundary points.
inline PriceReport price_theorem1(const Payoff& p, const CallCurve& c, const QuadConfig& cfg = {}) {
    return detail::stieltjes_form(p, c, cfg, 1.0, "theorem1");
}

/// Lebesgue form: the Stieltjes integral replaced by
/// +int f'(a) B_T^{-1} Q(X_T > a) da (adaptive Gauss-Legendre).
inline PriceReport price_lebesgue(const Payoff& p, const CallCurve& c, const QuadConfig& cfg = {}) {
    const auto q = resolve(cfg, c);
    enforce_class(p, c, cfg);
    PriceReport r;
    r.form = "lebesgue";
    r.truncation = detail::truncation_point([&](double a) { return std::abs(p.eval_left(a)); }, c, q);
    const auto nodes =
        quad::make_partition(0.0, r.truncation, detail::forced_nodes(p, c, 0.0, r.truncation, q.max_nodes),
                             q.base_cells);
    const auto integral =
        quad::gauss_legendre([&](double a) { return p.deriv(a) * c.digital_gt(a); }, nodes,
                             q.tol / c.discount(), q.max_nodes);
    detail::require_converged(integral, "Lebesgue integral of f' against the digital curve");
    r.cash_term = c.discount() * p.eval(0.0);
    r.integral_term = c.discount() * integral.value;
    detail::jump_terms(p, c, r.jump_left_term, r.jump_right_term);
    r.tail_bound = c.discount() * std::abs(p.eval_left(r.truncation)) * c.digital_ge(r.truncation);
    r.n_quadrature = integral.cells;
    r.error_estimate = integral.error_estimate;
    detail::finish(r);
    return r;
}

/// Bick's form: B_T^{-1} f(0) + int f''(a) lambda(a) da + both jump sums
///   + sum_k (f'(s_k+) - f'(s_k-)) lambda(s_k), with f'(0-) = 0.
inline PriceReport price_bick(const Payoff& p, const CallCurve& c, const QuadConfig& cfg = {}) {
    require(p.has_second_derivative(), ErrorKind::SecondDerivativeUnavailable,
            "payoff '" + p.label() + "' does not carry f''");
    const auto q = resolve(cfg, c);
    enforce_class(p, c, cfg);
    PriceReport r;
    r.form = "bick";
    r.truncation = detail::truncation_point([&](double a) { return std::abs(p.eval_left(a)); }, c, q);
    const auto nodes =
        quad::make_partition(0.0, r.truncation, detail::forced_nodes(p, c, 0.0, r.truncation, q.max_nodes),
                             q.base_cells);
    const auto integral =
        quad::gauss_legendre([&](double a) { return p.second(a) * c.lambda(a); }, nodes, q.tol, q.max_nodes);
    detail::require_converged(integral, "integral of f'' against the call curve");
    double kinks = 0.0;
    for (std::size_t k = 0; k < p.boundaries().size(); ++k) {
        const double change = p.right_deriv(k) - p.left_deriv(k);
        if (change != 0.0) {
            kinks += change * c.lambda(p.boundaries()[k]);
        }
    }
    r.cash_term = c.discount() * p.eval(0.0);
    r.integral_term = integral.value;
    r.kink_term = kinks;
    detail::jump_terms(p, c, r.jump_left_term, r.jump_right_term);
    r.tail_bound = c.discount() * std::abs(p.eval_left(r.truncation)) * c.digital_ge(r.truncation);
    r.n_quadrature = integral.cells;
    r.error_estimate = integral.error_estimate;
    detail::finish(r);
    return r;
}

/// Density form: int f(a) lambda''(a) da. Needs a backend with a density.
inline PriceReport price_bl(const Payoff& p, const CallCurve& c, const QuadConfig& cfg = {}) {
    require(c.has_density(), ErrorKind::DensityUnavailable,
            "backend '" + std::string(c.backend()) + "' has no second strike-derivative");
    const auto q = resolve(cfg, c);
    enforce_class(p, c, cfg);
    PriceReport r;
    r.form = "bl";
    r.truncation = detail::truncation_point([&](double a) { return std::abs(p.eval_left(a)); }, c, q);
    const auto nodes =
        quad::make_partition(0.0, r.truncation, detail::forced_nodes(p, c, 0.0, r.truncation, q.max_nodes),
                             q.base_cells);
    const auto integral =
        quad::gauss_legendre([&](double a) { return p.eval(a) * *c.density(a); }, nodes, q.tol, q.max_nodes);
    detail::require_converged(integral, "integral of f against the density");
    r.integral_term = integral.value;
    r.tail_bound = c.discount() * std::abs(p.eval_left(r.truncation)) * c.digital_ge(r.truncation);
    r.n_quadrature = integral.cells;
    r.error_estimate = integral.error_estimate;
    detail::finish(r);
    return r;
}

/// Convex form: B_T^{-1} f(0) + f'_+(0) lambda(0) + sum m_i lambda(a_i) + int lambda(a) mu_ac(a) da.
inline PriceReport price_convex(const ConvexDecomposition& d, const CallCurve& c, const QuadConfig& cfg = {}) {
    const auto q = resolve(cfg, c);
    PriceReport r;
    r.form = "convex";
    r.cash_term = c.discount() * d.f0;
    r.linear_term = d.slope0 * c.lambda(0.0);
    double kinks = 0.0;
    for (const auto& atom : d.atoms) {
        kinks += atom.mass * c.lambda(atom.strike);
    }
    r.kink_term = kinks;
    auto abs_f = [&](double a) { return std::abs(d.reconstruct(a)); };
    r.truncation = detail::truncation_point(abs_f, c, q);
    if (d.density) {
        std::vector<double> forced = d.density_breaks;
        const auto bp = c.breakpoints();
        if (bp.size() <= q.max_nodes / 2) {
            forced.insert(forced.end(), bp.begin(), bp.end());
        }
        const auto nodes = quad::make_partition(0.0, r.truncation, forced, q.base_cells);
        const auto integral =
            quad::gauss_legendre([&](double a) { return c.lambda(a) * d.density(a); }, nodes, q.tol, q.max_nodes);
        detail::require_converged(integral, "integral of the call curve against the kink density");
        r.integral_term = integral.value;
        r.n_quadrature = integral.cells;
        r.error_estimate = integral.error_estimate;
    }
    r.tail_bound = c.discount() * abs_f(r.truncation) * c.digital_ge(r.truncation);
    detail::finish(r);
    return r;
}

/// Which ends of a window [alpha, beta] belong to it.
struct WindowEnds {
    bool lo_closed = true;
    bool hi_closed = true;
};

/// Value of f(X_T) 1_{X_T in window}, f continuous on [alpha, beta]:
///   closed ends: B_T^{-1} f(alpha) Q(X_T >= alpha) - B_T^{-1} f(beta) Q(X_T > beta) - int_alpha^beta f' dlambda
///   open ends:   B_T^{-1} f(alpha+) Q(X_T > alpha) - B_T^{-1} f(beta-) Q(X_T >= beta) - int_alpha^beta f' dlambda
inline PriceReport price_windowed(const Payoff& p, double alpha, double beta, WindowEnds ends, const CallCurve& c,
                                  const QuadConfig& cfg = {}) {
    require(std::isfinite(alpha) && std::isfinite(beta) && alpha >= 0.0 && alpha < beta, ErrorKind::BadWindow,
            "window needs 0 <= alpha < beta < inf");
    for (const auto& j : jumps(p)) {
        require(!(j.strike > alpha && j.strike < beta), ErrorKind::BadWindow,
                "payoff jumps at " + std::to_string(j.strike) + " inside the window");
    }
    const auto q = resolve(cfg, c);
    const double f_lo = p.segments()[p.segment_index(alpha)].value(alpha);
    const double f_hi = p.eval_left(beta);

    PriceReport r;
    r.form = "windowed";
    r.truncation = beta;
    const auto nodes =
        quad::make_partition(alpha, beta, detail::forced_nodes(p, c, alpha, beta, q.max_nodes), q.base_cells);
    const auto integral = quad::stieltjes_midpoint([&](double a) { return p.deriv(a); },
                                                   [&](double a) { return c.lambda(a); }, nodes, q.tol, q.max_nodes);
    detail::require_converged(integral, "windowed Stieltjes integral");
    r.jump_left_term = c.discount() * f_lo * (ends.lo_closed ? c.digital_ge(alpha) : c.digital_gt(alpha));
    r.integral_term = -integral.value;
    r.jump_right_term = -c.discount() * f_hi * (ends.hi_closed ? c.digital_gt(beta) : c.digital_ge(beta));
    r.n_quadrature = integral.cells;
    r.error_estimate = integral.error_estimate;
    detail::finish(r);
    return r;
}

/// Every applicable form for (p, c); forms whose preconditions fail are skipped.
inline std::vector<PriceReport> price_all_forms(const Payoff& p, const CallCurve& c, const QuadConfig& cfg = {}) {
    std::vector<PriceReport> out;
    out.push_back(price_theorem1(p, c, cfg));
    out.push_back(price_lebesgue(p, c, cfg));
    if (p.has_second_derivative()) {
        out.push_back(price_bick(p, c, cfg));
    }
    if (c.has_density()) {
        out.push_back(price_bl(p, c, cfg));
    }
    if (check_convex(p).convex && p.has_second_derivative()) {
        out.push_back(price_convex(convex_decompose(p), c, cfg));
    }
    return out;
}

} // namespace strikespan
