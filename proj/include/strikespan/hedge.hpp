#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "strikespan/curve.hpp"
#include "strikespan/error.hpp"
#include "strikespan/payoff.hpp"
#include "strikespan/pricer.hpp"
#include "strikespan/sampling.hpp"

namespace strikespan {

enum class DigitalFlavor { Ge, Gt };

inline std::string to_string(DigitalFlavor f) { return f == DigitalFlavor::Ge ? "ge" : "gt"; }

struct DigitalPosition {
    double strike = 0.0;
    double weight = 0.0;
    DigitalFlavor flavor = DigitalFlavor::Gt;
};

/// weight * [(x - lo)^+ - (x - hi)^+]
struct CallSpreadPosition {
    double lo = 0.0;
    double hi = 0.0;
    double weight = 0.0;
};

enum class HedgeKind { DigitalStrip, CallSpread };

inline std::string to_string(HedgeKind k) { return k == HedgeKind::DigitalStrip ? "digital_strip" : "call_spread"; }

/// Static portfolio of T-bonds (cash), digitals and call spreads.
struct HedgePortfolio {
    HedgeKind kind = HedgeKind::DigitalStrip;
    double cash = 0.0;
    std::vector<DigitalPosition> digitals;
    std::vector<CallSpreadPosition> call_spreads;
};

/// Payoff of the portfolio at terminal value x.
inline double terminal_payoff(const HedgePortfolio& h, double x) {
    double v = h.cash;
    for (const auto& d : h.digitals) {
        const bool in = d.flavor == DigitalFlavor::Ge ? x >= d.strike : x > d.strike;
        if (in) {
            v += d.weight;
        }
    }
    for (const auto& s : h.call_spreads) {
        v += s.weight * (std::max(x - s.lo, 0.0) - std::max(x - s.hi, 0.0));
    }
    return v;
}

/// Price of the portfolio off a call curve: each digital at B_T^{-1} Q(.),
/// each spread at lambda(lo) - lambda(hi).
inline double portfolio_price(const HedgePortfolio& h, const CallCurve& c) {
    double digitals = 0.0;
    for (const auto& d : h.digitals) {
        digitals += d.weight * (d.flavor == DigitalFlavor::Ge ? c.digital_ge(d.strike) : c.digital_gt(d.strike));
    }
    double spreads = 0.0;
    for (const auto& s : h.call_spreads) {
        spreads += s.weight * (c.lambda(s.lo) - c.lambda(s.hi));
    }
    return c.discount() * (h.cash + digitals) + spreads;
}

/// Digital-strip replication: f(0) in cash, f'(midpoint) * width in a
/// Q(X_T > a_j) digital per cell, plus the exact jump digitals.
inline HedgePortfolio build_digital_hedge(const Payoff& p, std::span<const double> grid) {
    require(grid.size() >= 2, ErrorKind::BadGrid, "hedge grid needs at least two nodes");
    require(grid.front() == 0.0, ErrorKind::BadGrid, "hedge grid must start at 0");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        require(std::isfinite(grid[i]) && grid[i] > grid[i - 1], ErrorKind::BadGrid,
                "hedge grid must be finite and strictly increasing");
    }
    for (double s : p.boundaries()) {
        if (s > 0.0 && s <= grid.back()) {
            require(std::binary_search(grid.begin(), grid.end(), s), ErrorKind::BadGrid,
                    "hedge grid is missing payoff boundary " + std::to_string(s));
        }
    }
    HedgePortfolio h;
    h.kind = HedgeKind::DigitalStrip;
    h.cash = p.eval(0.0);
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
        const double w = p.deriv(0.5 * (grid[j] + grid[j + 1])) * (grid[j + 1] - grid[j]);
        if (w != 0.0) {
            h.digitals.push_back({grid[j], w, DigitalFlavor::Gt});
        }
    }
    for (const auto& j : jumps(p)) {
        if (j.left != 0.0) {
            h.digitals.push_back({j.strike, j.left, DigitalFlavor::Ge});
        }
        if (j.right != 0.0) {
            h.digitals.push_back({j.strike, j.right, DigitalFlavor::Gt});
        }
    }
    return h;
}

/// Uniform grid on [0, a_max] (a_max from the pricer's truncation rule)
/// with every payoff boundary inserted.
inline std::vector<double> default_hedge_grid(const Payoff& p, const CallCurve& c, std::size_t nodes,
                                              const QuadConfig& cfg = {}) {
    require(nodes >= 2, ErrorKind::BadGrid, "hedge grid needs at least two nodes");
    const auto q = resolve(cfg, c);
    const double a_max = detail::truncation_point([&](double a) { return std::abs(p.eval_left(a)); }, c, q);
    std::vector<double> boundaries(p.boundaries().begin(), p.boundaries().end());
    return quad::make_partition(0.0, a_max, boundaries, nodes - 1);
}

/// Call-spread approximation of f 1_{[alpha, beta]} on n equal cells:
///   f(alpha) 1_{x >= alpha} - f(beta) 1_{x > beta} + sum c_k [(x - a_k)^+ - (x - a_{k+1})^+]
/// with c_k the secant slope of f on [a_k, a_{k+1}].
inline HedgePortfolio build_call_spread_hedge(const Payoff& p, double alpha, double beta, std::size_t n) {
    require(std::isfinite(alpha) && std::isfinite(beta) && alpha >= 0.0 && alpha < beta, ErrorKind::BadWindow,
            "window needs 0 <= alpha < beta < inf");
    require(n >= 1, ErrorKind::BadWindow, "need at least one cell");
    for (const auto& j : jumps(p)) {
        require(!(j.strike > alpha && j.strike < beta), ErrorKind::BadWindow,
                "payoff jumps at " + std::to_string(j.strike) + " inside the window");
    }
    std::vector<double> a(n + 1);
    std::vector<double> f(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        a[k] = k == n ? beta : alpha + (beta - alpha) * static_cast<double>(k) / static_cast<double>(n);
    }
    f[0] = p.segments()[p.segment_index(alpha)].value(alpha);
    for (std::size_t k = 1; k < n; ++k) {
        f[k] = p.eval(a[k]);
    }
    f[n] = p.eval_left(beta);

    HedgePortfolio h;
    h.kind = HedgeKind::CallSpread;
    h.digitals.push_back({alpha, f[0], DigitalFlavor::Ge});
    h.digitals.push_back({beta, -f[n], DigitalFlavor::Gt});
    for (std::size_t k = 0; k < n; ++k) {
        h.call_spreads.push_back({a[k], a[k + 1], (f[k + 1] - f[k]) / (a[k + 1] - a[k])});
    }
    return h;
}

struct ReplicationReport {
    double sup_error = 0.0;
    double mean_abs_error = 0.0;
    double value_gap = 0.0; // portfolio price off the pool's curve minus mc_price
};

inline ReplicationReport replication_report(const HedgePortfolio& h, const Payoff& p, const SamplePool& pool,
                                            double discount = 1.0) {
    ReplicationReport r;
    long double total = 0.0L;
    for (double x : pool.terminal) {
        const double e = std::abs(terminal_payoff(h, x) - p.eval(x));
        r.sup_error = std::max(r.sup_error, e);
        total += e;
    }
    r.mean_abs_error = static_cast<double>(total / static_cast<long double>(pool.terminal.size()));
    const auto curve = empirical_curve(pool, discount);
    r.value_gap = portfolio_price(h, curve) - mc_price(pool, p, discount).value;
    return r;
}

/// Errors against an arbitrary target on given points; value_gap is left 0.
inline ReplicationReport replication_on_points(const HedgePortfolio& h, const ScalarFn& target,
                                               std::span<const double> xs) {
    require(!xs.empty(), ErrorKind::BadGrid, "no replication points");
    ReplicationReport r;
    long double total = 0.0L;
    for (double x : xs) {
        const double e = std::abs(terminal_payoff(h, x) - target(x));
        r.sup_error = std::max(r.sup_error, e);
        total += e;
    }
    r.mean_abs_error = static_cast<double>(total / static_cast<long double>(xs.size()));
    return r;
}

/// CSV export: instrument,strike,strike2,weight,flavor
inline void write_portfolio_csv(std::ostream& os, const HedgePortfolio& h) {
    const auto old_precision = os.precision(17);
    os << "instrument,strike,strike2,weight,flavor\n";
    os << "cash,,," << h.cash << ",\n";
    for (const auto& d : h.digitals) {
        os << "digital," << d.strike << ",," << d.weight << ',' << to_string(d.flavor) << '\n';
    }
    for (const auto& s : h.call_spreads) {
        os << "callspread," << s.lo << ',' << s.hi << ',' << s.weight << ",\n";
    }
    os.precision(old_precision);
}

} // namespace strikespan
