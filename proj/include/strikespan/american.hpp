#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "strikespan/curve.hpp"
#include "strikespan/error.hpp"
#include "strikespan/payoff.hpp"
#include "strikespan/pricer.hpp"

namespace strikespan {

/// Current state for t >= 0: discounted underlying and bond discount B_t^{-1}.
/// The curve is taken as re-rooted at this state (remaining maturity).
struct MarketState {
    double discounted_spot = 0.0;
    double bond_discount_now = 1.0;
};

struct AmericanBoundReport {
    double european_value = 0.0;
    double bound = 0.0;
    double cash_gap = 0.0;  // f(0)_+ (B_t^{-1} - B_T^{-1})
    double slope_gap = 0.0; // f'_+(0)_- (Xbar_t - E_Q[Xbar_T])
    /// (cash_gap + slope_gap) / european_value; reported without a verdict.
    std::optional<double> ratio;
    bool equality_certified = false;
    std::vector<std::string> certificate_reasons;
    std::optional<double> oracle_value;
    std::optional<double> oracle_european;
    std::optional<double> lattice_error;
};

/// Upper bound on the American value of a convex payoff when the
/// discounted underlying is a submartingale:
///   V^A <= V + f(0)_+ (B_t^{-1} - B_T^{-1}) + f'_+(0)_- (Xbar_t - E_Q[Xbar_T]),
/// with E_Q[Xbar_T] = lambda(0) and V from the convex form.
inline AmericanBoundReport american_bound(const ConvexDecomposition& d, const CallCurve& c, const MarketState& state,
                                          const QuadConfig& cfg = {}) {
    require(state.bond_discount_now >= c.discount() && state.bond_discount_now <= 1.0, ErrorKind::BadParams,
            "bond discount now must lie in [B_T^{-1}, 1]");
    AmericanBoundReport r;
    r.european_value = price_convex(d, c, cfg).value;
    r.cash_gap = std::max(0.0, d.f0) * (state.bond_discount_now - c.discount());
    r.slope_gap = std::min(0.0, d.slope0) * (state.discounted_spot - c.lambda(0.0));
    r.bound = r.european_value + r.cash_gap + r.slope_gap;
    if (r.european_value != 0.0) {
        r.ratio = (r.cash_gap + r.slope_gap) / r.european_value;
    }
    return r;
}

struct EqualityCertificate {
    bool certified = false;
    std::vector<std::string> reasons;
};

/// Sufficient conditions for American = European for a convex payoff on a
/// discounted-submartingale underlying:
///   (bond constant or f(0) <= 0) and (discounted underlying a martingale or f'_+(0) >= 0).
inline EqualityCertificate equality_certificate(const ConvexDecomposition& d, bool bond_constant, bool martingale) {
    EqualityCertificate c;
    bool first = false;
    if (bond_constant) {
        first = true;
        c.reasons.emplace_back("bond is constant");
    }
    if (d.f0 <= 0.0) {
        first = true;
        c.reasons.emplace_back("f(0) <= 0");
    }
    if (!first) {
        c.reasons.emplace_back("fails: bond not constant and f(0) > 0");
    }
    bool second = false;
    if (martingale) {
        second = true;
        c.reasons.emplace_back("discounted underlying is a martingale");
    }
    if (d.slope0 >= 0.0) {
        second = true;
        c.reasons.emplace_back("f'_+(0) >= 0");
    }
    if (!second) {
        c.reasons.emplace_back("fails: discounted underlying not a martingale and f'_+(0) < 0");
    }
    c.certified = first && second;
    return c;
}

inline EqualityCertificate equality_certificate(const Payoff& p, bool bond_constant, bool martingale) {
    return equality_certificate(convex_decompose(p), bond_constant, martingale);
}

struct LatticeValues {
    double american = 0.0;
    double european = 0.0;
};

/// Backward induction on a Cox-Ross-Rubinstein tree (up = e^{vol sqrt(dt)}):
/// V_j = max(e^{-r dt} E_Q[V_{j+1}], f(X_j)); the European value comes from
/// the same tree without the exercise test.
inline LatticeValues binomial_american(const Payoff& p, double spot, double vol, double rate, double maturity,
                                       int steps) {
    require(steps >= 1, ErrorKind::BadParams, "steps must be >= 1");
    require(spot > 0.0 && vol > 0.0 && maturity > 0.0, ErrorKind::BadParams, "need spot, vol, maturity > 0");
    const double dt = maturity / steps;
    const double jump = vol * std::sqrt(dt);
    const double up = std::exp(jump);
    const double down = 1.0 / up;
    const double growth = std::exp(rate * dt);
    const double q = (growth - down) / (up - down);
    require(q > 0.0 && q < 1.0, ErrorKind::BadParams, "risk-neutral probability outside (0, 1); refine the lattice");
    const double disc = 1.0 / growth;

    const auto n = static_cast<std::size_t>(steps);
    std::vector<double> am(n + 1);
    std::vector<double> eu(n + 1);
    auto node = [&](std::size_t level, std::size_t j) {
        return spot * std::exp(jump * (2.0 * static_cast<double>(j) - static_cast<double>(level)));
    };
    for (std::size_t j = 0; j <= n; ++j) {
        am[j] = eu[j] = p.eval(node(n, j));
    }
    for (std::size_t level = n; level-- > 0;) {
        for (std::size_t j = 0; j <= level; ++j) {
            eu[j] = disc * (q * eu[j + 1] + (1.0 - q) * eu[j]);
            const double cont = disc * (q * am[j + 1] + (1.0 - q) * am[j]);
            am[j] = std::max(cont, p.eval(node(level, j)));
        }
    }
    return {am[0], eu[0]};
}

/// Bound, certificate and lattice oracle for a lognormal market at t = 0.
/// The lattice error is |V_steps - V_{2 steps}| of the American value.
/// Discounted GBM is a martingale, so the certificate's martingale clause holds.
inline AmericanBoundReport american_report(const Payoff& p, const BsCurve& c, int oracle_steps,
                                           const QuadConfig& cfg = {}) {
    const auto d = convex_decompose(p);
    auto r = american_bound(d, c, MarketState{c.spot(), 1.0}, cfg);
    const auto cert = equality_certificate(d, c.rate() == 0.0, true);
    r.equality_certified = cert.certified;
    r.certificate_reasons = cert.reasons;
    if (oracle_steps > 0) {
        const auto coarse = binomial_american(p, c.spot(), c.vol(), c.rate(), c.maturity(), oracle_steps);
        const auto fine = binomial_american(p, c.spot(), c.vol(), c.rate(), c.maturity(), 2 * oracle_steps);
        r.oracle_value = coarse.american;
        r.oracle_european = coarse.european;
        r.lattice_error = std::abs(coarse.american - fine.american);
    }
    return r;
}

} // namespace strikespan
