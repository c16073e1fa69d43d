#pragma once

#include "strikespan/curve.hpp"
#include "strikespan/payoff.hpp"
#include "strikespan/pricer.hpp"
#include "strikespan/sampling.hpp"

namespace strikespan {

struct BarrierPriceReport {
    double value = 0.0;
    double cash_term = 0.0; // B_T^{-1} f(0) Q(Y in C)
    double integral_term = 0.0;
    double jump_left_term = 0.0;
    double jump_right_term = 0.0;
    double barrier_prob = 0.0;
    double truncation = 0.0;
    double tail_bound = 0.0;
    std::size_t n_quadrature = 0;
    double error_estimate = 0.0;
};

namespace detail {

inline BarrierPriceReport to_barrier_report(const PriceReport& r, double prob) {
    BarrierPriceReport b;
    b.cash_term = r.cash_term;
    b.integral_term = r.integral_term;
    b.jump_left_term = r.jump_left_term;
    b.jump_right_term = r.jump_right_term;
    b.value = r.value;
    b.barrier_prob = prob;
    b.truncation = r.truncation;
    b.tail_bound = r.tail_bound;
    b.n_quadrature = r.n_quadrature;
    b.error_estimate = r.error_estimate;
    return b;
}

} // namespace detail

/// Value of f(X_T) 1_{Y in C} from the joint curve lambda^{Y,C}:
///   B_T^{-1} f(0) Q(Y in C) - int f' dlambda^{Y,C}
///   + B_T^{-1} sum Delta_- f(s_k) Q(X_T >= s_k, Y in C) + B_T^{-1} sum Delta_+ f(s_k) Q(X_T > s_k, Y in C)
inline BarrierPriceReport price_barrier(const Payoff& p, const JointCallCurve& jc, const QuadConfig& cfg = {}) {
    const double prob = jc.barrier_prob();
    return detail::to_barrier_report(detail::stieltjes_form(p, jc, cfg, prob, "barrier"), prob);
}

struct InOutParity {
    BarrierPriceReport in;
    BarrierPriceReport out;
    PriceReport vanilla;

    /// in + out - vanilla
    [[nodiscard]] double gap() const { return in.value + out.value - vanilla.value; }
};

/// Prices the event, its complement and the vanilla claim on one shared
/// partition (taken from the adaptive vanilla run), so the three Stieltjes
/// sums see the same cells and in + out = vanilla up to rounding.
inline InOutParity in_out_parity(const Payoff& p, const SamplePool& pool, const BarrierEvent& event, double discount,
                                 const QuadConfig& cfg = {}) {
    const auto full = empirical_curve(pool, discount);
    QuadConfig adaptive_cfg = cfg;
    adaptive_cfg.keep_partition = true;
    const auto first = price_theorem1(p, full, adaptive_cfg);

    QuadConfig shared = cfg;
    shared.fixed_partition = first.partition;
    InOutParity r;
    r.vanilla = price_theorem1(p, full, shared);
    r.in = price_barrier(p, joint_curve(pool, event, discount), shared);
    r.out = price_barrier(p, joint_curve(pool, event.complemented(), discount), shared);
    return r;
}

} // namespace strikespan
