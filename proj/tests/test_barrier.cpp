#include "strikespan/barrier.hpp"
#include "strikespan/catalog.hpp"
#include "strikespan/io.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace ss = strikespan;

namespace {

ss::Payoff make(const std::string& text) { return ss::payoff_from_json(ss::parse_inline_payoff(text)); }

struct Case {
    const char* event;
    ss::BarrierKind kind;
};

const Case kCases[] = {{"maxlt:B=130", ss::BarrierKind::RunningMax},
                       {"minge:B=85", ss::BarrierKind::RunningMin},
                       {"avggt:B=100", ss::BarrierKind::Average}};

TEST(Barrier, ParityOnCoupledPool) {
    for (const auto& cs : kCases) {
        const auto pool = ss::gbm_pool(7, 20000, 100.0, 0.25, 0.02, 1.0, cs.kind);
        const auto event = ss::io::event_from_inline(cs.event);
        for (const char* text : {"call:K=100", "put:K=100", "digital_ge:K=105", "straddle:K=95"}) {
            const auto r = ss::in_out_parity(make(text), pool, event, pool.discount());
            EXPECT_LE(std::abs(r.gap()), 1e-10 * std::max(1.0, std::abs(r.vanilla.value))) << cs.event << ' ' << text;
        }
    }
}

TEST(Barrier, MatchesBruteForceIndicatorMean) {
    const auto pool = ss::gbm_pool(11, 30000, 100.0, 0.3, 0.0, 1.0, ss::BarrierKind::RunningMax);
    const auto event = ss::io::event_from_inline("maxlt:B=140");
    const auto jc = ss::joint_curve(pool, event, 1.0);
    for (const char* text : {"call:K=100", "put:K=90", "digital_gt:K=110", "butterfly:K1=90,K2=100,K3=120"}) {
        const auto p = make(text);
        long double s = 0.0L;
        for (std::size_t i = 0; i < pool.terminal.size(); ++i) {
            if (pool.barrier_stat[i] < 140.0) {
                s += p.eval(pool.terminal[i]);
            }
        }
        const double brute = static_cast<double>(s / pool.terminal.size());
        EXPECT_NEAR(ss::price_barrier(p, jc).value, brute, 1e-4) << text;
        EXPECT_NEAR(ss::mc_price(pool, p, event, 1.0).value, brute, 1e-12) << text;
    }
}

TEST(Barrier, UpAndOutCallBelowVanilla) {
    const auto pool = ss::gbm_pool(5, 20000, 100.0, 0.2, 0.0, 1.0, ss::BarrierKind::RunningMax);
    const auto in = ss::price_barrier(make("call:K=100"), ss::joint_curve(pool, ss::io::event_from_inline("maxlt:B=120"), 1.0));
    const auto vanilla = ss::price_theorem1(make("call:K=100"), ss::empirical_curve(pool, 1.0));
    EXPECT_LT(in.value, vanilla.value);
    EXPECT_GT(in.value, 0.0);
    // terminal value of a knocked-in-below path is below the barrier: the call is capped at 20
    EXPECT_LE(in.value, 20.0 * in.barrier_prob);
}

TEST(Barrier, TrivialEvents) {
    const auto pool = ss::gbm_pool(2, 5000, 100.0, 0.2, 0.0, 1.0, ss::BarrierKind::Average);
    const auto p = make("straddle:K=100");
    const auto all = ss::price_barrier(p, ss::joint_curve(pool, ss::BarrierEvent::everything(ss::EventStat::Average), 1.0));
    const auto none = ss::price_barrier(p, ss::joint_curve(pool, ss::BarrierEvent::nothing(ss::EventStat::Average), 1.0));
    EXPECT_NEAR(all.value, ss::price_theorem1(p, ss::empirical_curve(pool, 1.0)).value, 1e-6);
    EXPECT_EQ(none.value, 0.0);
    EXPECT_EQ(none.barrier_prob, 0.0);
}

TEST(Barrier, TerminalEventIsWindowedPayoff) {
    const auto pool = ss::gbm_pool(4, 10000, 100.0, 0.2, 0.0, 1.0);
    const auto event = ss::io::event_from_inline("termle:B=110");
    const auto p = make("call:K=100");
    const auto in = ss::price_barrier(p, ss::joint_curve(pool, event, 1.0));
    const double brute = oracle::sample_mean([](double x) { return x <= 110.0 ? std::max(x - 100.0, 0.0) : 0.0; },
                                             pool.terminal, 1.0);
    EXPECT_NEAR(in.value, brute, 1e-6);
}

} // namespace
