#include "strikespan/curve.hpp"
#include "strikespan/io.hpp"
#include "strikespan/sampling.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"

namespace ss = strikespan;

namespace {

using Rows = std::vector<std::pair<double, double>>;

ss::ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ss::Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ss::ErrorKind::BadParams;
}

// Hull, Options Futures and Other Derivatives: S=42, K=40, r=10%, vol=20%, T=0.5
TEST(BsCurve, TextbookValues) {
    const auto c = ss::bs_curve(42.0, 0.2, 0.1, 0.5);
    EXPECT_NEAR(c.lambda(40.0), 4.76, 0.005);
    EXPECT_NEAR(c.lambda(40.0) - 42.0 + 40.0 * c.discount(), 0.81, 0.005);
}

TEST(BsCurve, MatchesClosedFormOracle) {
    for (double vol : {0.1, 0.2, 0.5}) {
        for (double r : {0.0, 0.05}) {
            const auto c = ss::bs_curve(100.0, vol, r, 1.5);
            for (double k = 20.0; k <= 300.0; k += 7.0) {
                EXPECT_NEAR(c.lambda(k), oracle::bs_call(100.0, k, vol, r, 1.5), 1e-10);
            }
        }
    }
}

TEST(BsCurve, DigitalIsMinusSlope) {
    const auto c = ss::bs_curve(100.0, 0.25, 0.03, 2.0);
    for (double k = 30.0; k <= 250.0; k += 11.0) {
        const double h = 1e-4 * k;
        const double slope = (c.lambda(k + h) - c.lambda(k - h)) / (2.0 * h);
        EXPECT_NEAR(c.discount() * c.digital_gt(k), -slope, 1e-7);
        EXPECT_EQ(c.digital_ge(k), c.digital_gt(k));
        const double curv = (c.lambda(k + h) - 2.0 * c.lambda(k) + c.lambda(k - h)) / (h * h);
        EXPECT_NEAR(*c.density(k), curv, 1e-5);
    }
    EXPECT_EQ(c.digital_ge(0.0), 1.0);
    EXPECT_NEAR(c.forward(), 100.0, 1e-12);
}

TEST(BsCurve, CurveInvariants) {
    const auto c = ss::bs_curve(100.0, 0.4, 0.05, 1.0);
    double prev = c.lambda(0.0);
    for (double a = 1.0; a < 1000.0; a *= 1.1) {
        const double v = c.lambda(a);
        EXPECT_LE(v, prev + 1e-12);
        EXPECT_GE(v, 0.0);
        prev = v;
    }
}

std::vector<ss::Quote> bs_quotes(double lo, double hi, double step) {
    std::vector<ss::Quote> q;
    for (double k = lo; k <= hi + 1e-9; k += step) {
        q.push_back({k, oracle::bs_call(100.0, k, 0.2, 0.0, 1.0), std::nullopt});
    }
    return q;
}

TEST(TableCurve, InterpolatesQuotesExactly) {
    const auto quotes = bs_quotes(50.0, 200.0, 10.0);
    ss::TableCurve c(quotes, 1.0);
    for (const auto& q : quotes) {
        EXPECT_EQ(c.lambda(q.strike), q.call_price);
    }
    EXPECT_NEAR(c.lambda(55.0), 0.5 * (quotes[0].call_price + quotes[1].call_price), 1e-12);
    EXPECT_EQ(c.lambda(c.support_end() + 1.0), 0.0);
}

TEST(TableCurve, DigitalsFromOneSidedSlopes) {
    const auto quotes = bs_quotes(50.0, 200.0, 10.0);
    const double d = 0.95;
    std::vector<ss::Quote> scaled;
    for (auto q : quotes) {
        q.call_price *= d;
        scaled.push_back(q);
    }
    ss::TableCurve c(scaled, d);
    // at a knot: ge from the left slope, gt from the right slope
    const double left = (scaled[5].call_price - scaled[4].call_price) / 10.0;
    const double right = (scaled[6].call_price - scaled[5].call_price) / 10.0;
    EXPECT_NEAR(c.digital_ge(scaled[5].strike), -left / d, 1e-12);
    EXPECT_NEAR(c.digital_gt(scaled[5].strike), -right / d, 1e-12);
    EXPECT_GE(c.digital_ge(scaled[5].strike), c.digital_gt(scaled[5].strike));
    // between knots both equal minus the slope
    EXPECT_NEAR(c.digital_ge(105.0), -right / d, 1e-12);
    EXPECT_NEAR(c.digital_gt(105.0), -right / d, 1e-12);
}

TEST(TableCurve, DigitalOverrideAtKnot) {
    auto quotes = bs_quotes(80.0, 120.0, 10.0);
    const double left = -(quotes[2].call_price - quotes[1].call_price) / 10.0;
    const double right = -(quotes[3].call_price - quotes[2].call_price) / 10.0;
    quotes[2].digital_ge = 0.5 * (left + right);
    ss::TableCurve c(quotes, 1.0);
    EXPECT_DOUBLE_EQ(c.digital_ge(100.0), 0.5 * (left + right));
    quotes[2].digital_ge = 1.5;
    EXPECT_EQ(kind_of([&] { ss::TableCurve bad(quotes, 1.0); }), ss::ErrorKind::ArbitrageViolation);
}

TEST(TableCurve, ArbitrageViolations) {
    // price increasing in strike
    EXPECT_EQ(kind_of([] { ss::table_curve(Rows{{90.0, 10.0}, {100.0, 11.0}}, 1.0); }), ss::ErrorKind::ArbitrageViolation);
    // negative butterfly names the strike triple
    try {
        ss::table_curve(Rows{{80.0, 21.0}, {90.0, 12.0}, {100.0, 7.0}, {110.0, 1.0}}, 1.0);
        FAIL();
    } catch (const ss::Error& e) {
        EXPECT_EQ(e.kind(), ss::ErrorKind::ArbitrageViolation);
        EXPECT_NE(std::string(e.what()).find("(90, 100, 110)"), std::string::npos) << e.what();
    }
    // slope steeper than -B_T^{-1}
    EXPECT_EQ(kind_of([] { ss::table_curve(Rows{{90.0, 30.0}, {100.0, 10.0}}, 1.0); }),
              ss::ErrorKind::ArbitrageViolation);
    EXPECT_EQ(kind_of([] { ss::table_curve(Rows{{90.0, 10.0}}, 1.0); }), ss::ErrorKind::DataError);
    EXPECT_EQ(kind_of([] { ss::table_curve(Rows{{100.0, 10.0}, {90.0, 12.0}}, 1.0); }), ss::ErrorKind::DataError);
}

TEST(EmpiricalCurve, MatchesBruteForceSampleMeans) {
    const auto xs = oracle::lognormal_draws(5, 20000, 100.0, 0.3, 0.02, 1.0);
    const double d = std::exp(-0.02);
    const auto pool = ss::pool_from_samples(xs);
    const auto c = ss::empirical_curve(pool, d);
    for (double a : {0.0, 10.0, 73.5, 100.0, 140.0, 400.0}) {
        EXPECT_NEAR(c.lambda(a), oracle::sample_call(xs, a, d), 1e-12 * (1.0 + c.lambda(a)));
    }
    const double pick = xs[17];
    long double ge = 0;
    long double gt = 0;
    for (double x : xs) {
        ge += x >= pick;
        gt += x > pick;
    }
    EXPECT_DOUBLE_EQ(c.digital_ge(pick), static_cast<double>(ge / xs.size()));
    EXPECT_DOUBLE_EQ(c.digital_gt(pick), static_cast<double>(gt / xs.size()));
    EXPECT_GT(c.digital_ge(pick), c.digital_gt(pick));
}

TEST(JointCurve, InvariantsAndComplement) {
    const auto pool = ss::gbm_pool(3, 20000, 100.0, 0.25, 0.0, 1.0, ss::BarrierKind::RunningMax);
    const auto event = ss::io::event_from_inline("maxlt:B=125");
    const auto in = ss::joint_curve(pool, event, 1.0);
    const auto out = ss::joint_curve(pool, event.complemented(), 1.0);
    const auto all = ss::empirical_curve(pool, 1.0);
    EXPECT_DOUBLE_EQ(in.digital_ge(0.0), in.barrier_prob());
    EXPECT_NEAR(in.barrier_prob() + out.barrier_prob(), 1.0, 1e-15);
    for (double a = 0.0; a < 300.0; a += 9.5) {
        EXPECT_LE(in.lambda(a), all.lambda(a) + 1e-12);
        EXPECT_NEAR(in.lambda(a) + out.lambda(a), all.lambda(a), 1e-11);
    }
    // running max below 125 caps the terminal value
    EXPECT_EQ(in.digital_ge(125.0), 0.0);
}

TEST(Pool, DeterministicAndThreadIndependent) {
    const auto a = ss::gbm_pool(7, 5000, 100.0, 0.2, 0.01, 1.0, ss::BarrierKind::Average, 1);
    const auto b = ss::gbm_pool(7, 5000, 100.0, 0.2, 0.01, 1.0, ss::BarrierKind::Average, 4);
    EXPECT_EQ(a.terminal, b.terminal);
    EXPECT_EQ(a.barrier_stat, b.barrier_stat);
    const auto c = ss::gbm_pool(8, 5000, 100.0, 0.2, 0.01, 1.0, ss::BarrierKind::Average, 1);
    EXPECT_NE(a.terminal, c.terminal);
}

TEST(Pool, PathStatisticsOrdered) {
    const auto mx = ss::gbm_pool(9, 2000, 100.0, 0.3, 0.0, 1.0, ss::BarrierKind::RunningMax);
    const auto mn = ss::gbm_pool(9, 2000, 100.0, 0.3, 0.0, 1.0, ss::BarrierKind::RunningMin);
    for (std::size_t i = 0; i < 2000; ++i) {
        EXPECT_EQ(mx.terminal[i], mn.terminal[i]);
        EXPECT_GE(mx.barrier_stat[i], std::max(100.0, mx.terminal[i]));
        EXPECT_LE(mn.barrier_stat[i], std::min(100.0, mn.terminal[i]));
    }
}

TEST(Pool, TerminalMomentsMatchLognormal) {
    const auto pool = ss::gbm_pool(21, 200000, 100.0, 0.2, 0.05, 1.0);
    long double s = 0;
    for (double x : pool.terminal) {
        s += x;
    }
    const double mean = static_cast<double>(s / pool.terminal.size());
    EXPECT_NEAR(mean, 100.0 * std::exp(0.05), 4.0 * 100.0 * 0.21 / std::sqrt(200000.0));
}

TEST(Pool, EventStatMustMatch) {
    const auto pool = ss::gbm_pool(1, 100, 100.0, 0.2, 0.0, 1.0, ss::BarrierKind::RunningMax);
    EXPECT_EQ(kind_of([&] { ss::joint_curve(pool, ss::io::event_from_inline("minlt:B=90"), 1.0); }),
              ss::ErrorKind::BadParams);
}

TEST(MarketCsv, ParsesAndRejects) {
    std::istringstream good("strike,call_price,digital_ge\n90,12.5,\n100,5.5,0.6\n110,2,\n");
    const auto q = ss::io::read_market_csv(good);
    ASSERT_EQ(q.size(), 3u);
    EXPECT_EQ(q[1].strike, 100.0);
    EXPECT_EQ(*q[1].digital_ge, 0.6);
    EXPECT_FALSE(q[0].digital_ge.has_value());

    std::istringstream bad_header("k,c\n1,2\n");
    EXPECT_EQ(kind_of([&] { ss::io::read_market_csv(bad_header); }), ss::ErrorKind::DataError);
    std::istringstream bad_number("strike,call_price\n90,abc\n");
    EXPECT_EQ(kind_of([&] { ss::io::read_market_csv(bad_number); }), ss::ErrorKind::DataError);
    EXPECT_EQ(kind_of([] { ss::io::read_market_csv(std::string("/nonexistent.csv")); }), ss::ErrorKind::DataError);
}

TEST(EventSyntax, InlineAndJson) {
    const auto e = ss::io::event_from_inline("maxlt:B=130");
    EXPECT_EQ(e.stat, ss::EventStat::RunningMax);
    EXPECT_TRUE(e.contains(129.9));
    EXPECT_FALSE(e.contains(130.0));
    const auto g = ss::io::event_from_inline("minge:B=80");
    EXPECT_TRUE(g.contains(80.0));
    EXPECT_FALSE(g.contains(79.0));

    const auto j = ss::io::event_from_json(nlohmann::json::parse(
        R"({"stat":"average","set":{"kind":"interval","lo":90,"hi":"inf","lo_closed":true},"complement":true})"));
    EXPECT_EQ(j.stat, ss::EventStat::Average);
    EXPECT_FALSE(j.contains(95.0));
    EXPECT_TRUE(j.contains(89.0));
    const auto round = ss::io::event_from_json(ss::io::to_json(j));
    EXPECT_EQ(round.set.lo, j.set.lo);
    EXPECT_EQ(round.set.hi, j.set.hi);
    EXPECT_EQ(round.complement, j.complement);

    EXPECT_THROW(ss::io::event_from_inline("maxzz:B=1"), ss::Error);
    EXPECT_THROW(ss::io::event_from_inline("foolt:B=1"), ss::Error);
}

TEST(Json, SeventeenDigits) {
    const auto s = ss::io::dump17({{"x", 0.1}, {"n", 3}, {"inf", ss::io::number(ss::kInf)}});
    EXPECT_NE(s.find("0.10000000000000001"), std::string::npos) << s;
    EXPECT_NE(s.find("\"n\": 3"), std::string::npos);
    EXPECT_NE(s.find("\"inf\""), std::string::npos);
}

} // namespace
