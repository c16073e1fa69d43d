#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "strikespan/curve.hpp"
#include "strikespan/error.hpp"
#include "strikespan/payoff.hpp"

namespace strikespan {

/// Path statistic Y stored alongside the terminal draws.
enum class BarrierKind { None, RunningMax, RunningMin, Average };

/// Statistic an event is evaluated on; Terminal means Y = X_T.
enum class EventStat { Terminal, RunningMax, RunningMin, Average };

inline std::string to_string(BarrierKind k) {
    switch (k) {
    case BarrierKind::None: return "none";
    case BarrierKind::RunningMax: return "running_max";
    case BarrierKind::RunningMin: return "running_min";
    case BarrierKind::Average: return "average";
    }
    return "none";
}

inline std::string to_string(EventStat s) {
    switch (s) {
    case EventStat::Terminal: return "terminal";
    case EventStat::RunningMax: return "running_max";
    case EventStat::RunningMin: return "running_min";
    case EventStat::Average: return "average";
    }
    return "terminal";
}

inline BarrierKind barrier_kind_from_string(const std::string& s) {
    if (s == "none") return BarrierKind::None;
    if (s == "running_max") return BarrierKind::RunningMax;
    if (s == "running_min") return BarrierKind::RunningMin;
    if (s == "average") return BarrierKind::Average;
    throw Error(ErrorKind::BadParams, "unknown barrier kind '" + s + "'");
}

inline EventStat event_stat_from_string(const std::string& s) {
    if (s == "terminal") return EventStat::Terminal;
    if (s == "running_max") return EventStat::RunningMax;
    if (s == "running_min") return EventStat::RunningMin;
    if (s == "average") return EventStat::Average;
    throw Error(ErrorKind::BadParams, "unknown event statistic '" + s + "'");
}

/// SplitMix64 generator; one instance per path, seeded from (seed, path).
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return mix(state_ += 0x9e3779b97f4a7c15ULL); }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static SplitMix64 for_path(std::uint64_t seed, std::uint64_t path) {
        return SplitMix64(mix(seed ^ mix(path + 0x632be59bd9b4e019ULL)));
    }

private:
    std::uint64_t state_;
};

/// Monte Carlo draws of X_T, optionally with a pathwise-coupled statistic Y.
struct SamplePool {
    std::uint64_t seed = 0;
    std::size_t n = 0;
    std::vector<double> terminal;
    std::vector<double> barrier_stat; // empty when kind == None
    BarrierKind barrier_kind = BarrierKind::None;
    double spot = 0.0;
    double vol = 0.0;
    double rate = 0.0;
    double maturity = 0.0;
    int steps = 0;

    [[nodiscard]] double discount() const { return std::exp(-rate * maturity); }
};

inline constexpr int kPathSteps = 256;

/// Geometric Brownian motion pool. Terminal values are exact lognormal
/// draws; running max/min/average are taken on a grid of kPathSteps
/// log-exact steps (max and min include the start, the average uses the
/// kPathSteps post-start points). Each path has its own generator, so the
/// result does not depend on how many threads fill the pool.
inline SamplePool gbm_pool(std::uint64_t seed, std::size_t n, double spot, double vol, double rate, double maturity,
                           BarrierKind kind = BarrierKind::None, unsigned threads = 0) {
    require(n >= 1, ErrorKind::BadParams, "pool needs n >= 1");
    require(std::isfinite(spot) && spot > 0.0, ErrorKind::BadParams, "spot must be > 0");
    require(std::isfinite(vol) && vol >= 0.0, ErrorKind::BadParams, "vol must be >= 0");
    require(std::isfinite(maturity) && maturity > 0.0, ErrorKind::BadParams, "maturity must be > 0");
    require(std::isfinite(rate), ErrorKind::BadParams, "rate must be finite");

    SamplePool pool;
    pool.seed = seed;
    pool.n = n;
    pool.terminal.assign(n, 0.0);
    pool.barrier_kind = kind;
    pool.spot = spot;
    pool.vol = vol;
    pool.rate = rate;
    pool.maturity = maturity;
    pool.steps = kind == BarrierKind::None ? 1 : kPathSteps;
    if (kind != BarrierKind::None) {
        pool.barrier_stat.assign(n, 0.0);
    }

    const int steps = pool.steps;
    const double dt = maturity / steps;
    const double drift = (rate - 0.5 * vol * vol) * dt;
    const double diffusion = vol * std::sqrt(dt);

    auto fill = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto rng = SplitMix64::for_path(seed, i);
            std::normal_distribution<double> normal(0.0, 1.0);
            double log_x = 0.0;
            double log_hi = 0.0;
            double log_lo = 0.0;
            double sum = 0.0;
            for (int k = 0; k < steps; ++k) {
                log_x += drift + diffusion * normal(rng);
                log_hi = std::max(log_hi, log_x);
                log_lo = std::min(log_lo, log_x);
                if (kind == BarrierKind::Average) {
                    sum += spot * std::exp(log_x);
                }
            }
            const double x = spot * std::exp(log_x);
            const double hi = spot * std::exp(log_hi);
            const double lo = spot * std::exp(log_lo);
            pool.terminal[i] = x;
            switch (kind) {
            case BarrierKind::None: break;
            case BarrierKind::RunningMax: pool.barrier_stat[i] = hi; break;
            case BarrierKind::RunningMin: pool.barrier_stat[i] = lo; break;
            case BarrierKind::Average: pool.barrier_stat[i] = sum / steps; break;
            }
        }
    };

    unsigned workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
    const std::size_t work = n * static_cast<std::size_t>(steps);
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, work / 65536)));
    if (workers <= 1) {
        fill(0, n);
        return pool;
    }
    std::vector<std::thread> team;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(n, w * chunk);
        const std::size_t end = std::min(n, begin + chunk);
        team.emplace_back(fill, begin, end);
    }
    for (auto& t : team) {
        t.join();
    }
    return pool;
}

/// Pool from explicit draws (used for hand-built fixtures and file input).
inline SamplePool pool_from_samples(std::vector<double> terminal, std::vector<double> barrier_stat = {},
                                    BarrierKind kind = BarrierKind::None) {
    require(!terminal.empty(), ErrorKind::BadParams, "pool must be nonempty");
    require(barrier_stat.empty() || barrier_stat.size() == terminal.size(), ErrorKind::BadParams,
            "barrier statistic must be coupled to every terminal draw");
    SamplePool pool;
    pool.n = terminal.size();
    pool.terminal = std::move(terminal);
    pool.barrier_stat = std::move(barrier_stat);
    pool.barrier_kind = pool.barrier_stat.empty() ? BarrierKind::None : kind;
    return pool;
}

/// Interval with independently open or closed ends; infinite ends allowed.
struct Interval {
    double lo = -kInf;
    double hi = kInf;
    bool lo_closed = false;
    bool hi_closed = false;

    [[nodiscard]] bool contains(double y) const {
        const bool above = lo_closed ? y >= lo : y > lo;
        const bool below = hi_closed ? y <= hi : y < hi;
        return above && below;
    }
};

/// Event {Y in C} with C an interval or the complement of one.
struct BarrierEvent {
    EventStat stat = EventStat::Terminal;
    Interval set;
    bool complement = false;

    [[nodiscard]] bool contains(double y) const { return set.contains(y) != complement; }

    [[nodiscard]] BarrierEvent complemented() const { return {stat, set, !complement}; }

    static BarrierEvent everything(EventStat stat) { return {stat, Interval{-kInf, kInf, false, false}, false}; }
    static BarrierEvent nothing(EventStat stat) { return {stat, Interval{-kInf, kInf, false, false}, true}; }
};

namespace detail {

inline const std::vector<double>& event_values(const SamplePool& pool, const BarrierEvent& event) {
    if (event.stat == EventStat::Terminal) {
        return pool.terminal;
    }
    const bool match = (event.stat == EventStat::RunningMax && pool.barrier_kind == BarrierKind::RunningMax) ||
                       (event.stat == EventStat::RunningMin && pool.barrier_kind == BarrierKind::RunningMin) ||
                       (event.stat == EventStat::Average && pool.barrier_kind == BarrierKind::Average);
    require(match && pool.barrier_stat.size() == pool.terminal.size(), ErrorKind::BadParams,
            "pool has no '" + to_string(event.stat) + "' statistic (pool carries " + to_string(pool.barrier_kind) +
                ")");
    return pool.barrier_stat;
}

} // namespace detail

inline EmpiricalCurve empirical_curve(const SamplePool& pool, double discount) {
    require(!pool.terminal.empty(), ErrorKind::BadParams, "pool must be nonempty");
    return EmpiricalCurve(pool.terminal, pool.terminal.size(), discount, pool.maturity);
}

inline JointCallCurve joint_curve(const SamplePool& pool, const BarrierEvent& event, double discount) {
    require(!pool.terminal.empty(), ErrorKind::BadParams, "pool must be nonempty");
    const auto& y = detail::event_values(pool, event);
    std::vector<double> inside;
    for (std::size_t i = 0; i < pool.terminal.size(); ++i) {
        if (event.contains(y[i])) {
            inside.push_back(pool.terminal[i]);
        }
    }
    return JointCallCurve(std::move(inside), pool.terminal.size(), discount, pool.maturity);
}

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

namespace detail {

template <class Weight>
McEstimate mc_mean(const SamplePool& pool, const Payoff& p, double discount, Weight&& weight) {
    require(!pool.terminal.empty(), ErrorKind::BadParams, "pool must be nonempty");
    const std::size_t n = pool.terminal.size();
    std::vector<double> values(n);
    long double sum = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        values[i] = weight(i) ? p.eval(pool.terminal[i]) : 0.0;
        sum += values[i];
    }
    const long double mean = sum / static_cast<long double>(n);
    long double ss = 0.0L;
    for (double v : values) {
        const long double dv = v - mean;
        ss += dv * dv;
    }
    const double var = n > 1 ? static_cast<double>(ss / static_cast<long double>(n - 1)) : 0.0;
    return {static_cast<double>(static_cast<long double>(discount) * mean),
            discount * std::sqrt(var / static_cast<double>(n))};
}

} // namespace detail

/// Discounted sample mean of f(X_T) with its standard error.
inline McEstimate mc_price(const SamplePool& pool, const Payoff& p, double discount) {
    return detail::mc_mean(pool, p, discount, [](std::size_t) { return true; });
}

/// Discounted sample mean of f(X_T) 1_{Y in C}.
inline McEstimate mc_price(const SamplePool& pool, const Payoff& p, const BarrierEvent& event, double discount) {
    const auto& y = detail::event_values(pool, event);
    return detail::mc_mean(pool, p, discount, [&](std::size_t i) { return event.contains(y[i]); });
}

} // namespace strikespan
