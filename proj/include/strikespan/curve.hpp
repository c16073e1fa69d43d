#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "strikespan/error.hpp"

namespace strikespan {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

/// Discounted call prices as a function of strike, together with the two
/// digital curves Q(X_T >= a) and Q(X_T > a). Implementations are immutable.
class CallCurve {
public:
    virtual ~CallCurve() = default;

    [[nodiscard]] virtual std::string_view backend() const = 0;
    [[nodiscard]] virtual double maturity() const = 0;
    /// Bond discount factor B_T^{-1}.
    [[nodiscard]] virtual double discount() const = 0;
    /// E_Q[B_T^{-1} (X_T - a)^+]
    [[nodiscard]] virtual double lambda(double a) const = 0;
    /// Q(X_T >= a), not discounted.
    [[nodiscard]] virtual double digital_ge(double a) const = 0;
    /// Q(X_T > a), not discounted.
    [[nodiscard]] virtual double digital_gt(double a) const = 0;
    /// Second strike-derivative of lambda when the backend has one.
    [[nodiscard]] virtual std::optional<double> density(double) const { return std::nullopt; }
    [[nodiscard]] virtual bool has_density() const { return false; }
    /// Strikes where lambda is not smooth (quote strikes, samples).
    [[nodiscard]] virtual std::span<const double> breakpoints() const { return {}; }

    /// Discounted forward E_Q[B_T^{-1} X_T].
    [[nodiscard]] double forward() const { return lambda(0.0); }
};

/// Lognormal terminal distribution, closed-form Black-Scholes prices.
class BsCurve final : public CallCurve {
public:
    BsCurve(double spot, double vol, double rate, double maturity)
        : spot_(spot), vol_(vol), rate_(rate), maturity_(maturity) {
        require(std::isfinite(spot) && spot > 0.0, ErrorKind::BadParams, "spot must be > 0");
        require(std::isfinite(vol) && vol > 0.0, ErrorKind::BadParams, "vol must be > 0");
        require(std::isfinite(maturity) && maturity > 0.0, ErrorKind::BadParams, "maturity must be > 0");
        require(std::isfinite(rate), ErrorKind::BadParams, "rate must be finite");
        discount_ = std::exp(-rate * maturity);
        sd_ = vol * std::sqrt(maturity);
    }

    [[nodiscard]] std::string_view backend() const override { return "bs"; }
    [[nodiscard]] double maturity() const override { return maturity_; }
    [[nodiscard]] double discount() const override { return discount_; }
    [[nodiscard]] double spot() const { return spot_; }
    [[nodiscard]] double vol() const { return vol_; }
    [[nodiscard]] double rate() const { return rate_; }

    [[nodiscard]] double lambda(double a) const override {
        if (a <= 0.0) {
            return spot_;
        }
        const double d2 = d2_of(a);
        const double v = spot_ * normal_cdf(d2 + sd_) - a * discount_ * normal_cdf(d2);
        return std::max(v, 0.0);
    }

    [[nodiscard]] double digital_ge(double a) const override { return a <= 0.0 ? 1.0 : normal_cdf(d2_of(a)); }
    [[nodiscard]] double digital_gt(double a) const override { return digital_ge(a); }

    [[nodiscard]] bool has_density() const override { return true; }
    [[nodiscard]] std::optional<double> density(double a) const override {
        if (a <= 0.0) {
            return 0.0;
        }
        return discount_ * normal_pdf(d2_of(a)) / (a * sd_);
    }

private:
    [[nodiscard]] double d2_of(double a) const {
        return (std::log(spot_ / a) + rate_ * maturity_) / sd_ - 0.5 * sd_;
    }

    double spot_;
    double vol_;
    double rate_;
    double maturity_;
    double discount_ = 1.0;
    double sd_ = 0.0;
};

inline BsCurve bs_curve(double spot, double vol, double rate, double maturity) {
    return BsCurve(spot, vol, rate, maturity);
}

struct Quote {
    double strike = 0.0;
    double call_price = 0.0;
    std::optional<double> digital_ge; // overrides the slope-implied value at this strike
};

/// Piecewise-linear call curve through market quotes. Left of the first
/// quote the first slope is continued down to strike 0; right of the last
/// quote the last slope is continued until the curve reaches zero.
class TableCurve final : public CallCurve {
public:
    TableCurve(std::vector<Quote> quotes, double discount, double maturity = 0.0)
        : discount_(discount), maturity_(maturity) {
        require(discount > 0.0 && discount <= 1.0, ErrorKind::BadParams, "discount must be in (0, 1]");
        require(quotes.size() >= 2, ErrorKind::DataError, "need at least two quotes");
        for (std::size_t i = 0; i < quotes.size(); ++i) {
            const auto& q = quotes[i];
            require(std::isfinite(q.strike) && q.strike >= 0.0, ErrorKind::DataError, "strikes must be >= 0");
            require(std::isfinite(q.call_price) && q.call_price > 0.0, ErrorKind::DataError,
                    "call prices must be positive (strike " + fmt(q.strike) + ")");
            if (i > 0) {
                require(q.strike > quotes[i - 1].strike, ErrorKind::DataError, "strikes must be strictly increasing");
            }
        }
        for (std::size_t i = 0; i + 1 < quotes.size(); ++i) {
            if (quotes[i + 1].call_price > quotes[i].call_price) {
                throw Error(ErrorKind::ArbitrageViolation, "call price increases between strikes " +
                                                               fmt(quotes[i].strike) + " and " +
                                                               fmt(quotes[i + 1].strike));
            }
        }
        std::vector<double> slopes;
        for (std::size_t i = 0; i + 1 < quotes.size(); ++i) {
            slopes.push_back((quotes[i + 1].call_price - quotes[i].call_price) /
                             (quotes[i + 1].strike - quotes[i].strike));
        }
        for (std::size_t i = 1; i < slopes.size(); ++i) {
            if (slopes[i] < slopes[i - 1]) {
                const double w1 = quotes[i + 1].strike - quotes[i].strike;
                const double w0 = quotes[i].strike - quotes[i - 1].strike;
                const double fly = quotes[i - 1].call_price / w0 - quotes[i].call_price * (1.0 / w0 + 1.0 / w1) +
                                   quotes[i + 1].call_price / w1;
                throw Error(ErrorKind::ArbitrageViolation,
                            "negative butterfly at strikes (" + fmt(quotes[i - 1].strike) + ", " +
                                fmt(quotes[i].strike) + ", " + fmt(quotes[i + 1].strike) +
                                "), weighted spread " + fmt(fly));
            }
        }
        if (slopes.front() < -discount_ * (1.0 + 1e-12)) {
            throw Error(ErrorKind::ArbitrageViolation, "call spread between strikes " + fmt(quotes[0].strike) +
                                                           " and " + fmt(quotes[1].strike) +
                                                           " is worth more than a discounted digital");
        }
        if (slopes.back() >= 0.0) {
            throw Error(ErrorKind::ArbitrageViolation,
                        "call curve does not decay beyond strike " + fmt(quotes.back().strike));
        }

        if (quotes.front().strike > 0.0) {
            const double c0 = quotes.front().call_price - slopes.front() * quotes.front().strike;
            knots_.push_back(0.0);
            values_.push_back(c0);
            overrides_.push_back(std::nullopt);
        }
        for (const auto& q : quotes) {
            knots_.push_back(q.strike);
            values_.push_back(q.call_price);
            overrides_.push_back(q.digital_ge);
        }
        const double last = quotes.back().strike - quotes.back().call_price / slopes.back();
        knots_.push_back(last);
        values_.push_back(0.0);
        overrides_.push_back(std::nullopt);
        breaks_.assign(knots_.begin() + 1, knots_.end());

        for (std::size_t j = 0; j < knots_.size(); ++j) {
            if (overrides_[j]) {
                const double v = *overrides_[j];
                require(v >= digital_gt(knots_[j]) && v <= 1.0, ErrorKind::ArbitrageViolation,
                        "digital_ge override at strike " + fmt(knots_[j]) + " outside [Q(X>K), 1]");
            }
        }
    }

    [[nodiscard]] std::string_view backend() const override { return "table"; }
    [[nodiscard]] double maturity() const override { return maturity_; }
    [[nodiscard]] double discount() const override { return discount_; }
    [[nodiscard]] std::span<const double> breakpoints() const override { return breaks_; }
    [[nodiscard]] std::span<const double> knots() const { return knots_; }
    /// Strike beyond which the curve is zero.
    [[nodiscard]] double support_end() const { return knots_.back(); }

    [[nodiscard]] double lambda(double a) const override {
        if (a >= knots_.back()) {
            return 0.0;
        }
        if (a <= 0.0) {
            return values_.front();
        }
        const std::size_t j = interval(a);
        if (a == knots_[j]) {
            return values_[j];
        }
        const double x0 = knots_[j];
        const double x1 = knots_[j + 1];
        const double h = x1 - x0;
        return values_[j] * ((x1 - a) / h) + values_[j + 1] * ((a - x0) / h);
    }

    [[nodiscard]] double digital_gt(double a) const override {
        if (a >= knots_.back()) {
            return 0.0;
        }
        return -slope(interval(std::max(a, 0.0))) / discount_;
    }

    [[nodiscard]] double digital_ge(double a) const override {
        if (a <= 0.0) {
            return 1.0;
        }
        if (a > knots_.back()) {
            return 0.0;
        }
        auto it = std::lower_bound(knots_.begin(), knots_.end(), a);
        const auto j = static_cast<std::size_t>(it - knots_.begin());
        if (*it == a && overrides_[j]) {
            return *overrides_[j];
        }
        return -slope(j - 1) / discount_;
    }

private:
    static std::string fmt(double x) {
        std::ostringstream os;
        os << x;
        return os.str();
    }

    /// Index j with knots_[j] <= a < knots_[j+1], for 0 <= a < knots_.back().
    [[nodiscard]] std::size_t interval(double a) const {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), a);
        return static_cast<std::size_t>(it - knots_.begin()) - 1;
    }

    [[nodiscard]] double slope(std::size_t j) const {
        return (values_[j + 1] - values_[j]) / (knots_[j + 1] - knots_[j]);
    }

    std::vector<double> knots_;
    std::vector<double> values_;
    std::vector<std::optional<double>> overrides_;
    std::vector<double> breaks_;
    double discount_;
    double maturity_;
};

inline TableCurve table_curve(std::vector<Quote> quotes, double discount, double maturity = 0.0) {
    return TableCurve(std::move(quotes), discount, maturity);
}

inline TableCurve table_curve(const std::vector<std::pair<double, double>>& rows, double discount,
                              double maturity = 0.0) {
    std::vector<Quote> quotes;
    for (const auto& [k, c] : rows) {
        quotes.push_back({k, c, std::nullopt});
    }
    return TableCurve(std::move(quotes), discount, maturity);
}

/// Call curve of an empirical measure: `samples` carry weight 1/total each,
/// and total may exceed samples.size() (the remaining mass sits outside the
/// curve's event, see JointCallCurve). Queries are exact.
class EmpiricalCurve : public CallCurve {
public:
    EmpiricalCurve(std::vector<double> samples, std::size_t total, double discount, double maturity)
        : sorted_(std::move(samples)), total_(total), discount_(discount), maturity_(maturity) {
        require(total_ > 0 && sorted_.size() <= total_, ErrorKind::BadParams, "empirical curve needs total >= size > 0");
        require(discount > 0.0 && discount <= 1.0, ErrorKind::BadParams, "discount must be in (0, 1]");
        std::sort(sorted_.begin(), sorted_.end());
        require(sorted_.empty() || sorted_.front() >= 0.0, ErrorKind::DataError, "samples must be >= 0");
        suffix_.assign(sorted_.size() + 1, 0.0L);
        for (std::size_t i = sorted_.size(); i-- > 0;) {
            suffix_[i] = suffix_[i + 1] + static_cast<long double>(sorted_[i]);
        }
    }

    [[nodiscard]] std::string_view backend() const override { return "empirical"; }
    [[nodiscard]] double maturity() const override { return maturity_; }
    [[nodiscard]] double discount() const override { return discount_; }
    [[nodiscard]] std::span<const double> breakpoints() const override { return sorted_; }
    [[nodiscard]] std::span<const double> samples() const { return sorted_; }
    [[nodiscard]] std::size_t total() const { return total_; }

    [[nodiscard]] double lambda(double a) const override {
        const std::size_t i = count_le(a);
        const long double above = suffix_[i] - static_cast<long double>(sorted_.size() - i) * a;
        return static_cast<double>(static_cast<long double>(discount_) * above / static_cast<long double>(total_));
    }

    [[nodiscard]] double digital_ge(double a) const override {
        const auto it = std::lower_bound(sorted_.begin(), sorted_.end(), a);
        return static_cast<double>(sorted_.end() - it) / static_cast<double>(total_);
    }

    [[nodiscard]] double digital_gt(double a) const override {
        return static_cast<double>(sorted_.size() - count_le(a)) / static_cast<double>(total_);
    }

private:
    [[nodiscard]] std::size_t count_le(double a) const {
        return static_cast<std::size_t>(std::upper_bound(sorted_.begin(), sorted_.end(), a) - sorted_.begin());
    }

    std::vector<double> sorted_;
    std::vector<long double> suffix_;
    std::size_t total_;
    double discount_;
    double maturity_;
};

/// Curve of the barrier-restricted claim (X_T - a)^+ 1_{Y in C}; its digitals
/// are the joint probabilities Q(X_T >= a, Y in C).
class JointCallCurve final : public EmpiricalCurve {
public:
    JointCallCurve(std::vector<double> samples_in_event, std::size_t total, double discount, double maturity)
        : EmpiricalCurve(std::move(samples_in_event), total, discount, maturity) {}

    [[nodiscard]] std::string_view backend() const override { return "joint"; }
    /// Q(Y in C)
    [[nodiscard]] double barrier_prob() const {
        return static_cast<double>(samples().size()) / static_cast<double>(total());
    }
};

} // namespace strikespan
