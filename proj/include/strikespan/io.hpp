#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "strikespan/american.hpp"
#include "strikespan/barrier.hpp"
#include "strikespan/catalog.hpp"
#include "strikespan/curve.hpp"
#include "strikespan/error.hpp"
#include "strikespan/hedge.hpp"
#include "strikespan/pricer.hpp"
#include "strikespan/sampling.hpp"

namespace strikespan::io {

using nlohmann::json;

/// JSON has no infinities; unbounded values are written as strings.
inline json number(double x) {
    if (std::isfinite(x)) {
        return x == 0.0 ? 0.0 : x;
    }
    if (std::isnan(x)) {
        return "nan";
    }
    return x > 0 ? "inf" : "-inf";
}

namespace detail {

inline void write_string(std::ostream& os, const std::string& s) {
    os << json(s).dump();
}

inline void write(std::ostream& os, const json& j, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            os << (first ? "" : ",\n") << pad;
            first = false;
            write_string(os, it.key());
            os << ": ";
            write(os, it.value(), indent, depth + 1);
        }
        os << '\n' << close << '}';
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            os << "[]";
            return;
        }
        os << "[\n";
        bool first = true;
        for (const auto& v : j) {
            os << (first ? "" : ",\n") << pad;
            first = false;
            write(os, v, indent, depth + 1);
        }
        os << '\n' << close << ']';
        return;
    }
    case json::value_t::number_float: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", j.get<double>());
        os << buf;
        return;
    }
    default: os << j.dump();
    }
}

} // namespace detail

/// Pretty JSON with every floating-point number at 17 significant digits.
inline std::string dump17(const json& j, int indent = 2) {
    std::ostringstream os;
    detail::write(os, j, indent, 0);
    os << '\n';
    return os.str();
}

inline json to_json(const PriceReport& r) {
    return json{{"form", r.form},
                {"value", number(r.value)},
                {"cash_term", number(r.cash_term)},
                {"linear_term", number(r.linear_term)},
                {"integral_term", number(r.integral_term)},
                {"kink_term", number(r.kink_term)},
                {"jump_left_term", number(r.jump_left_term)},
                {"jump_right_term", number(r.jump_right_term)},
                {"truncation", number(r.truncation)},
                {"tail_bound", number(r.tail_bound)},
                {"n_quadrature", r.n_quadrature},
                {"error_estimate", number(r.error_estimate)}};
}

inline json to_json(const BarrierPriceReport& r) {
    return json{{"value", number(r.value)},
                {"cash_term", number(r.cash_term)},
                {"integral_term", number(r.integral_term)},
                {"jump_left_term", number(r.jump_left_term)},
                {"jump_right_term", number(r.jump_right_term)},
                {"barrier_prob", number(r.barrier_prob)},
                {"truncation", number(r.truncation)},
                {"tail_bound", number(r.tail_bound)},
                {"n_quadrature", r.n_quadrature},
                {"error_estimate", number(r.error_estimate)}};
}

inline json to_json(const ValidityReport& r) {
    json grid = json::array();
    for (const auto& g : r.tail_grid) {
        grid.push_back({number(g.strike), number(g.digital), number(g.product)});
    }
    return json{{"tail_ok", r.tail_ok},
                {"integrable_ok", r.integrable_ok},
                {"stieltjes_ok", r.stieltjes_ok},
                {"messages", r.messages},
                {"tail_grid", grid}};
}

inline json to_json(const AmericanBoundReport& r) {
    json j{{"european_value", number(r.european_value)},
           {"bound", number(r.bound)},
           {"cash_gap", number(r.cash_gap)},
           {"slope_gap", number(r.slope_gap)},
           {"equality_certified", r.equality_certified},
           {"certificate_reasons", r.certificate_reasons}};
    j["ratio"] = r.ratio ? number(*r.ratio) : json(nullptr);
    j["oracle_value"] = r.oracle_value ? number(*r.oracle_value) : json(nullptr);
    j["oracle_european"] = r.oracle_european ? number(*r.oracle_european) : json(nullptr);
    j["lattice_error"] = r.lattice_error ? number(*r.lattice_error) : json(nullptr);
    return j;
}

inline json to_json(const ReplicationReport& r) {
    return json{{"sup_error", number(r.sup_error)},
                {"mean_abs_error", number(r.mean_abs_error)},
                {"value_gap", number(r.value_gap)}};
}

inline json to_json(const McEstimate& m) {
    return json{{"value", number(m.value)}, {"std_error", number(m.std_error)}};
}

/// Market CSV: header `strike,call_price[,digital_ge]`, one quote per row.
inline std::vector<Quote> read_market_csv(std::istream& in) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorKind::DataError, "market CSV is empty");
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    bool with_digital = false;
    if (line == "strike,call_price,digital_ge") {
        with_digital = true;
    } else {
        require(line == "strike,call_price", ErrorKind::DataError,
                "market CSV header must be 'strike,call_price[,digital_ge]', got '" + line + "'");
    }
    std::vector<Quote> quotes;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        require(cells.size() == (with_digital ? 3u : 2u) || (with_digital && cells.size() == 2), ErrorKind::DataError,
                "market CSV row " + std::to_string(row) + " has " + std::to_string(cells.size()) + " columns");
        auto parse = [&](const std::string& s) {
            try {
                std::size_t used = 0;
                const double v = std::stod(s, &used);
                require(used == s.size(), ErrorKind::DataError, "bad number '" + s + "'");
                return v;
            } catch (const std::logic_error&) {
                throw Error(ErrorKind::DataError,
                            "market CSV row " + std::to_string(row) + ": bad number '" + s + "'");
            }
        };
        Quote q{parse(cells[0]), parse(cells[1]), std::nullopt};
        if (cells.size() == 3 && !cells[2].empty()) {
            q.digital_ge = parse(cells[2]);
        }
        quotes.push_back(q);
    }
    return quotes;
}

inline std::vector<Quote> read_market_csv(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorKind::DataError, "cannot open market CSV '" + path + "'");
    return read_market_csv(in);
}

inline json to_json(const BarrierEvent& e) {
    return json{{"stat", to_string(e.stat)},
                {"set",
                 {{"kind", "interval"},
                  {"lo", number(e.set.lo)},
                  {"hi", number(e.set.hi)},
                  {"lo_closed", e.set.lo_closed},
                  {"hi_closed", e.set.hi_closed}}},
                {"complement", e.complement}};
}

/// BarrierEvent descriptor:
/// {"stat": ..., "set": {"kind": "interval", "lo", "hi", "lo_closed", "hi_closed"}}
/// with "-inf"/"inf" allowed for the bounds and an optional "complement" flag.
inline BarrierEvent event_from_json(const json& j) {
    require(j.is_object() && j.contains("stat") && j.contains("set"), ErrorKind::BadParams,
            "event needs 'stat' and 'set'");
    BarrierEvent e;
    e.stat = event_stat_from_string(j.at("stat").get<std::string>());
    const auto& s = j.at("set");
    require(s.value("kind", std::string()) == "interval", ErrorKind::BadParams, "event set kind must be 'interval'");
    e.set.lo = strikespan::detail::json_bound(s.at("lo"));
    e.set.hi = strikespan::detail::json_bound(s.at("hi"));
    e.set.lo_closed = s.value("lo_closed", false);
    e.set.hi_closed = s.value("hi_closed", false);
    e.complement = j.value("complement", false);
    return e;
}

/// Inline events `<stat><op>:B=<level>`, stat in {max, min, avg, term} and
/// op in {lt, le, gt, ge}; e.g. `maxlt:B=130` is {running max < 130}.
inline BarrierEvent event_from_inline(const std::string& text) {
    const auto colon = text.find(':');
    require(colon != std::string::npos && colon >= 3, ErrorKind::BadParams, "event must look like 'maxlt:B=130'");
    const auto head = text.substr(0, colon);
    const auto op = head.substr(head.size() - 2);
    const auto stat = head.substr(0, head.size() - 2);
    const auto rest = text.substr(colon + 1);
    require(rest.rfind("B=", 0) == 0, ErrorKind::BadParams, "event level must be given as B=<number>");
    double level = 0.0;
    try {
        level = std::stod(rest.substr(2));
    } catch (const std::logic_error&) {
        throw Error(ErrorKind::BadParams, "bad event level in '" + text + "'");
    }
    BarrierEvent e;
    if (stat == "max") {
        e.stat = EventStat::RunningMax;
    } else if (stat == "min") {
        e.stat = EventStat::RunningMin;
    } else if (stat == "avg") {
        e.stat = EventStat::Average;
    } else if (stat == "term") {
        e.stat = EventStat::Terminal;
    } else {
        throw Error(ErrorKind::BadParams, "unknown event statistic '" + stat + "'");
    }
    if (op == "lt" || op == "le") {
        e.set = Interval{-kInf, level, false, op == "le"};
    } else if (op == "gt" || op == "ge") {
        e.set = Interval{level, kInf, op == "ge", false};
    } else {
        throw Error(ErrorKind::BadParams, "unknown event comparison '" + op + "'");
    }
    return e;
}

inline BarrierKind barrier_kind_for(EventStat s) {
    switch (s) {
    case EventStat::Terminal: return BarrierKind::None;
    case EventStat::RunningMax: return BarrierKind::RunningMax;
    case EventStat::RunningMin: return BarrierKind::RunningMin;
    case EventStat::Average: return BarrierKind::Average;
    }
    return BarrierKind::None;
}

} // namespace strikespan::io
