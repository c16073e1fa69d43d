#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "strikespan/error.hpp"
#include "strikespan/payoff.hpp"

namespace strikespan {

namespace detail {

inline double number_param(const nlohmann::json& params, const char* key) {
    require(params.is_object() && params.contains(key), ErrorKind::BadParams,
            std::string("missing parameter '") + key + "'");
    const auto& v = params.at(key);
    require(v.is_number(), ErrorKind::BadParams, std::string("parameter '") + key + "' must be a number");
    return v.get<double>();
}

inline double number_param_or(const nlohmann::json& params, const char* key, double fallback) {
    return params.is_object() && params.contains(key) ? number_param(params, key) : fallback;
}

inline double strike_param(const nlohmann::json& params, const char* key) {
    const double k = number_param(params, key);
    require(std::isfinite(k) && k > 0.0, ErrorKind::BadParams, std::string(key) + " must be > 0");
    return k;
}

inline std::vector<double> number_list(const nlohmann::json& v, const char* key) {
    if (v.is_number()) {
        return {v.get<double>()};
    }
    require(v.is_array(), ErrorKind::BadParams, std::string("parameter '") + key + "' must be an array");
    std::vector<double> out;
    for (const auto& x : v) {
        require(x.is_number(), ErrorKind::BadParams, std::string("parameter '") + key + "' must hold numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

/// Piecewise-linear payoff through sorted nodes; constant before the first
/// node, slope `right_slope` after the last.
inline Payoff piecewise_linear(const std::vector<std::pair<double, double>>& nodes, double right_slope,
                               std::string label) {
    require(!nodes.empty(), ErrorKind::BadParams, "piecewise_linear needs nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        require(nodes[i].first >= 0.0, ErrorKind::BadParams, "node strikes must be >= 0");
        if (i > 0) {
            require(nodes[i].first > nodes[i - 1].first, ErrorKind::BadParams, "nodes must be strictly increasing");
        }
    }
    std::vector<Segment> segs;
    if (nodes.front().first > 0.0) {
        segs.push_back(Segment::constant(0.0, nodes.front().first, nodes.front().second));
    }
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const auto [x0, y0] = nodes[i];
        const auto [x1, y1] = nodes[i + 1];
        segs.push_back(Segment::line(x0, x1, x0, y0, x1, y1));
    }
    const auto [xl, yl] = nodes.back();
    segs.push_back(Segment::line(xl, kInf, xl, yl, xl + 1.0, yl + right_slope));
    return Payoff(std::move(segs), {}, std::move(label));
}

} // namespace detail

/// Names accepted by builtin_catalog.
inline const std::vector<std::string>& catalog_families() {
    static const std::vector<std::string> names = {
        "call",     "put",       "digital_ge", "digital_gt", "straddle",         "butterfly",  "capped_call",
        "power_call", "piecewise_linear", "polynomial", "forward", "constant", "power", "exponential"};
    return names;
}

/// Builds a catalog payoff from its family name and a JSON parameter object.
inline Payoff builtin_catalog(const std::string& name, const nlohmann::json& params) {
    using detail::number_param;
    using detail::strike_param;

    if (name == "call") {
        const double k = strike_param(params, "K");
        return Payoff({Segment::constant(0.0, k, 0.0), Segment::polynomial(k, kInf, {-k, 1.0})}, {},
                      "call K=" + std::to_string(k));
    }
    if (name == "put") {
        const double k = strike_param(params, "K");
        return Payoff({Segment::polynomial(0.0, k, {k, -1.0}), Segment::constant(k, kInf, 0.0)}, {},
                      "put K=" + std::to_string(k));
    }
    if (name == "digital_ge" || name == "digital_gt") {
        const double k = strike_param(params, "K");
        const double at_strike = name == "digital_ge" ? 1.0 : 0.0;
        return Payoff({Segment::constant(0.0, k, 0.0), Segment::constant(k, kInf, 1.0)}, {{k, at_strike}},
                      name + " K=" + std::to_string(k));
    }
    if (name == "straddle") {
        const double k = strike_param(params, "K");
        return Payoff({Segment::polynomial(0.0, k, {k, -1.0}), Segment::polynomial(k, kInf, {-k, 1.0})}, {},
                      "straddle K=" + std::to_string(k));
    }
    if (name == "butterfly") {
        const double k1 = strike_param(params, "K1");
        const double k2 = strike_param(params, "K2");
        const double k3 = strike_param(params, "K3");
        require(k1 < k2 && k2 < k3, ErrorKind::BadParams, "butterfly needs K1 < K2 < K3");
        return detail::piecewise_linear({{0.0, 0.0}, {k1, 0.0}, {k2, k2 - k1}, {k3, 0.0}}, 0.0, "butterfly");
    }
    if (name == "capped_call") {
        const double k = strike_param(params, "K");
        const double cap = strike_param(params, "cap");
        return detail::piecewise_linear({{0.0, 0.0}, {k, 0.0}, {k + cap, cap}}, 0.0, "capped_call");
    }
    if (name == "power_call") {
        const double nd = number_param(params, "n");
        const double k = strike_param(params, "K");
        require(nd >= 1.0 && std::floor(nd) == nd && nd <= 16.0, ErrorKind::BadParams,
                "power_call needs integer n in [1, 16]");
        const int n = static_cast<int>(nd);
        const double root = n == 2 ? std::sqrt(k) : std::pow(k, 1.0 / n);
        std::vector<double> coeffs(static_cast<std::size_t>(n) + 1, 0.0);
        coeffs[0] = -k;
        coeffs[static_cast<std::size_t>(n)] = 1.0;
        return Payoff({Segment::constant(0.0, root, 0.0), Segment::polynomial(root, kInf, coeffs)}, {{root, 0.0}},
                      "power_call n=" + std::to_string(n) + " K=" + std::to_string(k));
    }
    if (name == "piecewise_linear") {
        require(params.is_object() && params.contains("nodes"), ErrorKind::BadParams,
                "piecewise_linear needs 'nodes'");
        std::vector<std::pair<double, double>> nodes;
        for (const auto& node : params.at("nodes")) {
            const auto xy = detail::number_list(node, "nodes");
            require(xy.size() == 2, ErrorKind::BadParams, "each node must be [strike, value]");
            nodes.emplace_back(xy[0], xy[1]);
        }
        return detail::piecewise_linear(nodes, detail::number_param_or(params, "right_slope", 0.0),
                                        "piecewise_linear");
    }
    if (name == "polynomial") {
        // poly(x) on [lo, hi], zero elsewhere (both endpoints included)
        require(params.is_object() && params.contains("coeffs"), ErrorKind::BadParams, "polynomial needs 'coeffs'");
        const auto coeffs = detail::number_list(params.at("coeffs"), "coeffs");
        const double lo = number_param(params, "lo");
        const double hi = number_param(params, "hi");
        require(lo > 0.0 && lo < hi && std::isfinite(hi), ErrorKind::BadParams, "polynomial needs 0 < lo < hi < inf");
        auto inner = Segment::polynomial(lo, hi, coeffs);
        const double at_lo = inner.value(lo);
        const double at_hi = inner.value(hi);
        return Payoff({Segment::constant(0.0, lo, 0.0), std::move(inner), Segment::constant(hi, kInf, 0.0)},
                      {{lo, at_lo}, {hi, at_hi}}, "polynomial");
    }
    if (name == "forward") {
        return Payoff({Segment::polynomial(0.0, kInf, {0.0, 1.0})}, {}, "forward");
    }
    if (name == "constant") {
        return Payoff({Segment::constant(0.0, kInf, number_param(params, "c"))}, {}, "constant");
    }
    if (name == "power") {
        const double nd = number_param(params, "n");
        require(nd >= 1.0 && std::floor(nd) == nd && nd <= 16.0, ErrorKind::BadParams,
                "power needs integer n in [1, 16]");
        std::vector<double> coeffs(static_cast<std::size_t>(nd) + 1, 0.0);
        coeffs.back() = 1.0;
        return Payoff({Segment::polynomial(0.0, kInf, coeffs)}, {}, "power n=" + std::to_string(int(nd)));
    }
    if (name == "exponential") {
        const double scale = detail::number_param_or(params, "a", 1.0);
        const double rate = detail::number_param_or(params, "k", 1.0);
        return Payoff({Segment::exponential(0.0, kInf, scale, rate)}, {}, "exponential");
    }
    throw Error(ErrorKind::UnknownPayoff, "no payoff family named '" + name + "'");
}

namespace detail {

inline double json_bound(const nlohmann::json& v) {
    if (v.is_null()) {
        return kInf;
    }
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") {
            return kInf;
        }
        if (s == "-inf") {
            return -kInf;
        }
        throw Error(ErrorKind::BadParams, "bad bound '" + s + "'");
    }
    require(v.is_number(), ErrorKind::BadParams, "bound must be a number or \"inf\"");
    return v.get<double>();
}

} // namespace detail

/// Payoff from a JSON spec document: either {"family", "params"} or
/// {"segments": [{lo, hi, kind, coeffs}], "point_values": [[s, v]]}.
/// Segment kinds: "poly" (ascending coefficients) and "exp" ([scale, rate]).
inline Payoff payoff_from_json(const nlohmann::json& spec) {
    require(spec.is_object(), ErrorKind::BadParams, "payoff spec must be a JSON object");
    if (spec.contains("family")) {
        require(spec.at("family").is_string(), ErrorKind::BadParams, "'family' must be a string");
        return builtin_catalog(spec.at("family").get<std::string>(),
                               spec.value("params", nlohmann::json::object()));
    }
    require(spec.contains("segments") && spec.at("segments").is_array(), ErrorKind::BadParams,
            "payoff spec needs 'family' or 'segments'");
    std::vector<Segment> segs;
    for (const auto& s : spec.at("segments")) {
        require(s.is_object(), ErrorKind::BadParams, "segment must be an object");
        const double lo = detail::json_bound(s.at("lo"));
        const double hi = detail::json_bound(s.value("hi", nlohmann::json()));
        const auto kind = s.value("kind", std::string("poly"));
        const auto coeffs = detail::number_list(s.value("coeffs", nlohmann::json::array()), "coeffs");
        if (kind == "poly") {
            segs.push_back(Segment::polynomial(lo, hi, coeffs));
        } else if (kind == "exp") {
            require(coeffs.size() == 2, ErrorKind::BadParams, "exp segment needs [scale, rate]");
            segs.push_back(Segment::exponential(lo, hi, coeffs[0], coeffs[1]));
        } else {
            throw Error(ErrorKind::BadParams, "unknown segment kind '" + kind + "'");
        }
    }
    std::vector<std::pair<double, double>> pvs;
    for (const auto& pv : spec.value("point_values", nlohmann::json::array())) {
        const auto xy = detail::number_list(pv, "point_values");
        require(xy.size() == 2, ErrorKind::BadParams, "point value must be [strike, value]");
        pvs.emplace_back(xy[0], xy[1]);
    }
    return Payoff(std::move(segs), std::move(pvs), spec.value("label", std::string("custom")));
}

/// Parses the inline form `family:key=val,key=val`. List-valued parameters
/// use ';' between entries and '/' inside a node, e.g.
/// `piecewise_linear:nodes=0/0;100/0;150/50`.
inline nlohmann::json parse_inline_payoff(const std::string& text) {
    nlohmann::json spec;
    const auto colon = text.find(':');
    spec["family"] = text.substr(0, colon);
    nlohmann::json params = nlohmann::json::object();
    if (colon != std::string::npos) {
        std::string rest = text.substr(colon + 1);
        std::size_t pos = 0;
        while (pos <= rest.size() && !rest.empty()) {
            const auto comma = rest.find(',', pos);
            const auto item = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            const auto eq = item.find('=');
            require(eq != std::string::npos, ErrorKind::BadParams, "expected key=value in '" + item + "'");
            const auto key = item.substr(0, eq);
            const auto val = item.substr(eq + 1);
            auto to_number = [&](const std::string& s) {
                try {
                    std::size_t used = 0;
                    const double d = std::stod(s, &used);
                    require(used == s.size(), ErrorKind::BadParams, "bad number '" + s + "'");
                    return d;
                } catch (const std::logic_error&) {
                    throw Error(ErrorKind::BadParams, "bad number '" + s + "' for " + key);
                }
            };
            if (val.find(';') != std::string::npos || val.find('/') != std::string::npos) {
                nlohmann::json list = nlohmann::json::array();
                std::size_t p = 0;
                while (p <= val.size()) {
                    const auto semi = val.find(';', p);
                    const auto entry = val.substr(p, semi == std::string::npos ? std::string::npos : semi - p);
                    const auto slash = entry.find('/');
                    if (slash == std::string::npos) {
                        list.push_back(to_number(entry));
                    } else {
                        list.push_back({to_number(entry.substr(0, slash)), to_number(entry.substr(slash + 1))});
                    }
                    if (semi == std::string::npos) {
                        break;
                    }
                    p = semi + 1;
                }
                params[key] = list;
            } else {
                params[key] = to_number(val);
            }
            if (comma == std::string::npos) {
                break;
            }
            pos = comma + 1;
        }
    }
    spec["params"] = params;
    return spec;
}

} // namespace strikespan
