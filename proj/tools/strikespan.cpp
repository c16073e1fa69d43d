// strikespan command-line front end.
//
//   strikespan price    --payoff SPEC BACKEND [--form theorem1|lebesgue|bick|bl|convex|all]
//   strikespan hedge    --payoff SPEC BACKEND [--kind digital|callspread] [--nodes N] [--out FILE]
//   strikespan american --payoff SPEC --bs ... [--oracle-steps N]
//   strikespan barrier  --payoff SPEC --event EVENT --mc seed=..,n=..
//
// BACKEND is one of --bs k=v,..  --table FILE  --mc k=v,..
// Exit codes: 0 ok, 2 tail/class validation failure, 3 data or parameter error.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "strikespan/strikespan.hpp"

namespace ss = strikespan;
using nlohmann::json;

namespace {

struct Options {
    std::string payoff;
    std::string bs;
    std::string table;
    std::string mc;
    double table_discount = 1.0;
    double table_maturity = 0.0;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::optional<double> tail_tol;
    std::size_t max_nodes = 200000;
    std::string format = "json";

    std::string form = "theorem1";

    std::string hedge_kind = "digital";
    std::size_t nodes = 257;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::string out;

    int oracle_steps = 1000;

    std::string event;
};

std::map<std::string, double> parse_kv(const std::string& text, const std::vector<std::string>& allowed,
                                       const std::string& what) {
    std::map<std::string, double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        const auto eq = item.find('=');
        ss::require(eq != std::string::npos, ss::ErrorKind::BadParams, what + ": expected key=value, got '" + item + "'");
        const auto key = item.substr(0, eq);
        ss::require(std::find(allowed.begin(), allowed.end(), key) != allowed.end(), ss::ErrorKind::BadParams,
                    what + ": unknown key '" + key + "'");
        try {
            std::size_t used = 0;
            const auto val = item.substr(eq + 1);
            out[key] = std::stod(val, &used);
            ss::require(used == val.size(), ss::ErrorKind::BadParams, what + ": bad number in '" + item + "'");
        } catch (const std::logic_error&) {
            throw ss::Error(ss::ErrorKind::BadParams, what + ": bad number in '" + item + "'");
        }
    }
    return out;
}

double get(const std::map<std::string, double>& m, const std::string& key, std::optional<double> fallback,
           const std::string& what) {
    if (auto it = m.find(key); it != m.end()) {
        return it->second;
    }
    ss::require(fallback.has_value(), ss::ErrorKind::BadParams, what + ": missing " + key);
    return *fallback;
}

std::optional<std::uint64_t> env_seed() {
    const char* s = std::getenv("STRIKESPAN_SEED");
    if (s == nullptr || *s == '\0') {
        return std::nullopt;
    }
    try {
        return std::stoull(s);
    } catch (const std::logic_error&) {
        throw ss::Error(ss::ErrorKind::BadParams, std::string("STRIKESPAN_SEED is not an integer: ") + s);
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    ss::require(in.good(), ss::ErrorKind::DataError, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ss::Error(ss::ErrorKind::DataError, "'" + path + "': " + e.what());
    }
}

bool looks_like_file(const std::string& s) {
    return s.size() > 5 && s.substr(s.size() - 5) == ".json";
}

struct Context {
    json payoff_spec;
    std::optional<ss::Payoff> payoff;
    std::unique_ptr<ss::CallCurve> curve;
    std::optional<ss::SamplePool> pool;
    std::optional<ss::BsCurve> bs;
    json backend;
    ss::QuadConfig quad;
    std::optional<std::uint64_t> seed;
};

ss::Payoff load_payoff(const Options& o, json& spec) {
    ss::require(!o.payoff.empty(), ss::ErrorKind::UnknownPayoff, "missing payoff spec (--payoff)");
    spec = looks_like_file(o.payoff) ? read_json_file(o.payoff) : ss::parse_inline_payoff(o.payoff);
    return ss::payoff_from_json(spec);
}

std::optional<std::uint64_t> resolve_seed(const Options& o, const std::map<std::string, double>& mc) {
    if (auto it = mc.find("seed"); it != mc.end()) {
        ss::require(it->second >= 0.0 && it->second == std::floor(it->second), ss::ErrorKind::BadParams,
                    "--mc: seed must be a nonnegative integer");
        return static_cast<std::uint64_t>(it->second);
    }
    if (o.seed) {
        return o.seed;
    }
    return env_seed();
}

/// Builds payoff and curve; `kind` is the barrier statistic the mc pool must carry.
Context build(const Options& o, ss::BarrierKind kind = ss::BarrierKind::None) {
    Context ctx;
    ctx.payoff = load_payoff(o, ctx.payoff_spec);

    const int selected = int(!o.bs.empty()) + int(!o.table.empty()) + int(!o.mc.empty());
    ss::require(selected == 1, ss::ErrorKind::BadParams, "select exactly one backend: --bs, --table or --mc");
    if (!o.bs.empty()) {
        const auto kv = parse_kv(o.bs, {"spot", "vol", "rate", "T"}, "--bs");
        ctx.bs.emplace(get(kv, "spot", std::nullopt, "--bs"), get(kv, "vol", std::nullopt, "--bs"),
                       get(kv, "rate", 0.0, "--bs"), get(kv, "T", 1.0, "--bs"));
        ctx.curve = std::make_unique<ss::BsCurve>(*ctx.bs);
        ctx.backend = {{"kind", "bs"},
                       {"spot", ctx.bs->spot()},
                       {"vol", ctx.bs->vol()},
                       {"rate", ctx.bs->rate()},
                       {"T", ctx.bs->maturity()}};
    } else if (!o.table.empty()) {
        auto quotes = ss::io::read_market_csv(o.table);
        ctx.curve = std::make_unique<ss::TableCurve>(std::move(quotes), o.table_discount, o.table_maturity);
        ctx.backend = {{"kind", "table"},
                       {"file", o.table},
                       {"discount", o.table_discount},
                       {"maturity", o.table_maturity}};
    } else {
        const auto kv = parse_kv(o.mc, {"seed", "n", "spot", "vol", "rate", "T"}, "--mc");
        ctx.seed = resolve_seed(o, kv);
        ss::require(ctx.seed.has_value(), ss::ErrorKind::BadParams,
                    "mc backend needs a seed (--mc seed=.., --seed or STRIKESPAN_SEED)");
        const double n = get(kv, "n", 100000.0, "--mc");
        ss::require(n >= 1.0 && n == std::floor(n), ss::ErrorKind::BadParams, "--mc: n must be a positive integer");
        ctx.pool = ss::gbm_pool(*ctx.seed, static_cast<std::size_t>(n), get(kv, "spot", 100.0, "--mc"),
                                get(kv, "vol", 0.2, "--mc"), get(kv, "rate", 0.0, "--mc"), get(kv, "T", 1.0, "--mc"),
                                kind);
        ctx.curve = std::make_unique<ss::EmpiricalCurve>(ss::empirical_curve(*ctx.pool, ctx.pool->discount()));
        ctx.backend = {{"kind", "mc"},
                       {"seed", *ctx.seed},
                       {"n", ctx.pool->n},
                       {"spot", ctx.pool->spot},
                       {"vol", ctx.pool->vol},
                       {"rate", ctx.pool->rate},
                       {"T", ctx.pool->maturity},
                       {"barrier_kind", ss::to_string(kind)},
                       {"steps", ctx.pool->steps}};
    }
    if (!ctx.seed) {
        ctx.seed = o.seed ? o.seed : env_seed();
    }
    ctx.quad.tol = o.tol;
    ctx.quad.tail_tol = o.tail_tol;
    ctx.quad.max_nodes = o.max_nodes;
    return ctx;
}

json envelope(const std::string& command, const Options& o, const Context& ctx, json extra, json result) {
    json quad{{"tol", o.tol ? json(*o.tol) : json(nullptr)},
              {"tail_tol", o.tail_tol ? json(*o.tail_tol) : json(nullptr)},
              {"max_nodes", o.max_nodes}};
    json config{{"command", command},
                {"payoff", ctx.payoff_spec},
                {"backend", ctx.backend},
                {"quad", quad},
                {"seed", ctx.seed ? json(*ctx.seed) : json(nullptr)},
                {"format", o.format}};
    for (auto it = extra.begin(); it != extra.end(); ++it) {
        config[it.key()] = it.value();
    }
    return json{{"schema", 1},
                {"tool", "strikespan"},
                {"version", STRIKESPAN_VERSION},
                {"config", config},
                {"result", std::move(result)}};
}

std::string scalar_text(const json& v) {
    if (v.is_number_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return buf;
    }
    if (v.is_string()) {
        return v.get<std::string>();
    }
    return v.dump();
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& rows) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), rows);
        }
    } else if (j.is_array() && !j.empty() && (j.front().is_object() || j.front().is_array())) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            flatten(j[i], prefix + "." + std::to_string(i), rows);
        }
    } else if (j.is_array()) {
        std::string s;
        for (const auto& v : j) {
            s += (s.empty() ? "" : "; ") + scalar_text(v);
        }
        rows.emplace_back(prefix, s);
    } else {
        rows.emplace_back(prefix, scalar_text(j));
    }
}

void emit(const json& report, const std::string& format, std::ostream& os) {
    if (format == "json") {
        os << ss::io::dump17(report);
        return;
    }
    std::vector<std::pair<std::string, std::string>> rows;
    flatten(report.at("result"), "", rows);
    if (format == "csv") {
        os << "key,value\n";
        for (const auto& [k, v] : rows) {
            const bool quote = v.find(',') != std::string::npos;
            os << k << ',' << (quote ? "\"" + v + "\"" : v) << '\n';
        }
        return;
    }
    std::size_t width = 0;
    for (const auto& r : rows) {
        width = std::max(width, r.first.size());
    }
    for (const auto& [k, v] : rows) {
        os << std::left << std::setw(static_cast<int>(width) + 2) << k << v << '\n';
    }
}

/// Cross-form agreement table for `price --form all`.
void emit_agreement(const json& result, std::ostream& os) {
    os << std::left << std::setw(10) << "form" << std::setw(26) << "value" << "diff_vs_theorem1\n";
    const double ref = result.at("forms").front().at("value").get<double>();
    for (const auto& f : result.at("forms")) {
        const double v = f.at("value").get<double>();
        char a[32];
        char b[32];
        std::snprintf(a, sizeof a, "%.17g", v);
        std::snprintf(b, sizeof b, "%.3e", v - ref);
        os << std::setw(10) << f.at("form").get<std::string>() << std::setw(26) << a << b << '\n';
    }
    for (const auto& s : result.at("skipped")) {
        os << std::setw(10) << s.at("form").get<std::string>() << "skipped: " << s.at("reason").get<std::string>()
           << '\n';
    }
    char m[32];
    std::snprintf(m, sizeof m, "%.3e", result.at("max_pairwise_diff").get<double>());
    os << "max pairwise diff " << m << '\n';
}

int cmd_price(const Options& o) {
    auto ctx = build(o);
    const auto& p = *ctx.payoff;
    const auto& c = *ctx.curve;
    json result;
    if (o.form == "all") {
        const auto reports = ss::price_all_forms(p, c, ctx.quad);
        json forms = json::array();
        double diff = 0.0;
        for (const auto& a : reports) {
            forms.push_back(ss::io::to_json(a));
            for (const auto& b : reports) {
                diff = std::max(diff, std::abs(a.value - b.value));
            }
        }
        json skipped = json::array();
        for (const std::string name : {"theorem1", "lebesgue", "bick", "bl", "convex"}) {
            const bool ran = std::any_of(reports.begin(), reports.end(), [&](const auto& r) { return r.form == name; });
            if (ran) {
                continue;
            }
            std::string reason;
            if (name == "bick") {
                reason = "payoff has no second derivative";
            } else if (name == "bl") {
                reason = "backend '" + std::string(c.backend()) + "' has no density";
            } else {
                reason = "payoff is not convex with a second derivative";
            }
            skipped.push_back({{"form", name}, {"reason", reason}});
        }
        result = {{"forms", forms}, {"skipped", skipped}, {"max_pairwise_diff", diff}};
    } else {
        ss::PriceReport r;
        if (o.form == "theorem1") {
            r = ss::price_theorem1(p, c, ctx.quad);
        } else if (o.form == "lebesgue") {
            r = ss::price_lebesgue(p, c, ctx.quad);
        } else if (o.form == "bick") {
            r = ss::price_bick(p, c, ctx.quad);
        } else if (o.form == "bl") {
            r = ss::price_bl(p, c, ctx.quad);
        } else {
            r = ss::price_convex(ss::convex_decompose(p), c, ctx.quad);
        }
        result = ss::io::to_json(r);
    }
    const auto report = envelope("price", o, ctx, {{"form", o.form}}, result);
    if (o.form == "all" && o.format == "table") {
        emit_agreement(result, std::cout);
    } else {
        emit(report, o.format, std::cout);
    }
    return 0;
}

int cmd_hedge(const Options& o) {
    auto ctx = build(o);
    const auto& p = *ctx.payoff;
    const auto& c = *ctx.curve;
    ss::HedgePortfolio h;
    ss::ScalarFn target;
    double upper = 0.0;
    double target_value = 0.0;
    json extra{{"kind", o.hedge_kind}, {"nodes", o.nodes}};
    if (o.hedge_kind == "digital") {
        const auto grid = ss::default_hedge_grid(p, c, o.nodes, ctx.quad);
        h = ss::build_digital_hedge(p, grid);
        target = [&](double x) { return p.eval(x); };
        upper = grid.back();
        target_value = ss::price_theorem1(p, c, ctx.quad).value;
    } else if (o.hedge_kind == "callspread") {
        ss::require(o.alpha && o.beta, ss::ErrorKind::BadWindow, "callspread hedge needs --alpha and --beta");
        ss::require(o.nodes >= 2, ss::ErrorKind::BadGrid, "hedge grid needs at least two nodes");
        const double a = *o.alpha;
        const double b = *o.beta;
        h = ss::build_call_spread_hedge(p, a, b, o.nodes - 1);
        target = [&p, a, b](double x) {
            if (x < a || x > b) {
                return 0.0;
            }
            return x == b ? p.eval_left(b) : p.eval(x);
        };
        upper = 1.25 * b;
        target_value = ss::price_windowed(p, a, b, ss::WindowEnds{true, true}, c, ctx.quad).value;
        extra["alpha"] = a;
        extra["beta"] = b;
    } else {
        throw ss::Error(ss::ErrorKind::BadParams, "unknown hedge kind '" + o.hedge_kind + "'");
    }
    std::vector<double> xs;
    constexpr int kPoints = 4096;
    for (int i = 0; i <= kPoints; ++i) {
        xs.push_back(upper * i / kPoints);
    }
    auto rep = ss::replication_on_points(h, target, xs);
    rep.value_gap = ss::portfolio_price(h, c) - target_value;

    if (!o.out.empty()) {
        std::ofstream f(o.out);
        ss::require(f.good(), ss::ErrorKind::DataError, "cannot write '" + o.out + "'");
        ss::write_portfolio_csv(f, h);
    }
    if (o.format == "csv" && o.out.empty()) {
        ss::write_portfolio_csv(std::cout, h);
        return 0;
    }
    json result{{"portfolio",
                 {{"kind", ss::to_string(h.kind)},
                  {"cash", h.cash},
                  {"digital_rows", h.digitals.size()},
                  {"callspread_rows", h.call_spreads.size()},
                  {"price", ss::portfolio_price(h, c)}}},
                {"target_price", target_value},
                {"replication", ss::io::to_json(rep)}};
    if (!o.out.empty()) {
        extra["out"] = o.out;
    }
    emit(envelope("hedge", o, ctx, extra, result), o.format, std::cout);
    return 0;
}

int cmd_american(const Options& o) {
    auto ctx = build(o);
    ss::require(ctx.bs.has_value(), ss::ErrorKind::BadParams, "american needs the --bs backend");
    const auto r = ss::american_report(*ctx.payoff, *ctx.bs, o.oracle_steps, ctx.quad);
    json result = ss::io::to_json(r);
    if (r.oracle_value && r.lattice_error) {
        result["oracle_within_bound"] = *r.oracle_value <= r.bound + *r.lattice_error;
        // same-tree American minus European; zero when early exercise never pays
        result["exercise_premium"] = *r.oracle_value - *r.oracle_european;
        result["oracle_minus_closed_form"] = *r.oracle_value - r.european_value;
    }
    emit(envelope("american", o, ctx, {{"oracle_steps", o.oracle_steps}}, result), o.format, std::cout);
    return 0;
}

int cmd_barrier(const Options& o) {
    ss::require(!o.event.empty(), ss::ErrorKind::BadParams, "barrier needs --event");
    ss::require(!o.mc.empty(), ss::ErrorKind::BadParams, "barrier needs the --mc backend");
    const auto event = looks_like_file(o.event) ? ss::io::event_from_json(read_json_file(o.event))
                                                : ss::io::event_from_inline(o.event);
    auto ctx = build(o, ss::io::barrier_kind_for(event.stat));
    const auto& pool = *ctx.pool;
    const auto parity = ss::in_out_parity(*ctx.payoff, pool, event, pool.discount(), ctx.quad);
    const auto brute = ss::mc_price(pool, *ctx.payoff, event, pool.discount());
    json result{{"event", ss::io::to_json(event)},
                {"value", parity.in.value},
                {"in", ss::io::to_json(parity.in)},
                {"out", ss::io::to_json(parity.out)},
                {"vanilla", ss::io::to_json(parity.vanilla)},
                {"parity_gap", parity.gap()},
                {"mc_in", ss::io::to_json(brute)}};
    emit(envelope("barrier", o, ctx, {{"event", ss::io::to_json(event)}}, result), o.format, std::cout);
    if (o.format == "table") {
        char buf[160];
        std::snprintf(buf, sizeof buf, "parity: in %.12g + out %.12g - vanilla %.12g = %.3e\n", parity.in.value,
                      parity.out.value, parity.vanilla.value, parity.gap());
        std::cout << buf;
    }
    return 0;
}

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--payoff", o.payoff, "inline family:key=val,... or a payoff JSON file");
    cmd->add_option("--bs", o.bs, "lognormal backend spot=,vol=,rate=,T=");
    cmd->add_option("--table", o.table, "market CSV strike,call_price[,digital_ge]");
    cmd->add_option("--discount", o.table_discount, "B_T^-1 for the table backend")->default_val(1.0);
    cmd->add_option("--maturity", o.table_maturity, "maturity for the table backend");
    cmd->add_option("--mc", o.mc, "Monte Carlo backend seed=,n=,spot=,vol=,rate=,T=");
    cmd->add_option("--seed", o.seed, "seed fallback (STRIKESPAN_SEED otherwise)");
    cmd->add_option("--tol", o.tol, "quadrature tolerance");
    cmd->add_option("--tail-tol", o.tail_tol, "tail truncation tolerance");
    cmd->add_option("--max-nodes", o.max_nodes, "quadrature cell budget");
    cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "table", "csv"}));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"strikespan: price payoffs from call and digital price curves"};
    app.require_subcommand(1);
    app.set_version_flag("--version", STRIKESPAN_VERSION);
    Options o;

    auto* price = app.add_subcommand("price", "price a payoff");
    add_common(price, o);
    price->add_option("--form", o.form, "pricing form")
        ->check(CLI::IsMember({"theorem1", "lebesgue", "bick", "bl", "convex", "all"}));

    auto* hedge = app.add_subcommand("hedge", "static hedge and replication report");
    add_common(hedge, o);
    hedge->add_option("--kind", o.hedge_kind, "digital or callspread")
        ->check(CLI::IsMember({"digital", "callspread"}));
    hedge->add_option("--nodes", o.nodes, "grid nodes");
    hedge->add_option("--alpha", o.alpha, "call-spread window start");
    hedge->add_option("--beta", o.beta, "call-spread window end");
    hedge->add_option("--out", o.out, "portfolio CSV path");

    auto* american = app.add_subcommand("american", "American upper bound with lattice oracle");
    add_common(american, o);
    american->add_option("--oracle-steps", o.oracle_steps, "CRR steps (0 disables the oracle)");

    auto* barrier = app.add_subcommand("barrier", "barrier price with in-out parity");
    add_common(barrier, o);
    barrier->add_option("--event", o.event, "e.g. maxlt:B=130, or an event JSON file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (price->parsed()) {
            return cmd_price(o);
        }
        if (hedge->parsed()) {
            return cmd_hedge(o);
        }
        if (american->parsed()) {
            return cmd_american(o);
        }
        return cmd_barrier(o);
    } catch (const ss::Error& e) {
        std::cerr << "strikespan: " << e.what() << '\n';
        return e.kind() == ss::ErrorKind::TailConditionFailed ? 2 : 3;
    } catch (const json::exception& e) {
        std::cerr << "strikespan: DataError: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "strikespan: " << e.what() << '\n';
        return 1;
    }
}
