#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "run_cli.hpp"

using nlohmann::json;

namespace {

std::string scratch(const std::string& name, const std::string& contents) {
    const auto path = std::filesystem::path(STRIKESPAN_TEST_DIR) / name;
    std::ofstream(path) << contents;
    return path.string();
}

TEST(Cli, PriceAllFormsAgree) {
    const auto r = run_cli("price --payoff call:K=100 --bs spot=100,vol=0.2,rate=0,T=1 --form all");
    ASSERT_EQ(r.exit_code, 0);
    const auto j = json::parse(r.out);
    EXPECT_EQ(j.at("schema"), 1);
    EXPECT_EQ(j.at("tool"), "strikespan");
    EXPECT_TRUE(j.at("version").is_string());
    EXPECT_EQ(j.at("config").at("backend").at("kind"), "bs");
    const auto& forms = j.at("result").at("forms");
    EXPECT_EQ(forms.size(), 5u);
    const double expect = oracle::bs_call(100.0, 100.0, 0.2, 0.0, 1.0);
    for (const auto& f : forms) {
        EXPECT_NEAR(f.at("value").get<double>(), expect, 2e-4) << f.at("form");
    }
}

TEST(Cli, AgreementTable) {
    const auto r = run_cli("price --payoff digital_ge:K=100 --bs spot=100,vol=0.2 --form all --format table");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_NE(r.out.find("max pairwise diff"), std::string::npos);
    EXPECT_NE(r.out.find("convex    skipped"), std::string::npos) << r.out;
}

TEST(Cli, TableDigital) {
    const auto csv = scratch("quotes.csv", "strike,call_price\n80,21\n90,12.5\n100,5.5\n110,2\n120,0.6\n");
    const auto r = run_cli("price --payoff digital_ge:K=100 --table " + csv + " --discount 0.98");
    ASSERT_EQ(r.exit_code, 0) << r.out;
    // left slope at 100 is -0.7, so Q(X >= 100) = 0.7 / 0.98 and the price is 0.7
    EXPECT_NEAR(json::parse(r.out).at("result").at("value").get<double>(), 0.7, 1e-14);
}

TEST(Cli, NonConvexQuotesExit3) {
    const auto csv = scratch("bad.csv", "strike,call_price\n80,21\n90,12\n100,7\n110,1\n");
    const auto r = run_cli("price --payoff call:K=100 --table " + csv, true);
    EXPECT_EQ(r.exit_code, 3);
    EXPECT_NE(r.out.find("(90, 100, 110)"), std::string::npos) << r.out;
}

TEST(Cli, TailFailureExit2) {
    const auto r = run_cli("price --payoff exponential:a=1,k=1 --bs spot=100,vol=0.2", true);
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.out.find("TailConditionFailed"), std::string::npos);
}

TEST(Cli, MissingPayoffExit3) {
    EXPECT_EQ(run_cli("price --bs spot=100,vol=0.2").exit_code, 3);
    EXPECT_EQ(run_cli("hedge --bs spot=100,vol=0.2").exit_code, 3);
    EXPECT_EQ(run_cli("price --payoff nosuch:K=1 --bs spot=100,vol=0.2").exit_code, 3);
}

TEST(Cli, BackendSelection) {
    EXPECT_EQ(run_cli("price --payoff call:K=100").exit_code, 3);
    EXPECT_EQ(run_cli("price --payoff call:K=100 --bs spot=100,vol=0.2 --mc seed=1,n=10").exit_code, 3);
    // mc without any seed source
    EXPECT_EQ(run_cli("price --payoff call:K=100 --mc n=100", false, "env -u STRIKESPAN_SEED").exit_code, 3);
    EXPECT_EQ(run_cli("price --payoff call:K=100 --mc n=100", false, "STRIKESPAN_SEED=7").exit_code, 0);
}

TEST(Cli, SeedSourcesAgree) {
    const auto a = run_cli("price --payoff put:K=100 --mc n=2000", false, "STRIKESPAN_SEED=7");
    const auto b = run_cli("price --payoff put:K=100 --mc seed=7,n=2000");
    ASSERT_EQ(a.exit_code, 0);
    EXPECT_EQ(json::parse(a.out).at("result"), json::parse(b.out).at("result"));
}

TEST(Cli, HedgeCsvRowCount) {
    const auto out = std::filesystem::path(STRIKESPAN_TEST_DIR) / "straddle.csv";
    const auto r = run_cli("hedge --payoff straddle:K=100 --bs spot=100,vol=0.2 --nodes 257 --out " + out.string());
    ASSERT_EQ(r.exit_code, 0);
    std::ifstream in(out);
    std::string line;
    int cash = 0;
    int digital = 0;
    std::getline(in, line);
    EXPECT_EQ(line, "instrument,strike,strike2,weight,flavor");
    while (std::getline(in, line)) {
        cash += line.rfind("cash,", 0) == 0;
        digital += line.rfind("digital,", 0) == 0;
    }
    EXPECT_EQ(cash, 1);
    EXPECT_EQ(digital, 256);
    EXPECT_EQ(json::parse(r.out).at("result").at("portfolio").at("digital_rows"), 256);
}

TEST(Cli, CallSpreadHedgeExactForPiecewiseLinear) {
    const auto r = run_cli(
        "hedge --payoff 'piecewise_linear:nodes=0/0;100/0;120/20;140/10' --bs spot=100,vol=0.2 --kind callspread "
        "--alpha 80 --beta 160 --nodes 9");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_LT(json::parse(r.out).at("result").at("replication").at("sup_error").get<double>(), 1e-12);
}

TEST(Cli, BadHedgeGridExit3) {
    EXPECT_EQ(run_cli("hedge --payoff call:K=100 --bs spot=100,vol=0.2 --nodes 1").exit_code, 3);
    EXPECT_EQ(run_cli("hedge --payoff call:K=100 --bs spot=100,vol=0.2 --kind callspread").exit_code, 3);
}

TEST(Cli, AmericanPut) {
    const auto r = run_cli("american --payoff put:K=100 --bs spot=100,vol=0.2,rate=0.05,T=1 --oracle-steps 1000");
    ASSERT_EQ(r.exit_code, 0);
    const auto res = json::parse(r.out).at("result");
    EXPECT_FALSE(res.at("equality_certified").get<bool>());
    EXPECT_LE(res.at("oracle_value").get<double>(),
              res.at("bound").get<double>() + res.at("lattice_error").get<double>());
    EXPECT_EQ(json::parse(r.out).at("config").at("oracle_steps"), 1000);
}

TEST(Cli, AmericanPowerCallCertified) {
    const auto r = run_cli("american --payoff power_call:n=2,K=10000 --bs spot=100,vol=0.2,rate=0.05,T=1 --oracle-steps 500");
    ASSERT_EQ(r.exit_code, 0);
    const auto res = json::parse(r.out).at("result");
    EXPECT_TRUE(res.at("equality_certified").get<bool>());
    EXPECT_LE(std::abs(res.at("oracle_value").get<double>() - res.at("oracle_european").get<double>()),
              res.at("lattice_error").get<double>());
}

TEST(Cli, BarrierParityLine) {
    const auto r = run_cli("barrier --payoff call:K=100 --event maxlt:B=130 --mc seed=7,n=20000 --format table");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_NE(r.out.find("parity: in "), std::string::npos);
    const auto j = json::parse(run_cli("barrier --payoff call:K=100 --event maxlt:B=130 --mc seed=7,n=20000").out);
    const auto& res = j.at("result");
    EXPECT_LT(std::abs(res.at("parity_gap").get<double>()), 1e-10 * res.at("vanilla").at("value").get<double>());
    EXPECT_NEAR(res.at("value").get<double>(), res.at("mc_in").at("value").get<double>(), 1e-6);
}

TEST(Cli, BarrierEventFile) {
    const auto ev = scratch("event.json", R"({"stat":"running_min","set":{"kind":"interval","lo":90,"hi":"inf","lo_closed":true}})");
    const auto r = run_cli("barrier --payoff put:K=100 --event " + ev + " --mc seed=3,n=5000");
    ASSERT_EQ(r.exit_code, 0) << r.out;
    EXPECT_EQ(json::parse(r.out).at("result").at("event").at("stat"), "running_min");
    EXPECT_EQ(run_cli("barrier --payoff put:K=100 --event maxlt:B=130 --bs spot=100,vol=0.2").exit_code, 3);
}

TEST(Cli, PayoffJsonFile) {
    const auto spec = scratch("payoff.json", R"({"family":"butterfly","params":{"K1":90,"K2":100,"K3":110}})");
    const auto a = run_cli("price --payoff " + spec + " --bs spot=100,vol=0.2");
    const auto b = run_cli("price --payoff butterfly:K1=90,K2=100,K3=110 --bs spot=100,vol=0.2");
    ASSERT_EQ(a.exit_code, 0);
    EXPECT_EQ(json::parse(a.out).at("result"), json::parse(b.out).at("result"));
}

TEST(Cli, CsvFormat) {
    const auto r = run_cli("price --payoff call:K=100 --bs spot=100,vol=0.2 --format csv");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.out.rfind("key,value\n", 0), 0u);
    EXPECT_NE(r.out.find("\nvalue,"), std::string::npos);
}

} // namespace
