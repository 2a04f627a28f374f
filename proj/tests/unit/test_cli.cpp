#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

namespace {

struct CliRun {
    int code;
    std::string out, err;
};

CliRun call(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = smms::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

nlohmann::json parse(const CliRun& r) { return nlohmann::json::parse(r.out); }

}  // namespace

TEST(Cli, VerifySpherePasses) {
    const CliRun r = call({"verify", "--family", "weighted-sphere", "--n", "3", "--m", "2", "--lambda", "0.5", "--A",
                        "2", "--B", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = parse(r);
    EXPECT_NEAR(j["kappa"].get<double>(), 2.0, 1e-6);
    EXPECT_NEAR(j["lambda_fit"].get<double>(), 0.5, 1e-6);
    EXPECT_EQ(j["branch"], "einstein");
    EXPECT_EQ(j["global_case"], "sphere");
    EXPECT_LE(j["residuals"]["einstein"].get<double>(), 1e-6);
}

TEST(Cli, KeyOrderIsFixed) {
    const auto j = nlohmann::ordered_json::parse(call({"verify", "--family", "weighted-euclidean"}).out);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    const std::vector<std::string> want{"family",   "params", "lambda_fit",  "kappa",         "kappa_spread",
                                        "residuals", "branch", "global_case", "golden_checks", "pass"};
    EXPECT_EQ(keys, want);
}

TEST(Cli, CounterexampleFails) {
    const CliRun r = call({"verify", "--family", "counterexample-3-1", "--m", "1"});
    EXPECT_EQ(r.code, 2);
    const auto j = parse(r);
    EXPECT_GT(j["residuals"]["harmonic"].get<double>(), 1.0);
    EXPECT_TRUE(j["residuals"]["obata"].is_null());
}

TEST(Cli, ClassifyNonEinsteinExample) {
    const CliRun r = call({"classify", "--family", "example-1-2", "--n", "4", "--A", "1", "--B", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = parse(r);
    EXPECT_EQ(j["branch"], "non-einstein-example-1-2");
    EXPECT_EQ(j["global_case"], "incomplete: ricci-blowup");
    EXPECT_NEAR(j["evidence"]["fitted"]["A"].get<double>(), 1.0, 1e-9);
    EXPECT_NEAR(j["evidence"]["blowup"]["left"]["rate_exponent"].get<double>(), 2.0, 0.02);
}

TEST(Cli, OutputIsDeterministic) {
    const std::vector<std::string> args{"verify", "--family", "thm-4-1-negative", "--samples", "7"};
    EXPECT_EQ(call(args).out, call(args).out);
}

TEST(Cli, ObataWritesTrajectory) {
    const auto path = std::filesystem::temp_directory_path() / "smms_obata_test.csv";
    const CliRun r = call({"obata", "--lambda", "0.5", "--kappa", "2", "--xi", "3", "--n", "3", "--emit-csv",
                        path.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(parse(r)["T"].get<double>(), std::numbers::pi, 1e-8);
    std::ifstream f(path);
    std::string header, first;
    std::getline(f, header);
    std::getline(f, first);
    EXPECT_EQ(header, "t,u,uprime,warp");
    EXPECT_EQ(first.substr(0, 4), "0,3,");
    std::filesystem::remove(path);
}

TEST(Cli, CsvAndTextOutputs) {
    const CliRun csv = call({"verify", "--family", "weighted-hyperbolic", "--samples", "5", "--output", "csv"});
    EXPECT_EQ(csv.out.substr(0, csv.out.find('\n')), "t,einstein,harmonic,cotton,kappa,J,Y,f,phi,v");
    EXPECT_EQ(std::count(csv.out.begin(), csv.out.end(), '\n'), 6);
    const CliRun text = call({"verify", "--family", "weighted-hyperbolic", "--output", "text"});
    EXPECT_NE(text.out.find("global_case: \"hyperbolic\""), std::string::npos);
}

TEST(Cli, OracleCompare) {
    const CliRun r = call({"oracle-compare", "--family", "thm-4-1-positive"});
    EXPECT_EQ(r.code, 0);
    EXPECT_LE(parse(r)["max_rel_error"].get<double>(), 1e-5);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(call({}).code, 1);
    EXPECT_EQ(call({"verify"}).code, 1);
    EXPECT_EQ(call({"verify", "--family", "no-such-family"}).code, 1);
    EXPECT_EQ(call({"verify", "--family", "weighted-sphere", "--A", "0"}).code, 1);
    EXPECT_EQ(call({"verify", "--family", "weighted-sphere", "--output", "xml"}).code, 1);
    const CliRun r = call({"obata", "--lambda", "0.5", "--kappa", "1", "--xi", "1"});
    EXPECT_EQ(r.code, 1);
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, ListsEveryFamily) {
    const CliRun r = call({"list", "--output", "text"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 11);
}
