#include "diolab/config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace diolab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / "diolab_config_test";
    fs::create_directories(dir);
    return dir / name;
}

void write(const fs::path& p, const std::string& s) {
    std::ofstream(p) << s;
}

}  // namespace

TEST(Config, PowerLawToml) {
    auto p = parse_problem_toml(R"(
kind = "linear_forms"
n = 2
m = 1
b = [0.25]
[psi]
law = "power"
tau = 3.0
support = "Z1"
)");
    auto& lf = std::get<LinearFormsProblem>(p);
    EXPECT_EQ(lf.n, 2);
    EXPECT_EQ(lf.b, std::vector<double>{0.25});
    EXPECT_EQ(lf.psi.tau, 3.0);
    EXPECT_EQ(lf.psi.support.zi, std::set<int>{1});
}

TEST(Config, DefaultsAndJson) {
    auto p = parse_problem_json(R"({"n": 1, "m": 2, "psi": {"law": "power", "tau": 2}})");
    auto& lf = std::get<LinearFormsProblem>(p);
    EXPECT_EQ(lf.b, (std::vector<double>{0.0, 0.0}));
    EXPECT_TRUE(lf.psi.support.is_all());
}

TEST(Config, Squares) {
    auto p = parse_problem_toml("kind = \"squares\"\n[psi]\nlaw = \"power\"\ntau = 3\n");
    EXPECT_EQ(std::get<SquaresProblem>(p).tau, 3.0);
}

TEST(Config, TableFromCsv) {
    auto csv = scratch("psi.csv");
    write(csv, "# comment\na1,a2,psi\n1,0,0.5\n2,1,0.1\n");
    auto toml = scratch("p.toml");
    write(toml, "n = 2\nm = 1\n[psi]\nlaw = \"table\"\ntable_path = \"psi.csv\"\n");
    auto p = load_problem(toml.string());
    auto& lf = std::get<LinearFormsProblem>(p);
    EXPECT_EQ(lf.psi.table.size(), 2u);
    EXPECT_EQ(psi_value(lf, {2, 1}), 0.1);
}

TEST(Config, ErrorsNameTheProblem) {
    try {
        parse_problem_toml("n = 2\nm = \n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line"), std::string::npos) << e.what();
    }
    try {
        parse_problem_toml("n = \"two\"\nm = 1\n[psi]\nlaw = \"power\"\ntau = 1\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("'n'"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_problem_toml("n = 2\nm = 1\n[psi]\nlaw = \"magic\"\n"), ConfigError);
    EXPECT_THROW(load_problem(scratch("missing.toml").string()), ConfigError);
}

TEST(Config, HashIsStableAndSensitive) {
    auto a = problem_to_json(parse_problem_json(R"({"n": 2, "m": 1, "psi": {"law": "power", "tau": 3}})"));
    auto b = problem_to_json(parse_problem_toml("n = 2\nm = 1\n[psi]\nlaw = \"power\"\ntau = 3.0\n"));
    auto c = problem_to_json(parse_problem_toml("n = 2\nm = 1\n[psi]\nlaw = \"power\"\ntau = 3.5\n"));
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_NE(config_hash(a), config_hash(c));
    EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Config, Windows) {
    auto d = parse_windows("dyadic:1..3");
    ASSERT_EQ(d.size(), 3u);
    EXPECT_EQ(d[2].lo, 8);
    EXPECT_EQ(d[2].hi, 15);
    auto c = parse_windows("cumulative:4..5");
    EXPECT_EQ(c[0].lo, 1);
    EXPECT_EQ(c[1].hi, 32);
    EXPECT_THROW(parse_windows("geometric:1..3"), ConfigError);
    EXPECT_EQ(parse_int_range("6..9"), (std::vector<int>{6, 7, 8, 9}));
    EXPECT_THROW(parse_int_range("9..6"), ConfigError);
}

TEST(Config, CsvHeaderAndAtomicWrite) {
    EXPECT_EQ(csv_header({"0123456789abcdef", 7, "1.0"}), "# diolab 1.0 config=0123456789abcdef seed=7\n");
    auto out = scratch("out.txt");
    write_atomic(out.string(), "hello\n");
    std::ifstream in(out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "hello");
    EXPECT_FALSE(fs::exists(out.string() + ".tmp"));
}
