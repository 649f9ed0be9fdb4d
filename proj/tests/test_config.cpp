#include <gtest/gtest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "skewlin/commands.hpp"
#include "skewlin/config.hpp"
#include "skewlin/formal.hpp"

using namespace skewlin;

namespace {

const char* kKoenigs = R"(
field: real
system:
  base: {kind: finite, sigma: [0]}
  dimension: 1
  fibers:
    "0": {lambda: ["1/2"], terms: [[1, [2], "1"]]}
derivative:
  direction:
    "0": {lambda: ["0"], terms: [[1, [2], "1"]]}
)";

const char* kPeriodTwo = R"(
field: rational
system:
  base: {kind: finite, sigma: [1, 0], labels: [a, b]}
  dimension: 1
  fibers:
    a: {lambda: ["1/2"], terms: [[1, [2], "1"]]}
    b: {lambda: ["1/2"]}
params: {degree: 2}
)";

const char* kLinear = R"(
field: rational
system:
  base: {kind: full_shift, alphabet: 2}
  dimension: 2
  fibers:
    "0": {lambda: ["1/2", "1/3"]}
    "1": {lambda: ["2/5", "1/4"]}
params: {degree: 3}
)";

const char* kResonant = R"(
system:
  base: {kind: finite, sigma: [0]}
  dimension: 2
  fibers:
    "0": {lambda: ["0.25", "0.5"]}
)";

const char* kThirds = R"(
model:
  branches:
    - {constant: ["0"], linear: [["1/3"]], terms: [[1, [2], "1/20"]]}
    - {constant: ["2/3"], linear: [["1/3"]], terms: [[1, [2], "-1/30"]]}
  perturbation: {shift: "0.001"}
params: {depth: 4, points: 5}
)";

const char* kDiagonal = R"(
model:
  branches:
    - {constant: ["-0.44", "0"], linear: [["1/2", "0"], ["0", "1/3"]]}
    - {constant: ["0.44", "0"], linear: [["1/2", "0"], ["0", "1/3"]]}
  scale: "1/4"
params: {depth: 2, points: 4}
)";

class CommandTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("skewlin_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  int run(const std::string& command, RunConfig c, const std::string& sub = "") {
    c.out_dir = (dir_ / sub).string();
    std::ostringstream out;
    std::ostringstream err;
    last_err_ = "";
    const int code = run_command(command, c, out, err);
    last_out_ = out.str();
    last_err_ = err.str();
    return code;
  }

  std::string file(const std::string& name, const std::string& sub = "") const {
    std::ifstream f(dir_ / sub / name);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  nlohmann::json summary(const std::string& sub = "") const { return nlohmann::json::parse(file("summary.json", sub)); }

  static std::vector<std::vector<std::string>> rows(const std::string& csv) {
    std::vector<std::vector<std::string>> out;
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
      std::vector<std::string> row;
      std::istringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) row.push_back(cell);
      out.push_back(row);
    }
    return out;
  }

  std::filesystem::path dir_;
  std::string last_out_;
  std::string last_err_;
};

}  // namespace

TEST(ParseConfig, ErrorsCarryLineAndColumn) {
  try {
    parse_config("field: real\nsystem:\n  base: {kind: finite, sigma: [0]}\n  dimenson: 1\n", "run.yaml");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("run.yaml:4:3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("dimenson"), std::string::npos);
  }
}

TEST(ParseConfig, SyntaxErrorsCarryLineAndColumn) {
  try {
    parse_config("field: real\nsystem: [1, 2\n", "bad.yaml");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.yaml:"), std::string::npos) << e.what();
  }
}

TEST(ParseConfig, RejectsMalformedInputs) {
  EXPECT_THROW(parse_config("field: quaternion\n"), ConfigError);
  EXPECT_THROW(parse_config("params: {degree: many}\n"), ConfigError);
  // Missing fiber for window b.
  EXPECT_THROW(parse_config(R"(
system:
  base: {kind: finite, sigma: [1, 0], labels: [a, b]}
  dimension: 1
  fibers:
    a: {lambda: ["1/2"]}
)"),
               ConfigError);
  // Wrong lambda length.
  EXPECT_THROW(parse_config(R"(
system:
  base: {kind: finite, sigma: [0]}
  dimension: 2
  fibers:
    "0": {lambda: ["1/2"]}
)"),
               ConfigError);
  // Complex number in a real run.
  EXPECT_THROW(parse_config(R"(
system:
  base: {kind: finite, sigma: [0]}
  dimension: 1
  fibers:
    "0": {lambda: ["0.3+0.2i"]}
)"),
               ConfigError);
  EXPECT_THROW(parse_config("model: {branches: [{constant: [\"0\"], linear: [[\"3\"]]}]}\n"), InvalidArgument);
}

TEST(ParseConfig, NumbersAsRationalsAndComplex) {
  EXPECT_EQ(parse_real("1/3"), 1.0 / 3.0);
  EXPECT_EQ(parse_real("-0.25"), -0.25);
  EXPECT_EQ(parse_complex("0.3+0.2i"), std::complex<double>(0.3, 0.2));
  EXPECT_EQ(parse_complex("-1/2i"), std::complex<double>(0.0, -0.5));
  EXPECT_EQ(parse_complex("2-i"), std::complex<double>(2.0, -1.0));
  EXPECT_EQ(parse_scalar<mpq_class>("6/4"), mpq_class(3, 2));
  EXPECT_THROW(parse_scalar<mpq_class>("1+i"), InvalidArgument);
  EXPECT_THROW(parse_real("1/0"), InvalidArgument);
  EXPECT_THROW(parse_real("0x1p3"), InvalidArgument);
}

TEST(ParseConfig, BuildsTheSystem) {
  const auto c = parse_config(kPeriodTwo);
  ASSERT_TRUE(c.system);
  const auto base = build_base(c.system->base);
  const auto sys = build_system<mpq_class>(*c.system, base);
  const auto expected = fixtures::period_two<mpq_class>();
  ASSERT_EQ(sys.fibers().size(), 2u);
  for (std::size_t w = 0; w < 2; ++w)
    for (const auto& k : {MultiIndex{1}, MultiIndex{2}})
      EXPECT_EQ(sys.fibers()[w].monomial(0, k), expected.fibers()[w].monomial(0, k));
}

TEST(ParseConfig, RoundTrip) {
  for (const char* text : {kKoenigs, kPeriodTwo, kLinear, kResonant, kThirds, kDiagonal}) {
    const auto c = parse_config(text);
    EXPECT_EQ(parse_config(dump_config(c)), c) << dump_config(c);
  }
}

TEST(ParseConfig, ModelAndPerturbation) {
  const auto c = parse_config(kThirds);
  ASSERT_TRUE(c.model);
  const auto model = build_model(*c.model);
  EXPECT_EQ(model.size(), 2u);
  const auto perturbed = build_perturbation(*c.model, model);
  EXPECT_NEAR(perturbed[1].monomial(0, MultiIndex{0}), 2.0 / 3.0 + 1e-3, 1e-15);
}

TEST_F(CommandTest, KoenigsCoefficient) {
  ASSERT_EQ(run("linearize", parse_config(kKoenigs)), kExitSuccess) << last_err_;
  const auto table = rows(file("coefficients.csv"));
  ASSERT_EQ(table.size(), 2u);
  EXPECT_EQ(table[1][2], "2");
  EXPECT_EQ(std::stod(table[1][4]), 4.0);
  EXPECT_EQ(rows(file("defect.csv")).size(), 100u);
  const auto s = summary();
  EXPECT_LE(s["defect"]["sup_defect"].get<double>(), 1e-8);
  EXPECT_EQ(s["exit_code"], 0);
}

TEST_F(CommandTest, RationalPeriodTwoIsExact) {
  ASSERT_EQ(run("linearize", parse_config(kPeriodTwo)), kExitSuccess) << last_err_;
  const auto table = rows(file("coefficients.csv"));
  ASSERT_EQ(table.size(), 4u);
  EXPECT_EQ(table[1][4], "8/3");
  EXPECT_EQ(table[3][4], "4/3");
}

TEST_F(CommandTest, LinearSystemIsIdentity) {
  ASSERT_EQ(run("linearize", parse_config(kLinear)), kExitSuccess) << last_err_;
  for (const auto& row : rows(file("coefficients.csv"))) {
    const std::string unit = row[1] == "1" ? "1 0" : "0 1";
    EXPECT_EQ(row[4], row[2] == unit ? "1" : "0") << row[0] << " " << row[1] << " " << row[2];
  }
  EXPECT_EQ(summary()["defect"]["sup_defect"].get<double>(), 0.0);
}

TEST_F(CommandTest, ResonanceExitsTwoWithWitness) {
  EXPECT_EQ(run("check", parse_config(kResonant)), kExitHypothesis);
  const auto s = summary();
  EXPECT_EQ(s["hypotheses"]["h3"]["witness"]["i"], 1);
  EXPECT_EQ(s["hypotheses"]["h3"]["witness"]["k"], nlohmann::json::array({0, 2}));
  EXPECT_EQ(run("linearize", parse_config(kResonant), "lin"), kExitHypothesis);
  EXPECT_NE(last_err_.find("k=(0,2)"), std::string::npos);
}

TEST_F(CommandTest, DegreeBelowMinimalIsRejected) {
  auto c = parse_config(kKoenigs);
  EXPECT_EQ(run("check", c), kExitSuccess);
  c.params.max_degree = 1;
  EXPECT_EQ(run("check", c, "low"), kExitHypothesis);
}

TEST_F(CommandTest, MissingSectionIsUsageError) {
  EXPECT_EQ(run("cantor", parse_config(kKoenigs)), kExitUsage);
  EXPECT_EQ(run("linearize", parse_config(kThirds), "b"), kExitUsage);
  EXPECT_EQ(run("frobnicate", parse_config(kKoenigs), "c"), kExitUsage);
}

TEST_F(CommandTest, CantorOutputs) {
  ASSERT_EQ(run("cantor", parse_config(kThirds)), kExitSuccess) << last_err_;
  EXPECT_EQ(rows(file("attractor.csv")).size(), 16u);
  const auto s = summary();
  EXPECT_LE(s["charts"]["sup_defect"].get<double>(), 1e-7);
  EXPECT_EQ(rows(file("charts.csv")).size(), s["charts"]["samples"].get<std::size_t>());
}

TEST_F(CommandTest, DiagonalSplittingAxes) {
  ASSERT_EQ(run("cantor", parse_config(kDiagonal)), kExitSuccess) << last_err_;
  for (const auto& row : rows(file("splitting.csv"))) {
    const double u1 = std::abs(std::stod(row[2]));
    const double u2 = std::abs(std::stod(row[3]));
    if (row[1] == "1") {
      EXPECT_NEAR(u1, 1.0, 1e-12);
      EXPECT_NEAR(std::stod(row[4]), 2.0, 1e-12);
    } else {
      EXPECT_NEAR(u2, 1.0, 1e-12);
      EXPECT_NEAR(std::stod(row[4]), 3.0, 1e-12);
    }
  }
}

TEST_F(CommandTest, Continuation) {
  ASSERT_EQ(run("continue", parse_config(kThirds)), kExitSuccess) << last_err_;
  EXPECT_EQ(rows(file("continuation.csv")).size(), 16u);
  EXPECT_LE(summary()["residual"].get<double>(), 1e-9);
}

TEST_F(CommandTest, DerivativeMatchesFiniteDifferences) {
  ASSERT_EQ(run("derivative", parse_config(kKoenigs)), kExitSuccess) << last_err_;
  const auto table = rows(file("derivative.csv"));
  ASSERT_EQ(table.size(), 1u);
  EXPECT_NEAR(std::stod(table[0][3]), 4.0, 1e-12);
  EXPECT_NEAR(std::stod(table[0][7]), 8.0, 1e-11);
  EXPECT_NEAR(std::stod(table[0][8]), 8.0, 1e-5);
  EXPECT_LE(summary()["max_rel_error"].get<double>(), 1e-5);
}

TEST_F(CommandTest, DerivativeScalesWithAlpha) {
  auto c = parse_config(kKoenigs);
  c.params.alpha = 2.0;
  ASSERT_EQ(run("derivative", c), kExitSuccess);
  EXPECT_NEAR(std::stod(rows(file("derivative.csv"))[0][3]), 8.0, 1e-12);
  c.direction.clear();
  ASSERT_EQ(run("derivative", c, "zero"), kExitSuccess);
  EXPECT_EQ(std::stod(rows(file("derivative.csv", "zero"))[0][3]), 0.0);
}

TEST_F(CommandTest, OutputIsDeterministic) {
  const auto c = parse_config(kKoenigs);
  ASSERT_EQ(run("linearize", c, "one"), kExitSuccess);
  ASSERT_EQ(run("linearize", c, "two"), kExitSuccess);
  EXPECT_EQ(file("defect.csv", "one"), file("defect.csv", "two"));
  EXPECT_EQ(file("coefficients.csv", "one"), file("coefficients.csv", "two"));
}
