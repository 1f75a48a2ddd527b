#include <gtest/gtest.h>

#include "dzo/config.hpp"

namespace dzo {
namespace {

TEST(ConfigTest, ParsesSectionsAndValues) {
  const auto doc = ConfigDocument::Parse(R"(
# comment
[problem]
kind = "quadratic_pl"   # trailing comment
n = 4
sigma0 = 1e-2
flag = true
list = [1, 2, 3]
matrix = [[0, 1],
          [1, 0]]
)");
  const auto& s = doc.Section("problem");
  EXPECT_EQ(s.Get("kind").AsString("kind"), "quadratic_pl");
  EXPECT_EQ(s.Get("n").AsInt("n"), 4);
  EXPECT_DOUBLE_EQ(s.Get("sigma0").AsDouble("sigma0"), 0.01);
  EXPECT_TRUE(s.Get("flag").AsBool("flag"));
  EXPECT_EQ(s.Get("list").AsIntList("list"), (std::vector<long long>{1, 2, 3}));
  const auto m = s.Get("matrix").AsMatrix("matrix");
  EXPECT_EQ(m.rows(), 2);
  EXPECT_EQ(m(0, 1), 1.0);
  EXPECT_EQ(s.Get("matrix").line, 9);
}

TEST(ConfigTest, ErrorsCarryLineAndKey) {
  try {
    ConfigDocument::Parse("[a]\nx = 1\ny = nope\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3, key 'y'"), std::string::npos) << e.what();
  }
}

TEST(ConfigTest, RejectsDuplicatesAndStrayKeys) {
  EXPECT_THROW(ConfigDocument::Parse("[a]\nx = 1\nx = 2\n"), ConfigError);
  EXPECT_THROW(ConfigDocument::Parse("[a]\n[a]\n"), ConfigError);
  EXPECT_THROW(ConfigDocument::Parse("x = 1\n"), ConfigError);
  EXPECT_THROW(ConfigDocument::Parse("[a]\nx = [1, 2\n"), ConfigError);
}

TEST(ConfigTest, UnknownKeyIsNamed) {
  const auto doc = ConfigDocument::Parse("[schedule]\nkapa1 = 2\n");
  try {
    doc.Section("schedule").RequireKnownKeys({"kappa1"});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("kapa1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(ConfigTest, TypeMismatch) {
  const auto doc = ConfigDocument::Parse("[a]\nx = 1.5\ns = \"t\"\n");
  EXPECT_THROW(doc.Section("a").Get("x").AsInt("x"), ConfigError);
  EXPECT_THROW(doc.Section("a").Get("s").AsDouble("s"), ConfigError);
  EXPECT_THROW(doc.Section("b"), ConfigError);
}

TEST(ConfigTest, FormatNumberRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5}) {
    EXPECT_EQ(std::stod(FormatNumber(v)), v);
  }
}

}  // namespace
}  // namespace dzo
