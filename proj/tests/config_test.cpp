#include <gtest/gtest.h>

#include "qgc/config.hpp"
#include "qgc/error.hpp"

namespace qgc {
namespace {

TEST(FlatConfig, ParsesKeysCommentsAndEscapes) {
  const auto cfg = FlatConfig::parse(
      "# provider settings\n"
      "provider = recorded:/tmp/att\n"
      "  ratio=4 \n"
      "\n"
      "template = SYSTEM: {s}\\nUSER: {c} {q}\\nA:\n"
      "path = C:\\\\x\\tY\n"
      "empty =\n");
  EXPECT_EQ(cfg.get("provider").value(), "recorded:/tmp/att");
  EXPECT_EQ(cfg.get_double("ratio").value(), 4.0);
  EXPECT_EQ(cfg.get_uint("ratio").value(), 4u);
  EXPECT_EQ(cfg.get("template").value(), "SYSTEM: {s}\nUSER: {c} {q}\nA:");
  EXPECT_EQ(cfg.get("path").value(), "C:\\x\tY");
  EXPECT_EQ(cfg.get("empty").value(), "");
  EXPECT_FALSE(cfg.get("missing").has_value());
  EXPECT_FALSE(cfg.get_double("missing").has_value());
}

TEST(FlatConfig, LaterKeysOverrideEarlier) {
  EXPECT_EQ(FlatConfig::parse("a = 1\na = 2").get("a").value(), "2");
}

TEST(FlatConfig, RejectsMalformedInput) {
  for (const char* bad : {"novalue", "= 3", "a = \\q", "a = x\\"}) {
    try {
      FlatConfig::parse(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Config);
      EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos) << e.what();
    }
  }
  const auto cfg = FlatConfig::parse("n = -3\nx = 1.5abc\nk = 1");
  EXPECT_THROW(cfg.get_uint("n"), Error);
  EXPECT_THROW(cfg.get_double("x"), Error);
  EXPECT_NO_THROW(cfg.require_known({"n", "x", "k"}));
  EXPECT_THROW(cfg.require_known({"n", "x"}), Error);
  EXPECT_THROW(FlatConfig::load("/nonexistent/qgc.conf"), Error);
}

}  // namespace
}  // namespace qgc
