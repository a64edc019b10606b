#include <regex>

#include "doctest.h"
#include "test_util.hpp"

namespace {

bool mentions(const std::string& text, const std::string& pattern) {
  return std::regex_search(text, std::regex(pattern));
}

}  // namespace

TEST_CASE("gateway sources never reach into the application layer") {
  const auto root = testutil::source_dir();
  for (const auto* file : {"src/gateway.cpp", "include/borealis/gateway.hpp"}) {
    CAPTURE(file);
    const auto text = testutil::slurp(root / file);
    REQUIRE_FALSE(text.empty());
    CHECK_FALSE(mentions(text, R"(#include\s+"borealis/(alp|backend|node)\.hpp")"));
    CHECK_FALSE(mentions(text, R"(\bdecode_frame\b)"));
    CHECK_FALSE(mentions(text, R"(\balp::)"));
  }
}

TEST_CASE("gateway library links only the core") {
  const auto cmake = testutil::slurp(testutil::source_dir() / "src" / "CMakeLists.txt");
  std::smatch m;
  REQUIRE(std::regex_search(cmake, m, std::regex(R"(target_link_libraries\(borealis_gateway([^)]*)\))")));
  CHECK(m[1].str().find("borealis_core") != std::string::npos);
  CHECK(m[1].str().find("alp") == std::string::npos);
}
