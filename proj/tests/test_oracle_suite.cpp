#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "thinfb/oracle_suite.hpp"

using namespace thinfb;

TEST_CASE("the oracle suite passes end to end") {
    std::ostringstream out;
    int failures = run_oracle_suite(out);
    INFO(out.str());
    CHECK(failures == 0);
    // One line per check plus the summary.
    std::size_t lines = 0;
    std::string s = out.str();
    for (char c : s)
        if (c == '\n') ++lines;
    CHECK(lines == oracle_suite().size() + 1);
}
