#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "yotta/eval.hpp"

using namespace yotta;

TEST_CASE("min-records threshold boundary") {
    EvalFunction f = builtin_eval("min-records:100");
    std::string rows;
    for (int i = 0; i < 99; ++i) rows += "r\n";
    Bytes b99 = to_bytes(rows);
    CHECK_FALSE(f.predicate(b99));
    rows += "r\n";
    Bytes b100 = to_bytes(rows);
    CHECK(f.predicate(b100));
}

TEST_CASE("csv schema check") {
    EvalFunction f = builtin_eval("schema:csv:f64x3");
    Bytes good = to_bytes("1,2,3\n4,5,6\n");
    CHECK(f.predicate(good));
    CHECK_FALSE(f.predicate(to_bytes("1,2\n")));
    CHECK_FALSE(f.predicate(to_bytes("1,2,x\n")));
    CHECK_FALSE(f.predicate(to_bytes("")));
    CHECK_FALSE(f.predicate(to_bytes("\x00\xff\x13garbage")));
}

TEST_CASE("column mean range equals an independent one-pass oracle") {
    std::mt19937_64 gen(31);
    EvalFunction f = builtin_eval("mean-in-range:col0:0.0:10.0");
    for (int trial = 0; trial < 50; ++trial) {
        std::string csv;
        double sum = 0;
        int rows = 1 + static_cast<int>(gen() % 40);
        for (int r = 0; r < rows; ++r) {
            int v = static_cast<int>(gen() % 25);  // sometimes pushes the mean above 10
            sum += v;
            csv += std::to_string(v) + ",0,0\n";
        }
        double mean = sum / rows;
        bool expected = mean >= 0.0 && mean <= 10.0;
        Bytes data = to_bytes(csv);
        CHECK(f.predicate(data) == expected);
    }
}

TEST_CASE("predicates are total on arbitrary bytes") {
    std::mt19937_64 gen(8);
    const char* ids[] = {"min-records:3", "schema:csv:f64x3", "mean-in-range:col1:-1:1"};
    for (const char* id : ids) {
        EvalFunction f = builtin_eval(id);
        for (int trial = 0; trial < 100; ++trial) {
            Bytes junk(gen() % 200);
            for (auto& b : junk) b = static_cast<std::uint8_t>(gen());
            CHECK_NOTHROW(f.predicate(junk));
        }
    }
}

TEST_CASE("unknown eval ids are rejected") {
    CHECK_THROWS_AS(builtin_eval("no-such-eval"), UnknownEval);
    CHECK_THROWS_AS(builtin_eval("min-records:abc"), UnknownEval);
    CHECK_THROWS_AS(builtin_eval("schema:csv:f64x0"), UnknownEval);
    CHECK(is_known_eval("min-records:1"));
    CHECK_FALSE(is_known_eval("bogus"));
}
