#include "fractus/errors.hpp"
#include "fractus/expr.hpp"

#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

using namespace fractus;

TEST_CASE("parse examples") {
    const Expr sq = parse_expr("x1^2", 1);
    CHECK(sq.root().kind == ExprNode::Kind::binary);
    CHECK(sq.root().op == '^');
    CHECK(sq.root().value == 2.0);
    CHECK(sq.root().lhs->kind == ExprNode::Kind::variable);
    CHECK(sq.root().lhs->var == 1);
    CHECK(print_expr(sq) == "(x1 ^ 2)");

    const Expr e = parse_expr("sin(t)*x2 - 3", 2);
    CHECK(print_expr(e) == "((sin(t) * x2) - 3)");
    CHECK(e.uses_time());
    CHECK(e.uses_state());
    CHECK_FALSE(parse_expr("1 + 2*t", 2).uses_state());
    CHECK_FALSE(parse_expr("x1", 2).uses_time());

    // unary minus binds to the base, below '^'
    CHECK(print_expr(parse_expr("-x1^2", 1)) == "(-(x1) ^ 2)");
    CHECK(print_expr(parse_expr("x1/x2/t", 2)) == "((x1 / x2) / t)");
    CHECK(print_expr(parse_expr("1 - t - x1", 1)) == "((1 - t) - x1)");
}

TEST_CASE("parse errors carry offsets") {
    try {
        parse_expr("x3", 2);
        FAIL("expected an error");
    } catch (const UnknownIdentifierError& err) {
        CHECK(err.offset == 0);
    }
    try {
        parse_expr("t + foo(1)", 2);
        FAIL("expected an error");
    } catch (const UnknownIdentifierError& err) {
        CHECK(err.offset == 4);
    }
    try {
        parse_expr("(t", 1);
        FAIL("expected an error");
    } catch (const ParseError& err) {
        CHECK(err.offset == 2);
    }
    CHECK_THROWS_AS(parse_expr("", 1), ParseError);
    CHECK_THROWS_AS(parse_expr("t +", 1), ParseError);
    CHECK_THROWS_AS(parse_expr("2^-1", 1), ParseError);
    CHECK_THROWS_AS(parse_expr("t t", 1), ParseError);
    CHECK_THROWS_AS(parse_expr("x0", 1), UnknownIdentifierError);
    CHECK_THROWS_AS(parse_expr("x1", 0), UnknownIdentifierError);
}

TEST_CASE("evaluation") {
    CHECK(eval_expr(parse_expr("x1^2", 1), Vector{3.0}, 0.0) == 9.0);
    CHECK(eval_expr(parse_expr("t", 1), Vector{7.0}, 2.5) == 2.5);
    CHECK(eval_expr(parse_expr("sin(t)*x2 - 3", 2), Vector{0.0, 2.0}, 0.5) == 2 * std::sin(0.5) - 3);
    CHECK(eval_expr(parse_expr("sqrt(abs(x1)) + exp(0)", 1), Vector{-4.0}, 0.0) == 3.0);
    CHECK(eval_expr(parse_expr("-(x1)^2", 1), Vector{3.0}, 0.0) == 9.0);
    CHECK(eval_expr(parse_expr("x1^0.5", 1), Vector{4.0}, 0.0) == 2.0);
    CHECK_THROWS_AS(eval_expr(parse_expr("1/ (t-1)", 1), Vector{0.0}, 1.0), EvalError);
    CHECK_THROWS_AS(eval_expr(parse_expr("sqrt(x1)", 1), Vector{-1.0}, 0.0), EvalError);
    CHECK_THROWS_AS(eval_expr(parse_expr("exp(x1)", 1), Vector{1e6}, 0.0), EvalError);
    CHECK_THROWS_AS(eval_expr(parse_expr("x1^0.5", 1), Vector{-1.0}, 0.0), EvalError);
    CHECK_THROWS_AS(eval_expr(parse_expr("x2", 2), Vector{1.0}, 0.0), DimensionError);
}

TEST_CASE("print and parse round trip") {
    const std::vector<std::string> corpus = {
        "0",
        "1",
        "t",
        "x1",
        "x2",
        "x3",
        "-t",
        "--x1",
        "1.5e-7",
        "123456789.125",
        "0.1 + 0.2",
        "x1 + x2 + x3",
        "x1 - x2 - x3",
        "x1 * x2 / x3",
        "x1 / (x2 * x3)",
        "(x1 + x2) * (x1 - x2)",
        "x1^2 + x2^2",
        "x1^0.5",
        "(x1 + t)^3",
        "-x1^2",
        "-(x1^2)",
        "sin(t)",
        "cos(t) * x1",
        "exp(-t)",
        "sqrt(1 + t^2)",
        "abs(x1 - x2)",
        "sin(cos(exp(t)))",
        "sin(t)*x2 - 3",
        "1/(1 + x1^2)",
        "x1 * (1 - x2 / 10)",
        "-0.5 * x1 + 0.25 * x2",
        "2 * t - 3 * t^2 + 4 * t^3",
        "exp(-(t - 0.5)^2)",
        "abs(sin(x1)) + abs(cos(x2))",
        "x1^2 - x2^2 + 2 * x1 * x2",
        "sqrt(abs(x3))",
        "(((x1)))",
        "1e10 * t",
        "3.141592653589793 * x1",
        "0.30000000000000004",
        "x1 / 3 / 7",
        "x1 - (x2 - x3)",
        "-(-(-t))",
        "sin(x1)^2 + cos(x1)^2",
        "exp(x1) * exp(-x1)",
        "t * x1 * x2 * x3",
        "(t + 1)^0.25 - 1",
        "2.5e-3 * (x2 - x1)",
        "abs(t - 1) / (1 + abs(t))",
        "x3 - x2 * (x1 + sin(t) / 2)",
    };
    REQUIRE(corpus.size() == 50);
    for (const std::string& src : corpus) {
        CAPTURE(src);
        const Expr e = parse_expr(src, 3);
        const std::string text = print_expr(e);
        const Expr back = parse_expr(text, 3);
        CHECK(back == e);
        CHECK(print_expr(back) == text);
        const Vector x{0.3, -1.2, 2.0};
        CHECK(eval_expr(back, x, 0.7) == eval_expr(e, x, 0.7));
    }
}
