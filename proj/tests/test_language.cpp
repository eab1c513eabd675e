#include <doctest.h>

#include "austere/errors.hpp"
#include "austere/language.hpp"

using namespace austere;

namespace {

const Expression& expr_of(const Directive& d) {
    if (const auto* a = std::get_if<AssumeDirective>(&d.node)) return *a->expr;
    if (const auto* o = std::get_if<ObserveDirective>(&d.node)) return *o->expr;
    return *std::get<PredictDirective>(d.node).expr;
}

}  // namespace

TEST_CASE("assume parses into a named combination") {
    const auto program = parse_program("[assume x (normal 0 1)]");
    REQUIRE(program.size() == 1);
    const auto& a = std::get<AssumeDirective>(program[0].node);
    CHECK(a.name == "x");
    const auto& c = std::get<CombinationExpr>(a.expr->node);
    CHECK(std::get<SymbolExpr>(c.op->node).name == "normal");
    REQUIRE(c.operands.size() == 2);
    CHECK(std::get<ConstantExpr>(c.operands[0]->node).value == Value::real(0.0));
}

TEST_CASE("directives keep source order and comments are skipped") {
    const auto program = parse_program(
        "; leading comment\n"
        "[assume a (bernoulli 0.3)]  # trailing\n"
        "[observe (normal a 1) 2.5]\n"
        "[predict a]\n"
        "[infer (mh default one 10)]\n");
    REQUIRE(program.size() == 4);
    CHECK(std::holds_alternative<AssumeDirective>(program[0].node));
    CHECK(std::holds_alternative<ObserveDirective>(program[1].node));
    CHECK(std::holds_alternative<PredictDirective>(program[2].node));
    CHECK(std::holds_alternative<InferDirective>(program[3].node));
    CHECK(std::get<PredictDirective>(program[2].node).label == "a");
    CHECK(program[1].location.line == 3);
}

TEST_CASE("special forms parse") {
    const auto program = parse_program(
        "[assume f (lambda (x y) (if (< x y) x y))]\n"
        "[assume g (mem (lambda (t) (scope_include 'h t (normal 0 1))))]\n");
    const auto& f = std::get<LambdaExpr>(expr_of(program[0]).node);
    CHECK(f.params == std::vector<std::string>{"x", "y"});
    CHECK(std::holds_alternative<IfExpr>(f.body->node));
    const auto& g = std::get<CombinationExpr>(expr_of(program[1]).node);
    const auto& inner = std::get<LambdaExpr>(g.operands[0]->node);
    const auto& si = std::get<CombinationExpr>(inner.body->node);
    CHECK(std::get<ConstantExpr>(si.operands[0]->node).value == Value::symbol("h"));
}

TEST_CASE("inference expressions") {
    SUBCASE("mh with drift") {
        const auto p = parse_program("[infer (mh w all 'drift 0.5 20)]");
        const auto& mh = std::get<MHExpr>(std::get<InferDirective>(p[0].node).expr.node);
        CHECK(mh.scope == "w");
        CHECK(mh.target.kind == TargetKind::All);
        CHECK(mh.proposal.kind == ProposalExpr::Kind::Drift);
        CHECK(numeric_value(mh.proposal.sigma) == 0.5);
        CHECK(numeric_value(mh.steps) == 20.0);
    }
    SUBCASE("subsampled with placeholders") {
        const auto p = parse_program("[infer (subsampled_mh w all {nbatch} {eps} 'drift {sig} {T})]");
        const auto& sm = std::get<SubsampledMHExpr>(std::get<InferDirective>(p[0].node).expr.node);
        CHECK(std::holds_alternative<PlaceholderExpr>(sm.batch));
        const auto d = desugar(p, {{"nbatch", Value::real(100)},
                                   {"eps", Value::real(0.01)},
                                   {"sig", Value::real(0.1)},
                                   {"T", Value::real(5)}});
        const auto& ds = std::get<SubsampledMHExpr>(std::get<InferDirective>(d[0].node).expr.node);
        CHECK(numeric_value(ds.batch) == 100.0);
        CHECK(numeric_value(ds.epsilon) == 0.01);
        CHECK(numeric_value(ds.proposal.sigma) == 0.1);
        CHECK(numeric_value(ds.steps) == 5.0);
    }
    SUBCASE("numeric label and cycle") {
        const auto p = parse_program("[infer (cycle ((mh sig 0 1) (subsampled_mh phi 0 25 0.001 'drift 0.1 1)) 3)]");
        const auto& cyc = std::get<CycleExpr>(std::get<InferDirective>(p[0].node).expr.node);
        REQUIRE(cyc.kernels.size() == 2);
        CHECK(numeric_value(cyc.repeats) == 3.0);
        const auto& first = std::get<MHExpr>(cyc.kernels[0].node);
        CHECK(first.target.kind == TargetKind::Label);
        CHECK(numeric_value(first.target.label) == 0.0);
    }
    SUBCASE("unsupported kernels parse") {
        const auto p = parse_program("[infer (pgibbs h (ordered_range 1 5) 10 1)]");
        CHECK(std::holds_alternative<UnsupportedExpr>(std::get<InferDirective>(p[0].node).expr.node));
    }
}

TEST_CASE("parse errors carry a location") {
    CHECK_THROWS_AS(parse_program("[assume x (normal 0 1]"), ParseError);
    CHECK_THROWS_AS(parse_program("[assume x (normal 0 1)"), ParseError);
    CHECK_THROWS_AS(parse_program("(assume x 1)"), ParseError);
    CHECK_THROWS_AS(parse_program("[frobnicate x]"), ParseError);
    CHECK_THROWS_AS(parse_program("[observe (normal 0 1) (normal 0 1)]"), ParseError);
    try {
        parse_program("[assume x 1]\n  [assume y (normal 0 1]");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("printing round-trips") {
    const char* text =
        "[assume w (scope_include 'w 0 (multivariate_normal {mu} {Sig}))]\n"
        "[assume y_x (lambda (x) (bernoulli (linear_logistic w x)))]\n"
        "[observe (y_x {X[1]}) {Y[1]}]\n"
        "[assume h (mem (lambda (t) (scope_include 'h t (if (<= t 0) 0 (normal (* 0.95 (h (- t 1))) 0.1)))))]\n"
        "[predict (h 3)]\n"
        "[infer (subsampled_mh w all 100 0.01 'drift 0.1 300)]\n"
        "[infer (cycle ((mh h all 1) (mh w one 'prior 2)) 4)]\n";
    const std::string once = to_string(parse_program(text));
    const std::string twice = to_string(parse_program(once));
    CHECK(once == twice);
    CHECK(once.find("{X[1]}") != std::string::npos);
}

TEST_CASE("desugar substitutes values and indexed sequences") {
    const auto p = parse_program("[assume w (multivariate_normal {mu} {Sig})]\n[observe (y_x {X[2]}) {Y[2]}]");
    Matrix sig{2, 2, {1, 0, 0, 1}};
    Matrix xs{3, 2, {1, 2, 3, 4, 5, 6}};
    Bindings b{{"mu", Value::vector({0, 0})},
               {"Sig", Value::matrix(sig)},
               {"X", Value::matrix(xs)},
               {"Y", std::vector<Value>{Value::boolean(true), Value::boolean(false), Value::boolean(true)}}};
    const auto d = desugar(p, b);
    const auto& obs = std::get<ObserveDirective>(d[1].node);
    const auto& call = std::get<CombinationExpr>(obs.expr->node);
    CHECK(std::get<ConstantExpr>(call.operands[0]->node).value == Value::vector({3, 4}));
    CHECK(std::get<ConstantExpr>(obs.value->node).value == Value::boolean(false));
    const auto& w = std::get<CombinationExpr>(std::get<AssumeDirective>(d[0].node).expr->node);
    CHECK(std::get<ConstantExpr>(w.operands[1]->node).value == Value::matrix(sig));
}

TEST_CASE("desugar rejects missing and out-of-range parameters") {
    const auto p = parse_program("[observe (normal 0 1) {Y[4]}]");
    CHECK_THROWS_AS(desugar(p, {}), UnboundParameter);
    CHECK_THROWS_AS(desugar(p, {{"Y", std::vector<Value>{Value::real(1)}}}), UnboundParameter);
    CHECK_THROWS_AS(desugar(parse_program("[observe (normal 0 1) {Y[0]}]"), {{"Y", std::vector<Value>{Value::real(1)}}}),
                    UnboundParameter);
    CHECK_THROWS_AS(desugar(parse_program("[observe (normal 0 1) {Y}]"), {{"Y", std::vector<Value>{Value::real(1)}}}),
                    ConfigError);
    try {
        desugar(parse_program("[assume x {missing}]"), {});
    } catch (const UnboundParameter& e) {
        CHECK(e.name() == "missing");
    }
}

TEST_CASE("parsing then desugaring leaves structure untouched") {
    const auto p = parse_program("[assume x (normal {m} 1)]");
    const auto d = desugar(p, {{"m", Value::real(2.5)}});
    CHECK(to_string(d) == "[assume x (normal 2.5 1)]\n");
}
