#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "austere/value.hpp"

namespace austere {

struct SourceLocation {
    std::size_t line = 0;
    std::size_t column = 0;
};

struct Expression;
using ExprPtr = std::shared_ptr<const Expression>;

struct ConstantExpr {
    Value value;
};

struct SymbolExpr {
    std::string name;
};

struct CombinationExpr {
    ExprPtr op;
    std::vector<ExprPtr> operands;
};

struct LambdaExpr {
    std::vector<std::string> params;
    ExprPtr body;
};

struct IfExpr {
    ExprPtr predicate;
    ExprPtr consequent;
    ExprPtr alternate;
};

// A {name} or {name[index]} slot filled from host bindings by desugar().
struct PlaceholderExpr {
    std::string name;
    std::optional<std::size_t> index;
};

struct Expression {
    std::variant<ConstantExpr, SymbolExpr, CombinationExpr, LambdaExpr, IfExpr, PlaceholderExpr> node;
    SourceLocation location;
};

ExprPtr make_constant(Value v);
ExprPtr make_symbol(std::string name);
ExprPtr make_combination(ExprPtr op, std::vector<ExprPtr> operands);

// Numeric field of an inference expression; may be a placeholder until desugared.
using Numeric = std::variant<double, PlaceholderExpr>;

enum class TargetKind { All, One, Label };

struct InferTarget {
    TargetKind kind = TargetKind::All;
    Numeric label = 0.0;
};

struct ProposalExpr {
    enum class Kind { Default, Prior, Drift };
    Kind kind = Kind::Default;
    Numeric sigma = 0.0;
};

struct InferExpression;

struct MHExpr {
    std::string scope;
    InferTarget target;
    ProposalExpr proposal;
    Numeric steps = 1.0;
};

struct SubsampledMHExpr {
    std::string scope;
    InferTarget target;
    Numeric batch = 1.0;
    Numeric epsilon = 0.0;
    ProposalExpr proposal;
    Numeric steps = 1.0;
};

struct CycleExpr {
    std::vector<InferExpression> kernels;
    Numeric repeats = 1.0;
};

// Kernels the grammar accepts but the runner does not implement.
struct UnsupportedExpr {
    std::string kernel;
    std::string text;
};

struct InferExpression {
    std::variant<MHExpr, SubsampledMHExpr, CycleExpr, UnsupportedExpr> node;
};

struct AssumeDirective {
    std::string name;
    ExprPtr expr;
};

struct ObserveDirective {
    ExprPtr expr;
    ExprPtr value;  // literal constant or placeholder
};

struct PredictDirective {
    ExprPtr expr;
    std::string label;
};

struct InferDirective {
    InferExpression expr;
};

struct Directive {
    std::variant<AssumeDirective, ObserveDirective, PredictDirective, InferDirective> node;
    SourceLocation location;
};

using Program = std::vector<Directive>;

std::vector<Directive> parse_program(std::string_view text);

// A host binding is either a single value or an indexable sequence.
using Binding = std::variant<Value, std::vector<Value>>;
using Bindings = std::map<std::string, Binding>;

// Substitute every placeholder.  Indices are 1-based.
std::vector<Directive> desugar(const std::vector<Directive>& program, const Bindings& bindings);
ExprPtr desugar(const ExprPtr& expr, const Bindings& bindings);

double numeric_value(const Numeric& n);

std::string to_string(const Expression& e);
std::string to_string(const InferExpression& e);
std::string to_string(const Directive& d);
std::string to_string(const std::vector<Directive>& program);

bool is_reserved_symbol(std::string_view name);

}  // namespace austere
