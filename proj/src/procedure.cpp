#include "austere/procedure.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>

#include "austere/errors.hpp"

namespace austere {

namespace {

constexpr std::size_t kVariadic = SIZE_MAX;

Value add(std::span<const Value> a) {
    double s = 0.0;
    for (const Value& v : a) s += v.as_real();
    return Value::real(s);
}

Value subtract(std::span<const Value> a) {
    if (a.size() == 1) return Value::real(-a[0].as_real());
    double s = a[0].as_real();
    for (std::size_t i = 1; i < a.size(); ++i) s -= a[i].as_real();
    return Value::real(s);
}

Value multiply(std::span<const Value> a) {
    double p = 1.0;
    for (const Value& v : a) p *= v.as_real();
    return Value::real(p);
}

Value divide(std::span<const Value> a) {
    const double d = a[1].as_real();
    if (d == 0.0) throw DomainError("division by zero");
    return Value::real(a[0].as_real() / d);
}

Value less(std::span<const Value> a) { return Value::boolean(a[0].as_real() < a[1].as_real()); }
Value less_equal(std::span<const Value> a) { return Value::boolean(a[0].as_real() <= a[1].as_real()); }
Value greater(std::span<const Value> a) { return Value::boolean(a[0].as_real() > a[1].as_real()); }
Value greater_equal(std::span<const Value> a) { return Value::boolean(a[0].as_real() >= a[1].as_real()); }
Value equal(std::span<const Value> a) { return Value::boolean(a[0] == a[1]); }
Value negate(std::span<const Value> a) { return Value::boolean(!a[0].as_bool()); }

Value conjunction(std::span<const Value> a) {
    bool r = true;
    for (const Value& v : a) r = r && v.as_bool();
    return Value::boolean(r);
}

Value disjunction(std::span<const Value> a) {
    bool r = false;
    for (const Value& v : a) r = r || v.as_bool();
    return Value::boolean(r);
}

Value exponential(std::span<const Value> a) { return Value::real(std::exp(a[0].as_real())); }

Value logarithm(std::span<const Value> a) {
    const double x = a[0].as_real();
    if (x < 0.0) throw DomainError("log of a negative number");
    return Value::real(std::log(x));
}

Value square_root(std::span<const Value> a) {
    const double x = a[0].as_real();
    if (x < 0.0) throw DomainError("sqrt of a negative number");
    return Value::real(std::sqrt(x));
}

Value power(std::span<const Value> a) { return Value::real(std::pow(a[0].as_real(), a[1].as_real())); }
Value absolute(std::span<const Value> a) { return Value::real(std::fabs(a[0].as_real())); }

Value logistic_of_dot(std::span<const Value> a) {
    return Value::real(linear_logistic(a[0].as_vector(), a[1].as_vector()));
}

Value make_vector(std::span<const Value> a) {
    RealVector v;
    v.reserve(a.size());
    for (const Value& x : a) v.push_back(x.as_real());
    return Value::vector(std::move(v));
}

Value vector_ref(std::span<const Value> a) {
    const RealVector& v = a[0].as_vector();
    const std::int64_t i = a[1].as_integer();
    if (i < 0 || static_cast<std::size_t>(i) >= v.size()) throw DomainError("vector index out of range");
    return Value::real(v[static_cast<std::size_t>(i)]);
}

const std::array<DeterministicPrimitive, 20> kPrimitives{{
    {"+", 0, kVariadic, add},
    {"-", 1, kVariadic, subtract},
    {"*", 0, kVariadic, multiply},
    {"/", 2, 2, divide},
    {"<", 2, 2, less},
    {"<=", 2, 2, less_equal},
    {">", 2, 2, greater},
    {">=", 2, 2, greater_equal},
    {"=", 2, 2, equal},
    {"not", 1, 1, negate},
    {"and", 0, kVariadic, conjunction},
    {"or", 0, kVariadic, disjunction},
    {"exp", 1, 1, exponential},
    {"log", 1, 1, logarithm},
    {"sqrt", 1, 1, square_root},
    {"pow", 2, 2, power},
    {"abs", 1, 1, absolute},
    {"linear_logistic", 2, 2, logistic_of_dot},
    {"vector", 0, kVariadic, make_vector},
    {"vector_ref", 2, 2, vector_ref},
}};

}  // namespace

const DeterministicPrimitive* find_deterministic(std::string_view name) {
    for (const auto& p : kPrimitives)
        if (p.name == name) return &p;
    return nullptr;
}

std::string Procedure::name() const {
    struct Visitor {
        std::string operator()(const DeterministicPrimitive* p) const { return std::string(p->name); }
        std::string operator()(const PrimitiveDistribution* d) const { return std::string(d->name); }
        std::string operator()(const CompoundProcedure&) const { return "lambda"; }
        std::string operator()(const MemoizedProcedure& m) const { return "mem " + m.inner->name(); }
    };
    return std::visit(Visitor{}, impl);
}

ProcedurePtr builtin_procedure(std::string_view name) {
    static std::mutex mutex;
    static std::map<std::string, ProcedurePtr, std::less<>> cache;
    std::lock_guard lock(mutex);
    if (auto it = cache.find(name); it != cache.end()) return it->second;
    ProcedurePtr p;
    if (const auto* d = find_deterministic(name)) {
        p = std::make_shared<const Procedure>(Procedure{d});
    } else if (const auto* s = find_distribution(name)) {
        p = std::make_shared<const Procedure>(Procedure{s});
    } else {
        return nullptr;
    }
    cache.emplace(std::string(name), p);
    return p;
}

}  // namespace austere
