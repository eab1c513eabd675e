#include "austere/value.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <functional>

#include "austere/errors.hpp"
#include "austere/procedure.hpp"

namespace austere {

namespace {

std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::uint64_t fnv(std::uint64_t h, std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
        h ^= (x >> (8 * i)) & 0xff;
        h *= 0x100000001b3ULL;
    }
    return h;
}

[[noreturn]] void type_mismatch(const char* want, Value::Type got) {
    throw EvalError(std::string("expected ") + want + ", got " + type_name(got));
}

}  // namespace

RealVector Matrix::row(std::size_t r) const {
    return RealVector(data.begin() + static_cast<std::ptrdiff_t>(r * cols),
                      data.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols));
}

Value Value::boolean(bool b) {
    Value v;
    v.storage_ = b;
    return v;
}

Value Value::real(double x) {
    Value v;
    v.storage_ = x;
    return v;
}

Value Value::integer(std::int64_t i) {
    Value v;
    v.storage_ = i;
    return v;
}

Value Value::vector(RealVector xs) {
    Value v;
    v.storage_ = std::make_shared<const RealVector>(std::move(xs));
    return v;
}

Value Value::matrix(Matrix m) {
    Value v;
    v.storage_ = std::make_shared<const Matrix>(std::move(m));
    return v;
}

Value Value::procedure(ProcedurePtr p) {
    Value v;
    v.storage_ = std::move(p);
    return v;
}

Value Value::symbol(std::string name) {
    Value v;
    v.storage_ = std::move(name);
    return v;
}

bool Value::as_bool() const {
    if (const bool* b = std::get_if<bool>(&storage_)) return *b;
    type_mismatch("boolean", type());
}

double Value::as_real() const {
    if (const double* x = std::get_if<double>(&storage_)) return *x;
    if (const std::int64_t* i = std::get_if<std::int64_t>(&storage_)) return static_cast<double>(*i);
    type_mismatch("real", type());
}

std::int64_t Value::as_integer() const {
    if (const std::int64_t* i = std::get_if<std::int64_t>(&storage_)) return *i;
    if (const double* x = std::get_if<double>(&storage_)) {
        if (std::floor(*x) == *x) return static_cast<std::int64_t>(*x);
    }
    type_mismatch("integer", type());
}

const RealVector& Value::as_vector() const {
    if (const auto* p = std::get_if<std::shared_ptr<const RealVector>>(&storage_)) return **p;
    type_mismatch("vector", type());
}

const Matrix& Value::as_matrix() const {
    if (const auto* p = std::get_if<std::shared_ptr<const Matrix>>(&storage_)) return **p;
    type_mismatch("matrix", type());
}

const ProcedurePtr& Value::as_procedure() const {
    if (const auto* p = std::get_if<ProcedurePtr>(&storage_)) return *p;
    type_mismatch("procedure", type());
}

const std::string& Value::as_symbol() const {
    if (const auto* s = std::get_if<std::string>(&storage_)) return *s;
    type_mismatch("symbol", type());
}

bool operator==(const Value& a, const Value& b) {
    if (a.is_number() && b.is_number()) {
        if (a.type() == b.type()) return a.storage_ == b.storage_;
        return a.as_real() == b.as_real();
    }
    if (a.type() != b.type()) return false;
    switch (a.type()) {
        case Value::Type::Vector: return a.as_vector() == b.as_vector();
        case Value::Type::Matrix: return a.as_matrix() == b.as_matrix();
        default: return a.storage_ == b.storage_;
    }
}

std::size_t Value::hash() const {
    switch (type()) {
        case Type::None: return 0;
        case Type::Boolean: return as_bool() ? 1 : 2;
        case Type::Real:
        case Type::Integer: {
            const double x = as_real();
            return std::hash<double>{}(x == 0.0 ? 0.0 : x);
        }
        case Type::Symbol: return std::hash<std::string>{}(as_symbol());
        case Type::Procedure: return std::hash<const void*>{}(as_procedure().get());
        default: return static_cast<std::size_t>(bit_hash());
    }
}

std::uint64_t Value::bit_hash() const {
    std::uint64_t h = fnv(0xcbf29ce484222325ULL, storage_.index());
    switch (type()) {
        case Type::None: break;
        case Type::Boolean: h = fnv(h, as_bool()); break;
        case Type::Real: h = fnv(h, std::bit_cast<std::uint64_t>(std::get<double>(storage_))); break;
        case Type::Integer: h = fnv(h, static_cast<std::uint64_t>(as_integer())); break;
        case Type::Vector:
            for (double x : as_vector()) h = fnv(h, std::bit_cast<std::uint64_t>(x));
            break;
        case Type::Matrix:
            h = fnv(h, as_matrix().rows);
            for (double x : as_matrix().data) h = fnv(h, std::bit_cast<std::uint64_t>(x));
            break;
        case Type::Procedure:
            h = fnv(h, reinterpret_cast<std::uintptr_t>(as_procedure().get()));
            break;
        case Type::Symbol:
            for (char c : as_symbol()) h = fnv(h, static_cast<unsigned char>(c));
            break;
    }
    return h;
}

std::string Value::to_string() const {
    switch (type()) {
        case Type::None: return "nil";
        case Type::Boolean: return as_bool() ? "true" : "false";
        case Type::Real: return format_real(std::get<double>(storage_));
        case Type::Integer: return std::to_string(as_integer());
        case Type::Vector: {
            std::string s;
            for (double x : as_vector()) {
                if (!s.empty()) s += ';';
                s += format_real(x);
            }
            return s;
        }
        case Type::Matrix: {
            const Matrix& m = as_matrix();
            std::string s;
            for (std::size_t r = 0; r < m.rows; ++r) {
                if (r) s += '|';
                for (std::size_t c = 0; c < m.cols; ++c) {
                    if (c) s += ';';
                    s += format_real(m(r, c));
                }
            }
            return s;
        }
        case Type::Procedure: return "<procedure " + as_procedure()->name() + ">";
        case Type::Symbol: return "'" + as_symbol();
    }
    return "?";
}

const char* type_name(Value::Type t) {
    switch (t) {
        case Value::Type::None: return "nil";
        case Value::Type::Boolean: return "boolean";
        case Value::Type::Real: return "real";
        case Value::Type::Integer: return "integer";
        case Value::Type::Vector: return "vector";
        case Value::Type::Matrix: return "matrix";
        case Value::Type::Procedure: return "procedure";
        case Value::Type::Symbol: return "symbol";
    }
    return "?";
}

std::size_t ValueSequenceHash::operator()(const std::vector<Value>& values) const {
    std::size_t h = 0x84222325;
    for (const Value& v : values) h = h * 1000003u ^ v.hash();
    return h;
}

}  // namespace austere
