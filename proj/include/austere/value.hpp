#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace austere {

struct Procedure;
using ProcedurePtr = std::shared_ptr<const Procedure>;
using RealVector = std::vector<double>;

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major

    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    RealVector row(std::size_t r) const;
    bool operator==(const Matrix&) const = default;
};

// Runtime value held by a trace node.  Vectors and matrices are shared
// immutably so copying a Value never copies payload.
class Value {
public:
    enum class Type { None, Boolean, Real, Integer, Vector, Matrix, Procedure, Symbol };

    Value() = default;
    static Value boolean(bool b);
    static Value real(double x);
    static Value integer(std::int64_t i);
    static Value vector(RealVector v);
    static Value matrix(Matrix m);
    static Value procedure(ProcedurePtr p);
    static Value symbol(std::string name);

    Type type() const { return static_cast<Type>(storage_.index()); }
    bool is_none() const { return type() == Type::None; }
    bool is_boolean() const { return type() == Type::Boolean; }
    bool is_number() const { return type() == Type::Real || type() == Type::Integer; }
    bool is_vector() const { return type() == Type::Vector; }
    bool is_matrix() const { return type() == Type::Matrix; }
    bool is_procedure() const { return type() == Type::Procedure; }
    bool is_symbol() const { return type() == Type::Symbol; }

    bool as_bool() const;
    double as_real() const;
    std::int64_t as_integer() const;
    const RealVector& as_vector() const;
    const Matrix& as_matrix() const;
    const ProcedurePtr& as_procedure() const;
    const std::string& as_symbol() const;

    // Exact structural equality; reals compare by value, procedures by identity.
    friend bool operator==(const Value& a, const Value& b);
    std::size_t hash() const;
    // Hash of the exact bit pattern, used for trace fingerprints.
    std::uint64_t bit_hash() const;
    std::string to_string() const;

private:
    using Storage = std::variant<std::monostate, bool, double, std::int64_t,
                                 std::shared_ptr<const RealVector>, std::shared_ptr<const Matrix>,
                                 ProcedurePtr, std::string>;
    Storage storage_;
};

const char* type_name(Value::Type t);

struct ValueSequenceHash {
    std::size_t operator()(const std::vector<Value>& values) const;
};

}  // namespace austere
