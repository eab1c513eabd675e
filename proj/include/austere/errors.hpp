#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace austere {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line), column_(column) {}
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class UnboundParameter : public Error {
public:
    explicit UnboundParameter(const std::string& name)
        : Error("unbound parameter {" + name + "}"), name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

class EvalError : public Error { using Error::Error; };
class SupportError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class DimensionMismatch : public DomainError { using DomainError::DomainError; };
class InternalError : public Error { using Error::Error; };
class StructureChangeError : public Error { using Error::Error; };
class UnknownScope : public Error { using Error::Error; };
class UnknownLabel : public Error { using Error::Error; };
class UnsupportedKernel : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };

}  // namespace austere
