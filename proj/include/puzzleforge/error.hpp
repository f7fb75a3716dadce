#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace puzzleforge {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class DomainTooLarge : public Error {
public:
    using Error::Error;
};

/// Half-open byte range into DSL source text.
struct SourceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;

    friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

/// Raised by the DSL front end. `kind()` distinguishes syntax, name, type and arity problems.
class DslError : public Error {
public:
    enum class Kind { Syntax, UnknownIdentifier, Type, Arity };

    DslError(Kind kind, SourceSpan span, const std::string& message)
        : Error(kind_name(kind) + " at " + std::to_string(span.begin) + ": " + message),
          kind_(kind), span_(span), message_(message) {}

    Kind kind() const noexcept { return kind_; }
    SourceSpan span() const noexcept { return span_; }
    const std::string& detail() const noexcept { return message_; }

    static std::string kind_name(Kind k) {
        switch (k) {
        case Kind::Syntax: return "SyntaxError";
        case Kind::UnknownIdentifier: return "UnknownIdentifier";
        case Kind::Type: return "TypeError";
        case Kind::Arity: return "ArityError";
        }
        return "DslError";
    }

private:
    Kind kind_;
    SourceSpan span_;
    std::string message_;
};

class SchemaError : public Error {
public:
    SchemaError(std::size_t line, const std::string& message)
        : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

}  // namespace puzzleforge
