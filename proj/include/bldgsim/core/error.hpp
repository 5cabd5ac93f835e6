#pragma once

#include <stdexcept>
#include <string>

namespace bldgsim {

// Base for every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad arguments or violated preconditions of a model function.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Registration, wiring and stepping failures of the runtime.
class RuntimeError : public Error {
public:
    using Error::Error;
};

// Malformed input files (CSV, EPW, scenario, model files).
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace bldgsim
