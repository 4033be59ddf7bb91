#pragma once

#include <stdexcept>
#include <string>

namespace feesim {

// Thrown on precondition / input validation failures (CLI exit code 2).
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown on failures during evaluation (CLI exit code 3).
class RuntimeError : public std::runtime_error {
public:
    explicit RuntimeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace feesim
