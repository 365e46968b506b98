#pragma once

#include <stdexcept>
#include <string>

namespace anisonorm {

/// Bad input: violated preconditions, malformed files, schema errors.
/// The CLI maps these to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical guard tripped (ill-conditioning, undersampling, Nyquist overflow).
/// The CLI maps these to exit code 3.
class NumericalGuardError : public std::runtime_error {
public:
    explicit NumericalGuardError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace anisonorm
