#ifndef FEEDEROPT_COMMON_HPP
#define FEEDEROPT_COMMON_HPP

#include <stdexcept>
#include <string>

namespace feederopt {

// Malformed or inconsistent input data (files, CLI arguments, cross-references).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical breakdown that is not the caller's fault (solver failure, bad recovery).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Fixed formatting used for all CSV output: 6 significant digits, locale-free.
std::string fmt6(double v);

} // namespace feederopt

#endif
