#pragma once

#include <stdexcept>
#include <string>

namespace treealg {

// Malformed or inconsistent caller input (mismatched variable counts,
// bad indices, unparsable files). Maps to CLI exit code 2.
struct input_error : std::runtime_error {
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// A substitution whose denominators would leave the diagonal-divisor class.
struct substitution_error : input_error {
    explicit substitution_error(const std::string& what) : input_error(what) {}
};

// Evaluation at (or too close to) a diagonal z_i = z_j.
struct pole_error : std::runtime_error {
    explicit pole_error(const std::string& what) : std::runtime_error(what) {}
};

// A mathematical precondition failed (non-flat input, degenerate Killing
// form, singular level, undefined degree, ...).
struct domain_error : std::runtime_error {
    explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace treealg
