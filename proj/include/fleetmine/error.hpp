#pragma once

#include <stdexcept>
#include <string>

namespace fleetmine {

// Raised for malformed input data (CSV rows, dates, money fields, JSON).
// Parameter/contract violations use std::invalid_argument instead.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace fleetmine
