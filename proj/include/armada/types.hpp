#pragma once

#include <stdexcept>
#include <string>

namespace armada {

// Raised for invalid or inconsistent input data (bad CSV cell, constant
// column, missing response, ...). The CLI maps this to exit code 2.
struct data_error : std::runtime_error {
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when an iterative solver exhausts its iteration cap.
struct convergence_error : std::runtime_error {
    explicit convergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace armada
