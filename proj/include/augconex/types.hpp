#pragma once

#include <Eigen/Dense>

#include <random>
#include <stdexcept>

namespace augconex {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Every stochastic component draws from an explicitly owned engine.
using Rng = std::mt19937_64;

struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct UnsupportedProblem : std::logic_error {
    using std::logic_error::logic_error;
};

struct ConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnreliableReference : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace augconex
