#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace robinp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A reaction returned NaN or infinity. Carries the sample that produced it.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& what, std::array<double, 2> z, double x, std::array<double, 2> y)
        : Error(what), z_(z), x_(x), y_(y) {}

    [[nodiscard]] const std::array<double, 2>& z() const noexcept { return z_; }
    [[nodiscard]] double x() const noexcept { return x_; }
    [[nodiscard]] const std::array<double, 2>& y() const noexcept { return y_; }

private:
    std::array<double, 2> z_;
    double x_;
    std::array<double, 2> y_;
};

/// A structural hypothesis (on beta, f, theta, eta_M) fails in discrete form.
class HypothesisViolated : public Error {
public:
    HypothesisViolated(const std::string& what, std::vector<std::size_t> nodes = {})
        : Error(what), nodes_(std::move(nodes)) {}

    [[nodiscard]] const std::vector<std::size_t>& offending_nodes() const noexcept { return nodes_; }

private:
    std::vector<std::size_t> nodes_;
};

class PositivityRequired : public Error {
public:
    PositivityRequired(const std::string& what, std::size_t node) : Error(what), node_(node) {}
    [[nodiscard]] std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

class DegenerateEigenfunction : public Error {
public:
    using Error::Error;
};

class LinearSolveFailed : public Error {
public:
    using Error::Error;
};

enum class SolverFailure {
    NewtonDiverged,
    PicardNotConverged,
    PositivityViolated,
    LinearSolveFailed,
};

[[nodiscard]] const char* to_string(SolverFailure kind) noexcept;

/// Failure of the auxiliary solve. The last iterate is kept for inspection.
class SolverError : public Error {
public:
    SolverError(SolverFailure kind, const std::string& what, std::vector<double> last_iterate)
        : Error(what), kind_(kind), last_iterate_(std::move(last_iterate)) {}

    [[nodiscard]] SolverFailure kind() const noexcept { return kind_; }
    [[nodiscard]] const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

private:
    SolverFailure kind_;
    std::vector<double> last_iterate_;
};

class ConfigError : public Error {
public:
    enum class Kind { Parse, Validation };

    ConfigError(Kind kind, const std::string& what, std::size_t line = 0, std::string field = {})
        : Error(what), kind_(kind), line_(line), field_(std::move(field)) {}

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    /// 1-based line number for parse errors, 0 otherwise.
    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    Kind kind_;
    std::size_t line_;
    std::string field_;
};

/// File content does not match the mesh (node count, header, numbers).
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace robinp
