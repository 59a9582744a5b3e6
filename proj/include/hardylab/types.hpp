#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hardylab {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Parameters of the truncated ambient space: polynomials of degree <= N,
/// i.e. coefficient vectors of length N+1.
struct TruncationConfig {
    int degree = 64;            ///< N; ambient dimension is N+1
    int guard = 16;             ///< top index band excluded from edge-sensitive identity checks
    double eps_residual = 1e-8; ///< pass threshold for residual norms
    double eps_rank = 1e-10;    ///< relative singular-value threshold for effective ranks

    int dim() const { return degree + 1; }

    /// Config with the default guard band (N/4 rounded down).
    static TruncationConfig with_degree(int n) {
        TruncationConfig cfg;
        cfg.degree = n;
        cfg.guard = n / 4;
        return cfg;
    }
};

class DimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// A stated precondition of an operation failed; the message carries the
/// measured quantity that violated it.
class PreconditionError : public std::runtime_error {
  public:
    explicit PreconditionError(const std::string& what, double residual = 0.0)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

  private:
    double residual_;
};

class ConvergenceError : public std::runtime_error {
  public:
    explicit ConvergenceError(const std::string& what, std::vector<double> trace = {})
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const std::vector<double>& trace() const { return trace_; }

  private:
    std::vector<double> trace_;
};

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline void validate(const TruncationConfig& cfg) {
    if (cfg.degree < 1) throw ConfigError("truncation degree must be >= 1");
    if (cfg.guard < 0 || cfg.guard > cfg.degree)
        throw ConfigError("guard band must satisfy 0 <= guard <= degree");
    if (!(cfg.eps_residual > 0.0)) throw ConfigError("eps_residual must be positive");
    if (!(cfg.eps_rank > 0.0)) throw ConfigError("eps_rank must be positive");
}

} // namespace hardylab
