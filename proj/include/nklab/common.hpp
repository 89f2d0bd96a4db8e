#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nklab {

/// Tolerance policy. One object, passed explicitly wherever a residual is
/// compared; tests and the CLI may override individual fields.
struct EpsPolicy {
  double algebraic = 1e-12;   ///< multilinear identities, structure-constant arithmetic
  double structural = 1e-10;  ///< SU(3) constraint residuals, primitivity, torsion purity
  double duality = 1e-9;      ///< duality round trips, identity suite
  double fd1 = 1e-6;          ///< first-order finite-difference agreement
  double fd2 = 1e-4;          ///< second-order finite-difference agreement
  double horizontal = 1e-6;   ///< t-components of d of a basic field
  double rank_rel = 1e-8;     ///< singular values below rank_rel * s_max count as zero
  double stability = 1e-10;   ///< stable-orbit degeneracy thresholds (scale-relative)
};

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Degree overflow or mismatch in an exterior-algebra operation.
struct DegreeError : Error {
  using Error::Error;
};

/// Input lies outside the open orbit required by a duality map.
struct NotStable : Error {
  using Error::Error;
};

/// An SU(3)-structure constraint failed; carries the residual.
struct ConstraintViolated : Error {
  std::string constraint;
  double residual;
  ConstraintViolated(const std::string& which, double res)
      : Error("constraint violated: " + which + " (residual " + std::to_string(res) + ")"),
        constraint(which),
        residual(res) {}
};

struct MetricNotPositive : Error {
  using Error::Error;
};

/// A finite-difference probe stepped out of the stable orbit.
struct StepTooLarge : Error {
  using Error::Error;
};

/// d of a field that was declared basic has t-components above tolerance.
struct HorizontalityViolated : Error {
  using Error::Error;
};

/// The structure-constant layer does not reproduce the expected first-order
/// system; carries the residual report.
struct ConventionMismatch : Error {
  using Error::Error;
};

/// SplitMix64-based generator. Self-contained so that streams are
/// bit-reproducible across platforms and standard libraries; every Monte
/// Carlo sample gets its own substream derived from (seed, index).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  Rng(std::uint64_t seed, std::uint64_t stream)
      : state_(seed ^ (0x9E3779B97F4A7C15ULL + stream * 0xBF58476D1CE4E5B9ULL)) {
    next_u64();  // decorrelate nearby streams
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [-1,1).
  double uniform_pm1() { return 2.0 * uniform() - 1.0; }

  /// Standard normal via Box-Muller; no rejection, fully deterministic.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(u1 - 1.0));  // log(1-u1) avoids log(0)
    constexpr double two_pi = 6.283185307179586476925286766559;
    spare_ = r * std::sin(two_pi * u2);
    have_spare_ = true;
    return r * std::cos(two_pi * u2);
  }

  std::complex<double> cnormal() {
    double re = normal();
    double im = normal();
    return {re, im};
  }

 private:
  std::uint64_t state_;
  double spare_ = 0;
  bool have_spare_ = false;
};

/// One named residual check; `anchor` states the identity or property the
/// check verifies, in plain notation.
struct Check {
  std::string name;
  double max_abs_err = 0;
  double tolerance = 0;
  std::string anchor;
  bool pass = false;
};

struct SuiteReport {
  std::vector<Check> checks;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  double worst() const {
    double w = 0;
    for (const auto& c : checks) w = std::max(w, c.max_abs_err);
    return w;
  }
};

/// Relative residual: error scaled by the larger of the operand magnitudes,
/// falling back to absolute for tiny scales.
inline double rel(double abs_err, double scale) {
  return scale > 1.0 ? abs_err / scale : abs_err;
}

}  // namespace nklab
