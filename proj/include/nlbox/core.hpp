// core.hpp
//
// Domain types for two-qubit nonlocal-correlation simulation: pure
// bipartite states, binary projective qubit observables given by Bloch
// angles, and the outcome-probability rules H : [0,1] -> [0,1] that map a
// branch weight to an outcome probability.
//
// Conventions used throughout the library:
//   - amplitudes are ordered |00>, |01>, |10>, |11>, first slot = Alice;
//   - observable outcome 0 is the eigenvector along +direction (theta, phi),
//     outcome 1 the orthogonal one;
//   - every named rule satisfies H(0) = 0, H(1) = 1 and the complement
//     identity H(p) + H(1-p) = 1.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace nlbox {

template <typename Scalar>
using Complex = std::complex<Scalar>;
template <typename Scalar>
using Vector2c = Eigen::Matrix<Complex<Scalar>, 2, 1>;
template <typename Scalar>
using Vector4c = Eigen::Matrix<Complex<Scalar>, 4, 1>;
template <typename Scalar>
using Matrix2c = Eigen::Matrix<Complex<Scalar>, 2, 2>;
template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};
struct AllZeroError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct NonConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotEntangledError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct EmptySweepError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

namespace tolerance {
// Construction-time invariants (normalization, orthonormality).
inline constexpr double construction = 1e-12;
// Probability-table comparisons.
inline constexpr double table = 1e-10;
// Default pass/fail threshold for causality reports.
inline constexpr double report = 1e-9;
// A state whose input norm falls below this is rejected as all-zero.
inline constexpr double zero_norm = 1e-14;
// Slack accepted outside [0,1] before a probability argument is an error.
inline constexpr double domain_slack = 1e-12;
// Probabilities this close to 1/2 are ties for the step rule.
inline constexpr double step_tie = 1e-12;
}  // namespace tolerance

/// Pure state of a qubit pair, kept unit-norm. Construction normalizes the
/// input (preserving relative phases) and rejects all-zero or non-finite
/// amplitude vectors.
template <typename Scalar = double>
class TwoQubitState {
  public:
    explicit TwoQubitState(const Vector4c<Scalar>& raw) {
        if (!raw.allFinite())
            throw DomainError("state amplitudes must be finite");
        const Scalar norm2 = raw.squaredNorm();
        if (norm2 < tolerance::zero_norm * tolerance::zero_norm)
            throw AllZeroError("state amplitudes are all zero");
        // sqrt(1/n2) keeps already-normalized inputs bit-identical.
        amps_ = raw * std::sqrt(Scalar(1) / norm2);
    }

    const Vector4c<Scalar>& amplitudes() const { return amps_; }

    Complex<Scalar> amplitude(int a, int b) const { return amps_(2 * a + b); }

    /// 2x2 view M(i, j) = <ij|psi>, row = Alice index, column = Bob index.
    Matrix2c<Scalar> matrix() const {
        Matrix2c<Scalar> m;
        m << amps_(0), amps_(1), amps_(2), amps_(3);
        return m;
    }

  private:
    Vector4c<Scalar> amps_;
};

template <typename Scalar>
TwoQubitState<Scalar> make_state(Complex<Scalar> a1, Complex<Scalar> a2,
                                 Complex<Scalar> a3, Complex<Scalar> a4) {
    Vector4c<Scalar> v;
    v << a1, a2, a3, a4;
    return TwoQubitState<Scalar>(v);
}

inline TwoQubitState<double> make_state(std::complex<double> a1,
                                        std::complex<double> a2,
                                        std::complex<double> a3,
                                        std::complex<double> a4) {
    return make_state<double>(a1, a2, a3, a4);
}

/// (|00> + |11>) / sqrt(2).
template <typename Scalar = double>
TwoQubitState<Scalar> bell_state() {
    const Scalar s = std::sqrt(Scalar(0.5));
    return make_state<Scalar>(s, 0, 0, s);
}

/// Schmidt coefficients of the state, largest first. Both are nonzero iff
/// the state is entangled.
template <typename Scalar>
std::array<Scalar, 2> schmidt_coefficients(const TwoQubitState<Scalar>& state) {
    Eigen::JacobiSVD<Matrix2c<Scalar>> svd(state.matrix());
    return {svd.singularValues()(0), svd.singularValues()(1)};
}

/// Binary projective measurement of one qubit along the Bloch direction
/// (theta, phi). Outcome 0 belongs to the +direction eigenvector.
template <typename Scalar = double>
class QubitObservable {
  public:
    QubitObservable() : theta_(0), phi_(0) {}  // z direction

    QubitObservable(Scalar theta, Scalar phi) : theta_(theta), phi_(phi) {
        if (!std::isfinite(theta) || !std::isfinite(phi))
            throw DomainError("observable angles must be finite");
        if (theta < -tolerance::domain_slack ||
            theta > Scalar(M_PI) + tolerance::domain_slack)
            throw DomainError("theta must lie in [0, pi]");
        theta_ = std::clamp(theta, Scalar(0), Scalar(M_PI));
        phi_ = std::fmod(phi, Scalar(2 * M_PI));
        if (phi_ < 0) phi_ += Scalar(2 * M_PI);
    }

    Scalar theta() const { return theta_; }
    Scalar phi() const { return phi_; }

    /// Unitary whose columns are the outcome-0 and outcome-1 eigenvectors.
    Matrix2c<Scalar> basis() const {
        const Scalar c = std::cos(theta_ / 2);
        const Scalar s = std::sin(theta_ / 2);
        const Complex<Scalar> ph = std::polar(Scalar(1), phi_);
        Matrix2c<Scalar> b;
        b.col(0) << Complex<Scalar>(c), ph * s;
        b.col(1) << Complex<Scalar>(-s), ph * c;
        return b;
    }

    Vector2c<Scalar> eigenvector(int outcome) const {
        return basis().col(outcome);
    }

  private:
    Scalar theta_;
    Scalar phi_;
};

template <typename Scalar = double>
using ObservablePair = std::array<QubitObservable<Scalar>, 2>;

/// The four standard CHSH settings: Alice measures Z (x=0) and X (x=1);
/// Bob measures along the two bisectors (Z+X)/sqrt(2) (y=0) and
/// (Z-X)/sqrt(2) (y=1).
template <typename Scalar = double>
struct ChshSetting {
    ObservablePair<Scalar> alice;
    ObservablePair<Scalar> bob;
};

template <typename Scalar = double>
ChshSetting<Scalar> chsh_observables() {
    const Scalar pi = Scalar(M_PI);
    return ChshSetting<Scalar>{
        {QubitObservable<Scalar>(0, 0), QubitObservable<Scalar>(pi / 2, 0)},
        {QubitObservable<Scalar>(pi / 4, 0), QubitObservable<Scalar>(pi / 4, pi)}};
}

enum class RuleKind { Born, Power, Step };

/// Outcome-probability assignment H(p) for the weight p of a measurement
/// branch.
///
///   born     H(p) = p
///   power(m) H(p) = p^(m/2) / (p^(m/2) + (1-p)^(m/2)), m > 0; born at m = 2
///   step     H(p) = 0 below 1/2, 1 above, 1/2 at the threshold
///
/// The step threshold is a tie band of width tolerance::step_tie so that
/// branch weights that land a few ulp off 1/2 (every balanced state does)
/// still count as ties.
template <typename Scalar = double>
class ProbabilityRule {
  public:
    static ProbabilityRule born() { return ProbabilityRule(RuleKind::Born, 0); }

    static ProbabilityRule power(Scalar m) {
        if (!(m > 0) || !std::isfinite(m))
            throw DomainError("power rule needs a positive finite exponent");
        return ProbabilityRule(RuleKind::Power, m);
    }

    static ProbabilityRule step() { return ProbabilityRule(RuleKind::Step, 0); }

    RuleKind kind() const { return kind_; }

    /// Exponent m; only meaningful for power rules.
    Scalar exponent() const { return m_; }

    std::string name() const {
        switch (kind_) {
            case RuleKind::Born: return "born";
            case RuleKind::Step: return "step";
            case RuleKind::Power: {
                char buf[48];
                std::snprintf(buf, sizeof buf, "power:m=%.12g", double(m_));
                return buf;
            }
        }
        return "?";
    }

  private:
    ProbabilityRule(RuleKind kind, Scalar m) : kind_(kind), m_(m) {}

    RuleKind kind_;
    Scalar m_;
};

/// Evaluates H(p). Throws DomainError when p is outside [0,1] by more than
/// tolerance::domain_slack; closer excursions are clamped.
template <typename Scalar>
Scalar eval_rule(const ProbabilityRule<Scalar>& rule, Scalar p) {
    if (!(p >= -Scalar(tolerance::domain_slack) &&
          p <= Scalar(1) + Scalar(tolerance::domain_slack)))
        throw DomainError("rule argument outside [0,1]");
    p = std::clamp(p, Scalar(0), Scalar(1));
    switch (rule.kind()) {
        case RuleKind::Born:
            return p;
        case RuleKind::Power: {
            const Scalar hi = std::max(p, 1 - p);
            const Scalar lo = std::min(p, 1 - p);
            if (lo == 0) return p < Scalar(0.5) ? Scalar(0) : Scalar(1);
            // Factoring out the larger branch keeps the ratio in [0,1], so
            // no overflow for any m; H(p) + H(1-p) = 1 holds exactly.
            const Scalar r = std::pow(lo / hi, rule.exponent() / 2);
            return p >= 1 - p ? 1 / (1 + r) : r / (1 + r);
        }
        case RuleKind::Step: {
            if (std::abs(p - Scalar(0.5)) <= Scalar(tolerance::step_tie))
                return Scalar(0.5);
            return p < Scalar(0.5) ? Scalar(0) : Scalar(1);
        }
    }
    throw DomainError("unknown rule kind");
}

}  // namespace nlbox
