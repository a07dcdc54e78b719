// measure.hpp
//
// Order-sensitive sequential measurement. The party measuring first
// collapses the pair: writing the state in the measuring party's eigenbasis
// as sqrt(C)|0>|Y1> + sqrt(D)|1>|Y2>, outcome 0 occurs with probability
// H(C) and leaves the other party in |Y1> (outcome 1 with 1 - H(C), |Y2>).
// The second measurement applies the same rule H to the conditional state.
// Alice-first and Bob-first orders generally disagree unless H is the
// identity, which is the whole point of keeping both tables in a Box.

#pragma once

#include "nlbox/core.hpp"
#include "nlbox/random.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace nlbox {

enum class Party { Alice, Bob };
enum class Order { AliceFirst, BobFirst };

inline const char* to_string(Order order) {
    return order == Order::AliceFirst ? "alice_first" : "bob_first";
}

/// P(ab|xy) for one input pair and one order; entry (a, b) is row a, col b.
template <typename Scalar = double>
using JointTable = Matrix2<Scalar>;

/// The full behavior of a device: joint tables for all four input pairs in
/// both measurement orders.
template <typename Scalar = double>
struct Box {
    std::array<JointTable<Scalar>, 4> alice_first;
    std::array<JointTable<Scalar>, 4> bob_first;
    std::string provenance;

    static constexpr int index(int x, int y) { return 2 * x + y; }

    const JointTable<Scalar>& table(Order order, int x, int y) const {
        return order == Order::AliceFirst ? alice_first[index(x, y)]
                                          : bob_first[index(x, y)];
    }
    JointTable<Scalar>& table(Order order, int x, int y) {
        return order == Order::AliceFirst ? alice_first[index(x, y)]
                                          : bob_first[index(x, y)];
    }
};

/// One branch of a first measurement: its probability and the conditional
/// state handed to the other party. `remainder_valid` is false for a branch
/// of zero weight, whose conditional state is undefined and never used.
template <typename Scalar = double>
struct MeasurementBranch {
    Scalar probability = 0;
    Vector2c<Scalar> remainder = Vector2c<Scalar>::Zero();
    bool remainder_valid = false;
};

/// Performs the first measurement of a sequential pair. Returns the two
/// outcome branches of `party` measuring `obs` on `state` under `rule`.
template <typename Scalar>
std::array<MeasurementBranch<Scalar>, 2> first_step(
    const TwoQubitState<Scalar>& state, const QubitObservable<Scalar>& obs,
    Party party, const ProbabilityRule<Scalar>& rule) {
    const Matrix2c<Scalar> m = state.matrix();
    const Matrix2c<Scalar> basis = obs.basis();

    // Amplitude block of each outcome, expressed over the other party's
    // computational basis.
    Vector2c<Scalar> block[2];
    if (party == Party::Alice) {
        const Matrix2c<Scalar> rotated = basis.adjoint() * m;
        block[0] = rotated.row(0).transpose();
        block[1] = rotated.row(1).transpose();
    } else {
        const Matrix2c<Scalar> rotated = m * basis.conjugate();
        block[0] = rotated.col(0);
        block[1] = rotated.col(1);
    }

    const Scalar weight0 = block[0].squaredNorm();
    const Scalar weight1 = block[1].squaredNorm();

    std::array<MeasurementBranch<Scalar>, 2> out;
    // A branch of exactly zero weight gets probability 0 and its complement
    // goes to the other branch, independent of the rule.
    if (weight0 == 0) {
        out[0].probability = 0;
        out[1].probability = 1;
    } else if (weight1 == 0) {
        out[0].probability = 1;
        out[1].probability = 0;
    } else {
        out[0].probability = eval_rule(rule, weight0);
        out[1].probability = 1 - out[0].probability;
    }
    if (weight0 > 0) {
        out[0].remainder = block[0] / std::sqrt(weight0);
        out[0].remainder_valid = true;
    }
    if (weight1 > 0) {
        out[1].remainder = block[1] / std::sqrt(weight1);
        out[1].remainder_valid = true;
    }
    return out;
}

namespace detail {

/// Weight of outcome 0 when `obs` is measured on the single-qubit state `y`.
template <typename Scalar>
Scalar outcome0_weight(const QubitObservable<Scalar>& obs,
                       const Vector2c<Scalar>& y) {
    const Complex<Scalar> ip = obs.basis().col(0).dot(y);
    return std::min(std::norm(ip), Scalar(1));
}

}  // namespace detail

/// Joint distribution P_A(ab|xy) when Alice measures first.
template <typename Scalar>
JointTable<Scalar> joint_alice_first(const TwoQubitState<Scalar>& state,
                                     const QubitObservable<Scalar>& x_obs,
                                     const QubitObservable<Scalar>& y_obs,
                                     const ProbabilityRule<Scalar>& rule) {
    const auto branches = first_step(state, x_obs, Party::Alice, rule);
    JointTable<Scalar> t = JointTable<Scalar>::Zero();
    for (int a = 0; a < 2; ++a) {
        const auto& br = branches[a];
        if (!br.remainder_valid || br.probability == 0) continue;
        const Scalar q = detail::outcome0_weight(y_obs, br.remainder);
        t(a, 0) = br.probability * eval_rule(rule, q);
        t(a, 1) = br.probability - t(a, 0);
    }
    return t;
}

/// Joint distribution P_B(ab|xy) when Bob measures first.
template <typename Scalar>
JointTable<Scalar> joint_bob_first(const TwoQubitState<Scalar>& state,
                                   const QubitObservable<Scalar>& x_obs,
                                   const QubitObservable<Scalar>& y_obs,
                                   const ProbabilityRule<Scalar>& rule) {
    const auto branches = first_step(state, y_obs, Party::Bob, rule);
    JointTable<Scalar> t = JointTable<Scalar>::Zero();
    for (int b = 0; b < 2; ++b) {
        const auto& br = branches[b];
        if (!br.remainder_valid || br.probability == 0) continue;
        const Scalar q = detail::outcome0_weight(x_obs, br.remainder);
        t(0, b) = br.probability * eval_rule(rule, q);
        t(1, b) = br.probability - t(0, b);
    }
    return t;
}

/// Populates all eight joint tables of a device built from a state, a pair
/// of observables per party, and a rule.
template <typename Scalar>
Box<Scalar> assemble_box(const TwoQubitState<Scalar>& state,
                         const ObservablePair<Scalar>& alice_obs,
                         const ObservablePair<Scalar>& bob_obs,
                         const ProbabilityRule<Scalar>& rule,
                         std::string provenance = {}) {
    Box<Scalar> box;
    box.provenance =
        provenance.empty() ? "assembled;rule=" + rule.name() : std::move(provenance);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            box.alice_first[Box<Scalar>::index(x, y)] =
                joint_alice_first(state, alice_obs[x], bob_obs[y], rule);
            box.bob_first[Box<Scalar>::index(x, y)] =
                joint_bob_first(state, alice_obs[x], bob_obs[y], rule);
        }
    return box;
}

/// Draws `count` outcome pairs from the selected table. Deterministic for a
/// fixed seed; entry (a, b) of the result counts outcome (a, b).
template <typename Scalar>
Eigen::Matrix<std::int64_t, 2, 2> sample_counts(const Box<Scalar>& box,
                                                Order order, int x, int y,
                                                std::int64_t count,
                                                std::uint64_t seed) {
    const JointTable<Scalar>& t = box.table(order, x, y);
    double cdf[4];
    double acc = 0;
    for (int i = 0; i < 4; ++i) {
        acc += std::max(double(t(i / 2, i % 2)), 0.0);
        cdf[i] = acc;
    }
    std::mt19937_64 gen(seed);
    Eigen::Matrix<std::int64_t, 2, 2> counts =
        Eigen::Matrix<std::int64_t, 2, 2>::Zero();
    for (std::int64_t n = 0; n < count; ++n) {
        const double u = uniform_unit(gen) * acc;
        int i = 0;
        while (i < 3 && u >= cdf[i]) ++i;
        counts(i / 2, i % 2) += 1;
    }
    return counts;
}

}  // namespace nlbox
