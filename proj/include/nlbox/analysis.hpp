// analysis.hpp
//
// Read-only analysis of boxes: the three causality conditions, the CHSH
// functional, and the built-in box zoo.
//
//   no-signaling      within one order, each party's outcome marginal is
//                     independent of the other party's input
//   local measurement single-party marginals agree between the two orders
//                     (inputs of the other side averaged out)
//   no causal order   the two orders produce identical joint tables

#pragma once

#include "nlbox/measure.hpp"

namespace nlbox {

template <typename Scalar = double>
struct ConditionResult {
    bool pass = false;
    Scalar max_residual = 0;
};

template <typename Scalar = double>
struct CausalityReport {
    ConditionResult<Scalar> no_signaling_alice_first;
    ConditionResult<Scalar> no_signaling_bob_first;
    ConditionResult<Scalar> local_measurement;
    ConditionResult<Scalar> no_causal_order;
    Scalar tolerance = Scalar(tolerance::report);

    bool all_pass() const {
        return no_signaling_alice_first.pass && no_signaling_bob_first.pass &&
               local_measurement.pass && no_causal_order.pass;
    }
};

/// Largest marginal shift a party can detect from the other party's input,
/// within the tables of one order.
template <typename Scalar>
ConditionResult<Scalar> check_no_signaling(const Box<Scalar>& box, Order order,
                                           Scalar tol = Scalar(tolerance::report)) {
    Scalar residual = 0;
    for (int a = 0; a < 2; ++a)
        for (int x = 0; x < 2; ++x) {
            const Scalar at_y0 = box.table(order, x, 0).row(a).sum();
            const Scalar at_y1 = box.table(order, x, 1).row(a).sum();
            residual = std::max(residual, std::abs(at_y0 - at_y1));
        }
    for (int b = 0; b < 2; ++b)
        for (int y = 0; y < 2; ++y) {
            const Scalar at_x0 = box.table(order, 0, y).col(b).sum();
            const Scalar at_x1 = box.table(order, 1, y).col(b).sum();
            residual = std::max(residual, std::abs(at_x0 - at_x1));
        }
    return {residual <= tol, residual};
}

/// Largest disagreement between the two orders in any single-party marginal
/// P(a|x) = sum_{b,y} P(ab|xy)/2 (and the mirrored P(b|y)).
template <typename Scalar>
ConditionResult<Scalar> check_local_measurement(
    const Box<Scalar>& box, Scalar tol = Scalar(tolerance::report)) {
    Scalar residual = 0;
    for (int a = 0; a < 2; ++a)
        for (int x = 0; x < 2; ++x) {
            Scalar pa = 0, pb = 0;
            for (int y = 0; y < 2; ++y) {
                pa += box.table(Order::AliceFirst, x, y).row(a).sum();
                pb += box.table(Order::BobFirst, x, y).row(a).sum();
            }
            residual = std::max(residual, std::abs(pa - pb) / 2);
        }
    for (int b = 0; b < 2; ++b)
        for (int y = 0; y < 2; ++y) {
            Scalar pa = 0, pb = 0;
            for (int x = 0; x < 2; ++x) {
                pa += box.table(Order::AliceFirst, x, y).col(b).sum();
                pb += box.table(Order::BobFirst, x, y).col(b).sum();
            }
            residual = std::max(residual, std::abs(pa - pb) / 2);
        }
    return {residual <= tol, residual};
}

/// Largest entry-wise gap between the Alice-first and Bob-first tables.
template <typename Scalar>
ConditionResult<Scalar> check_no_causal_order(
    const Box<Scalar>& box, Scalar tol = Scalar(tolerance::report)) {
    Scalar residual = 0;
    for (int i = 0; i < 4; ++i)
        residual = std::max(
            residual,
            (box.alice_first[i] - box.bob_first[i]).cwiseAbs().maxCoeff());
    return {residual <= tol, residual};
}

/// |E(0,0) + E(0,1) + E(1,0) - E(1,1)| with E the +-1-valued correlator of
/// the selected order's tables.
template <typename Scalar>
Scalar chsh_value(const Box<Scalar>& box, Order order) {
    const auto corr = [&](int x, int y) {
        const JointTable<Scalar>& t = box.table(order, x, y);
        return t(0, 0) - t(0, 1) - t(1, 0) + t(1, 1);
    };
    return std::abs(corr(0, 0) + corr(0, 1) + corr(1, 0) - corr(1, 1));
}

namespace detail {

template <typename Scalar>
JointTable<Scalar> correlated_half() {
    JointTable<Scalar> t;
    t << Scalar(0.5), 0, 0, Scalar(0.5);
    return t;
}

template <typename Scalar>
JointTable<Scalar> anticorrelated_half() {
    JointTable<Scalar> t;
    t << 0, Scalar(0.5), Scalar(0.5), 0;
    return t;
}

template <typename Scalar>
std::array<JointTable<Scalar>, 4> pr_tables() {
    std::array<JointTable<Scalar>, 4> tables;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            tables[Box<Scalar>::index(x, y)] = (x * y == 1)
                                                   ? anticorrelated_half<Scalar>()
                                                   : correlated_half<Scalar>();
    return tables;
}

template <typename Scalar>
std::array<JointTable<Scalar>, 4> anti_pr_tables() {
    std::array<JointTable<Scalar>, 4> tables;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            tables[Box<Scalar>::index(x, y)] = (x * y == 1)
                                                   ? correlated_half<Scalar>()
                                                   : anticorrelated_half<Scalar>();
    return tables;
}

}  // namespace detail

/// P(ab|xy) = 1/2 if a xor b = xy, else 0; identical in both orders.
template <typename Scalar = double>
Box<Scalar> pr_box() {
    Box<Scalar> box;
    box.alice_first = detail::pr_tables<Scalar>();
    box.bob_first = box.alice_first;
    box.provenance = "builtin:pr";
    return box;
}

/// P(ab|xy) = 0 if a xor b = xy, else 1/2; identical in both orders.
template <typename Scalar = double>
Box<Scalar> anti_pr_box() {
    Box<Scalar> box;
    box.alice_first = detail::anti_pr_tables<Scalar>();
    box.bob_first = box.alice_first;
    box.provenance = "builtin:anti-pr";
    return box;
}

/// The order-dependent device: PR statistics when Alice measures first,
/// anti-PR statistics when Bob does. Passes no-signaling in both orders and
/// local measurement, yet the two orders disagree maximally.
template <typename Scalar = double>
Box<Scalar> mixed_order_device() {
    Box<Scalar> box;
    box.alice_first = detail::pr_tables<Scalar>();
    box.bob_first = detail::anti_pr_tables<Scalar>();
    box.provenance = "builtin:mixed-order";
    return box;
}

/// Outcome of probing a box for the impossible combination: order-agreeing
/// tables that still signal. A box that signals in some order while passing
/// no-causal-order would let the first mover read the second mover's input
/// before it is chosen, so such a box is flagged as inconsistent.
template <typename Scalar = double>
struct SignalingFinding {
    ConditionResult<Scalar> no_signaling_alice_first;
    ConditionResult<Scalar> no_signaling_bob_first;
    ConditionResult<Scalar> no_causal_order;
    bool signaling_in_some_order = false;
    bool flagged_inconsistent = false;
};

template <typename Scalar>
SignalingFinding<Scalar> signaling_implication_check(
    const Box<Scalar>& box, Scalar tol = Scalar(tolerance::report)) {
    SignalingFinding<Scalar> finding;
    finding.no_signaling_alice_first =
        check_no_signaling(box, Order::AliceFirst, tol);
    finding.no_signaling_bob_first =
        check_no_signaling(box, Order::BobFirst, tol);
    finding.no_causal_order = check_no_causal_order(box, tol);
    finding.signaling_in_some_order = !finding.no_signaling_alice_first.pass ||
                                      !finding.no_signaling_bob_first.pass;
    finding.flagged_inconsistent =
        finding.signaling_in_some_order && finding.no_causal_order.pass;
    return finding;
}

/// Runs all causality checks against one tolerance.
template <typename Scalar>
CausalityReport<Scalar> causality_report(const Box<Scalar>& box,
                                         Scalar tol = Scalar(tolerance::report)) {
    CausalityReport<Scalar> report;
    report.tolerance = tol;
    report.no_signaling_alice_first =
        check_no_signaling(box, Order::AliceFirst, tol);
    report.no_signaling_bob_first =
        check_no_signaling(box, Order::BobFirst, tol);
    report.local_measurement = check_local_measurement(box, tol);
    report.no_causal_order = check_no_causal_order(box, tol);
    return report;
}

}  // namespace nlbox
