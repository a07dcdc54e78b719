// uniqueness.hpp
//
// Numerical study of which probability rules are compatible with
// order-independent sequential measurement. The central object is the
// functional equation
//
//     H(q1 + q2) * H(q1 / (q1 + q2)) = H(q1),   q1, q2 >= 0, q1 + q2 <= 1,
//
// obtained by comparing the two measurement orders on states whose |10>
// amplitude vanishes. The identity solves it exactly; the routines here
// measure how badly other rules fail, and reconstruct the solution on a
// grid to confirm the identity is the only admissible one.

#pragma once

#include "nlbox/analysis.hpp"
#include "nlbox/random.hpp"

#include <limits>
#include <vector>

namespace nlbox {

/// Residual |H(q1+q2) H(q1/(q1+q2)) - H(q1)| of the order-consistency
/// equation at one point. q1 + q2 = 0 is a DomainError (the equation
/// degenerates); q2 = 0 is allowed and gives 0 for every rule with H(1) = 1.
template <typename Scalar>
Scalar nco_residual(const ProbabilityRule<Scalar>& rule, Scalar q1, Scalar q2) {
    const Scalar slack = Scalar(tolerance::domain_slack);
    if (!(q1 >= -slack) || !(q2 >= -slack) || !(q1 + q2 <= 1 + slack))
        throw DomainError("(q1, q2) must lie in the probability simplex");
    q1 = std::max(q1, Scalar(0));
    q2 = std::max(q2, Scalar(0));
    const Scalar s = q1 + q2;
    if (s == 0) throw DomainError("q1 + q2 = 0 degenerates the equation");
    return std::abs(eval_rule(rule, std::min(s, Scalar(1))) *
                        eval_rule(rule, std::min(q1 / s, Scalar(1))) -
                    eval_rule(rule, q1));
}

template <typename Scalar = double>
struct ResidualRecord {
    Scalar q1 = 0;
    Scalar q2 = 0;
    Scalar residual = 0;
};

template <typename Scalar = double>
struct GridScan {
    Scalar max_residual = 0;
    ResidualRecord<Scalar> argmax;
    std::vector<ResidualRecord<Scalar>> records;
};

/// Evaluates nco_residual on the triangular grid {(i/n, j/n) : 1 <= i+j <= n}.
/// The argmax keeps the lexicographically first (i, j) on ties.
template <typename Scalar>
GridScan<Scalar> residual_grid(const ProbabilityRule<Scalar>& rule, int n) {
    if (n < 2) throw DomainError("grid resolution must be at least 2");
    GridScan<Scalar> scan;
    scan.records.reserve(std::size_t(n + 1) * std::size_t(n + 2) / 2 - 1);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; i + j <= n; ++j) {
            if (i + j == 0) continue;
            const Scalar q1 = Scalar(i) / Scalar(n);
            const Scalar q2 = Scalar(j) / Scalar(n);
            const ResidualRecord<Scalar> rec{q1, q2,
                                             nco_residual(rule, q1, q2)};
            if (scan.records.empty() || rec.residual > scan.max_residual) {
                scan.max_residual = rec.residual;
                scan.argmax = rec;
            }
            scan.records.push_back(rec);
        }
    return scan;
}

template <typename Scalar = double>
struct AdditivityDeviation {
    /// max |H(s)(H(q1/s) + H(q2/s)) - H(q1) - H(q2)|
    Scalar summed_equation = 0;
    /// max |H(q1+q2) - H(q1) - H(q2)|, the Cauchy form that the summed
    /// equation reduces to under complement symmetry
    Scalar cauchy = 0;
};

/// Measures how far a rule is from additive on the same triangular grid.
template <typename Scalar>
AdditivityDeviation<Scalar> additivity_check(const ProbabilityRule<Scalar>& rule,
                                             int n) {
    if (n < 2) throw DomainError("grid resolution must be at least 2");
    AdditivityDeviation<Scalar> dev;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; i + j <= n; ++j) {
            if (i + j == 0) continue;
            const Scalar q1 = Scalar(i) / Scalar(n);
            const Scalar q2 = Scalar(j) / Scalar(n);
            const Scalar s = std::min(q1 + q2, Scalar(1));
            const Scalar hq1 = eval_rule(rule, q1);
            const Scalar hq2 = eval_rule(rule, q2);
            const Scalar hs = eval_rule(rule, s);
            const Scalar summed =
                std::abs(hs * (eval_rule(rule, std::min(q1 / s, Scalar(1))) +
                               eval_rule(rule, std::min(q2 / s, Scalar(1)))) -
                         hq1 - hq2);
            const Scalar cauchy = std::abs(hs - hq1 - hq2);
            dev.summed_equation = std::max(dev.summed_equation, summed);
            dev.cauchy = std::max(dev.cauchy, cauchy);
        }
    return dev;
}

namespace detail {

/// One linear-interpolation lookup of a grid function at position u in
/// units of the grid spacing.
struct GridLookup {
    int node = 0;
    double weight = 0;  // value = (1-w) h[node] + w h[node+1]
};

inline GridLookup lookup_at(double u, int n) {
    int k = int(std::floor(u));
    double w = u - k;
    if (k >= n) {
        k = n - 1;
        w = 1;
    }
    if (k < 0) {
        k = 0;
        w = 0;
    }
    return {k, w};
}

/// Precomputed term h[s] * interp(i*n/s) - h[i] of the discrete equation.
struct EquationTerm {
    int sum_node;    // s = i + j
    int value_node;  // i
    GridLookup ratio;
};

inline std::vector<EquationTerm> equation_terms(int n) {
    std::vector<EquationTerm> terms;
    for (int i = 1; i + 1 <= n; ++i)
        for (int j = 1; i + j <= n; ++j) {
            const int s = i + j;
            const double u = double(i) * double(n) / double(s);
            terms.push_back({s, i, lookup_at(u, n)});
        }
    return terms;
}

/// Pool-adjacent-violators projection onto nondecreasing vectors.
inline void project_nondecreasing(std::vector<double>& v) {
    const int n = int(v.size());
    std::vector<double> mean(n);
    std::vector<int> count(n);
    int blocks = 0;
    for (int i = 0; i < n; ++i) {
        mean[blocks] = v[i];
        count[blocks] = 1;
        ++blocks;
        while (blocks > 1 && mean[blocks - 2] > mean[blocks - 1]) {
            const int c = count[blocks - 2] + count[blocks - 1];
            mean[blocks - 2] =
                (mean[blocks - 2] * count[blocks - 2] +
                 mean[blocks - 1] * count[blocks - 1]) /
                c;
            count[blocks - 2] = c;
            --blocks;
        }
    }
    int pos = 0;
    for (int b = 0; b < blocks; ++b)
        for (int k = 0; k < count[b]; ++k) v[pos++] = mean[b];
}

}  // namespace detail

/// Residuals of the discrete equation for an explicit grid function h
/// (h.size() = n + 1, h[i] ~ H(i/n)). Shared by the solver and by
/// independent cross-checks.
template <typename Scalar>
std::vector<Scalar> discrete_equation_residuals(const std::vector<Scalar>& h) {
    const int n = int(h.size()) - 1;
    std::vector<Scalar> out;
    for (const auto& t : detail::equation_terms(n)) {
        const Scalar interp = (1 - Scalar(t.ratio.weight)) * h[t.ratio.node] +
                              Scalar(t.ratio.weight) * h[t.ratio.node + 1];
        out.push_back(h[t.sum_node] * interp - h[t.value_node]);
    }
    return out;
}

template <typename Scalar>
Scalar discrete_equation_max_residual(const std::vector<Scalar>& h) {
    Scalar m = 0;
    for (const Scalar r : discrete_equation_residuals(h))
        m = std::max(m, std::abs(r));
    return m;
}

template <typename Scalar>
Scalar discrete_equation_norm(const std::vector<Scalar>& h) {
    Scalar sq = 0;
    for (const Scalar r : discrete_equation_residuals(h)) sq += r * r;
    return std::sqrt(sq);
}

template <typename Scalar = double>
struct RuleSolveResult {
    int grid = 0;
    std::vector<Scalar> values;  // H at i/grid, i = 0..grid
    Scalar sup_distance_identity = 0;
    Scalar residual_norm = 0;
    int iterations = 0;
};

/// Reconstructs the rule H on {i/n} from H(0)=0, H(1)=1, complement
/// symmetry, monotonicity, and the discrete equation in least squares.
///
/// Symmetry is built into the parameterization (only the lower half of the
/// grid is free), monotonicity and the [0, 1/2] range are restored after
/// each step by isotonic projection, and the equation is minimized by a
/// damped Gauss-Newton descent from the flat interior start H = 1/2.
/// Throws NonConvergenceError when the residual norm cannot be pushed
/// below 1e-10.
inline RuleSolveResult<double> solve_rule(int n) {
    if (n < 4) throw DomainError("solve_rule needs a grid of at least 4");

    const int last_free = (n % 2 == 0) ? n / 2 - 1 : (n - 1) / 2;
    const int nvars = last_free;  // free nodes are 1..last_free

    // full index -> (variable, sign) with h[f] = const + sign * v[var]
    struct NodeRef {
        int var = -1;
        double sign = 0;
        double base = 0;
    };
    std::vector<NodeRef> ref(n + 1);
    ref[0] = {-1, 0, 0};
    ref[n] = {-1, 0, 1};
    if (n % 2 == 0) ref[n / 2] = {-1, 0, 0.5};
    for (int f = 1; f <= last_free; ++f) ref[f] = {f - 1, 1, 0};
    for (int f = n - last_free; f <= n - 1; ++f) ref[f] = {n - f - 1, -1, 1};

    const auto terms = detail::equation_terms(n);
    const int nterms = int(terms.size());

    const auto assemble = [&](const std::vector<double>& v) {
        std::vector<double> h(n + 1);
        for (int f = 0; f <= n; ++f)
            h[f] = ref[f].base + (ref[f].var >= 0 ? ref[f].sign * v[ref[f].var] : 0);
        return h;
    };

    const auto project = [&](std::vector<double> v) {
        for (double& x : v) x = std::clamp(x, 0.0, 0.5);
        detail::project_nondecreasing(v);
        return v;
    };

    std::vector<double> v(nvars, 0.5);  // flat start
    std::vector<double> h = assemble(v);
    std::vector<double> r = discrete_equation_residuals(h);
    double objective = 0;
    for (double x : r) objective += x * x;

    Eigen::MatrixXd jac(nterms, nvars);
    double lambda = 1e-8;
    const int budget = 300;
    int iter = 0;
    for (; iter < budget; ++iter) {
        if (std::sqrt(objective) <= 1e-12) break;

        jac.setZero();
        for (int t = 0; t < nterms; ++t) {
            const auto& term = terms[t];
            const double interp =
                (1 - term.ratio.weight) * h[term.ratio.node] +
                term.ratio.weight * h[term.ratio.node + 1];
            const auto add = [&](int node, double coeff) {
                if (ref[node].var >= 0)
                    jac(t, ref[node].var) += coeff * ref[node].sign;
            };
            add(term.sum_node, interp);
            add(term.ratio.node, h[term.sum_node] * (1 - term.ratio.weight));
            add(term.ratio.node + 1, h[term.sum_node] * term.ratio.weight);
            add(term.value_node, -1);
        }

        const Eigen::Map<const Eigen::VectorXd> rv(r.data(), nterms);
        const Eigen::MatrixXd normal = jac.transpose() * jac;
        const Eigen::VectorXd rhs = -jac.transpose() * rv;

        bool accepted = false;
        for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
            Eigen::MatrixXd damped = normal;
            damped.diagonal().array() += lambda;
            const Eigen::VectorXd delta = damped.ldlt().solve(rhs);
            std::vector<double> cand(nvars);
            for (int k = 0; k < nvars; ++k) cand[k] = v[k] + delta(k);
            cand = project(std::move(cand));
            const std::vector<double> ch = assemble(cand);
            const std::vector<double> cr = discrete_equation_residuals(ch);
            double cobj = 0;
            for (double x : cr) cobj += x * x;
            if (cobj < objective) {
                v = std::move(cand);
                h = ch;
                r = cr;
                objective = cobj;
                lambda = std::max(lambda / 10, 1e-12);
                accepted = true;
            } else {
                lambda *= 10;
            }
        }
        if (!accepted) break;  // stalled; final norm decides success
    }

    const double norm = std::sqrt(objective);
    if (norm > 1e-10)
        throw NonConvergenceError(
            "discrete equation residual stayed above 1e-10");

    RuleSolveResult<double> result;
    result.grid = n;
    result.values = h;
    result.residual_norm = norm;
    result.iterations = iter;
    for (int i = 0; i <= n; ++i)
        result.sup_distance_identity = std::max(
            result.sup_distance_identity, std::abs(h[i] - double(i) / n));
    return result;
}

template <typename Scalar = double>
struct ViolationSearchResult {
    TwoQubitState<Scalar> state;
    Scalar residual = 0;
};

/// Multi-start perturbation ascent over states, maximizing the entry-wise
/// gap between the two measurement orders for fixed observables and rule.
/// Deterministic for a fixed seed; makes no claim of global optimality.
template <typename Scalar>
ViolationSearchResult<Scalar> max_nco_violation(
    const ProbabilityRule<Scalar>& rule, const ObservablePair<Scalar>& alice_obs,
    const ObservablePair<Scalar>& bob_obs, int restarts, std::uint64_t seed) {
    if (restarts < 1) throw DomainError("restarts must be positive");

    using Raw = Eigen::Matrix<Scalar, 8, 1>;
    const auto to_state = [](const Raw& raw) {
        Vector4c<Scalar> v;
        for (int i = 0; i < 4; ++i)
            v(i) = Complex<Scalar>(raw(2 * i), raw(2 * i + 1));
        return TwoQubitState<Scalar>(v);
    };
    const auto objective = [&](const TwoQubitState<Scalar>& s) {
        return check_no_causal_order(
                   assemble_box(s, alice_obs, bob_obs, rule))
            .max_residual;
    };

    ViolationSearchResult<Scalar> best{bell_state<Scalar>(), -1};
    for (int restart = 0; restart < restarts; ++restart) {
        auto gen = subgenerator(seed, std::uint64_t(restart));
        Raw raw;
        for (int i = 0; i < 8; ++i) raw(i) = Scalar(gaussian(gen));
        raw.normalize();
        TwoQubitState<Scalar> state = to_state(raw);
        Scalar value = objective(state);

        for (Scalar sigma = Scalar(0.5); sigma >= Scalar(1e-6);
             sigma *= Scalar(0.4)) {
            bool improved = true;
            while (improved) {
                improved = false;
                for (int coord = 0; coord < 8; ++coord)
                    for (const Scalar dir : {sigma, -sigma}) {
                        Raw cand_raw = raw;
                        cand_raw(coord) += dir;
                        cand_raw.normalize();
                        const TwoQubitState<Scalar> cand = to_state(cand_raw);
                        const Scalar cand_value = objective(cand);
                        if (cand_value > value) {
                            raw = cand_raw;
                            state = cand;
                            value = cand_value;
                            improved = true;
                        }
                    }
            }
        }
        if (value > best.residual) best = {state, value};
    }
    return best;
}

/// Writes a residual grid as CSV with columns q1,q2,residual.
template <typename Scalar>
void emit_residual_csv(const GridScan<Scalar>& scan, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    std::fputs("q1,q2,residual\n", f);
    for (const auto& rec : scan.records)
        std::fprintf(f, "%.15g,%.15g,%.15g\n", double(rec.q1), double(rec.q2),
                     double(rec.residual));
    if (std::fclose(f) != 0)
        throw std::runtime_error("failed writing " + path);
}

/// Writes a reconstructed rule as CSV with columns p,H.
template <typename Scalar>
void emit_rule_csv(const RuleSolveResult<Scalar>& result,
                   const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    std::fputs("p,H\n", f);
    for (int i = 0; i <= result.grid; ++i)
        std::fprintf(f, "%.15g,%.15g\n", double(i) / result.grid,
                     double(result.values[i]));
    if (std::fclose(f) != 0)
        throw std::runtime_error("failed writing " + path);
}

}  // namespace nlbox
