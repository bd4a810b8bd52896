#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ndmono/behavior.hpp"
#include "ndmono/graph.hpp"
#include "ndmono/rational.hpp"
#include "ndmono/scenario.hpp"

namespace ndmono {

struct ScenarioExpression {
    Scenario scenario;
    Expression expression;
};

// n-cycle expression sum gamma_i <A_i A_{i+1}> with coefficient -1 at one
// position (default: the cycle-closing term) and +1 elsewhere, over the
// n-cycle compatibility scenario.
inline ScenarioExpression cycle_expression(int n, std::optional<int> negative_position = {}) {
    if (n < 3)
        throw input_error("cycle expression needs n >= 3");
    const int neg = negative_position.value_or(n - 1);
    if (neg < 0 || neg >= n)
        throw input_error("negative position out of range");
    std::vector<std::string> labels;
    std::vector<std::pair<std::string, std::string>> compat;
    for (int i = 0; i < n; ++i)
        labels.push_back("A" + std::to_string(i + 1));
    for (int i = 0; i < n; ++i)
        compat.emplace_back(labels[i], labels[(i + 1) % n]);
    Scenario scenario = Scenario::create(labels, compat);
    std::vector<Term> terms;
    for (int i = 0; i < n; ++i)
        terms.push_back({i, (i + 1) % n, Rational(i == neg ? -1 : 1)});
    Expression expr = Expression::create(scenario, "C(" + std::to_string(n) + ")", terms);
    return {std::move(scenario), std::move(expr)};
}

// Generalized CHSH B(2m) = A1B1 + B1A2 + A2B2 + ... + AmBm - BmA1 over the
// complete bipartite compatibility graph of two spatially separated parties.
inline ScenarioExpression chsh_chain_expression(int m, const std::string& a_prefix = "A",
                                                const std::string& b_prefix = "B") {
    if (m < 2)
        throw input_error("generalized CHSH needs m >= 2");
    std::vector<std::string> labels;
    for (int i = 0; i < m; ++i)
        labels.push_back(a_prefix + std::to_string(i + 1));
    for (int i = 0; i < m; ++i)
        labels.push_back(b_prefix + std::to_string(i + 1));
    std::vector<std::pair<std::string, std::string>> compat;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            compat.emplace_back(labels[i], labels[m + j]);
    Scenario scenario = Scenario::create(labels, compat);
    std::vector<Term> terms;
    for (int i = 0; i < m; ++i) {
        terms.push_back({i, m + i, Rational(1)});                  // A_i B_i
        terms.push_back({m + i, (i + 1) % m, Rational(i + 1 == m ? -1 : 1)});  // B_i A_{i+1}
    }
    Expression expr = Expression::create(scenario, "B(" + std::to_string(2 * m) + ")", terms);
    return {std::move(scenario), std::move(expr)};
}

struct ClassicalBound {
    Rational value;
    std::vector<Assignment> maximizers;  // lexicographically first, -1 < +1
    std::uint64_t maximizer_count = 0;
    static constexpr std::size_t kMaxStored = 4096;
};

// Exact maximum of the assignment-level value over all 2^V deterministic
// assignments, swept by Gray code so each step re-evaluates only the terms
// incident to the flipped measurement.
inline ClassicalBound classical_bound(const Scenario& scenario, const Expression& expr) {
    const int n = scenario.size();
    if (n > 30)
        throw resource_error("deterministic enumeration capped at 30 measurements; "
                             "use the no-disturbance LP relaxation instead");
    const auto& terms = expr.terms();
    std::vector<std::vector<int>> incident(static_cast<std::size_t>(n));
    for (std::size_t t = 0; t < terms.size(); ++t) {
        incident[static_cast<std::size_t>(terms[t].u)].push_back(static_cast<int>(t));
        incident[static_cast<std::size_t>(terms[t].v)].push_back(static_cast<int>(t));
    }
    // Bit b of a mask is measurement b's outcome (+1 if set). Lexicographic
    // order over outcome tuples corresponds to masks read MSB-first, i.e.
    // mask bit n-1 belongs to measurement 0.
    const auto bit_of = [n](int vertex) { return n - 1 - vertex; };
    std::vector<int> sign(static_cast<std::size_t>(n), -1);
    std::vector<Rational> contribution(terms.size());
    Rational value(0);
    for (std::size_t t = 0; t < terms.size(); ++t) {
        contribution[t] = terms[t].coeff * sign[static_cast<std::size_t>(terms[t].u)] *
                          sign[static_cast<std::size_t>(terms[t].v)];
        value += contribution[t];
    }
    Rational best = value;
    std::set<std::uint32_t> kept{0};
    std::uint64_t count = 1;
    std::uint32_t gray = 0;
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t step = 1; step < total; ++step) {
        const int flipped_bit = static_cast<int>(__builtin_ctzll(step));
        gray ^= (1u << flipped_bit);
        const int vertex = n - 1 - flipped_bit;
        sign[static_cast<std::size_t>(vertex)] = -sign[static_cast<std::size_t>(vertex)];
        for (int t : incident[static_cast<std::size_t>(vertex)]) {
            value -= 2 * contribution[static_cast<std::size_t>(t)];
            contribution[static_cast<std::size_t>(t)] = -contribution[static_cast<std::size_t>(t)];
        }
        if (value > best) {
            best = value;
            kept.clear();
            kept.insert(gray);
            count = 1;
        } else if (value == best) {
            ++count;
            if (kept.size() < ClassicalBound::kMaxStored)
                kept.insert(gray);
            else if (gray < *kept.rbegin()) {
                kept.erase(std::prev(kept.end()));
                kept.insert(gray);
            }
        }
    }
    ClassicalBound result;
    result.value = best;
    result.maximizer_count = count;
    for (std::uint32_t mask : kept) {
        Assignment a;
        a.values.resize(static_cast<std::size_t>(n));
        for (int v = 0; v < n; ++v)
            a.values[static_cast<std::size_t>(v)] = (mask >> bit_of(v)) & 1u ? +1 : -1;
        result.maximizers.push_back(std::move(a));
    }
    return result;
}

// Closed-form Tsirelson value for the canonical one-negative n-cycle:
// (3n cos(pi/n) - n) / (1 + cos(pi/n)) for odd n, n cos(pi/n) for even n.
inline double quantum_cycle_bound(int n) {
    if (n < 4)
        throw input_error("quantum cycle bound is defined for n >= 4");
    const double c = std::cos(M_PI / n);
    if (n % 2 == 1)
        return (3.0 * n * c - n) / (1.0 + c);
    return n * c;
}

// No-disturbance bound of the n-cycle: n. For n = 3 the cycle is chordal,
// so the attainable optimum is the classical bound 1; callers surface that
// caveat alongside the closed form.
inline Rational nd_cycle_bound(int n) {
    if (n < 3)
        throw input_error("cycle bound needs n >= 3");
    return Rational(n);
}

struct Theorem1Result {
    Rational value;
    Rational bound;
    Rational margin;  // bound - value
    bool holds = false;
};

// Joint distribution => classical bound. Evaluates the expression under the
// joint and reports the margin against the enumerated classical bound.
inline Theorem1Result theorem1_check(const JointDistribution& joint, const Scenario& scenario,
                                     const Expression& expr) {
    Theorem1Result r;
    r.value = evaluate_on_joint(expr, joint);
    r.bound = classical_bound(scenario, expr).value;
    r.margin = r.bound - r.value;
    r.holds = r.value <= r.bound;
    return r;
}

// An expression is a canonical cycle when its terms trace one simple cycle,
// every coefficient is +1 or -1, and exactly one is negative. The quantum
// formula of the cycle inequality is claimed only for this form.
inline std::optional<int> canonical_cycle_order(const Expression& expr) {
    const auto vs = expr.vertices();
    const std::size_t n = vs.size();
    if (n < 3 || expr.terms().size() != n)
        return std::nullopt;
    int negatives = 0;
    std::map<Vertex, std::vector<Vertex>> adj;
    for (const Term& t : expr.terms()) {
        if (t.coeff == -1)
            ++negatives;
        else if (t.coeff != 1)
            return std::nullopt;
        adj[t.u].push_back(t.v);
        adj[t.v].push_back(t.u);
    }
    if (negatives != 1)
        return std::nullopt;
    for (const auto& [v, nb] : adj)
        if (nb.size() != 2)
            return std::nullopt;
    // Connectivity: walk the 2-regular term graph from the first vertex.
    std::set<Vertex> seen{vs[0]};
    Vertex prev = vs[0];
    Vertex cur = adj[vs[0]][0];
    while (cur != vs[0]) {
        seen.insert(cur);
        const auto& nb = adj[cur];
        const Vertex next = nb[0] == prev ? nb[1] : nb[0];
        prev = cur;
        cur = next;
    }
    if (seen.size() != n)
        return std::nullopt;
    return static_cast<int>(n);
}

struct BoundsReport {
    Rational classical;
    std::vector<Assignment> argmax_assignments;
    std::uint64_t maximizer_count = 0;
    std::optional<double> quantum;
    std::optional<Rational> no_disturbance;
    std::vector<std::string> notes;
};

// Classical bound always; quantum/ND closed forms only for canonical cycles.
inline BoundsReport bounds_report(const Scenario& scenario, const Expression& expr) {
    BoundsReport report;
    ClassicalBound cb = classical_bound(scenario, expr);
    report.classical = cb.value;
    report.argmax_assignments = std::move(cb.maximizers);
    report.maximizer_count = cb.maximizer_count;
    if (const auto n = canonical_cycle_order(expr)) {
        report.no_disturbance = nd_cycle_bound(*n);
        if (*n >= 4)
            report.quantum = quantum_cycle_bound(*n);
        else
            report.notes.push_back("triangle: quantum formula not claimed for n = 3");
        if (*n == 3)
            report.notes.push_back(
                "warning: the 3-cycle compatibility graph is chordal; the attainable "
                "no-disturbance optimum is the classical bound, not the closed form 3");
    } else {
        report.notes.push_back("quantum bound unknown: expression is not a canonical "
                               "one-negative cycle");
    }
    return report;
}

}  // namespace ndmono
