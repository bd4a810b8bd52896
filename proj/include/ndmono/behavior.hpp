#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ndmono/graph.hpp"
#include "ndmono/rational.hpp"
#include "ndmono/scenario.hpp"

namespace ndmono {

// Outcome tuples over a sorted support are indexed lexicographically with
// -1 < +1: bit (k-1-j) of the index holds support position j, bit value 1
// meaning outcome +1. Index order therefore equals lexicographic order.
inline int outcome_of(std::uint64_t index, int size, int position) {
    return ((index >> (size - 1 - position)) & 1u) ? +1 : -1;
}

inline std::string outcome_string(std::uint64_t index, int size) {
    std::string s(static_cast<std::size_t>(size), '-');
    for (int j = 0; j < size; ++j)
        if (outcome_of(index, size, j) > 0)
            s[static_cast<std::size_t>(j)] = '+';
    return s;
}

inline std::uint64_t outcome_index(const std::string& s) {
    std::uint64_t index = 0;
    for (char c : s) {
        if (c != '+' && c != '-')
            throw input_error("malformed outcome string '" + s + "'");
        index = (index << 1) | (c == '+' ? 1u : 0u);
    }
    return index;
}

// Probability distribution over the joint outcomes of a sorted measurement
// list. Entries are exact, nonnegative, and sum to exactly one.
class ProbabilityTable {
  public:
    static constexpr int kMaxSupport = 20;

    ProbabilityTable() = default;

    static ProbabilityTable create(std::vector<Vertex> support, std::vector<Rational> entries) {
        if (support.size() > kMaxSupport)
            throw resource_error("probability table support exceeds " +
                                 std::to_string(kMaxSupport) + " measurements");
        if (!std::is_sorted(support.begin(), support.end()) ||
            std::adjacent_find(support.begin(), support.end()) != support.end())
            throw input_error("table support must be strictly increasing");
        if (entries.size() != (std::size_t{1} << support.size()))
            throw input_error("table entry count does not match support size");
        Rational sum(0);
        for (const Rational& e : entries) {
            if (e < 0)
                throw input_error("negative probability entry");
            sum += e;
        }
        if (sum != 1)
            throw input_error("probability entries sum to " + rational_string(sum) + ", not 1");
        ProbabilityTable t;
        t.support_ = std::move(support);
        t.entries_ = std::move(entries);
        return t;
    }

    static ProbabilityTable uniform(std::vector<Vertex> support) {
        const std::size_t size = std::size_t{1} << support.size();
        return create(std::move(support), std::vector<Rational>(size, Rational(1, size)));
    }

    static ProbabilityTable point_mass(std::vector<Vertex> support, std::uint64_t index) {
        std::vector<Rational> entries(std::size_t{1} << support.size(), Rational(0));
        entries.at(index) = 1;
        return create(std::move(support), std::move(entries));
    }

    const std::vector<Vertex>& support() const { return support_; }
    int arity() const { return static_cast<int>(support_.size()); }
    std::uint64_t entry_count() const { return std::uint64_t{1} << support_.size(); }
    const Rational& entry(std::uint64_t index) const { return entries_.at(index); }
    const std::vector<Rational>& entries() const { return entries_; }

    std::optional<int> position_of(Vertex v) const {
        auto it = std::lower_bound(support_.begin(), support_.end(), v);
        if (it == support_.end() || *it != v)
            return std::nullopt;
        return static_cast<int>(it - support_.begin());
    }

    bool operator==(const ProbabilityTable& other) const {
        return support_ == other.support_ && entries_ == other.entries_;
    }

  private:
    std::vector<Vertex> support_;
    std::vector<Rational> entries_;
};

// Joint distribution whose support is a scenario's full measurement set.
using JointDistribution = ProbabilityTable;

// Sum out all measurements not in subset. subset must be contained in the
// table's support.
inline ProbabilityTable marginalize(const ProbabilityTable& table, std::vector<Vertex> subset) {
    std::sort(subset.begin(), subset.end());
    std::vector<int> positions;
    for (Vertex v : subset) {
        auto p = table.position_of(v);
        if (!p)
            throw input_error("marginalization target is not contained in the table support");
        positions.push_back(*p);
    }
    const int k = static_cast<int>(subset.size());
    const int full = table.arity();
    std::vector<Rational> entries(std::size_t{1} << k, Rational(0));
    for (std::uint64_t i = 0; i < table.entry_count(); ++i) {
        std::uint64_t j = 0;
        for (int p = 0; p < k; ++p)
            j = (j << 1) | ((i >> (full - 1 - positions[p])) & 1u);
        entries[j] += table.entry(i);
    }
    return ProbabilityTable::create(std::move(subset), std::move(entries));
}

// One exact disagreement between two clique marginals on their intersection.
struct NdViolation {
    std::vector<Vertex> clique_a;
    std::vector<Vertex> clique_b;
    std::vector<Vertex> intersection;
    std::uint64_t outcome = 0;
    Rational value_a;
    Rational value_b;
};

struct NdCheck {
    std::vector<NdViolation> violations;
    bool ok() const { return violations.empty(); }
};

inline Graph compatibility_graph(const Scenario& scenario) {
    Graph g(scenario.size());
    for (const auto& [u, v] : scenario.compat())
        g.add_edge(u, v);
    return g;
}

// Tables must cover exactly the maximal cliques of the compatibility graph;
// the check then compares every pairwise intersection marginal entry-by-entry.
inline NdCheck check_no_disturbance(const Scenario& scenario,
                                    const std::vector<ProbabilityTable>& tables) {
    const auto cliques = maximal_cliques(compatibility_graph(scenario));
    if (tables.size() != cliques.size())
        throw input_error("expected one table per maximal clique (" +
                          std::to_string(cliques.size()) + " cliques, " +
                          std::to_string(tables.size()) + " tables)");
    for (std::size_t i = 0; i < cliques.size(); ++i)
        if (tables[i].support() != cliques[i])
            throw input_error("table support does not match maximal clique #" + std::to_string(i));
    NdCheck check;
    for (std::size_t a = 0; a < cliques.size(); ++a) {
        for (std::size_t b = a + 1; b < cliques.size(); ++b) {
            const auto common = intersect_sorted(cliques[a], cliques[b]);
            if (common.empty())
                continue;
            const auto ma = marginalize(tables[a], common);
            const auto mb = marginalize(tables[b], common);
            for (std::uint64_t i = 0; i < ma.entry_count(); ++i)
                if (ma.entry(i) != mb.entry(i))
                    check.violations.push_back(
                        {cliques[a], cliques[b], common, i, ma.entry(i), mb.entry(i)});
        }
    }
    return check;
}

// No-disturbance state: one probability table per maximal clique of the
// compatibility graph, exactly consistent on all pairwise intersections.
class Behavior {
  public:
    static Behavior create(Scenario scenario, std::vector<ProbabilityTable> tables) {
        const NdCheck check = check_no_disturbance(scenario, tables);
        if (!check.ok()) {
            const NdViolation& v = check.violations.front();
            std::string msg = "no-disturbance violation on {";
            for (std::size_t i = 0; i < v.intersection.size(); ++i)
                msg += (i ? "," : "") + scenario.label(v.intersection[i]);
            msg += "}: " + rational_string(v.value_a) + " vs " + rational_string(v.value_b);
            throw input_error(msg);
        }
        Behavior b;
        b.scenario_ = std::move(scenario);
        b.cliques_ = maximal_cliques(compatibility_graph(b.scenario_));
        b.tables_ = std::move(tables);
        return b;
    }

    const Scenario& scenario() const { return scenario_; }
    const std::vector<std::vector<Vertex>>& cliques() const { return cliques_; }
    const std::vector<ProbabilityTable>& tables() const { return tables_; }

    // Lexicographically lowest maximal clique containing all given vertices.
    std::optional<std::size_t> containing_clique(const std::vector<Vertex>& vs) const {
        for (std::size_t i = 0; i < cliques_.size(); ++i)
            if (std::includes(cliques_[i].begin(), cliques_[i].end(), vs.begin(), vs.end()))
                return i;
        return std::nullopt;
    }

  private:
    Scenario scenario_;
    std::vector<std::vector<Vertex>> cliques_;
    std::vector<ProbabilityTable> tables_;
};

class non_chordal_error : public input_error {
  public:
    explicit non_chordal_error(std::vector<int> witness)
        : input_error("compatibility graph is not chordal"), witness_cycle(std::move(witness)) {}
    std::vector<int> witness_cycle;
};

// Joint distribution over all measurements via the clique-tree product:
// the product of clique-table entries divided by the product of separator
// marginals along the tree. A zero separator entry forces the extending
// clique entries to zero, so those joint entries are zero (0/0 convention).
inline JointDistribution fine_joint(const Behavior& behavior) {
    const Scenario& scenario = behavior.scenario();
    const Graph g = compatibility_graph(scenario);
    const auto peo = is_chordal(g);
    if (!peo) {
        auto witness = find_induced_cycle(g);
        throw non_chordal_error(witness ? *witness : std::vector<int>{});
    }
    if (scenario.size() > ProbabilityTable::kMaxSupport)
        throw resource_error("joint distribution over " + std::to_string(scenario.size()) +
                             " measurements exceeds the table cap");
    const CliqueTree tree = clique_tree(g, *peo);
    std::vector<ProbabilityTable> separators;
    separators.reserve(tree.edges.size());
    for (const auto& e : tree.edges)
        separators.push_back(e.separator.empty()
                                 ? ProbabilityTable::create({}, {Rational(1)})
                                 : marginalize(behavior.tables()[static_cast<std::size_t>(e.a)],
                                               e.separator));

    std::vector<Vertex> full(static_cast<std::size_t>(scenario.size()));
    for (int v = 0; v < scenario.size(); ++v)
        full[static_cast<std::size_t>(v)] = v;
    const int n = scenario.size();
    const auto restrict_index = [n](std::uint64_t joint_index, const std::vector<Vertex>& sub) {
        std::uint64_t idx = 0;
        for (std::size_t p = 0; p < sub.size(); ++p)
            idx = (idx << 1) | ((joint_index >> (n - 1 - sub[p])) & 1u);
        return idx;
    };

    std::vector<Rational> entries(std::size_t{1} << n, Rational(0));
    for (std::uint64_t i = 0; i < entries.size(); ++i) {
        Rational numerator(1);
        bool zero = false;
        for (std::size_t c = 0; c < behavior.cliques().size() && !zero; ++c) {
            const Rational& e =
                behavior.tables()[c].entry(restrict_index(i, behavior.cliques()[c]));
            if (e == 0)
                zero = true;
            else
                numerator *= e;
        }
        if (zero)
            continue;
        Rational denominator(1);
        for (std::size_t s = 0; s < tree.edges.size() && !zero; ++s) {
            const Rational& e = separators[s].entry(restrict_index(i, tree.edges[s].separator));
            if (e == 0)
                zero = true;  // unreachable when clique factors are nonzero
            else
                denominator *= e;
        }
        if (!zero)
            entries[i] = numerator / denominator;
    }
    JointDistribution joint = ProbabilityTable::create(full, std::move(entries));
    // The junction-tree product must reproduce every input table exactly.
    for (std::size_t c = 0; c < behavior.cliques().size(); ++c)
        if (!(marginalize(joint, behavior.cliques()[c]) == behavior.tables()[c]))
            throw input_error("clique-tree product failed to reproduce a clique marginal");
    return joint;
}

// Two-point correlator <uv> read off the lexicographically lowest maximal
// clique containing the edge; well-defined by the no-disturbance invariant.
inline Rational correlator(const Behavior& behavior, Vertex u, Vertex v) {
    if (!behavior.scenario().compatible(u, v))
        throw input_error("correlator requested for a non-compatible pair (" +
                          behavior.scenario().label(u) + "," + behavior.scenario().label(v) + ")");
    const auto clique = behavior.containing_clique({std::min(u, v), std::max(u, v)});
    const auto marg = marginalize(behavior.tables()[*clique], {std::min(u, v), std::max(u, v)});
    Rational sum(0);
    for (std::uint64_t i = 0; i < 4; ++i)
        sum += marg.entry(i) * outcome_of(i, 2, 0) * outcome_of(i, 2, 1);
    return sum;
}

inline Rational evaluate_expression(const Expression& expr, const Behavior& behavior) {
    Rational sum(0);
    for (const Term& t : expr.terms())
        sum += t.coeff * correlator(behavior, t.u, t.v);
    return sum;
}

// Expectation of the assignment-level value under a joint distribution.
inline Rational evaluate_on_joint(const Expression& expr, const JointDistribution& joint) {
    std::vector<std::pair<int, int>> positions;
    for (const Term& t : expr.terms()) {
        const auto pu = joint.position_of(t.u);
        const auto pv = joint.position_of(t.v);
        if (!pu || !pv)
            throw input_error("joint distribution does not cover all expression measurements");
        positions.emplace_back(*pu, *pv);
    }
    Rational sum(0);
    const int n = joint.arity();
    for (std::uint64_t i = 0; i < joint.entry_count(); ++i) {
        if (joint.entry(i) == 0)
            continue;
        Rational value(0);
        for (std::size_t t = 0; t < expr.terms().size(); ++t)
            value += expr.terms()[t].coeff * outcome_of(i, n, positions[t].first) *
                     outcome_of(i, n, positions[t].second);
        sum += value * joint.entry(i);
    }
    return sum;
}

// The Popescu-Rohrlich box on the 2-party CHSH scenario: perfectly
// correlated on (A1,B1), (A2,B1), (A2,B2), anticorrelated on (A1,B2).
inline Behavior pr_box() {
    Scenario scenario = Scenario::create({"A1", "A2", "B1", "B2"}, {{"A1", "B1"},
                                                                    {"A1", "B2"},
                                                                    {"A2", "B1"},
                                                                    {"A2", "B2"}});
    const Rational half(1, 2);
    const std::vector<Rational> correlated{half, 0, 0, half};
    const std::vector<Rational> anticorrelated{0, half, half, 0};
    std::vector<ProbabilityTable> tables;
    for (const auto& clique : maximal_cliques(compatibility_graph(scenario))) {
        const bool anti = scenario.label(clique[0]) == "A1" && scenario.label(clique[1]) == "B2";
        tables.push_back(ProbabilityTable::create(clique, anti ? anticorrelated : correlated));
    }
    return Behavior::create(std::move(scenario), std::move(tables));
}

}  // namespace ndmono
