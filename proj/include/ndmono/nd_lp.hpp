#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ndmono/behavior.hpp"
#include "ndmono/graph.hpp"
#include "ndmono/lp.hpp"
#include "ndmono/rational.hpp"
#include "ndmono/scenario.hpp"

namespace ndmono {

// A prescribed marginal: the table's support must be contained in some
// maximal clique of the scenario.
struct Pin {
    ProbabilityTable table;
};

// The no-disturbance polytope as an equality-form LP: one variable per
// (maximal clique, outcome tuple), normalization per clique, exact marginal
// agreement on every pairwise clique intersection, plus pinned marginals.
struct NdLp {
    LPModel model;
    std::vector<std::vector<Vertex>> cliques;
    std::vector<int> clique_offset;  // first variable index of each clique
};

namespace detail {

inline std::string clique_name(const Scenario& scenario, const std::vector<Vertex>& clique) {
    std::string out = "{";
    for (std::size_t i = 0; i < clique.size(); ++i)
        out += (i ? "," : "") + scenario.label(clique[i]);
    return out + "}";
}

// Positions of `sub` inside the sorted `sup`, or nullopt if not contained.
inline std::optional<std::vector<int>> embed_positions(const std::vector<Vertex>& sub,
                                                       const std::vector<Vertex>& sup) {
    std::vector<int> positions;
    for (Vertex v : sub) {
        const auto it = std::lower_bound(sup.begin(), sup.end(), v);
        if (it == sup.end() || *it != v)
            return std::nullopt;
        positions.push_back(static_cast<int>(it - sup.begin()));
    }
    return positions;
}

// Coefficient rows expressing the marginal of a clique onto a subset: for
// subset outcome `t`, the sum of the clique entries extending `t`.
inline std::vector<std::pair<int, Rational>> marginal_terms(const std::vector<Vertex>& clique,
                                                            int clique_offset,
                                                            const std::vector<int>& positions,
                                                            std::uint64_t subset_outcome,
                                                            int subset_size) {
    std::vector<std::pair<int, Rational>> terms;
    const int k = static_cast<int>(clique.size());
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << k); ++i) {
        bool extends = true;
        for (int p = 0; p < subset_size && extends; ++p)
            extends = ((i >> (k - 1 - positions[static_cast<std::size_t>(p)])) & 1u) ==
                      ((subset_outcome >> (subset_size - 1 - p)) & 1u);
        if (extends)
            terms.emplace_back(clique_offset + static_cast<int>(i), Rational(1));
    }
    return terms;
}

}  // namespace detail

inline NdLp build_nd_lp(const Scenario& scenario, const Expression* objective,
                        const std::vector<Pin>& pins = {}) {
    NdLp nd;
    nd.cliques = maximal_cliques(compatibility_graph(scenario));
    int offset = 0;
    for (const auto& clique : nd.cliques) {
        if (clique.size() > ProbabilityTable::kMaxSupport)
            throw resource_error("maximal clique with " + std::to_string(clique.size()) +
                                 " measurements exceeds the table cap");
        nd.clique_offset.push_back(offset);
        offset += 1 << clique.size();
    }
    nd.model.num_vars = offset;
    nd.model.var_names.reserve(static_cast<std::size_t>(offset));
    for (std::size_t c = 0; c < nd.cliques.size(); ++c)
        for (std::uint64_t i = 0; i < (std::uint64_t{1} << nd.cliques[c].size()); ++i)
            nd.model.var_names.push_back(detail::clique_name(scenario, nd.cliques[c]) + ":" +
                                         outcome_string(i, static_cast<int>(nd.cliques[c].size())));

    // (a) normalization per clique
    for (std::size_t c = 0; c < nd.cliques.size(); ++c) {
        LPModel::Row row;
        row.name = "norm " + detail::clique_name(scenario, nd.cliques[c]);
        const int k = static_cast<int>(nd.cliques[c].size());
        for (std::uint64_t i = 0; i < (std::uint64_t{1} << k); ++i)
            row.coeffs.emplace_back(nd.clique_offset[c] + static_cast<int>(i), Rational(1));
        row.rhs = 1;
        nd.model.equalities.push_back(std::move(row));
    }

    // (b) marginal agreement on every outcome of every pairwise intersection
    for (std::size_t a = 0; a < nd.cliques.size(); ++a) {
        for (std::size_t b = a + 1; b < nd.cliques.size(); ++b) {
            const auto common = intersect_sorted(nd.cliques[a], nd.cliques[b]);
            if (common.empty())
                continue;
            const auto pos_a = *detail::embed_positions(common, nd.cliques[a]);
            const auto pos_b = *detail::embed_positions(common, nd.cliques[b]);
            const int s = static_cast<int>(common.size());
            for (std::uint64_t t = 0; t < (std::uint64_t{1} << s); ++t) {
                LPModel::Row row;
                row.name = "nd " + detail::clique_name(scenario, common) + " " +
                           detail::clique_name(scenario, nd.cliques[a]) + "~" +
                           detail::clique_name(scenario, nd.cliques[b]) + " @" +
                           outcome_string(t, s);
                row.coeffs = detail::marginal_terms(nd.cliques[a], nd.clique_offset[a], pos_a, t, s);
                for (auto& [col, coeff] :
                     detail::marginal_terms(nd.cliques[b], nd.clique_offset[b], pos_b, t, s))
                    row.coeffs.emplace_back(col, -coeff);
                row.rhs = 0;
                nd.model.equalities.push_back(std::move(row));
            }
        }
    }

    // (c) pinned marginals, imposed on the lexicographically lowest
    // containing clique; consistency rows propagate them everywhere else.
    for (const Pin& pin : pins) {
        const auto& support = pin.table.support();
        std::size_t host = nd.cliques.size();
        std::vector<int> positions;
        for (std::size_t c = 0; c < nd.cliques.size(); ++c) {
            if (auto pos = detail::embed_positions(support, nd.cliques[c])) {
                host = c;
                positions = *pos;
                break;
            }
        }
        if (host == nd.cliques.size())
            throw input_error("pinned table support " + detail::clique_name(scenario, support) +
                              " is not contained in any maximal clique");
        const int s = static_cast<int>(support.size());
        for (std::uint64_t t = 0; t < pin.table.entry_count(); ++t) {
            LPModel::Row row;
            row.name = "pin " + detail::clique_name(scenario, support) + " @" +
                       outcome_string(t, s);
            row.coeffs = detail::marginal_terms(nd.cliques[host], nd.clique_offset[host],
                                                positions, t, s);
            row.rhs = pin.table.entry(t);
            nd.model.equalities.push_back(std::move(row));
        }
    }

    // Objective: each term read from its lexicographically lowest containing
    // clique, with the +-1 outcome product as the coefficient pattern.
    if (objective != nullptr) {
        std::map<int, Rational> obj;
        for (const Term& term : objective->terms()) {
            const std::vector<Vertex> pair{std::min(term.u, term.v), std::max(term.u, term.v)};
            std::size_t host = nd.cliques.size();
            std::vector<int> positions;
            for (std::size_t c = 0; c < nd.cliques.size(); ++c) {
                if (auto pos = detail::embed_positions(pair, nd.cliques[c])) {
                    host = c;
                    positions = *pos;
                    break;
                }
            }
            if (host == nd.cliques.size())
                throw input_error("expression edge is contained in no maximal clique");
            const int k = static_cast<int>(nd.cliques[host].size());
            for (std::uint64_t i = 0; i < (std::uint64_t{1} << k); ++i) {
                const int su = ((i >> (k - 1 - positions[0])) & 1u) ? +1 : -1;
                const int sv = ((i >> (k - 1 - positions[1])) & 1u) ? +1 : -1;
                obj[nd.clique_offset[host] + static_cast<int>(i)] += term.coeff * su * sv;
            }
        }
        for (auto& [col, coeff] : obj)
            if (coeff != 0)
                nd.model.objective.emplace_back(col, std::move(coeff));
    }
    return nd;
}

// Converts an LP point back into per-clique probability tables.
inline Behavior behavior_from_solution(const Scenario& scenario, const NdLp& nd,
                                       const std::vector<Rational>& assignment) {
    std::vector<ProbabilityTable> tables;
    for (std::size_t c = 0; c < nd.cliques.size(); ++c) {
        const std::uint64_t size = std::uint64_t{1} << nd.cliques[c].size();
        std::vector<Rational> entries(size);
        for (std::uint64_t i = 0; i < size; ++i)
            entries[i] = assignment[static_cast<std::size_t>(nd.clique_offset[c]) + i];
        tables.push_back(ProbabilityTable::create(nd.cliques[c], std::move(entries)));
    }
    return Behavior::create(scenario, std::move(tables));
}

struct NdOptimum {
    Rational value;
    Behavior behavior;
    long pivots = 0;
};

// Exact maximum of an expression over the no-disturbance polytope, with an
// optimal behavior (which passes the no-disturbance check by construction).
inline NdOptimum nd_maximize(const Scenario& scenario, const Expression& expr,
                             const std::vector<Pin>& pins = {}, const SolveOptions& opts = {},
                             int lp_cap = 5000) {
    NdLp nd = build_nd_lp(scenario, &expr, pins);
    if (nd.model.num_vars > lp_cap)
        throw resource_error("no-disturbance LP has " + std::to_string(nd.model.num_vars) +
                             " variables, above the cap of " + std::to_string(lp_cap));
    const LPSolution sol = solve(nd.model, opts);
    if (sol.status == LPStatus::infeasible)
        throw input_error("no-disturbance model with the given pins is infeasible");
    if (sol.status == LPStatus::unbounded)
        throw input_error("no-disturbance model is unbounded; model is malformed");
    return {sol.value, behavior_from_solution(scenario, nd, sol.assignment), sol.pivots};
}

struct ExtendResult {
    bool feasible = false;
    std::optional<Behavior> behavior;
    std::vector<std::string> conflict_rows;
};

namespace detail {

// Deletion filter: shrinks an infeasible row subset until every remaining
// row is necessary for infeasibility. The Farkas support is itself an
// infeasible subsystem, so the filter starts from it.
inline std::vector<int> irreducible_conflict(const LPModel& model, std::vector<int> support,
                                             const SolveOptions& opts) {
    const auto infeasible_with = [&](const std::vector<int>& rows) {
        LPModel sub;
        sub.num_vars = model.num_vars;
        for (int r : rows)
            sub.equalities.push_back(model.equalities[static_cast<std::size_t>(r)]);
        return solve(sub, opts).status == LPStatus::infeasible;
    };
    for (std::size_t i = 0; i < support.size();) {
        std::vector<int> trial = support;
        trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
        if (infeasible_with(trial))
            support = std::move(trial);
        else
            ++i;
    }
    return support;
}

}  // namespace detail

// Decides whether prescribed marginals extend to a full no-disturbance
// behavior. On failure reports the names of an irreducible set of
// mutually conflicting rows.
inline ExtendResult extend_feasibility(const Scenario& scenario, const std::vector<Pin>& pins,
                                       const SolveOptions& opts = {}) {
    NdLp nd = build_nd_lp(scenario, nullptr, pins);
    SolveOptions no_presolve = opts;
    no_presolve.presolve = false;  // keep row identity for the certificate
    const LPSolution sol = solve(nd.model, no_presolve);
    ExtendResult result;
    if (sol.status == LPStatus::infeasible) {
        std::vector<int> conflict = sol.conflict_rows;
        if (conflict.size() <= 256)
            conflict = detail::irreducible_conflict(nd.model, std::move(conflict), no_presolve);
        for (int r : conflict)
            result.conflict_rows.push_back(nd.model.equalities[static_cast<std::size_t>(r)].name);
        return result;
    }
    result.feasible = true;
    result.behavior = behavior_from_solution(scenario, nd, sol.assignment);
    return result;
}

}  // namespace ndmono
