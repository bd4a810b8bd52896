#include "ndmono/lp.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <random>

#include "ndmono/behavior.hpp"
#include "ndmono/bounds.hpp"
#include "ndmono/nd_lp.hpp"

using namespace ndmono;

namespace {

// Independent oracle: Gaussian elimination of [A|b] for consistency and
// rank, then enumeration of all basic solutions over column subsets of size
// rank. Exact throughout.
struct OracleResult {
    LPStatus status = LPStatus::infeasible;
    Rational value;
};

OracleResult bfs_oracle(const LPModel& model) {
    const int n = model.num_vars;
    const int m = static_cast<int>(model.equalities.size());
    std::vector<std::vector<Rational>> a(m, std::vector<Rational>(n + 1, Rational(0)));
    for (int i = 0; i < m; ++i) {
        for (const auto& [col, coeff] : model.equalities[i].coeffs)
            a[i][col] += coeff;
        a[i][n] = model.equalities[i].rhs;
    }
    // Row echelon over the rationals.
    int rank = 0;
    for (int col = 0; col < n && rank < m; ++col) {
        int pivot = -1;
        for (int i = rank; i < m; ++i)
            if (a[i][col] != 0) {
                pivot = i;
                break;
            }
        if (pivot == -1)
            continue;
        std::swap(a[rank], a[pivot]);
        for (int i = 0; i < m; ++i) {
            if (i == rank || a[i][col] == 0)
                continue;
            const Rational f = a[i][col] / a[rank][col];
            for (int j = col; j <= n; ++j)
                a[i][j] -= f * a[rank][j];
        }
        ++rank;
    }
    for (int i = rank; i < m; ++i)
        if (a[i][n] != 0)
            return {LPStatus::infeasible, Rational(0)};
    a.resize(rank);

    std::vector<Rational> cost(n, Rational(0));
    for (const auto& [col, coeff] : model.objective)
        cost[col] += coeff;

    OracleResult result;
    std::vector<int> basis(rank);
    const std::function<void(int, int)> enumerate = [&](int start, int chosen) {
        if (chosen == rank) {
            // Solve the square system on the chosen columns.
            std::vector<std::vector<Rational>> sys(rank, std::vector<Rational>(rank + 1));
            for (int i = 0; i < rank; ++i) {
                for (int j = 0; j < rank; ++j)
                    sys[i][j] = a[i][basis[j]];
                sys[i][rank] = a[i][static_cast<std::size_t>(n)];
            }
            for (int col = 0; col < rank; ++col) {
                int pivot = -1;
                for (int i = col; i < rank; ++i)
                    if (sys[i][col] != 0) {
                        pivot = i;
                        break;
                    }
                if (pivot == -1)
                    return;  // singular basis
                std::swap(sys[col], sys[pivot]);
                for (int i = 0; i < rank; ++i) {
                    if (i == col || sys[i][col] == 0)
                        continue;
                    const Rational f = sys[i][col] / sys[col][col];
                    for (int j = col; j <= rank; ++j)
                        sys[i][j] -= f * sys[col][j];
                }
            }
            Rational value(0);
            for (int j = 0; j < rank; ++j) {
                const Rational x = sys[j][rank] / sys[j][j];
                if (x < 0)
                    return;
                value += cost[basis[j]] * x;
            }
            if (result.status != LPStatus::optimal || value > result.value) {
                result.status = LPStatus::optimal;
                result.value = value;
            }
            return;
        }
        for (int col = start; col <= n - (rank - chosen); ++col) {
            basis[chosen] = col;
            enumerate(col + 1, chosen + 1);
        }
    };
    if (rank == 0) {
        // Only x = 0 admissible as a basic solution.
        result.status = LPStatus::optimal;
        result.value = 0;
        return result;
    }
    enumerate(0, 0);
    return result;
}

LPModel random_model(std::mt19937_64& rng, bool force_infeasible) {
    const int n = 3 + static_cast<int>(rng() % 10);
    const int m = 1 + static_cast<int>(rng() % 4);
    LPModel model;
    model.num_vars = n;
    std::vector<Rational> x0(n, Rational(0));
    for (int j = 0; j < n; ++j)
        if (rng() % 2)
            x0[j] = Rational(static_cast<int>(rng() % 5));
    for (int i = 0; i < m; ++i) {
        LPModel::Row row;
        row.name = "r" + std::to_string(i);
        Rational rhs(0);
        for (int j = 0; j < n; ++j) {
            const int c = static_cast<int>(rng() % 5) - 2;
            if (c == 0)
                continue;
            row.coeffs.emplace_back(j, Rational(c));
            rhs += Rational(c) * x0[j];
        }
        row.rhs = rhs;
        model.equalities.push_back(std::move(row));
    }
    // Normalization-style row keeps the feasible set bounded.
    LPModel::Row norm;
    norm.name = "sum";
    Rational total(0);
    for (int j = 0; j < n; ++j) {
        norm.coeffs.emplace_back(j, Rational(1));
        total += x0[j];
    }
    norm.rhs = total;
    model.equalities.push_back(std::move(norm));
    if (force_infeasible) {
        LPModel::Row clash = model.equalities.front();
        clash.name = "clash";
        clash.rhs += 1;
        model.equalities.push_back(std::move(clash));
    }
    for (int j = 0; j < n; ++j) {
        const int c = static_cast<int>(rng() % 7) - 3;
        if (c != 0)
            model.objective.emplace_back(j, Rational(c));
    }
    return model;
}

}  // namespace

TEST(Simplex, TinyKnownOptimum) {
    // max x0 + x1 s.t. x0 + x1 + s = 1 -> 1.
    LPModel model;
    model.num_vars = 3;
    model.equalities.push_back({"cap", {{0, Rational(1)}, {1, Rational(1)}, {2, Rational(1)}},
                                Rational(1)});
    model.objective = {{0, Rational(1)}, {1, Rational(1)}};
    const auto sol = solve(model);
    ASSERT_EQ(sol.status, LPStatus::optimal);
    EXPECT_EQ(sol.value, Rational(1));
}

TEST(Simplex, ZeroObjectiveOnConsistentModel) {
    LPModel model;
    model.num_vars = 2;
    model.equalities.push_back({"r", {{0, Rational(1)}, {1, Rational(1)}}, Rational(1)});
    const auto sol = solve(model);
    ASSERT_EQ(sol.status, LPStatus::optimal);
    EXPECT_EQ(sol.value, Rational(0));
}

TEST(Simplex, UnboundedDetected) {
    // max x0 with x1 = 1 and x0 unconstrained above.
    LPModel model;
    model.num_vars = 2;
    model.equalities.push_back({"fix", {{1, Rational(1)}}, Rational(1)});
    model.objective = {{0, Rational(1)}};
    EXPECT_EQ(solve(model).status, LPStatus::unbounded);
}

TEST(Simplex, InfeasibleWithConflict) {
    LPModel model;
    model.num_vars = 2;
    model.equalities.push_back({"a", {{0, Rational(1)}, {1, Rational(1)}}, Rational(-1)});
    SolveOptions opts;
    opts.presolve = false;
    const auto sol = solve(model, opts);
    ASSERT_EQ(sol.status, LPStatus::infeasible);
    EXPECT_EQ(sol.conflict_rows, std::vector<int>{0});
}

TEST(Simplex, PresolveDropsRedundantRows) {
    LPModel model;
    model.num_vars = 2;
    model.equalities.push_back({"a", {{0, Rational(1)}, {1, Rational(1)}}, Rational(1)});
    model.equalities.push_back({"a2", {{0, Rational(2)}, {1, Rational(2)}}, Rational(2)});
    model.objective = {{0, Rational(1)}};
    const auto sol = solve(model);
    ASSERT_EQ(sol.status, LPStatus::optimal);
    EXPECT_EQ(sol.value, Rational(1));
    // Contradictory dependency is reported with its support.
    model.equalities.push_back({"a3", {{0, Rational(2)}, {1, Rational(2)}}, Rational(3)});
    const auto bad = solve(model);
    ASSERT_EQ(bad.status, LPStatus::infeasible);
    EXPECT_FALSE(bad.conflict_rows.empty());
}

TEST(Simplex, AgreesWithBasicSolutionEnumeration) {
    std::mt19937_64 rng(20250401);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const LPModel model = random_model(rng, trial % 4 == 3);
        const OracleResult expected = bfs_oracle(model);
        for (const bool presolve : {true, false}) {
            SolveOptions opts;
            opts.presolve = presolve;
            const LPSolution sol = solve(model, opts);
            ASSERT_EQ(sol.status, expected.status) << "trial " << trial;
            if (expected.status == LPStatus::optimal) {
                EXPECT_EQ(sol.value, expected.value) << "trial " << trial;
                // The returned point satisfies every equality exactly.
                for (const auto& row : model.equalities) {
                    Rational lhs(0);
                    for (const auto& [col, coeff] : row.coeffs)
                        lhs += coeff * sol.assignment[col];
                    EXPECT_EQ(lhs, row.rhs);
                }
                for (const auto& x : sol.assignment)
                    EXPECT_GE(x, Rational(0));
            }
        }
        ++checked;
    }
    EXPECT_EQ(checked, 50);
}

TEST(NdLp, ModelSizeMatchesCombinatorialOracle) {
    // Counts derived independently of build_nd_lp: one variable per clique
    // outcome, one normalization per clique, 2^|intersection| rows per
    // intersecting clique pair.
    const auto check = [](const Scenario& scenario, const Expression* objective,
                          const std::vector<Pin>& pins) {
        const auto cliques = maximal_cliques(compatibility_graph(scenario));
        int vars = 0;
        std::size_t rows = cliques.size();
        for (const auto& c : cliques)
            vars += 1 << c.size();
        for (std::size_t a = 0; a < cliques.size(); ++a)
            for (std::size_t b = a + 1; b < cliques.size(); ++b) {
                const auto common = intersect_sorted(cliques[a], cliques[b]);
                if (!common.empty())
                    rows += std::size_t{1} << common.size();
            }
        for (const auto& pin : pins)
            rows += pin.table.entry_count();
        const NdLp nd = build_nd_lp(scenario, objective, pins);
        EXPECT_EQ(nd.model.num_vars, vars);
        EXPECT_EQ(nd.model.equalities.size(), rows);
    };

    const auto chsh = chsh_chain_expression(2);
    check(chsh.scenario, &chsh.expression, {});
    const NdLp nd = build_nd_lp(chsh.scenario, &chsh.expression);
    EXPECT_EQ(nd.model.num_vars, 16);
    EXPECT_EQ(nd.model.equalities.size(), 12u);  // 4 normalization + 4 pairs x 2

    // Three-party scenario via two CHSH experiments: 8 triangle cliques.
    std::vector<std::string> labels{"A1", "A2", "B1", "B2", "C1", "C2"};
    std::vector<std::pair<std::string, std::string>> compat;
    const std::vector<std::vector<std::string>> parties{{"A1", "A2"}, {"B1", "B2"}, {"C1", "C2"}};
    for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t q = p + 1; q < 3; ++q)
            for (const auto& u : parties[p])
                for (const auto& v : parties[q])
                    compat.emplace_back(u, v);
    const Scenario three = Scenario::create(labels, compat);
    check(three, nullptr, {});
    EXPECT_EQ(build_nd_lp(three, nullptr).model.num_vars, 64);
}

TEST(NdLp, ChshOptimumIsFourAtThePrBox) {
    const auto chsh = chsh_chain_expression(2);
    const NdOptimum opt = nd_maximize(chsh.scenario, chsh.expression);
    EXPECT_EQ(opt.value, Rational(4));
    const Scenario& s = opt.behavior.scenario();
    EXPECT_EQ(correlator(opt.behavior, s.require("A1"), s.require("B1")), Rational(1));
    EXPECT_EQ(correlator(opt.behavior, s.require("A2"), s.require("B1")), Rational(1));
    EXPECT_EQ(correlator(opt.behavior, s.require("A2"), s.require("B2")), Rational(1));
    EXPECT_EQ(correlator(opt.behavior, s.require("A1"), s.require("B2")), Rational(-1));
}

TEST(NdLp, CycleOptimaEqualN) {
    for (int n = 4; n <= 7; ++n) {
        const auto c = cycle_expression(n);
        const NdOptimum opt = nd_maximize(c.scenario, c.expression);
        EXPECT_EQ(opt.value, Rational(n)) << "n=" << n;
    }
}

TEST(NdLp, TriangleOptimumIsClassical) {
    // Chordal scenario: the attainable optimum is the classical bound 1,
    // not the closed form 3.
    const auto c3 = cycle_expression(3);
    EXPECT_EQ(nd_maximize(c3.scenario, c3.expression).value, Rational(1));
}

TEST(NdLp, OptimumAboveClassicalBound) {
    for (int n = 4; n <= 6; ++n) {
        const auto c = cycle_expression(n);
        const auto classical = classical_bound(c.scenario, c.expression).value;
        EXPECT_GE(nd_maximize(c.scenario, c.expression).value, classical);
    }
}

TEST(NdLp, ObjectiveIndependentOfDesignatedClique) {
    // Rebuild the CHSH objective reading each edge from the highest instead
    // of the lowest containing clique; the optimum must not change.
    const auto chsh = chsh_chain_expression(2);
    NdLp nd = build_nd_lp(chsh.scenario, &chsh.expression);
    const Rational reference = solve(nd.model).value;

    NdLp alt = build_nd_lp(chsh.scenario, nullptr);
    std::map<int, Rational> obj;
    for (const Term& term : chsh.expression.terms()) {
        const std::vector<Vertex> pair{std::min(term.u, term.v), std::max(term.u, term.v)};
        for (std::size_t c = alt.cliques.size(); c-- > 0;) {
            if (!std::includes(alt.cliques[c].begin(), alt.cliques[c].end(), pair.begin(),
                               pair.end()))
                continue;
            const int k = static_cast<int>(alt.cliques[c].size());
            const auto pos_u = std::lower_bound(alt.cliques[c].begin(), alt.cliques[c].end(),
                                                pair[0]) -
                               alt.cliques[c].begin();
            const auto pos_v = std::lower_bound(alt.cliques[c].begin(), alt.cliques[c].end(),
                                                pair[1]) -
                               alt.cliques[c].begin();
            for (std::uint64_t i = 0; i < (std::uint64_t{1} << k); ++i) {
                const int su = ((i >> (k - 1 - pos_u)) & 1u) ? +1 : -1;
                const int sv = ((i >> (k - 1 - pos_v)) & 1u) ? +1 : -1;
                obj[alt.clique_offset[c] + static_cast<int>(i)] += term.coeff * su * sv;
            }
            break;
        }
    }
    for (const auto& [col, coeff] : obj)
        if (coeff != 0)
            alt.model.objective.emplace_back(col, coeff);
    EXPECT_EQ(solve(alt.model).value, reference);
}

TEST(NdLp, OptimalBehaviorPassesNoDisturbance) {
    const auto c5 = cycle_expression(5);
    const NdOptimum opt = nd_maximize(c5.scenario, c5.expression);
    // Behavior::create already enforces the check; run it again explicitly.
    EXPECT_TRUE(check_no_disturbance(opt.behavior.scenario(), opt.behavior.tables()).ok());
    EXPECT_EQ(evaluate_expression(c5.expression, opt.behavior), Rational(5));
}

TEST(NdLp, IsolatedMeasurementGetsASingletonClique) {
    const Scenario s = Scenario::create({"A", "B", "C"}, {{"A", "B"}});
    const Expression e = Expression::create(s, "edge", {{0, 1, Rational(1)}});
    const NdLp nd = build_nd_lp(s, &e);
    EXPECT_EQ(nd.model.num_vars, 6);  // one pair clique (4) + singleton {C} (2)
    const NdOptimum opt = nd_maximize(s, e);
    EXPECT_EQ(opt.value, Rational(1));
    EXPECT_EQ(opt.behavior.cliques().size(), 2u);
}

TEST(NdLp, LpCapEnforced) {
    const auto c5 = cycle_expression(5);
    EXPECT_THROW(nd_maximize(c5.scenario, c5.expression, {}, {}, 8), resource_error);
}

TEST(Extend, PrBoxPairPinsAreFeasibleOnTwoParties) {
    const auto chsh = chsh_chain_expression(2);
    const Behavior box = pr_box();
    std::vector<Pin> pins;
    for (std::size_t c = 0; c < box.cliques().size(); ++c)
        pins.push_back({box.tables()[c]});
    const ExtendResult result = extend_feasibility(chsh.scenario, pins);
    EXPECT_TRUE(result.feasible);
}

TEST(Extend, ContradictoryPinInfeasibleWithRows) {
    const auto chsh = chsh_chain_expression(2);
    // Pin <A1B1> twice with incompatible tables via overlapping supports:
    // first pin the pair to perfect correlation, then pin A1 to a
    // deterministic +1 while the pair table forces a uniform A1 marginal.
    std::vector<Pin> pins;
    pins.push_back({ProbabilityTable::create(
        {chsh.scenario.require("A1"), chsh.scenario.require("B1")},
        {Rational(1, 2), Rational(0), Rational(0), Rational(1, 2)})});
    pins.push_back({ProbabilityTable::create({chsh.scenario.require("A1")},
                                             {Rational(0), Rational(1)})});
    const ExtendResult result = extend_feasibility(chsh.scenario, pins);
    ASSERT_FALSE(result.feasible);
    EXPECT_FALSE(result.conflict_rows.empty());
}
