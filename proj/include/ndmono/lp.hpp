#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ndmono/rational.hpp"

namespace ndmono {

// Equality-form linear program: maximize c'x subject to Ax = b, x >= 0.
struct LPModel {
    struct Row {
        std::string name;
        std::vector<std::pair<int, Rational>> coeffs;  // column index -> coefficient
        Rational rhs;
    };
    int num_vars = 0;
    std::vector<std::string> var_names;
    std::vector<Row> equalities;
    std::vector<std::pair<int, Rational>> objective;
};

enum class LPStatus { optimal, infeasible, unbounded };

struct LPSolution {
    LPStatus status = LPStatus::infeasible;
    Rational value;
    std::vector<Rational> assignment;
    // Rows participating in a Farkas-style infeasibility certificate.
    std::vector<int> conflict_rows;
    long pivots = 0;
};

struct SolveOptions {
    bool presolve = true;
    long iteration_limit = 2000000;
    int bland_after_degenerate = 64;
};

namespace detail {

using SparseRow = std::vector<std::pair<int, Rational>>;  // sorted by column, no zeros

inline SparseRow canonical_sparse(const std::vector<std::pair<int, Rational>>& coeffs) {
    std::map<int, Rational> acc;
    for (const auto& [col, coeff] : coeffs)
        acc[col] += coeff;
    SparseRow row;
    for (auto& [col, coeff] : acc)
        if (coeff != 0)
            row.emplace_back(col, std::move(coeff));
    return row;
}

inline void add_scaled(SparseRow& target, const SparseRow& source, const Rational& factor) {
    SparseRow merged;
    merged.reserve(target.size() + source.size());
    std::size_t i = 0, j = 0;
    while (i < target.size() || j < source.size()) {
        if (j == source.size() || (i < target.size() && target[i].first < source[j].first)) {
            merged.push_back(std::move(target[i++]));
        } else if (i == target.size() || source[j].first < target[i].first) {
            Rational v = factor * source[j].second;
            if (v != 0)
                merged.emplace_back(source[j].first, std::move(v));
            ++j;
        } else {
            Rational v = target[i].second + factor * source[j].second;
            if (v != 0)
                merged.emplace_back(target[i].first, std::move(v));
            ++i;
            ++j;
        }
    }
    target = std::move(merged);
}

struct PresolveResult {
    std::vector<int> kept_rows;
    bool infeasible = false;
    std::vector<int> conflict_rows;
};

// Selects a maximal linearly independent subset of the equality rows by
// sparse exact elimination. Dependent rows with consistent right-hand sides
// are dropped; an inconsistent dependency yields an infeasibility conflict
// naming the original rows involved.
inline PresolveResult select_independent_rows(const LPModel& model) {
    PresolveResult result;
    struct EchelonRow {
        SparseRow row;
        Rational rhs;
        std::set<int> support;  // original rows combined into this one
    };
    std::map<int, EchelonRow> echelon;  // keyed by pivot column
    for (std::size_t r = 0; r < model.equalities.size(); ++r) {
        SparseRow row = canonical_sparse(model.equalities[r].coeffs);
        Rational rhs = model.equalities[r].rhs;
        std::set<int> support{static_cast<int>(r)};
        bool kept = false;
        while (!row.empty()) {
            const int lead = row.front().first;
            auto it = echelon.find(lead);
            if (it == echelon.end()) {
                echelon.emplace(lead, EchelonRow{std::move(row), std::move(rhs), support});
                result.kept_rows.push_back(static_cast<int>(r));
                kept = true;
                break;
            }
            const Rational factor = -row.front().second / it->second.row.front().second;
            add_scaled(row, it->second.row, factor);
            rhs += factor * it->second.rhs;
            support.insert(it->second.support.begin(), it->second.support.end());
        }
        if (!kept && rhs != 0) {
            result.infeasible = true;
            result.conflict_rows.assign(support.begin(), support.end());
            return result;
        }
    }
    return result;
}

}  // namespace detail

// Exact primal simplex on a dense tableau. Phase I uses one artificial
// variable per row; phase II runs on structural columns only. The entering
// rule is largest reduced cost with lowest-index ties, switching to Bland's
// rule after a run of degenerate pivots, which guarantees termination.
class SimplexSolver {
  public:
    SimplexSolver(const LPModel& model, const SolveOptions& opts) : model_(model), opts_(opts) {}

    LPSolution run() {
        LPSolution solution;
        std::vector<int> kept;
        if (opts_.presolve) {
            auto pre = detail::select_independent_rows(model_);
            if (pre.infeasible) {
                solution.status = LPStatus::infeasible;
                solution.conflict_rows = pre.conflict_rows;
                return solution;
            }
            kept = std::move(pre.kept_rows);
        } else {
            kept.resize(model_.equalities.size());
            for (std::size_t i = 0; i < kept.size(); ++i)
                kept[i] = static_cast<int>(i);
        }
        build_tableau(kept);
        if (!phase_one(solution, kept))
            return solution;
        drop_artificials();
        phase_two(solution);
        return solution;
    }

  private:
    const LPModel& model_;
    const SolveOptions& opts_;

    int n_ = 0;                             // structural columns
    int art_ = 0;                           // artificial columns (fixed at build)
    int m_ = 0;                             // live tableau rows
    std::vector<std::vector<Rational>> t_;  // rows of width n_ + art_ + 1 (rhs last)
    std::vector<Rational> obj_;             // reduced-cost row, same width
    std::vector<int> basis_;
    std::vector<char> enterable_;
    long pivots_ = 0;
    int degenerate_streak_ = 0;
    bool bland_ = false;

    int rhs_col() const { return n_ + art_; }

    void build_tableau(const std::vector<int>& kept) {
        n_ = model_.num_vars;
        art_ = static_cast<int>(kept.size());
        m_ = art_;
        t_.assign(m_, std::vector<Rational>(n_ + art_ + 1, Rational(0)));
        basis_.resize(m_);
        enterable_.assign(n_ + art_, 1);
        for (int i = 0; i < m_; ++i) {
            const auto& row = model_.equalities[static_cast<std::size_t>(kept[i])];
            const int flip = row.rhs < 0 ? -1 : 1;
            for (const auto& [col, coeff] : row.coeffs) {
                if (col < 0 || col >= n_)
                    throw input_error("LP row references an invalid variable index");
                t_[i][col] += flip * coeff;
            }
            t_[i][rhs_col()] = flip * row.rhs;
            t_[i][n_ + i] = 1;
            basis_[i] = n_ + i;
        }
    }

    void pivot(int row, int col) {
        const Rational p = t_[row][col];
        for (auto& v : t_[row])
            v /= p;
        for (int i = 0; i < m_; ++i) {
            if (i == row || t_[i][col] == 0)
                continue;
            const Rational f = t_[i][col];
            for (int j = 0; j <= rhs_col(); ++j)
                if (t_[row][j] != 0)
                    t_[i][j] -= f * t_[row][j];
        }
        if (obj_[col] != 0) {
            const Rational f = obj_[col];
            for (int j = 0; j <= rhs_col(); ++j)
                if (t_[row][j] != 0)
                    obj_[j] -= f * t_[row][j];
        }
        basis_[row] = col;
        ++pivots_;
    }

    int choose_entering() const {
        int best = -1;
        for (int j = 0; j < n_ + art_; ++j) {
            if (!enterable_[j] || obj_[j] <= 0)
                continue;
            if (bland_)
                return j;
            if (best == -1 || obj_[j] > obj_[best])
                best = j;
        }
        return best;
    }

    int choose_leaving(int col) const {
        int best = -1;
        Rational best_ratio;
        for (int i = 0; i < m_; ++i) {
            if (t_[i][col] <= 0)
                continue;
            Rational ratio = t_[i][rhs_col()] / t_[i][col];
            if (best == -1 || ratio < best_ratio ||
                (ratio == best_ratio && basis_[i] < basis_[best])) {
                best = i;
                best_ratio = std::move(ratio);
            }
        }
        return best;
    }

    // Runs pivots until no entering column remains. Returns false on
    // unbounded (only possible in phase II).
    bool iterate() {
        while (true) {
            if (pivots_ > opts_.iteration_limit)
                throw resource_error("simplex iteration limit exceeded");
            const int col = choose_entering();
            if (col == -1)
                return true;
            const int row = choose_leaving(col);
            if (row == -1)
                return false;
            const bool degenerate = t_[row][rhs_col()] == 0;
            const int leaving = basis_[row];
            pivot(row, col);
            if (leaving >= n_)
                enterable_[leaving] = 0;  // artificials never re-enter
            if (degenerate) {
                if (++degenerate_streak_ > opts_.bland_after_degenerate)
                    bland_ = true;
            } else {
                degenerate_streak_ = 0;
                bland_ = false;
            }
        }
    }

    bool phase_one(LPSolution& solution, const std::vector<int>& kept) {
        // Phase-I cost: 0 on structural, -1 on artificial columns. Under the
        // all-artificial basis the reduced cost of a structural column is its
        // column sum, and obj_[rhs] equals the total infeasibility.
        obj_.assign(static_cast<std::size_t>(rhs_col()) + 1, Rational(0));
        for (int j = 0; j <= rhs_col(); ++j) {
            if (j >= n_ && j < rhs_col())
                continue;
            Rational sum(0);
            for (int i = 0; i < m_; ++i)
                sum += t_[i][j];
            obj_[j] = sum;
        }
        degenerate_streak_ = 0;
        bland_ = false;
        if (!iterate())
            throw resource_error("phase I reported unbounded; model is malformed");
        const Rational infeasibility = obj_[rhs_col()];
        if (infeasibility > 0) {
            solution.status = LPStatus::infeasible;
            solution.pivots = pivots_;
            // Farkas certificate: y_i = -1 - reduced_cost(artificial_i).
            std::vector<int> conflict;
            for (int i = 0; i < art_; ++i) {
                const Rational y = Rational(-1) - obj_[n_ + i];
                if (y != 0)
                    conflict.push_back(kept[static_cast<std::size_t>(i)]);
            }
            solution.conflict_rows = std::move(conflict);
            return false;
        }
        return true;
    }

    // Pivot basic artificials (necessarily at value zero) onto structural
    // columns, or drop their rows as redundant.
    void drop_artificials() {
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < n_)
                continue;
            int col = -1;
            for (int j = 0; j < n_; ++j)
                if (t_[i][j] != 0) {
                    col = j;
                    break;
                }
            if (col != -1) {
                const int leaving = basis_[i];
                pivot(i, col);
                enterable_[leaving] = 0;
            }
        }
        std::vector<std::vector<Rational>> rows;
        std::vector<int> basis;
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] >= n_)
                continue;  // redundant zero row
            rows.push_back(std::move(t_[i]));
            basis.push_back(basis_[i]);
        }
        t_ = std::move(rows);
        basis_ = std::move(basis);
        m_ = static_cast<int>(t_.size());
        for (int j = n_; j < n_ + art_; ++j)
            enterable_[j] = 0;
    }

    void phase_two(LPSolution& solution) {
        std::vector<Rational> cost(static_cast<std::size_t>(n_), Rational(0));
        for (const auto& [col, coeff] : model_.objective) {
            if (col < 0 || col >= n_)
                throw input_error("LP objective references an invalid variable index");
            cost[static_cast<std::size_t>(col)] += coeff;
        }
        obj_.assign(static_cast<std::size_t>(rhs_col()) + 1, Rational(0));
        for (int j = 0; j < n_; ++j) {
            Rational reduced = cost[static_cast<std::size_t>(j)];
            for (int i = 0; i < m_; ++i)
                if (t_[i][j] != 0)
                    reduced -= cost[static_cast<std::size_t>(basis_[i])] * t_[i][j];
            obj_[j] = reduced;
        }
        Rational value(0);
        for (int i = 0; i < m_; ++i)
            value += cost[static_cast<std::size_t>(basis_[i])] * t_[i][rhs_col()];
        obj_[rhs_col()] = -value;
        degenerate_streak_ = 0;
        bland_ = false;
        if (!iterate()) {
            solution.status = LPStatus::unbounded;
            solution.pivots = pivots_;
            return;
        }
        solution.status = LPStatus::optimal;
        solution.assignment.assign(static_cast<std::size_t>(n_), Rational(0));
        for (int i = 0; i < m_; ++i)
            if (basis_[i] < n_)
                solution.assignment[static_cast<std::size_t>(basis_[i])] = t_[i][rhs_col()];
        Rational objective(0);
        for (const auto& [col, coeff] : model_.objective)
            objective += coeff * solution.assignment[static_cast<std::size_t>(col)];
        solution.value = objective;
        solution.pivots = pivots_;
    }
};

inline LPSolution solve(const LPModel& model, const SolveOptions& opts = {}) {
    return SimplexSolver(model, opts).run();
}

}  // namespace ndmono
