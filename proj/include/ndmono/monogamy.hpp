#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ndmono/bounds.hpp"
#include "ndmono/graph.hpp"
#include "ndmono/nd_lp.hpp"
#include "ndmono/rational.hpp"
#include "ndmono/scenario.hpp"

namespace ndmono {

// A family of expressions over one composed compatibility scenario, linked
// through measurements that appear in more than one expression.
struct MonogamyInstance {
    Scenario scenario;
    std::vector<Expression> expressions;
    std::vector<Vertex> shared;
    std::string kind = "custom";  // one-to-many | contextual-bell | multi-cycle | loop | chain | custom
    std::vector<std::string> notes;
};

inline std::vector<Vertex> shared_measurements(const std::vector<Expression>& expressions) {
    std::map<Vertex, int> uses;
    for (const Expression& e : expressions)
        for (Vertex v : e.vertices())
            ++uses[v];
    std::vector<Vertex> shared;
    for (const auto& [v, n] : uses)
        if (n >= 2)
            shared.push_back(v);
    return shared;
}

namespace detail {

inline std::string bob_prefix(int i) {
    if (i < 25)
        return std::string(1, static_cast<char>('B' + i));
    return "Q" + std::to_string(i) + "_";
}

// Fast exact maximum over deterministic assignments, restricted to the
// measurements the expression actually uses.
inline Rational classical_value(const Expression& expr) {
    const std::vector<Vertex> vs = expr.vertices();
    const int k = static_cast<int>(vs.size());
    if (k > 30)
        throw resource_error("deterministic enumeration capped at 30 measurements");
    std::map<Vertex, int> pos;
    for (int i = 0; i < k; ++i)
        pos[vs[static_cast<std::size_t>(i)]] = i;
    bool integral = true;
    Integer abs_sum(0);
    for (const Term& t : expr.terms()) {
        if (denominator(t.coeff) != 1)
            integral = false;
        abs_sum += abs(numerator(t.coeff));
    }
    const std::uint64_t total = std::uint64_t{1} << k;
    if (integral && abs_sum < Integer(1) << 60) {
        std::vector<std::pair<std::pair<int, int>, long long>> terms;
        for (const Term& t : expr.terms())
            terms.push_back({{pos[t.u], pos[t.v]},
                             numerator(t.coeff).convert_to<long long>()});
        long long best = 0;
        bool first = true;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            long long value = 0;
            for (const auto& [uv, c] : terms) {
                const int su = (mask >> uv.first) & 1u ? 1 : -1;
                const int sv = (mask >> uv.second) & 1u ? 1 : -1;
                value += c * su * sv;
            }
            if (first || value > best) {
                best = value;
                first = false;
            }
        }
        return Rational(best);
    }
    Rational best;
    bool first = true;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        Rational value(0);
        for (const Term& t : expr.terms()) {
            const int su = (mask >> pos[t.u]) & 1u ? 1 : -1;
            const int sv = (mask >> pos[t.v]) & 1u ? 1 : -1;
            value += t.coeff * su * sv;
        }
        if (first || value > best) {
            best = value;
            first = false;
        }
    }
    return best;
}

}  // namespace detail

// One Alice running k generalized CHSH experiments with k separated Bobs.
// Alice's slot sequence in experiment i is A1, A2, ..., A_{m_i-1}, then the
// globally last measurement, so every experiment shares A1 and A2 and the
// largest experiments share their closing arc as well.
inline MonogamyInstance build_one_to_many(const std::vector<int>& sizes) {
    if (sizes.empty())
        throw input_error("one-to-many instance needs at least one experiment");
    for (int m : sizes)
        if (m < 2)
            throw input_error("generalized CHSH needs m >= 2");
    const int k = static_cast<int>(sizes.size());
    const int m_max = *std::max_element(sizes.begin(), sizes.end());
    std::vector<std::string> labels;
    for (int j = 1; j <= m_max; ++j)
        labels.push_back("A" + std::to_string(j));
    std::vector<std::vector<std::string>> bob(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i)
        for (int j = 1; j <= sizes[static_cast<std::size_t>(i)]; ++j) {
            bob[static_cast<std::size_t>(i)].push_back(detail::bob_prefix(i) + std::to_string(j));
            labels.push_back(bob[static_cast<std::size_t>(i)].back());
        }
    std::vector<std::pair<std::string, std::string>> compat;
    for (int j = 1; j <= m_max; ++j)
        for (int i = 0; i < k; ++i)
            for (const auto& b : bob[static_cast<std::size_t>(i)])
                compat.emplace_back("A" + std::to_string(j), b);
    for (int i = 0; i < k; ++i)
        for (int l = i + 1; l < k; ++l)
            for (const auto& bi : bob[static_cast<std::size_t>(i)])
                for (const auto& bl : bob[static_cast<std::size_t>(l)])
                    compat.emplace_back(bi, bl);
    MonogamyInstance inst;
    inst.scenario = Scenario::create(labels, compat);
    for (int i = 0; i < k; ++i) {
        const int m = sizes[static_cast<std::size_t>(i)];
        std::vector<std::string> slot;
        for (int j = 1; j < m; ++j)
            slot.push_back("A" + std::to_string(j));
        slot.push_back("A" + std::to_string(m >= 3 ? m_max : 2));
        std::vector<Term> terms;
        for (int j = 0; j < m; ++j) {
            terms.push_back({inst.scenario.require(slot[static_cast<std::size_t>(j)]),
                             inst.scenario.require(bob[static_cast<std::size_t>(i)]
                                                      [static_cast<std::size_t>(j)]),
                             Rational(1)});
            terms.push_back({inst.scenario.require(bob[static_cast<std::size_t>(i)]
                                                      [static_cast<std::size_t>(j)]),
                             inst.scenario.require(slot[static_cast<std::size_t>((j + 1) % m)]),
                             Rational(j + 1 == m ? -1 : 1)});
        }
        inst.expressions.push_back(Expression::create(
            inst.scenario, "B" + std::to_string(i + 1) + "(" + std::to_string(2 * m) + ")",
            std::move(terms)));
    }
    inst.shared = shared_measurements(inst.expressions);
    inst.kind = "one-to-many";
    return inst;
}

// Cycle inequality on Alice's system plus a CHSH with a separated Bob whose
// measurements are compatible with every A_i; the experiments share the
// cycle-adjacent pair A1, A2.
inline MonogamyInstance build_contextual_bell(int n) {
    if (n < 4)
        throw input_error("contextual-Bell instance needs cycle length n >= 4");
    std::vector<std::string> labels;
    for (int i = 1; i <= n; ++i)
        labels.push_back("A" + std::to_string(i));
    labels.push_back("B1");
    labels.push_back("B2");
    std::vector<std::pair<std::string, std::string>> compat;
    for (int i = 0; i < n; ++i)
        compat.emplace_back("A" + std::to_string(i + 1), "A" + std::to_string((i + 1) % n + 1));
    for (int i = 1; i <= n; ++i) {
        compat.emplace_back("A" + std::to_string(i), "B1");
        compat.emplace_back("A" + std::to_string(i), "B2");
    }
    MonogamyInstance inst;
    inst.scenario = Scenario::create(labels, compat);
    std::vector<Term> cycle;
    for (int i = 0; i < n; ++i)
        cycle.push_back({i, (i + 1) % n, Rational(i + 1 == n ? -1 : 1)});
    inst.expressions.push_back(
        Expression::create(inst.scenario, "C(" + std::to_string(n) + ")", std::move(cycle)));
    const Vertex a1 = 0, a2 = 1, b1 = n, b2 = n + 1;
    inst.expressions.push_back(Expression::create(
        inst.scenario, "CHSH",
        {{a1, b1, Rational(1)}, {b1, a2, Rational(1)}, {a2, b2, Rational(1)}, {b2, a1, Rational(-1)}}));
    inst.shared = shared_measurements(inst.expressions);
    inst.kind = "contextual-bell";
    return inst;
}

// k cycle inequalities sharing two measurements S1, S2 (at cycle positions 0
// and ceil(N_i/2) by default); measurements from different cycles other than
// the shared two are pairwise compatible.
inline MonogamyInstance build_multi_cycle(const std::vector<int>& sizes,
                                          std::optional<std::vector<int>> shared_positions = {}) {
    if (sizes.size() < 2)
        throw input_error("multi-cycle instance needs at least two cycles");
    for (int n : sizes)
        if (n < 4)
            throw input_error("multi-cycle instance needs cycle lengths >= 4");
    const int k = static_cast<int>(sizes.size());
    std::vector<int> pos(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i)
        pos[static_cast<std::size_t>(i)] = (sizes[static_cast<std::size_t>(i)] + 1) / 2;
    if (shared_positions) {
        if (shared_positions->size() != sizes.size())
            throw input_error("one shared position per cycle expected");
        pos = *shared_positions;
        for (int i = 0; i < k; ++i)
            if (pos[static_cast<std::size_t>(i)] < 2 ||
                pos[static_cast<std::size_t>(i)] > sizes[static_cast<std::size_t>(i)] - 2)
                throw input_error("shared position must leave two arcs of length >= 2");
    }
    // Vertex names: cycle i position j is "C{i}_{j}"; shared are S1, S2.
    std::vector<std::string> labels{"S1", "S2"};
    std::vector<std::vector<std::string>> ring(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < sizes[static_cast<std::size_t>(i)]; ++j) {
            std::string name;
            if (j == 0)
                name = "S1";
            else if (j == pos[static_cast<std::size_t>(i)])
                name = "S2";
            else {
                name = "C" + std::to_string(i + 1) + "_" + std::to_string(j);
                labels.push_back(name);
            }
            ring[static_cast<std::size_t>(i)].push_back(name);
        }
    }
    std::set<std::pair<std::string, std::string>> compat;
    for (int i = 0; i < k; ++i) {
        const auto& r = ring[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < r.size(); ++j) {
            auto e = std::minmax(r[j], r[(j + 1) % r.size()]);
            compat.insert({e.first, e.second});
        }
    }
    for (int i = 0; i < k; ++i)
        for (int l = i + 1; l < k; ++l)
            for (const auto& u : ring[static_cast<std::size_t>(i)])
                for (const auto& v : ring[static_cast<std::size_t>(l)]) {
                    if (u == "S1" || u == "S2" || v == "S1" || v == "S2")
                        continue;
                    auto e = std::minmax(u, v);
                    compat.insert({e.first, e.second});
                }
    MonogamyInstance inst;
    inst.scenario = Scenario::create(
        labels, std::vector<std::pair<std::string, std::string>>(compat.begin(), compat.end()));
    for (int i = 0; i < k; ++i) {
        const auto& r = ring[static_cast<std::size_t>(i)];
        std::vector<Term> terms;
        for (std::size_t j = 0; j < r.size(); ++j)
            terms.push_back({inst.scenario.require(r[j]),
                             inst.scenario.require(r[(j + 1) % r.size()]),
                             Rational(j + 1 == r.size() ? -1 : 1)});
        inst.expressions.push_back(Expression::create(
            inst.scenario,
            "C" + std::to_string(i + 1) + "(" + std::to_string(r.size()) + ")", std::move(terms)));
    }
    inst.shared = shared_measurements(inst.expressions);
    inst.kind = "multi-cycle";
    return inst;
}

namespace detail {

// Party pools for ring/chain instances; party i's pool must serve both
// incident links.
inline MonogamyInstance build_party_links(const std::vector<int>& link_sizes, bool ring) {
    const int links = static_cast<int>(link_sizes.size());
    const int parties = ring ? links : links + 1;
    std::vector<int> pool(static_cast<std::size_t>(parties), 0);
    for (int i = 0; i < links; ++i) {
        const int m = link_sizes[static_cast<std::size_t>(i)];
        pool[static_cast<std::size_t>(i)] = std::max(pool[static_cast<std::size_t>(i)], m);
        pool[static_cast<std::size_t>((i + 1) % parties)] =
            std::max(pool[static_cast<std::size_t>((i + 1) % parties)], m);
    }
    std::vector<std::string> labels;
    std::vector<std::vector<std::string>> party(static_cast<std::size_t>(parties));
    for (int p = 0; p < parties; ++p)
        for (int j = 1; j <= pool[static_cast<std::size_t>(p)]; ++j) {
            party[static_cast<std::size_t>(p)].push_back("P" + std::to_string(p + 1) + "_" +
                                                         std::to_string(j));
            labels.push_back(party[static_cast<std::size_t>(p)].back());
        }
    std::vector<std::pair<std::string, std::string>> compat;
    for (int p = 0; p < parties; ++p)
        for (int q = p + 1; q < parties; ++q)
            for (const auto& u : party[static_cast<std::size_t>(p)])
                for (const auto& v : party[static_cast<std::size_t>(q)])
                    compat.emplace_back(u, v);
    MonogamyInstance inst;
    inst.scenario = Scenario::create(labels, compat);
    for (int i = 0; i < links; ++i) {
        const int m = link_sizes[static_cast<std::size_t>(i)];
        const auto& a = party[static_cast<std::size_t>(i)];
        const auto& b = party[static_cast<std::size_t>((i + 1) % parties)];
        std::vector<Term> terms;
        for (int j = 0; j < m; ++j) {
            terms.push_back({inst.scenario.require(a[static_cast<std::size_t>(j)]),
                             inst.scenario.require(b[static_cast<std::size_t>(j)]), Rational(1)});
            terms.push_back({inst.scenario.require(b[static_cast<std::size_t>(j)]),
                             inst.scenario.require(a[static_cast<std::size_t>((j + 1) % m)]),
                             Rational(j + 1 == m ? -1 : 1)});
        }
        inst.expressions.push_back(Expression::create(
            inst.scenario,
            "B" + std::to_string(i + 1) + std::to_string(ring ? (i + 1) % parties + 1 : i + 2) +
                "(" + std::to_string(2 * m) + ")",
            std::move(terms)));
    }
    inst.shared = shared_measurements(inst.expressions);
    return inst;
}

}  // namespace detail

// N parties around a ring, one generalized CHSH per adjacent pair; adjacent
// experiments share the common party's leading measurements.
inline MonogamyInstance build_loop(const std::vector<int>& link_sizes) {
    if (link_sizes.size() < 3)
        throw input_error("loop instance needs at least three parties");
    for (int m : link_sizes)
        if (m < 2)
            throw input_error("generalized CHSH needs m >= 2");
    MonogamyInstance inst = detail::build_party_links(link_sizes, true);
    inst.kind = "loop";
    return inst;
}

// CHSH chain over links+1 parties. Even link counts pair into adjacent
// monogamous couples; odd chains carry no such certificate.
inline MonogamyInstance build_chain(int links) {
    if (links < 2)
        throw input_error("chain instance needs at least two links");
    MonogamyInstance inst =
        detail::build_party_links(std::vector<int>(static_cast<std::size_t>(links), 2), false);
    inst.kind = "chain";
    if (links % 2 == 1)
        inst.notes.push_back(
            "odd link count: the chain bound 4n applies to even counts pairing into "
            "adjacent couples; an odd chain is expected to exceed its classical sum");
    return inst;
}

// ---------------------------------------------------------------------------
// Recombination: reassign terms between expressions, preserving the term
// multiset, so that every piece admits a chordal completion inside the
// compatibility graph and the classical-bound sum is unchanged.

struct PieceCertificate {
    Expression expression;
    Rational classical;
    std::vector<Vertex> elimination_order;
    std::vector<std::pair<Vertex, Vertex>> fill_edges;  // compatibility chords used
    std::string tag;
};

struct Recombination {
    std::vector<Expression> expressions;
    std::string scheme;
    std::vector<PieceCertificate> pieces;
    Rational recombined_sum;
};

namespace detail {

struct CycleView {
    std::vector<Vertex> vertices;  // cycle order
    std::vector<Term> terms;       // terms[i] joins vertices[i] and vertices[i+1 mod L]
};

inline std::optional<CycleView> cycle_view(const Expression& expr) {
    const auto vs = expr.vertices();
    const std::size_t n = vs.size();
    if (n < 3 || expr.terms().size() != n)
        return std::nullopt;
    std::map<Vertex, std::vector<Vertex>> adj;
    std::map<std::pair<Vertex, Vertex>, Term> term_of;
    for (const Term& t : expr.terms()) {
        adj[t.u].push_back(t.v);
        adj[t.v].push_back(t.u);
        term_of[ordered_pair(t.u, t.v)] = t;
    }
    for (auto& [v, nb] : adj) {
        if (nb.size() != 2)
            return std::nullopt;
        std::sort(nb.begin(), nb.end());
    }
    CycleView view;
    Vertex start = vs.front();
    Vertex prev = start;
    Vertex cur = adj[start][0];
    view.vertices.push_back(start);
    while (cur != start) {
        view.vertices.push_back(cur);
        const auto& nb = adj[cur];
        const Vertex next = nb[0] == prev ? nb[1] : nb[0];
        prev = cur;
        cur = next;
    }
    if (view.vertices.size() != n)
        return std::nullopt;
    for (std::size_t i = 0; i < n; ++i)
        view.terms.push_back(
            term_of[ordered_pair(view.vertices[i], view.vertices[(i + 1) % n])]);
    return view;
}

struct Arc {
    int start = 0;  // position in the cycle's term list
    int len = 0;
    Vertex from = 0;
    Vertex to = 0;
    bool has_negative = false;
};

inline Arc make_arc(const CycleView& view, int start_pos, int len) {
    const int n = static_cast<int>(view.vertices.size());
    Arc arc;
    arc.start = start_pos;
    arc.len = len;
    arc.from = view.vertices[static_cast<std::size_t>(start_pos)];
    arc.to = view.vertices[static_cast<std::size_t>((start_pos + len) % n)];
    for (int i = 0; i < len; ++i)
        if (view.terms[static_cast<std::size_t>((start_pos + i) % n)].coeff < 0)
            arc.has_negative = true;
    return arc;
}

// The two arcs of a cycle between vertices s and t, the s-to-t arc first.
inline std::optional<std::pair<Arc, Arc>> arcs_between(const CycleView& view, Vertex s, Vertex t) {
    const int n = static_cast<int>(view.vertices.size());
    int ps = -1, pt = -1;
    for (int i = 0; i < n; ++i) {
        if (view.vertices[static_cast<std::size_t>(i)] == s)
            ps = i;
        if (view.vertices[static_cast<std::size_t>(i)] == t)
            pt = i;
    }
    if (ps < 0 || pt < 0)
        return std::nullopt;
    const int len = (pt - ps + n) % n;
    return std::pair{make_arc(view, ps, len), make_arc(view, pt, n - len)};
}

// Terms of the arc in walk order, inverted if the walk must start at `from`.
inline std::vector<Term> arc_terms(const CycleView& view, const Arc& arc, Vertex from) {
    const int n = static_cast<int>(view.vertices.size());
    std::vector<Term> terms;
    for (int i = 0; i < arc.len; ++i)
        terms.push_back(view.terms[static_cast<std::size_t>((arc.start + i) % n)]);
    if (arc.from != from)
        std::reverse(terms.begin(), terms.end());
    return terms;
}

// Survivors of the cycle after removing the arc, in cyclic order starting
// just past the arc, followed by the donor terms closing the cycle.
inline std::vector<Term> splice(const CycleView& view, const Arc& removed,
                                const std::vector<Term>& donor) {
    const int n = static_cast<int>(view.vertices.size());
    std::vector<Term> terms;
    for (int i = 0; i < n - removed.len; ++i)
        terms.push_back(view.terms[static_cast<std::size_t>((removed.start + removed.len + i) % n)]);
    terms.insert(terms.end(), donor.begin(), donor.end());
    return terms;
}

}  // namespace detail

// Chordal-completion certificate for one expression inside the scenario's
// compatibility graph: an elimination order plus the compatibility chords
// used as fill. Fails (none) when no completion exists; too_large above the
// search cap.
inline CompletionSearch::Status certify_piece(const Scenario& scenario, const Expression& expr,
                                              PieceCertificate& out) {
    const ExperimentalGraph base = experimental_graph(expr);
    const auto& vs = base.vertices;
    const int k = static_cast<int>(vs.size());
    Graph allowed(k);
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            if (scenario.compatible(vs[static_cast<std::size_t>(i)], vs[static_cast<std::size_t>(j)]))
                allowed.add_edge(i, j);
    const CompletionSearch search = CompletionSearch::run(base.graph, allowed);
    if (search.status != CompletionSearch::Status::found)
        return search.status;
    out.expression = expr;
    out.classical = detail::classical_value(expr);
    for (int v : search.completion.order.order)
        out.elimination_order.push_back(vs[static_cast<std::size_t>(v)]);
    for (const auto& [a, b] : search.completion.fill)
        out.fill_edges.emplace_back(vs[static_cast<std::size_t>(a)], vs[static_cast<std::size_t>(b)]);
    return CompletionSearch::Status::found;
}

namespace detail {

// Try one assignment of donor arcs: expression i gives up `mine[i]` and
// receives the donor terms. Validates chordal completion of every piece and
// conservation of the classical-bound sum.
inline std::optional<Recombination> try_exchange(const MonogamyInstance& inst,
                                                 const std::vector<CycleView>& views,
                                                 const std::vector<Arc>& mine,
                                                 const std::vector<std::vector<Term>>& donor,
                                                 const std::string& scheme,
                                                 const Rational& classical_sum) {
    Recombination rec;
    rec.scheme = scheme;
    for (std::size_t i = 0; i < views.size(); ++i) {
        std::vector<Term> terms = splice(views[i], mine[i], donor[i]);
        try {
            rec.expressions.push_back(Expression::create(
                inst.scenario, inst.expressions[i].name() + "'", std::move(terms)));
        } catch (const input_error&) {
            return std::nullopt;  // duplicate pair after splice
        }
    }
    Rational sum(0);
    for (std::size_t i = 0; i < rec.expressions.size(); ++i) {
        PieceCertificate piece;
        if (certify_piece(inst.scenario, rec.expressions[i], piece) !=
            CompletionSearch::Status::found)
            return std::nullopt;
        sum += piece.classical;
        rec.pieces.push_back(std::move(piece));
    }
    if (sum != classical_sum)
        return std::nullopt;
    rec.recombined_sum = sum;
    return rec;
}

}  // namespace detail

// Searches the implemented exchange schemes in a fixed order: the identity,
// then cyclic arc exchanges through each pair of measurements shared by all
// expressions (count-preserving equal-length arcs first, the arc carrying
// the negative term first among those, then the reversed cycle direction and
// the unequal-length arc swaps), and for an even number of expressions the
// recombination of consecutive disjoint pairs. Returns nullopt when no
// scheme yields chordal pieces with the original bound sum.
inline std::optional<Recombination> recombine(const MonogamyInstance& inst) {
    const std::size_t k = inst.expressions.size();
    Rational classical_sum(0);
    for (const Expression& e : inst.expressions)
        classical_sum += detail::classical_value(e);

    // Identity: every expression already admits a chordal completion.
    {
        Recombination rec;
        rec.scheme = "identity (each expression's compatibility graph is chordally completable)";
        rec.expressions = inst.expressions;
        bool ok = true;
        Rational sum(0);
        for (const Expression& e : inst.expressions) {
            PieceCertificate piece;
            if (certify_piece(inst.scenario, e, piece) != CompletionSearch::Status::found) {
                ok = false;
                break;
            }
            sum += piece.classical;
            rec.pieces.push_back(std::move(piece));
        }
        if (ok) {
            rec.recombined_sum = sum;
            return rec;
        }
    }
    if (k < 2)
        return std::nullopt;

    std::vector<detail::CycleView> views;
    for (const Expression& e : inst.expressions) {
        auto view = detail::cycle_view(e);
        if (!view)
            return std::nullopt;  // exchange schemes are defined for cycle expressions
        views.push_back(std::move(*view));
    }

    // Measurements present in every cycle.
    std::vector<Vertex> common;
    for (Vertex v : inst.expressions.front().vertices()) {
        bool everywhere = true;
        for (std::size_t i = 1; i < k && everywhere; ++i) {
            const auto vs = inst.expressions[i].vertices();
            everywhere = std::binary_search(vs.begin(), vs.end(), v);
        }
        if (everywhere)
            common.push_back(v);
    }

    const int directions = k == 2 ? 1 : 2;
    for (const bool require_equal : {true, false}) {
        for (int rule = 0; rule < 4; ++rule) {
            for (std::size_t a = 0; a < common.size(); ++a) {
                for (std::size_t b = a + 1; b < common.size(); ++b) {
                    std::vector<detail::Arc> chosen;
                    bool usable = true;
                    for (std::size_t i = 0; i < k && usable; ++i) {
                        const auto arcs = detail::arcs_between(views[i], common[a], common[b]);
                        if (!arcs || arcs->first.len == 0 || arcs->second.len == 0) {
                            usable = false;
                            break;
                        }
                        switch (rule) {
                            case 0:  // the arc carrying the negative terms
                                if (arcs->first.has_negative && !arcs->second.has_negative)
                                    chosen.push_back(arcs->first);
                                else if (arcs->second.has_negative && !arcs->first.has_negative)
                                    chosen.push_back(arcs->second);
                                else
                                    usable = false;
                                break;
                            case 1:  // its complement
                                if (arcs->first.has_negative && !arcs->second.has_negative)
                                    chosen.push_back(arcs->second);
                                else if (arcs->second.has_negative && !arcs->first.has_negative)
                                    chosen.push_back(arcs->first);
                                else
                                    usable = false;
                                break;
                            case 2:
                                chosen.push_back(arcs->first);
                                break;
                            default:
                                chosen.push_back(arcs->second);
                                break;
                        }
                    }
                    if (!usable)
                        continue;
                    if (require_equal) {
                        for (std::size_t i = 1; i < k; ++i)
                            if (chosen[i].len != chosen[0].len)
                                usable = false;
                        if (!usable)
                            continue;
                    }
                    for (int dir = 0; dir < directions; ++dir) {
                        std::vector<std::vector<Term>> donor(k);
                        for (std::size_t i = 0; i < k; ++i) {
                            const std::size_t j =
                                dir == 0 ? (i + 1) % k : (i + k - 1) % k;
                            donor[i] = detail::arc_terms(views[j], chosen[j], chosen[i].from);
                        }
                        const std::string scheme =
                            std::string(dir == 0 ? "cyclic" : "reversed cyclic") +
                            " exchange of the " +
                            (rule == 0 ? "negative-term arcs"
                                       : rule == 1 ? "positive arcs" : "arcs") +
                            " between {" + inst.scenario.label(common[a]) + "," +
                            inst.scenario.label(common[b]) + "}" +
                            (require_equal ? "" : " (piece sizes change)");
                        if (auto rec = detail::try_exchange(inst, views, chosen, donor, scheme,
                                                            classical_sum))
                            return rec;
                    }
                }
            }
        }
    }

    // Even expression counts: recombine consecutive disjoint pairs.
    if (k >= 4 && k % 2 == 0) {
        Recombination rec;
        rec.scheme = "disjoint adjacent pairs, each recombined independently";
        Rational sum(0);
        bool ok = true;
        for (std::size_t p = 0; p + 1 < k && ok; p += 2) {
            MonogamyInstance pair;
            pair.scenario = inst.scenario;
            pair.expressions = {inst.expressions[p], inst.expressions[p + 1]};
            pair.shared = shared_measurements(pair.expressions);
            auto sub = recombine(pair);
            if (!sub || sub->expressions.size() != 2) {
                ok = false;
                break;
            }
            for (std::size_t i = 0; i < 2; ++i) {
                sub->pieces[i].tag = "pair (" + std::to_string(p + 1) + "," +
                                     std::to_string(p + 2) + ")";
                rec.expressions.push_back(sub->expressions[i]);
                sum += sub->pieces[i].classical;
                rec.pieces.push_back(std::move(sub->pieces[i]));
            }
        }
        if (ok && sum == classical_sum) {
            rec.recombined_sum = sum;
            return rec;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Certification

struct StructuralCertificate {
    enum class Kind { direct, pairwise_doubling, none };
    Kind kind = Kind::none;
    std::string scheme;
    std::vector<PieceCertificate> pieces;
    std::optional<Rational> recombined_sum;  // direct certificates only
    std::vector<std::string> notes;
    bool ok() const { return kind != Kind::none; }
};

enum class LpMode { automatic, off, forced };

struct CertifyOptions {
    LpMode lp = LpMode::automatic;
    int lp_cap = 5000;
    SolveOptions solve;
};

struct MonogamyReport {
    enum class Verdict { monogamous, not_monogamous, undecided };

    Rational classical_sum;
    std::vector<Rational> expression_bounds;
    StructuralCertificate structural;
    std::optional<Rational> lp_optimum;
    long lp_pivots = 0;
    Verdict verdict = Verdict::undecided;
    std::string verdict_basis;
    std::vector<std::string> notes;
};

namespace detail {

// The doubling argument of ring instances: if every cyclically adjacent
// pair is monogamous, twice the total is bounded by twice the bound sum.
inline std::optional<StructuralCertificate> pairwise_doubling(const MonogamyInstance& inst) {
    const std::size_t k = inst.expressions.size();
    if (k < 3)
        return std::nullopt;
    StructuralCertificate cert;
    cert.kind = StructuralCertificate::Kind::pairwise_doubling;
    cert.scheme = "pairwise doubling: every cyclically adjacent pair recombines chordally, "
                  "so twice the sum is bounded by twice the classical sum";
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = (i + 1) % k;
        MonogamyInstance pair;
        pair.scenario = inst.scenario;
        pair.expressions = {inst.expressions[i], inst.expressions[j]};
        pair.shared = shared_measurements(pair.expressions);
        if (pair.shared.size() < 2)
            return std::nullopt;
        auto sub = recombine(pair);
        if (!sub)
            return std::nullopt;
        for (auto& piece : sub->pieces) {
            piece.tag = "pair (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
            cert.pieces.push_back(std::move(piece));
        }
    }
    return cert;
}

}  // namespace detail

inline Expression combined_expression(const MonogamyInstance& inst) {
    std::map<std::pair<Vertex, Vertex>, Term> acc;
    for (const Expression& e : inst.expressions)
        for (const Term& t : e.terms()) {
            auto [it, inserted] = acc.emplace(ordered_pair(t.u, t.v), t);
            if (!inserted)
                it->second.coeff += t.coeff;
        }
    std::vector<Term> terms;
    for (auto& [key, t] : acc)
        if (t.coeff != 0)
            terms.push_back(t);
    return Expression::create(inst.scenario, "sum", std::move(terms));
}

inline int nd_variable_count(const Scenario& scenario) {
    long long count = 0;
    for (const auto& clique : maximal_cliques(compatibility_graph(scenario))) {
        if (clique.size() > ProbabilityTable::kMaxSupport)
            return std::numeric_limits<int>::max();
        count += 1LL << clique.size();
        if (count > std::numeric_limits<int>::max())
            return std::numeric_limits<int>::max();
    }
    return static_cast<int>(count);
}

// Full pipeline: per-expression classical bounds, the structural
// (recombination + chordality) certificate, and the exact LP optimum over
// the no-disturbance polytope. The LP equality is authoritative for the
// verdict; with the LP skipped, a complete structural certificate already
// proves the relation and is reported as the basis.
inline MonogamyReport certify(const MonogamyInstance& inst, const CertifyOptions& opts = {}) {
    if (inst.expressions.empty())
        throw input_error("monogamy instance has no expressions");
    MonogamyReport report;
    report.notes = inst.notes;
    report.classical_sum = 0;
    for (const Expression& e : inst.expressions) {
        report.expression_bounds.push_back(detail::classical_value(e));
        report.classical_sum += report.expression_bounds.back();
    }

    if (auto direct = recombine(inst)) {
        report.structural.kind = StructuralCertificate::Kind::direct;
        report.structural.scheme = direct->scheme;
        report.structural.pieces = std::move(direct->pieces);
        report.structural.recombined_sum = direct->recombined_sum;
    } else if (auto doubled = detail::pairwise_doubling(inst)) {
        report.structural = std::move(*doubled);
    } else {
        report.structural.kind = StructuralCertificate::Kind::none;
        report.structural.notes.push_back(
            "no chordal recombination found under the implemented exchange schemes");
    }

    bool run_lp = false;
    switch (opts.lp) {
        case LpMode::off:
            report.notes.push_back("LP cross-check disabled");
            break;
        case LpMode::forced:
            run_lp = true;
            break;
        case LpMode::automatic: {
            const int vars = nd_variable_count(inst.scenario);
            if (vars <= opts.lp_cap)
                run_lp = true;
            else
                report.notes.push_back("LP skipped: " + std::to_string(vars) +
                                       " variables exceed the cap of " +
                                       std::to_string(opts.lp_cap));
            break;
        }
    }
    if (run_lp) {
        const NdOptimum opt = nd_maximize(inst.scenario, combined_expression(inst), {},
                                          opts.solve, opts.lp == LpMode::forced
                                                          ? std::numeric_limits<int>::max()
                                                          : opts.lp_cap);
        report.lp_optimum = opt.value;
        report.lp_pivots = opt.pivots;
        if (*report.lp_optimum < report.classical_sum)
            throw input_error("LP optimum below the classical sum; deterministic points "
                              "should be feasible");
    }

    if (report.lp_optimum) {
        if (*report.lp_optimum == report.classical_sum) {
            report.verdict = MonogamyReport::Verdict::monogamous;
            report.verdict_basis = report.structural.ok() ? "lp+structural" : "lp";
        } else {
            report.verdict = MonogamyReport::Verdict::not_monogamous;
            report.verdict_basis = "lp";
        }
    } else if (report.structural.ok()) {
        report.verdict = MonogamyReport::Verdict::monogamous;
        report.verdict_basis = "structural";
    } else {
        report.verdict = MonogamyReport::Verdict::undecided;
        report.verdict_basis = "";
    }
    return report;
}

}  // namespace ndmono
