#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ndmono/rational.hpp"

namespace ndmono {

// Simple undirected graph over vertices 0..n-1, dense adjacency.
struct Graph {
    int n = 0;
    std::vector<std::vector<char>> adj;

    Graph() = default;
    explicit Graph(int vertices) : n(vertices), adj(vertices, std::vector<char>(vertices, 0)) {}

    static Graph complete(int vertices) {
        Graph g(vertices);
        for (int u = 0; u < vertices; ++u)
            for (int v = u + 1; v < vertices; ++v)
                g.add_edge(u, v);
        return g;
    }

    void add_edge(int u, int v) {
        if (u == v)
            throw input_error("graph self-loop");
        adj[u][v] = adj[v][u] = 1;
    }

    bool has(int u, int v) const { return u != v && adj[u][v] != 0; }

    int degree(int v) const {
        int d = 0;
        for (int u = 0; u < n; ++u)
            d += adj[v][u];
        return d;
    }

    std::vector<std::pair<int, int>> edge_list() const {
        std::vector<std::pair<int, int>> edges;
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v)
                if (adj[u][v])
                    edges.emplace_back(u, v);
        return edges;
    }

    std::vector<int> neighbors(int v) const {
        std::vector<int> out;
        for (int u = 0; u < n; ++u)
            if (adj[v][u])
                out.push_back(u);
        return out;
    }
};

// Perfect elimination ordering: order[0] is eliminated first; for every
// vertex, its neighbors later in the order form a clique.
struct PerfectEliminationOrdering {
    std::vector<int> order;
};

// Direct check of the defining PEO property.
inline bool verify_peo(const Graph& g, const PerfectEliminationOrdering& peo) {
    if (static_cast<int>(peo.order.size()) != g.n)
        return false;
    std::vector<int> position(g.n, -1);
    for (int i = 0; i < g.n; ++i) {
        const int v = peo.order[i];
        if (v < 0 || v >= g.n || position[v] != -1)
            return false;
        position[v] = i;
    }
    for (int i = 0; i < g.n; ++i) {
        const int v = peo.order[i];
        std::vector<int> later;
        for (int u = 0; u < g.n; ++u)
            if (g.has(v, u) && position[u] > i)
                later.push_back(u);
        for (std::size_t a = 0; a < later.size(); ++a)
            for (std::size_t b = a + 1; b < later.size(); ++b)
                if (!g.has(later[a], later[b]))
                    return false;
    }
    return true;
}

// Maximum-cardinality search with lowest-index tie-breaking, followed by an
// explicit verification of the produced ordering. Returns a PEO iff chordal.
inline std::optional<PerfectEliminationOrdering> is_chordal(const Graph& g) {
    std::vector<int> weight(g.n, 0);
    std::vector<char> numbered(g.n, 0);
    std::vector<int> visit;  // MCS visit order; elimination order is its reverse
    visit.reserve(g.n);
    for (int step = 0; step < g.n; ++step) {
        int best = -1;
        for (int v = 0; v < g.n; ++v)
            if (!numbered[v] && (best == -1 || weight[v] > weight[best]))
                best = v;
        numbered[best] = 1;
        visit.push_back(best);
        for (int u = 0; u < g.n; ++u)
            if (!numbered[u] && g.has(best, u))
                ++weight[u];
    }
    PerfectEliminationOrdering peo;
    peo.order.assign(visit.rbegin(), visit.rend());
    if (!verify_peo(g, peo))
        return std::nullopt;
    return peo;
}

// Witness for non-chordality: some induced cycle on >= 4 vertices, listed in
// cycle order. Returns nullopt iff the graph is chordal.
inline std::optional<std::vector<int>> find_induced_cycle(const Graph& g) {
    for (int v = 0; v < g.n; ++v) {
        const std::vector<int> nb = g.neighbors(v);
        for (std::size_t a = 0; a < nb.size(); ++a) {
            for (std::size_t b = a + 1; b < nb.size(); ++b) {
                const int u = nb[a];
                const int w = nb[b];
                if (g.has(u, w))
                    continue;
                // Shortest u-w path avoiding v and all other neighbors of v.
                // Shortest paths are induced, so the closed walk v,u,...,w is
                // an induced cycle of length >= 4.
                std::vector<char> blocked(g.n, 0);
                blocked[v] = 1;
                for (int x : nb)
                    if (x != u && x != w)
                        blocked[x] = 1;
                std::vector<int> parent(g.n, -2);
                std::deque<int> queue{u};
                parent[u] = -1;
                while (!queue.empty()) {
                    const int x = queue.front();
                    queue.pop_front();
                    if (x == w)
                        break;
                    for (int y = 0; y < g.n; ++y)
                        if (g.has(x, y) && !blocked[y] && parent[y] == -2) {
                            parent[y] = x;
                            queue.push_back(y);
                        }
                }
                if (parent[w] == -2)
                    continue;
                std::vector<int> cycle{v};
                std::vector<int> path;
                for (int x = w; x != -1; x = parent[x])
                    path.push_back(x);
                cycle.insert(cycle.end(), path.rbegin(), path.rend());
                return cycle;
            }
        }
    }
    return std::nullopt;
}

namespace detail {

inline void bron_kerbosch(const Graph& g, std::vector<int>& r, std::vector<int> p,
                          std::vector<int> x, std::vector<std::vector<int>>& out) {
    if (p.empty() && x.empty()) {
        out.push_back(r);
        return;
    }
    // Pivot: highest degree in the full graph, lowest index on ties.
    int pivot = -1;
    for (const auto& pool : {p, x})
        for (int v : pool)
            if (pivot == -1 || g.degree(v) > g.degree(pivot) ||
                (g.degree(v) == g.degree(pivot) && v < pivot))
                pivot = v;
    std::vector<int> candidates;
    for (int v : p)
        if (!g.has(pivot, v))
            candidates.push_back(v);
    for (int v : candidates) {
        std::vector<int> p2, x2;
        for (int u : p)
            if (g.has(v, u))
                p2.push_back(u);
        for (int u : x)
            if (g.has(v, u))
                x2.push_back(u);
        r.push_back(v);
        bron_kerbosch(g, r, std::move(p2), std::move(x2), out);
        r.pop_back();
        p.erase(std::find(p.begin(), p.end(), v));
        x.push_back(v);
    }
}

}  // namespace detail

// All inclusion-maximal cliques, each sorted ascending, the list sorted
// lexicographically. Isolated vertices count as singleton cliques.
inline std::vector<std::vector<int>> maximal_cliques(const Graph& g) {
    std::vector<std::vector<int>> out;
    std::vector<int> r, p(g.n), x;
    for (int v = 0; v < g.n; ++v)
        p[v] = v;
    detail::bron_kerbosch(g, r, std::move(p), std::move(x), out);
    for (auto& clique : out)
        std::sort(clique.begin(), clique.end());
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<int> intersect_sorted(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// Clique tree: nodes are the maximal cliques; edges carry separators.
struct CliqueTree {
    struct Edge {
        int a = 0;
        int b = 0;
        std::vector<int> separator;
    };
    std::vector<std::vector<int>> nodes;
    std::vector<Edge> edges;
};

// Running intersection property, checked independently of construction:
// for every vertex the tree nodes containing it induce a connected subtree.
inline bool verify_running_intersection(const CliqueTree& tree) {
    const int k = static_cast<int>(tree.nodes.size());
    if (k == 0)
        return true;
    if (static_cast<int>(tree.edges.size()) != k - 1)
        return false;
    std::vector<std::vector<int>> adj(k);
    for (const auto& e : tree.edges) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    std::vector<char> seen(k, 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    int reached = 0;
    while (!queue.empty()) {
        int c = queue.front();
        queue.pop_front();
        ++reached;
        for (int d : adj[c])
            if (!seen[d]) {
                seen[d] = 1;
                queue.push_back(d);
            }
    }
    if (reached != k)
        return false;
    std::set<int> vertices;
    for (const auto& node : tree.nodes)
        vertices.insert(node.begin(), node.end());
    for (int v : vertices) {
        // BFS restricted to nodes containing v must reach all of them.
        std::vector<char> contains(k, 0), vseen(k, 0);
        int total = 0, start = -1;
        for (int c = 0; c < k; ++c)
            if (std::binary_search(tree.nodes[c].begin(), tree.nodes[c].end(), v)) {
                contains[c] = 1;
                ++total;
                start = c;
            }
        std::deque<int> q{start};
        vseen[start] = 1;
        int got = 0;
        while (!q.empty()) {
            int c = q.front();
            q.pop_front();
            ++got;
            for (int d : adj[c])
                if (contains[d] && !vseen[d]) {
                    vseen[d] = 1;
                    q.push_back(d);
                }
        }
        if (got != total)
            return false;
    }
    return true;
}

// Maximum-weight spanning tree over the clique intersection graph, weights
// = separator sizes, ties broken by lexicographic clique order. Guarantees
// the running intersection property on chordal graphs. The PEO parameter is
// the chordality certificate and is re-verified before use.
inline CliqueTree clique_tree(const Graph& g, const PerfectEliminationOrdering& peo) {
    if (!verify_peo(g, peo))
        throw input_error("not a perfect elimination ordering");
    CliqueTree tree;
    tree.nodes = maximal_cliques(g);
    const int k = static_cast<int>(tree.nodes.size());
    struct Candidate {
        int weight;
        int a;
        int b;
    };
    std::vector<Candidate> candidates;
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b)
            candidates.push_back(
                {static_cast<int>(intersect_sorted(tree.nodes[a], tree.nodes[b]).size()), a, b});
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
        if (x.weight != y.weight)
            return x.weight > y.weight;
        if (x.a != y.a)
            return x.a < y.a;
        return x.b < y.b;
    });
    std::vector<int> parent(k);
    for (int i = 0; i < k; ++i)
        parent[i] = i;
    const auto find = [&](int v) {
        while (parent[v] != v)
            v = parent[v] = parent[parent[v]];
        return v;
    };
    for (const Candidate& c : candidates) {
        const int ra = find(c.a), rb = find(c.b);
        if (ra == rb)
            continue;
        parent[ra] = rb;
        tree.edges.push_back({c.a, c.b, intersect_sorted(tree.nodes[c.a], tree.nodes[c.b])});
    }
    return tree;
}

// Search for a chordal graph H with base ⊆ H ⊆ base ∪ allowed, by the
// elimination game with fill restricted to allowed edges. The state after
// eliminating a vertex set does not depend on the elimination order, so
// failed states are memoized by that set.
struct ChordalCompletion {
    PerfectEliminationOrdering order;
    std::vector<std::pair<int, int>> fill;  // edges added on top of base
};

class CompletionSearch {
  public:
    enum class Status { found, none, too_large };

    Status status = Status::none;
    ChordalCompletion completion;

    static constexpr int kMaxVertices = 25;

    static CompletionSearch run(const Graph& base, const Graph& allowed) {
        CompletionSearch result;
        if (base.n > kMaxVertices) {
            result.status = Status::too_large;
            return result;
        }
        if (auto peo = is_chordal(base)) {
            result.status = Status::found;
            result.completion.order = *peo;
            return result;
        }
        CompletionSearch search;
        Graph work = base;
        std::vector<int> order;
        std::vector<std::pair<int, int>> fill;
        std::vector<char> eliminated(base.n, 0);
        if (search.recurse(work, allowed, eliminated, 0u, order, fill)) {
            result.status = Status::found;
            result.completion.order.order = order;
            result.completion.fill = fill;
        }
        return result;
    }

  private:
    std::unordered_set<std::uint32_t> failed_;

    bool recurse(Graph& g, const Graph& allowed, std::vector<char>& eliminated,
                 std::uint32_t mask, std::vector<int>& order,
                 std::vector<std::pair<int, int>>& fill) {
        if (static_cast<int>(order.size()) == g.n)
            return true;
        if (failed_.count(mask))
            return false;
        for (int v = 0; v < g.n; ++v) {
            if (eliminated[v])
                continue;
            std::vector<int> nb;
            for (int u = 0; u < g.n; ++u)
                if (!eliminated[u] && g.has(v, u))
                    nb.push_back(u);
            std::vector<std::pair<int, int>> needed;
            bool ok = true;
            for (std::size_t a = 0; a < nb.size() && ok; ++a)
                for (std::size_t b = a + 1; b < nb.size() && ok; ++b)
                    if (!g.has(nb[a], nb[b])) {
                        if (allowed.has(nb[a], nb[b]))
                            needed.emplace_back(nb[a], nb[b]);
                        else
                            ok = false;
                    }
            if (!ok)
                continue;
            for (const auto& [a, b] : needed)
                g.add_edge(a, b);
            eliminated[v] = 1;
            order.push_back(v);
            fill.insert(fill.end(), needed.begin(), needed.end());
            if (recurse(g, allowed, eliminated, mask | (1u << v), order, fill))
                return true;
            fill.resize(fill.size() - needed.size());
            order.pop_back();
            eliminated[v] = 0;
            for (const auto& [a, b] : needed)
                g.adj[a][b] = g.adj[b][a] = 0;
        }
        failed_.insert(mask);
        return false;
    }
};

}  // namespace ndmono
