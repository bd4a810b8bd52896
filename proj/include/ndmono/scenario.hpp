#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ndmono/graph.hpp"
#include "ndmono/rational.hpp"

namespace ndmono {

// Dense measurement index within one Scenario. Labels are the user-facing
// identity; indices are internal and stable only within their Scenario.
using Vertex = int;

inline std::pair<Vertex, Vertex> ordered_pair(Vertex u, Vertex v) {
    return u < v ? std::pair{u, v} : std::pair{v, u};
}

// A set of measurements together with the symmetric compatibility relation
// (the compatible measurement graph). Immutable after construction.
class Scenario {
  public:
    Scenario() = default;

    // Validates and canonicalizes a raw description: unique labels, no
    // self-pairs, all compat entries resolve to known labels.
    static Scenario create(std::vector<std::string> labels,
                           const std::vector<std::pair<std::string, std::string>>& compat) {
        Scenario s;
        s.labels_ = std::move(labels);
        for (std::size_t i = 0; i < s.labels_.size(); ++i) {
            if (s.labels_[i].empty())
                throw input_error("empty measurement label");
            if (!s.index_.emplace(s.labels_[i], static_cast<Vertex>(i)).second)
                throw input_error("duplicate measurement label '" + s.labels_[i] + "'");
        }
        for (const auto& [a, b] : compat) {
            const Vertex u = s.require(a);
            const Vertex v = s.require(b);
            if (u == v)
                throw input_error("self-loop: measurement '" + a + "' paired with itself");
            s.compat_.insert(ordered_pair(u, v));
        }
        return s;
    }

    int size() const { return static_cast<int>(labels_.size()); }

    const std::string& label(Vertex v) const { return labels_.at(static_cast<std::size_t>(v)); }

    const std::vector<std::string>& labels() const { return labels_; }

    std::optional<Vertex> find(const std::string& label) const {
        auto it = index_.find(label);
        if (it == index_.end())
            return std::nullopt;
        return it->second;
    }

    Vertex require(const std::string& label) const {
        auto v = find(label);
        if (!v)
            throw input_error("unknown measurement label '" + label + "'");
        return *v;
    }

    bool compatible(Vertex u, Vertex v) const {
        return u != v && compat_.count(ordered_pair(u, v)) > 0;
    }

    const std::set<std::pair<Vertex, Vertex>>& compat() const { return compat_; }

    bool operator==(const Scenario& other) const {
        return labels_ == other.labels_ && compat_ == other.compat_;
    }

  private:
    std::vector<std::string> labels_;
    std::map<std::string, Vertex> index_;
    std::set<std::pair<Vertex, Vertex>> compat_;
};

// One signed two-point correlator term coeff * <label(u) label(v)>.
// The (u, v) order is kept for display; identity is the unordered pair.
struct Term {
    Vertex u = 0;
    Vertex v = 0;
    Rational coeff;
};

// A signed sum of correlator terms over compatibility edges.
class Expression {
  public:
    Expression() = default;

    static Expression create(const Scenario& scenario, std::string name, std::vector<Term> terms) {
        std::set<std::pair<Vertex, Vertex>> seen;
        for (const Term& t : terms) {
            if (t.u < 0 || t.v < 0 || t.u >= scenario.size() || t.v >= scenario.size())
                throw input_error("expression term references invalid measurement index");
            if (!scenario.compatible(t.u, t.v))
                throw input_error("expression '" + name + "' has term (" + scenario.label(t.u) +
                                  "," + scenario.label(t.v) + ") that is not a compatibility edge");
            if (!seen.insert(ordered_pair(t.u, t.v)).second)
                throw input_error("expression '" + name + "' repeats the pair (" +
                                  scenario.label(t.u) + "," + scenario.label(t.v) + ")");
        }
        Expression e;
        e.name_ = std::move(name);
        e.terms_ = std::move(terms);
        return e;
    }

    const std::string& name() const { return name_; }
    const std::vector<Term>& terms() const { return terms_; }

    // Measurements appearing in at least one term, ascending.
    std::vector<Vertex> vertices() const {
        std::set<Vertex> vs;
        for (const Term& t : terms_) {
            vs.insert(t.u);
            vs.insert(t.v);
        }
        return {vs.begin(), vs.end()};
    }

    std::string display(const Scenario& scenario) const {
        std::string out;
        for (const Term& t : terms_) {
            std::string c = rational_string(t.coeff);
            if (!out.empty() && c[0] != '-')
                out += "+";
            if (c == "1")
                c.clear();
            else if (c == "-1")
                c = "-";
            else
                c += "*";
            out += c + scenario.label(t.u) + scenario.label(t.v);
        }
        return out.empty() ? "0" : out;
    }

  private:
    std::string name_;
    std::vector<Term> terms_;
};

// The graph of measurements jointly measured by an expression: vertices are
// the measurements appearing in its terms, edges the term pairs. Always a
// subgraph of the compatibility graph by the Expression invariant.
struct ExperimentalGraph {
    std::vector<Vertex> vertices;  // ascending; graph indices follow positions
    Graph graph;

    int local(Vertex v) const {
        const auto it = std::lower_bound(vertices.begin(), vertices.end(), v);
        return static_cast<int>(it - vertices.begin());
    }
};

inline ExperimentalGraph experimental_graph(const Expression& expr) {
    ExperimentalGraph out;
    out.vertices = expr.vertices();
    out.graph = Graph(static_cast<int>(out.vertices.size()));
    for (const Term& t : expr.terms())
        out.graph.add_edge(out.local(t.u), out.local(t.v));
    return out;
}

// Total deterministic outcome assignment, one value in {+1,-1} per measurement.
struct Assignment {
    std::vector<int> values;

    int at(Vertex v) const { return values.at(static_cast<std::size_t>(v)); }
};

// Value of an expression under a deterministic assignment.
inline Rational assignment_value(const Expression& expr, const Assignment& a) {
    Rational sum(0);
    for (const Term& t : expr.terms())
        sum += t.coeff * a.at(t.u) * a.at(t.v);
    return sum;
}

}  // namespace ndmono
