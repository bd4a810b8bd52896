#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ndmono/behavior.hpp"
#include "ndmono/bounds.hpp"
#include "ndmono/monogamy.hpp"
#include "ndmono/nd_lp.hpp"
#include "ndmono/rational.hpp"
#include "ndmono/scenario.hpp"

namespace ndmono {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Scenario files
//
// {
//   "measurements": ["A1", "A2", "B1", "B2"],
//   "compat": [["A1","B1"], ...],
//   "expressions": [{"name":"CHSH","terms":[{"u":"A1","v":"B1","c":"1"}, ...]}],
//   "shared": ["A1","A2"]            // optional, monogamy instances only
// }

struct ScenarioFile {
    Scenario scenario;
    std::vector<Expression> expressions;
    std::vector<Vertex> shared;
};

namespace detail {

inline const json& member_array(const json& j, const std::string& key) {
    static const json empty = json::array();
    if (!j.contains(key))
        return empty;
    if (!j.at(key).is_array())
        throw input_error("'" + key + "' must be an array");
    return j.at(key);
}

inline std::string member_string(const json& j) {
    if (!j.is_string())
        throw input_error("expected a string, got " + j.dump());
    return j.get<std::string>();
}

}  // namespace detail

inline ScenarioFile scenario_from_json(const json& j) {
    if (!j.is_object())
        throw input_error("scenario file: top level must be an object");
    ScenarioFile file;
    std::vector<std::string> labels;
    for (const auto& m : detail::member_array(j, "measurements"))
        labels.push_back(detail::member_string(m));
    std::vector<std::pair<std::string, std::string>> compat;
    for (const auto& pair : detail::member_array(j, "compat")) {
        if (!pair.is_array() || pair.size() != 2)
            throw input_error("scenario file: compat entries must be 2-element label lists");
        compat.emplace_back(detail::member_string(pair[0]), detail::member_string(pair[1]));
    }
    file.scenario = Scenario::create(labels, compat);
    for (const auto& e : detail::member_array(j, "expressions")) {
        if (!e.is_object())
            throw input_error("scenario file: expressions must be objects");
        std::vector<Term> terms;
        for (const auto& t : detail::member_array(e, "terms")) {
            if (!t.is_object())
                throw input_error("scenario file: expression terms must be objects");
            terms.push_back({file.scenario.require(detail::member_string(t.at("u"))),
                             file.scenario.require(detail::member_string(t.at("v"))),
                             parse_rational(detail::member_string(t.at("c")))});
        }
        file.expressions.push_back(
            Expression::create(file.scenario, e.value("name", "expr"), std::move(terms)));
    }
    for (const auto& s : detail::member_array(j, "shared"))
        file.shared.push_back(file.scenario.require(detail::member_string(s)));
    return file;
}

inline json scenario_to_json(const Scenario& scenario,
                             const std::vector<Expression>& expressions = {},
                             const std::vector<Vertex>& shared = {}) {
    json j;
    j["measurements"] = scenario.labels();
    json compat = json::array();
    for (const auto& [u, v] : scenario.compat())
        compat.push_back({scenario.label(u), scenario.label(v)});
    j["compat"] = std::move(compat);
    if (!expressions.empty()) {
        json exprs = json::array();
        for (const Expression& e : expressions) {
            json terms = json::array();
            for (const Term& t : e.terms())
                terms.push_back({{"u", scenario.label(t.u)},
                                 {"v", scenario.label(t.v)},
                                 {"c", rational_string(t.coeff)}});
            exprs.push_back({{"name", e.name()}, {"terms", std::move(terms)}});
        }
        j["expressions"] = std::move(exprs);
    }
    if (!shared.empty()) {
        json s = json::array();
        for (Vertex v : shared)
            s.push_back(scenario.label(v));
        j["shared"] = std::move(s);
    }
    return j;
}

// ---------------------------------------------------------------------------
// Behavior / pin files
//
// { "tables": { "A1,B1": {"++":"1/2", "--":"1/2"}, ... } }
//
// A table key lists the support labels in measurement-index order; outcome
// strings use '+'/'-' in the same order; absent outcomes are zero.

inline std::string support_key(const Scenario& scenario, const std::vector<Vertex>& support) {
    std::string key;
    for (std::size_t i = 0; i < support.size(); ++i)
        key += (i ? "," : "") + scenario.label(support[i]);
    return key;
}

inline ProbabilityTable table_from_json(const Scenario& scenario, const std::string& key,
                                        const json& entries) {
    std::vector<Vertex> support;
    std::stringstream stream(key);
    std::string label;
    while (std::getline(stream, label, ','))
        support.push_back(scenario.require(label));
    if (!std::is_sorted(support.begin(), support.end()))
        throw input_error("table key '" + key + "' must list labels in measurement order");
    std::vector<Rational> values(std::size_t{1} << support.size(), Rational(0));
    for (const auto& [outcome, value] : entries.items()) {
        if (outcome.size() != support.size())
            throw input_error("outcome '" + outcome + "' does not match the support of '" + key +
                              "'");
        values.at(outcome_index(outcome)) = parse_rational(detail::member_string(value));
    }
    return ProbabilityTable::create(std::move(support), std::move(values));
}

inline std::vector<ProbabilityTable> tables_from_json(const Scenario& scenario, const json& j) {
    if (!j.is_object() || !j.contains("tables") || !j.at("tables").is_object())
        throw input_error("behavior file: expected a top-level 'tables' object");
    std::vector<ProbabilityTable> tables;
    for (const auto& [key, entries] : j.at("tables").items()) {
        if (!entries.is_object())
            throw input_error("behavior file: table '" + key + "' must map outcomes to rationals");
        tables.push_back(table_from_json(scenario, key, entries));
    }
    return tables;
}

inline json table_entries_to_json(const ProbabilityTable& table) {
    json entries = json::object();
    for (std::uint64_t i = 0; i < table.entry_count(); ++i)
        if (table.entry(i) != 0)
            entries[outcome_string(i, table.arity())] = rational_string(table.entry(i));
    return entries;
}

inline json behavior_to_json(const Behavior& behavior) {
    json tables = json::object();
    for (std::size_t c = 0; c < behavior.cliques().size(); ++c)
        tables[support_key(behavior.scenario(), behavior.cliques()[c])] =
            table_entries_to_json(behavior.tables()[c]);
    return json{{"tables", std::move(tables)}};
}

// ---------------------------------------------------------------------------
// Report rendering (plain text and JSON)

inline std::string render_rational(const Rational& r) {
    return rational_string(r) + " (" + decimal_string(r) + ")";
}

inline std::string assignment_string(const Scenario& scenario, const Assignment& a) {
    std::string out;
    for (int v = 0; v < scenario.size(); ++v)
        out += (v ? " " : "") + scenario.label(v) + "=" + (a.at(v) > 0 ? "+1" : "-1");
    return out;
}

inline std::string render_bounds_report(const Scenario& scenario, const Expression& expr,
                                        const BoundsReport& report) {
    std::ostringstream out;
    out << "expression: " << expr.name() << " = " << expr.display(scenario) << "\n";
    out << "classical: " << render_rational(report.classical) << "\n";
    out << "maximizers: " << report.maximizer_count << "\n";
    for (std::size_t i = 0; i < report.argmax_assignments.size() && i < 8; ++i)
        out << "  " << assignment_string(scenario, report.argmax_assignments[i]) << "\n";
    if (report.argmax_assignments.size() > 8)
        out << "  ... (" << report.argmax_assignments.size() << " assignments stored)\n";
    if (report.quantum)
        out << "quantum: " << [&] {
            std::ostringstream q;
            q.setf(std::ios::fixed);
            q.precision(9);
            q << *report.quantum;
            return q.str();
        }() << "\n";
    if (report.no_disturbance)
        out << "no-disturbance: " << render_rational(*report.no_disturbance) << "\n";
    for (const auto& note : report.notes)
        out << "note: " << note << "\n";
    return out.str();
}

inline json bounds_report_to_json(const Scenario& scenario, const Expression& expr,
                                  const BoundsReport& report) {
    json j;
    j["expression"] = expr.name();
    j["classical"] = rational_string(report.classical);
    j["maximizer_count"] = report.maximizer_count;
    json maximizers = json::array();
    for (const auto& a : report.argmax_assignments) {
        std::string s;
        for (int v = 0; v < scenario.size(); ++v)
            s += a.at(v) > 0 ? '+' : '-';
        maximizers.push_back(s);
    }
    j["argmax_assignments"] = std::move(maximizers);
    if (report.quantum) {
        std::ostringstream q;
        q.setf(std::ios::fixed);
        q.precision(9);
        q << *report.quantum;
        j["quantum"] = q.str();
    }
    if (report.no_disturbance)
        j["no_disturbance"] = rational_string(*report.no_disturbance);
    j["notes"] = report.notes;
    return j;
}

inline std::string render_nd_check(const Scenario& scenario, const NdCheck& check) {
    std::ostringstream out;
    if (check.ok()) {
        out << "no-disturbance: consistent (no violations)\n";
        return out.str();
    }
    out << "no-disturbance: " << check.violations.size() << " violation(s)\n";
    for (const auto& v : check.violations) {
        out << "  cliques " << support_key(scenario, v.clique_a) << " and "
            << support_key(scenario, v.clique_b) << " disagree on {"
            << support_key(scenario, v.intersection) << "} @"
            << outcome_string(v.outcome, static_cast<int>(v.intersection.size())) << ": "
            << rational_string(v.value_a) << " vs " << rational_string(v.value_b) << "\n";
    }
    return out.str();
}

inline json nd_check_to_json(const Scenario& scenario, const NdCheck& check) {
    json j;
    j["consistent"] = check.ok();
    json violations = json::array();
    for (const auto& v : check.violations)
        violations.push_back({{"clique_a", support_key(scenario, v.clique_a)},
                              {"clique_b", support_key(scenario, v.clique_b)},
                              {"intersection", support_key(scenario, v.intersection)},
                              {"outcome",
                               outcome_string(v.outcome, static_cast<int>(v.intersection.size()))},
                              {"value_a", rational_string(v.value_a)},
                              {"value_b", rational_string(v.value_b)}});
    j["violations"] = std::move(violations);
    return j;
}

inline std::string verdict_string(MonogamyReport::Verdict v) {
    switch (v) {
        case MonogamyReport::Verdict::monogamous:
            return "monogamous";
        case MonogamyReport::Verdict::not_monogamous:
            return "not-monogamous";
        default:
            return "undecided-structurally";
    }
}

inline std::string render_monogamy_report(const MonogamyInstance& inst,
                                          const MonogamyReport& report) {
    const Scenario& scenario = inst.scenario;
    std::ostringstream out;
    out << "instance: " << inst.kind << " (" << inst.expressions.size() << " expressions, "
        << scenario.size() << " measurements)\n";
    out << "shared: ";
    for (std::size_t i = 0; i < inst.shared.size(); ++i)
        out << (i ? "," : "") << scenario.label(inst.shared[i]);
    out << "\n";
    for (std::size_t i = 0; i < inst.expressions.size(); ++i)
        out << "  " << inst.expressions[i].name() << " = "
            << inst.expressions[i].display(scenario)
            << "   classical <= " << rational_string(report.expression_bounds[i]) << "\n";
    out << "classical_sum: " << render_rational(report.classical_sum) << "\n";
    switch (report.structural.kind) {
        case StructuralCertificate::Kind::direct:
            out << "structural certificate: " << report.structural.scheme << "\n";
            break;
        case StructuralCertificate::Kind::pairwise_doubling:
            out << "structural certificate: " << report.structural.scheme << "\n";
            break;
        default:
            out << "structural certificate: none\n";
            break;
    }
    for (const auto& piece : report.structural.pieces) {
        out << "  " << (piece.tag.empty() ? "" : "[" + piece.tag + "] ")
            << piece.expression.name() << " = " << piece.expression.display(scenario)
            << "   classical <= " << rational_string(piece.classical) << "\n";
        out << "    chordal completion: eliminate";
        for (Vertex v : piece.elimination_order)
            out << " " << scenario.label(v);
        if (!piece.fill_edges.empty()) {
            out << "; chords";
            for (const auto& [u, v] : piece.fill_edges)
                out << " (" << scenario.label(u) << "," << scenario.label(v) << ")";
        }
        out << "\n";
    }
    if (report.structural.recombined_sum)
        out << "recombined_classical_sum: " << render_rational(*report.structural.recombined_sum)
            << "\n";
    for (const auto& note : report.structural.notes)
        out << "note: " << note << "\n";
    if (report.lp_optimum)
        out << "lp_optimum: " << render_rational(*report.lp_optimum) << "\n";
    else
        out << "lp_optimum: absent\n";
    out << "verdict: " << verdict_string(report.verdict);
    if (!report.verdict_basis.empty())
        out << " (basis: " << report.verdict_basis << ")";
    out << "\n";
    for (const auto& note : report.notes)
        out << "note: " << note << "\n";
    return out.str();
}

inline json monogamy_report_to_json(const MonogamyInstance& inst, const MonogamyReport& report) {
    const Scenario& scenario = inst.scenario;
    json j;
    j["kind"] = inst.kind;
    json shared = json::array();
    for (Vertex v : inst.shared)
        shared.push_back(scenario.label(v));
    j["shared"] = std::move(shared);
    json expressions = json::array();
    for (std::size_t i = 0; i < inst.expressions.size(); ++i)
        expressions.push_back({{"name", inst.expressions[i].name()},
                               {"display", inst.expressions[i].display(scenario)},
                               {"classical", rational_string(report.expression_bounds[i])}});
    j["expressions"] = std::move(expressions);
    j["classical_sum"] = rational_string(report.classical_sum);
    switch (report.structural.kind) {
        case StructuralCertificate::Kind::direct:
            j["structural"]["kind"] = "direct";
            break;
        case StructuralCertificate::Kind::pairwise_doubling:
            j["structural"]["kind"] = "pairwise-doubling";
            break;
        default:
            j["structural"]["kind"] = "none";
            break;
    }
    j["structural"]["scheme"] = report.structural.scheme;
    json pieces = json::array();
    for (const auto& piece : report.structural.pieces) {
        json p;
        p["tag"] = piece.tag;
        p["name"] = piece.expression.name();
        p["display"] = piece.expression.display(scenario);
        p["classical"] = rational_string(piece.classical);
        json order = json::array();
        for (Vertex v : piece.elimination_order)
            order.push_back(scenario.label(v));
        p["elimination_order"] = std::move(order);
        json fill = json::array();
        for (const auto& [u, v] : piece.fill_edges)
            fill.push_back({scenario.label(u), scenario.label(v)});
        p["fill_edges"] = std::move(fill);
        pieces.push_back(std::move(p));
    }
    j["structural"]["pieces"] = std::move(pieces);
    if (report.structural.recombined_sum)
        j["structural"]["recombined_classical_sum"] =
            rational_string(*report.structural.recombined_sum);
    j["structural"]["notes"] = report.structural.notes;
    if (report.lp_optimum)
        j["lp_optimum"] = rational_string(*report.lp_optimum);
    j["verdict"] = verdict_string(report.verdict);
    j["verdict_basis"] = report.verdict_basis;
    j["notes"] = report.notes;
    return j;
}

inline std::string render_joint(const Scenario& scenario, const JointDistribution& joint) {
    std::ostringstream out;
    out << "joint distribution over " << support_key(scenario, joint.support()) << "\n";
    for (std::uint64_t i = 0; i < joint.entry_count(); ++i)
        if (joint.entry(i) != 0)
            out << "  " << outcome_string(i, joint.arity()) << "  "
                << rational_string(joint.entry(i)) << "\n";
    return out.str();
}

inline json joint_to_json(const Scenario& scenario, const JointDistribution& joint) {
    json j;
    j["support"] = support_key(scenario, joint.support());
    j["entries"] = table_entries_to_json(joint);
    return j;
}

}  // namespace ndmono
