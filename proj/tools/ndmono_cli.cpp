// Command-line interface for no-disturbance scenario analysis: chordality
// certificates, cycle/CHSH bounds, Fine joint construction, exact LP optima
// over the no-disturbance polytope, marginal-extension feasibility, and
// monogamy certification, plus generators and self-checking demos.

#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ndmono/behavior.hpp"
#include "ndmono/bounds.hpp"
#include "ndmono/graph.hpp"
#include "ndmono/io.hpp"
#include "ndmono/monogamy.hpp"
#include "ndmono/nd_lp.hpp"

using namespace ndmono;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;  // not-monogamous / infeasible / violated
constexpr int kExitInput = 2;
constexpr int kExitResource = 3;

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw input_error("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw input_error("while parsing '" + path + "': " + std::string(e.what()));
    }
}

void emit(const std::string& text, const json& machine, bool as_json,
          const std::string& out_path = "") {
    std::ostringstream buffer;
    if (as_json)
        buffer << machine.dump(2) << "\n";
    else
        buffer << text;
    if (out_path.empty()) {
        std::cout << buffer.str();
    } else {
        std::ofstream out(out_path);
        if (!out)
            throw input_error("cannot write '" + out_path + "'");
        out << buffer.str();
        std::cout << "wrote " << out_path << "\n";
    }
}

std::vector<int> parse_sizes(const std::string& csv) {
    std::vector<int> sizes;
    std::stringstream stream(csv);
    std::string item;
    while (std::getline(stream, item, ',')) {
        try {
            sizes.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw input_error("--sizes expects a comma-separated list of integers");
        }
    }
    if (sizes.empty())
        throw input_error("--sizes expects a comma-separated list of integers");
    return sizes;
}

struct ExpressionSelection {
    Scenario scenario;
    Expression expression;
};

ExpressionSelection select_expression(const std::string& scenario_path, const std::string& name,
                                      int cycle_n, int neg_pos, int chsh_m) {
    if (cycle_n > 0) {
        auto made = cycle_expression(cycle_n, neg_pos >= 0 ? std::optional<int>(neg_pos)
                                                           : std::nullopt);
        return {std::move(made.scenario), std::move(made.expression)};
    }
    if (chsh_m > 0) {
        auto made = chsh_chain_expression(chsh_m);
        return {std::move(made.scenario), std::move(made.expression)};
    }
    if (scenario_path.empty())
        throw input_error("provide --scenario, --cycle or --chsh");
    ScenarioFile file = scenario_from_json(load_json(scenario_path));
    if (file.expressions.empty())
        throw input_error("scenario file contains no expressions");
    if (name.empty()) {
        if (file.expressions.size() > 1)
            throw input_error("scenario file has several expressions; pick one with --expr");
        return {std::move(file.scenario), std::move(file.expressions.front())};
    }
    for (auto& e : file.expressions)
        if (e.name() == name)
            return {std::move(file.scenario), std::move(e)};
    throw input_error("no expression named '" + name + "' in the scenario file");
}

std::vector<ProbabilityTable> clique_ordered_tables(const Scenario& scenario,
                                                    const std::string& path) {
    auto tables = tables_from_json(scenario, load_json(path));
    const auto cliques = maximal_cliques(compatibility_graph(scenario));
    std::vector<ProbabilityTable> ordered;
    for (const auto& clique : cliques) {
        bool found = false;
        for (auto& t : tables)
            if (t.support() == clique) {
                ordered.push_back(t);
                found = true;
                break;
            }
        if (!found)
            throw input_error("behavior file is missing the table for clique " +
                              support_key(scenario, clique));
    }
    return ordered;
}

std::vector<Pin> load_pins(const Scenario& scenario, const std::string& path) {
    std::vector<Pin> pins;
    for (auto& table : tables_from_json(scenario, load_json(path)))
        pins.push_back({std::move(table)});
    return pins;
}

MonogamyInstance instance_from_options(const std::string& theorem, const std::string& sizes_csv,
                                       const std::string& scenario_path) {
    if (!theorem.empty()) {
        if (theorem == "2")
            return build_one_to_many(parse_sizes(sizes_csv));
        if (theorem == "3") {
            const auto sizes = parse_sizes(sizes_csv);
            if (sizes.size() != 1)
                throw input_error("--theorem 3 expects --sizes <cycle length>");
            return build_contextual_bell(sizes.front());
        }
        if (theorem == "4")
            return build_multi_cycle(parse_sizes(sizes_csv));
        if (theorem == "5-loop")
            return build_loop(parse_sizes(sizes_csv));
        if (theorem == "5-chain") {
            const auto sizes = parse_sizes(sizes_csv);
            if (sizes.size() != 1)
                throw input_error("--theorem 5-chain expects --sizes <link count>");
            return build_chain(sizes.front());
        }
        throw input_error("--theorem must be one of 2, 3, 4, 5-loop, 5-chain");
    }
    if (scenario_path.empty())
        throw input_error("provide --theorem/--sizes or --scenario");
    ScenarioFile file = scenario_from_json(load_json(scenario_path));
    if (file.expressions.empty())
        throw input_error("monogamy analysis needs expressions in the scenario file");
    MonogamyInstance inst;
    inst.scenario = std::move(file.scenario);
    inst.expressions = std::move(file.expressions);
    inst.shared = shared_measurements(inst.expressions);
    if (!file.shared.empty() && file.shared != inst.shared)
        inst.notes.push_back("declared shared list differs from the measurements actually "
                             "appearing in several expressions; using the computed list");
    return inst;
}

JointDistribution random_joint(std::mt19937_64& rng, int n) {
    std::vector<Vertex> support(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        support[static_cast<std::size_t>(i)] = i;
    std::vector<Integer> raw(std::size_t{1} << n);
    Integer total(0);
    for (auto& x : raw) {
        x = Integer(rng() % 9973);
        total += x;
    }
    if (total == 0) {
        raw[0] = 1;
        total = 1;
    }
    std::vector<Rational> entries(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        entries[i] = make_rational(raw[i], total);
    return ProbabilityTable::create(support, entries);
}

Behavior random_nd_behavior(const Scenario& scenario, std::uint64_t seed) {
    if (scenario.size() > ProbabilityTable::kMaxSupport)
        throw resource_error("random behavior generation is capped at " +
                             std::to_string(ProbabilityTable::kMaxSupport) + " measurements");
    std::mt19937_64 rng(seed);
    const auto joint = random_joint(rng, scenario.size());
    std::vector<ProbabilityTable> tables;
    for (const auto& clique : maximal_cliques(compatibility_graph(scenario)))
        tables.push_back(marginalize(joint, clique));
    return Behavior::create(scenario, std::move(tables));
}

// ---------------------------------------------------------------------------
// Demos: named reproductions of worked examples, self-checking.

class DemoChecker {
  public:
    void expect(bool condition, const std::string& what) {
        std::cout << (condition ? "  [ok] " : "  [MISMATCH] ") << what << "\n";
        ok_ = ok_ && condition;
    }
    int exit_code() const { return ok_ ? kExitOk : kExitNegative; }

  private:
    bool ok_ = true;
};

// The eight two-party tables of the two-PR-box configuration.
std::vector<Pin> prbox_extension_pins(const Scenario& s) {
    const Rational half(1, 2);
    const std::vector<Rational> correlated{half, 0, 0, half};
    const std::vector<Rational> anticorrelated{0, half, half, 0};
    std::vector<Pin> pins;
    const auto add = [&](const std::string& a, const std::string& b, bool anti) {
        const Vertex u = s.require(a), v = s.require(b);
        pins.push_back({ProbabilityTable::create({std::min(u, v), std::max(u, v)},
                                                 anti ? anticorrelated : correlated)});
    };
    add("A1", "B1", false);
    add("A2", "B1", false);
    add("A2", "B2", false);
    add("A1", "B2", true);
    add("A1", "C1", false);
    add("A2", "C1", false);
    add("A2", "C2", false);
    add("A1", "C2", true);
    return pins;
}

int demo_prbox_extension() {
    std::cout << "Two PR boxes shared through one Alice: extension feasibility\n";
    const auto inst = build_one_to_many({2, 2});
    const auto pins = prbox_extension_pins(inst.scenario);
    for (const auto& pin : pins)
        std::cout << "  pin " << support_key(inst.scenario, pin.table.support()) << ": "
                  << table_entries_to_json(pin.table).dump() << "\n";
    const ExtendResult result = extend_feasibility(inst.scenario, pins);
    std::cout << (result.feasible ? "feasible" : "infeasible") << "\n";
    if (!result.feasible) {
        std::cout << "conflicting rows:\n";
        for (const auto& name : result.conflict_rows)
            std::cout << "  " << name << "\n";
    }
    DemoChecker check;
    check.expect(!result.feasible, "the pinned marginals do not extend (PR-box monogamy)");
    return check.exit_code();
}

int demo_chsh_monogamy() {
    std::cout << "CHSH_AB + CHSH_AC over the three-party no-disturbance polytope\n";
    const auto inst = build_one_to_many({2, 2});
    const auto report = certify(inst);
    std::cout << render_monogamy_report(inst, report);
    DemoChecker check;
    check.expect(report.classical_sum == Rational(4), "classical sum is 4");
    check.expect(report.lp_optimum && *report.lp_optimum == Rational(4), "LP optimum is 4");
    check.expect(report.verdict == MonogamyReport::Verdict::monogamous, "verdict monogamous");
    return check.exit_code();
}

int demo_theorem2() {
    std::cout << "B(2x4) + B(2x3) with shared Alice measurements\n";
    const auto inst = build_one_to_many({4, 3});
    const auto report = certify(inst);
    std::cout << render_monogamy_report(inst, report);
    DemoChecker check;
    check.expect(report.classical_sum == Rational(10), "classical sum is 6+4");
    check.expect(report.structural.kind == StructuralCertificate::Kind::direct,
                 "chordal recombination found");
    check.expect(report.structural.pieces.size() == 2 &&
                     report.structural.pieces[0].expression.display(inst.scenario) ==
                         "A1B1+B1A2+A2B2+B2A3+A3B3+B3A4+A4C3-C3A1" &&
                     report.structural.pieces[1].expression.display(inst.scenario) ==
                         "A1C1+C1A2+A2C2+C2A4+A4B4-B4A1",
                 "recombination matches the worked term assignment");
    check.expect(report.lp_optimum && *report.lp_optimum == Rational(10), "LP optimum is 10");
    check.expect(report.verdict == MonogamyReport::Verdict::monogamous, "verdict monogamous");
    return check.exit_code();
}

int demo_theorem3() {
    std::cout << "C(8) + CHSH sharing the adjacent pair A1, A2\n";
    const auto inst = build_contextual_bell(8);
    const auto report = certify(inst);
    std::cout << render_monogamy_report(inst, report);
    DemoChecker check;
    check.expect(report.classical_sum == Rational(8), "classical sum is 6+2");
    check.expect(report.structural.ok(), "structural certificate found");
    check.expect(report.lp_optimum && *report.lp_optimum == Rational(8), "LP optimum is 8");
    check.expect(report.verdict == MonogamyReport::Verdict::monogamous, "verdict monogamous");
    return check.exit_code();
}

int demo_theorem4() {
    std::cout << "C(8) + C(11) sharing two measurements (structural certificate)\n";
    const auto inst = build_multi_cycle({8, 11});
    CertifyOptions opts;
    opts.lp = LpMode::off;
    const auto report = certify(inst, opts);
    std::cout << render_monogamy_report(inst, report);
    DemoChecker check;
    check.expect(report.classical_sum == Rational(15), "classical sum is 6+9");
    check.expect(report.structural.kind == StructuralCertificate::Kind::direct,
                 "chordal recombination found");
    check.expect(report.structural.recombined_sum &&
                     *report.structural.recombined_sum == Rational(15),
                 "recombined bounds sum to 15");
    std::cout << "note: rerun with `monogamy --theorem 4 --sizes 8,11 --lp force` for the "
                 "LP cross-check (slow)\n";
    return check.exit_code();
}

int demo_loop3() {
    std::cout << "Three-party CHSH loop\n";
    const auto inst = build_loop({2, 2, 2});
    const auto report = certify(inst);
    std::cout << render_monogamy_report(inst, report);
    DemoChecker check;
    check.expect(report.classical_sum == Rational(6), "classical sum is 6");
    check.expect(report.lp_optimum && *report.lp_optimum == Rational(6), "LP optimum is 6");
    for (std::size_t i = 0; i < 3; ++i) {
        MonogamyInstance pair;
        pair.scenario = inst.scenario;
        pair.expressions = {inst.expressions[i], inst.expressions[(i + 1) % 3]};
        pair.shared = shared_measurements(pair.expressions);
        const auto sub = certify(pair);
        check.expect(sub.lp_optimum && *sub.lp_optimum == Rational(4),
                     "pairwise sum " + std::to_string(i + 1) + " has LP optimum 4");
    }
    check.expect(report.verdict == MonogamyReport::Verdict::monogamous, "verdict monogamous");
    return check.exit_code();
}

int demo_chain2() {
    std::cout << "Two-link CHSH chain over three parties\n";
    const auto inst = build_chain(2);
    const auto report = certify(inst);
    std::cout << render_monogamy_report(inst, report);
    DemoChecker check;
    check.expect(report.classical_sum == Rational(4), "classical sum is 4");
    check.expect(report.lp_optimum && *report.lp_optimum == Rational(4), "LP optimum is 4");
    check.expect(report.verdict == MonogamyReport::Verdict::monogamous, "verdict monogamous");
    return check.exit_code();
}

int demo_chain3() {
    std::cout << "Three-link CHSH chain: no monogamy\n";
    const auto inst = build_chain(3);
    const auto report = certify(inst);
    std::cout << render_monogamy_report(inst, report);
    DemoChecker check;
    check.expect(report.classical_sum == Rational(6), "classical sum is 6");
    check.expect(report.lp_optimum && *report.lp_optimum == Rational(8),
                 "LP optimum is 8, strictly above the classical sum");
    check.expect(report.verdict == MonogamyReport::Verdict::not_monogamous,
                 "verdict not-monogamous");
    return check.exit_code();
}

int run_demo(const std::string& name) {
    if (name == "prbox-extension")
        return demo_prbox_extension();
    if (name == "chsh-monogamy")
        return demo_chsh_monogamy();
    if (name == "theorem2-example")
        return demo_theorem2();
    if (name == "theorem3-example")
        return demo_theorem3();
    if (name == "theorem4-example")
        return demo_theorem4();
    if (name == "loop3")
        return demo_loop3();
    if (name == "chain2")
        return demo_chain2();
    if (name == "chain3-nonmonogamy")
        return demo_chain3();
    throw input_error("unknown demo '" + name +
                      "'; available: prbox-extension chsh-monogamy theorem2-example "
                      "theorem3-example theorem4-example loop3 chain2 chain3-nonmonogamy");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"no-disturbance bounds, joints and monogamy certification"};
    app.require_subcommand(1);
    std::string format = "text";
    app.add_option("--format", format, "output format")
        ->check(CLI::IsMember({"text", "json"}));

    std::string scenario_path, behavior_path, pins_path, expr_name, out_path, dump_path;
    std::string theorem, sizes_csv, lp_mode = "auto";
    int cycle_n = 0, chsh_m = 0, neg_pos = -1, lp_cap = 5000;
    std::uint64_t seed = 1;

    auto* chordal = app.add_subcommand("chordal", "chordality certificate or witness cycle");
    chordal->add_option("--scenario", scenario_path)->required();

    auto* bounds = app.add_subcommand("bounds", "classical/quantum/no-disturbance bounds");
    bounds->add_option("--scenario", scenario_path);
    bounds->add_option("--expr", expr_name);
    bounds->add_option("--cycle", cycle_n);
    bounds->add_option("--neg", neg_pos);
    bounds->add_option("--chsh", chsh_m);

    auto* fine = app.add_subcommand("fine-joint", "clique-tree joint distribution");
    fine->add_option("--scenario", scenario_path)->required();
    fine->add_option("--behavior", behavior_path)->required();

    auto* checknd = app.add_subcommand("check-nd", "no-disturbance consistency check");
    checknd->add_option("--scenario", scenario_path)->required();
    checknd->add_option("--behavior", behavior_path)->required();

    auto* ndmax = app.add_subcommand("nd-max", "maximize an expression over the ND polytope");
    ndmax->add_option("--scenario", scenario_path);
    ndmax->add_option("--expr", expr_name);
    ndmax->add_option("--cycle", cycle_n);
    ndmax->add_option("--neg", neg_pos);
    ndmax->add_option("--chsh", chsh_m);
    ndmax->add_option("--pins", pins_path);
    ndmax->add_option("--dump-behavior", dump_path);
    ndmax->add_option("--lp-cap", lp_cap);

    auto* extend = app.add_subcommand("extend", "extend pinned marginals to an ND behavior");
    extend->add_option("--scenario", scenario_path)->required();
    extend->add_option("--pins", pins_path)->required();

    auto* monogamy = app.add_subcommand("monogamy", "certify a monogamy relation");
    monogamy->add_option("--theorem", theorem);
    monogamy->add_option("--sizes", sizes_csv);
    monogamy->add_option("--scenario", scenario_path);
    monogamy->add_option("--lp", lp_mode)->check(CLI::IsMember({"auto", "off", "force"}));
    monogamy->add_option("--lp-cap", lp_cap);

    auto* gen = app.add_subcommand("gen", "emit scenario or behavior files");
    std::string gen_what;
    gen->add_option("what", gen_what, "cycle | chsh | monogamy | behavior")->required();
    gen->add_option("--n", cycle_n);
    gen->add_option("--neg", neg_pos);
    gen->add_option("--m", chsh_m);
    gen->add_option("--theorem", theorem);
    gen->add_option("--sizes", sizes_csv);
    gen->add_option("--scenario", scenario_path);
    gen->add_option("--seed", seed);
    gen->add_option("-o,--out", out_path);

    auto* demo = app.add_subcommand("demo", "self-checking worked examples");
    std::string demo_name;
    demo->add_option("name", demo_name)->required();

    for (auto* sub : app.get_subcommands({}))
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }
    const bool as_json = format == "json";

    try {
        if (chordal->parsed()) {
            const ScenarioFile file = scenario_from_json(load_json(scenario_path));
            const Graph g = compatibility_graph(file.scenario);
            if (const auto peo = is_chordal(g)) {
                json j{{"chordal", true}};
                std::string text = "chordal: yes\nperfect elimination ordering:";
                json order = json::array();
                for (int v : peo->order) {
                    text += " " + file.scenario.label(v);
                    order.push_back(file.scenario.label(v));
                }
                j["elimination_order"] = std::move(order);
                emit(text + "\n", j, as_json);
                return kExitOk;
            }
            const auto witness = find_induced_cycle(g);
            json j{{"chordal", false}};
            std::string text = "chordal: no\ninduced cycle:";
            json cycle = json::array();
            for (int v : *witness) {
                text += " " + file.scenario.label(v);
                cycle.push_back(file.scenario.label(v));
            }
            j["witness_cycle"] = std::move(cycle);
            emit(text + "\n", j, as_json);
            return kExitNegative;
        }

        if (bounds->parsed()) {
            const auto sel = select_expression(scenario_path, expr_name, cycle_n, neg_pos, chsh_m);
            const BoundsReport report = bounds_report(sel.scenario, sel.expression);
            emit(render_bounds_report(sel.scenario, sel.expression, report),
                 bounds_report_to_json(sel.scenario, sel.expression, report), as_json);
            return kExitOk;
        }

        if (fine->parsed()) {
            const ScenarioFile file = scenario_from_json(load_json(scenario_path));
            const Behavior behavior =
                Behavior::create(file.scenario, clique_ordered_tables(file.scenario, behavior_path));
            try {
                const JointDistribution joint = fine_joint(behavior);
                emit(render_joint(file.scenario, joint), joint_to_json(file.scenario, joint),
                     as_json);
                return kExitOk;
            } catch (const non_chordal_error& e) {
                std::string text = "not chordal; induced cycle:";
                for (int v : e.witness_cycle)
                    text += " " + file.scenario.label(v);
                std::cerr << text << "\n";
                return kExitNegative;
            }
        }

        if (checknd->parsed()) {
            const ScenarioFile file = scenario_from_json(load_json(scenario_path));
            const auto tables = clique_ordered_tables(file.scenario, behavior_path);
            const NdCheck check = check_no_disturbance(file.scenario, tables);
            emit(render_nd_check(file.scenario, check), nd_check_to_json(file.scenario, check),
                 as_json);
            return check.ok() ? kExitOk : kExitNegative;
        }

        if (ndmax->parsed()) {
            const auto sel = select_expression(scenario_path, expr_name, cycle_n, neg_pos, chsh_m);
            std::vector<Pin> pins;
            if (!pins_path.empty())
                pins = load_pins(sel.scenario, pins_path);
            try {
                const NdOptimum opt = nd_maximize(sel.scenario, sel.expression, pins, {}, lp_cap);
                json j{{"optimum", rational_string(opt.value)},
                       {"decimal", decimal_string(opt.value)}};
                std::string text = "nd optimum: " + render_rational(opt.value) + "\n";
                if (!dump_path.empty()) {
                    std::ofstream out(dump_path);
                    if (!out)
                        throw input_error("cannot write '" + dump_path + "'");
                    out << behavior_to_json(opt.behavior).dump(2) << "\n";
                    text += "optimal behavior written to " + dump_path + "\n";
                }
                emit(text, j, as_json);
                return kExitOk;
            } catch (const input_error& e) {
                if (std::string(e.what()).find("infeasible") == std::string::npos)
                    throw;
                std::cerr << e.what() << "\n";
                return kExitNegative;
            }
        }

        if (extend->parsed()) {
            const ScenarioFile file = scenario_from_json(load_json(scenario_path));
            const auto pins = load_pins(file.scenario, pins_path);
            const ExtendResult result = extend_feasibility(file.scenario, pins);
            json j{{"feasible", result.feasible}};
            std::string text = result.feasible ? "feasible\n" : "infeasible\n";
            if (result.feasible) {
                j["behavior"] = behavior_to_json(*result.behavior);
            } else {
                j["conflict_rows"] = result.conflict_rows;
                text += "conflicting rows:\n";
                for (const auto& name : result.conflict_rows)
                    text += "  " + name + "\n";
            }
            emit(text, j, as_json);
            return result.feasible ? kExitOk : kExitNegative;
        }

        if (monogamy->parsed()) {
            const MonogamyInstance inst =
                instance_from_options(theorem, sizes_csv, scenario_path);
            CertifyOptions opts;
            opts.lp_cap = lp_cap;
            if (lp_mode == "off")
                opts.lp = LpMode::off;
            else if (lp_mode == "force")
                opts.lp = LpMode::forced;
            const MonogamyReport report = certify(inst, opts);
            emit(render_monogamy_report(inst, report), monogamy_report_to_json(inst, report),
                 as_json);
            return report.verdict == MonogamyReport::Verdict::not_monogamous ? kExitNegative
                                                                             : kExitOk;
        }

        if (gen->parsed()) {
            if (gen_what == "cycle") {
                if (cycle_n < 3)
                    throw input_error("gen cycle needs --n >= 3");
                const auto made = cycle_expression(
                    cycle_n, neg_pos >= 0 ? std::optional<int>(neg_pos) : std::nullopt);
                const json j = scenario_to_json(made.scenario, {made.expression});
                emit(j.dump(2) + "\n", j, false, out_path);
                return kExitOk;
            }
            if (gen_what == "chsh") {
                if (chsh_m < 2)
                    throw input_error("gen chsh needs --m >= 2");
                const auto made = chsh_chain_expression(chsh_m);
                const json j = scenario_to_json(made.scenario, {made.expression});
                emit(j.dump(2) + "\n", j, false, out_path);
                return kExitOk;
            }
            if (gen_what == "monogamy") {
                const MonogamyInstance inst = instance_from_options(theorem, sizes_csv, "");
                const json j = scenario_to_json(inst.scenario, inst.expressions, inst.shared);
                emit(j.dump(2) + "\n", j, false, out_path);
                return kExitOk;
            }
            if (gen_what == "behavior") {
                if (scenario_path.empty())
                    throw input_error("gen behavior needs --scenario");
                const ScenarioFile file = scenario_from_json(load_json(scenario_path));
                const Behavior behavior = random_nd_behavior(file.scenario, seed);
                const json j = behavior_to_json(behavior);
                emit(j.dump(2) + "\n", j, false, out_path);
                return kExitOk;
            }
            throw input_error("gen expects one of: cycle, chsh, monogamy, behavior");
        }

        if (demo->parsed())
            return run_demo(demo_name);
    } catch (const resource_error& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return kExitResource;
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const json::exception& e) {
        std::cerr << "error: malformed input: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
