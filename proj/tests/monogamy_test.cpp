#include "ndmono/monogamy.hpp"

#include <gtest/gtest.h>

#include <map>

#include "ndmono/bounds.hpp"

using namespace ndmono;

namespace {

using TermKey = std::pair<std::pair<Vertex, Vertex>, Rational>;

std::map<TermKey, int> term_multiset(const std::vector<Expression>& expressions) {
    std::map<TermKey, int> multiset;
    for (const Expression& e : expressions)
        for (const Term& t : e.terms())
            ++multiset[{ordered_pair(t.u, t.v), t.coeff}];
    return multiset;
}

}  // namespace

TEST(Builders, OneToManyShapes) {
    const auto inst = build_one_to_many({2, 2});
    EXPECT_EQ(inst.scenario.size(), 6);
    EXPECT_EQ(inst.expressions.size(), 2u);
    EXPECT_EQ(inst.expressions[0].display(inst.scenario), "A1B1+B1A2+A2B2-B2A1");
    EXPECT_EQ(inst.expressions[1].display(inst.scenario), "A1C1+C1A2+A2C2-C2A1");
    // Shared measurements: A1, A2.
    std::vector<Vertex> expected{inst.scenario.require("A1"), inst.scenario.require("A2")};
    EXPECT_EQ(inst.shared, expected);
    EXPECT_THROW(build_one_to_many({2, 1}), input_error);
}

TEST(Builders, OneToManyPaperSlotConvention) {
    // The 4,3 instance uses A1, A2, A4 in the second experiment, matching
    // the worked example's B(2x3) = A1C1+C1A2+A2C2+C2A4+A4C3-C3A1.
    const auto inst = build_one_to_many({4, 3});
    EXPECT_EQ(inst.expressions[0].display(inst.scenario),
              "A1B1+B1A2+A2B2+B2A3+A3B3+B3A4+A4B4-B4A1");
    EXPECT_EQ(inst.expressions[1].display(inst.scenario), "A1C1+C1A2+A2C2+C2A4+A4C3-C3A1");
}

TEST(Builders, ContextualBellShape) {
    const auto inst = build_contextual_bell(5);
    EXPECT_EQ(inst.scenario.size(), 7);
    EXPECT_EQ(inst.expressions.size(), 2u);
    EXPECT_EQ(inst.expressions[0].terms().size(), 5u);
    EXPECT_EQ(inst.expressions[1].terms().size(), 4u);
    // B1 is compatible with every A_i; B1-B2 are not compatible.
    const Vertex b1 = inst.scenario.require("B1"), b2 = inst.scenario.require("B2");
    for (int i = 1; i <= 5; ++i)
        EXPECT_TRUE(inst.scenario.compatible(inst.scenario.require("A" + std::to_string(i)), b1));
    EXPECT_FALSE(inst.scenario.compatible(b1, b2));
    EXPECT_THROW(build_contextual_bell(3), input_error);
}

TEST(Builders, MultiCycleShape) {
    const auto inst = build_multi_cycle({8, 11});
    EXPECT_EQ(inst.expressions.size(), 2u);
    EXPECT_EQ(inst.expressions[0].terms().size(), 8u);
    EXPECT_EQ(inst.expressions[1].terms().size(), 11u);
    // Shared S1, S2 appear in both cycles.
    std::vector<Vertex> expected{inst.scenario.require("S1"), inst.scenario.require("S2")};
    EXPECT_EQ(inst.shared, expected);
    // Cross-cycle non-shared pairs compatible, within-cycle non-adjacent not.
    EXPECT_TRUE(inst.scenario.compatible(inst.scenario.require("C1_1"),
                                         inst.scenario.require("C2_3")));
    EXPECT_FALSE(inst.scenario.compatible(inst.scenario.require("C1_1"),
                                          inst.scenario.require("C1_3")));
    EXPECT_FALSE(inst.scenario.compatible(inst.scenario.require("S1"),
                                          inst.scenario.require("S2")));
    EXPECT_THROW(build_multi_cycle({8}), input_error);
    EXPECT_THROW(build_multi_cycle({8, 3}), input_error);
}

TEST(Builders, LoopAndChainShapes) {
    const auto loop = build_loop({2, 2, 2});
    EXPECT_EQ(loop.expressions.size(), 3u);
    EXPECT_EQ(loop.scenario.size(), 6);
    const auto chain = build_chain(2);
    EXPECT_EQ(chain.expressions.size(), 2u);
    EXPECT_EQ(chain.scenario.size(), 6);
    const auto chain3 = build_chain(3);
    EXPECT_FALSE(chain3.notes.empty());
    EXPECT_THROW(build_loop({2, 2}), input_error);
    EXPECT_THROW(build_chain(1), input_error);
}

TEST(Recombine, PaperTheorem2Assignment) {
    const auto inst = build_one_to_many({4, 3});
    const auto rec = recombine(inst);
    ASSERT_TRUE(rec.has_value());
    ASSERT_EQ(rec->expressions.size(), 2u);
    EXPECT_EQ(rec->expressions[0].display(inst.scenario),
              "A1B1+B1A2+A2B2+B2A3+A3B3+B3A4+A4C3-C3A1");
    EXPECT_EQ(rec->expressions[1].display(inst.scenario), "A1C1+C1A2+A2C2+C2A4+A4B4-B4A1");
    EXPECT_EQ(rec->recombined_sum, Rational(10));
    // Per-expression term counts preserved by the cyclic exchange.
    EXPECT_EQ(rec->expressions[0].terms().size(), 8u);
    EXPECT_EQ(rec->expressions[1].terms().size(), 6u);
    EXPECT_EQ(term_multiset(inst.expressions), term_multiset(rec->expressions));
}

TEST(Recombine, ChshPairSwapsFinalTerms) {
    const auto inst = build_one_to_many({2, 2});
    const auto rec = recombine(inst);
    ASSERT_TRUE(rec.has_value());
    EXPECT_EQ(rec->expressions[0].display(inst.scenario), "A1B1+B1A2+A2C2-C2A1");
    EXPECT_EQ(rec->expressions[1].display(inst.scenario), "A1C1+C1A2+A2B2-B2A1");
    EXPECT_EQ(term_multiset(inst.expressions), term_multiset(rec->expressions));
}

TEST(Recombine, SingleChordalExpressionIsIdentity) {
    // A triangle expression is already chordally completable.
    const auto c3 = cycle_expression(3);
    MonogamyInstance inst;
    inst.scenario = c3.scenario;
    inst.expressions = {c3.expression};
    inst.shared = {};
    const auto rec = recombine(inst);
    ASSERT_TRUE(rec.has_value());
    EXPECT_EQ(rec->expressions.size(), 1u);
    EXPECT_EQ(rec->expressions[0].display(inst.scenario),
              c3.expression.display(inst.scenario));
}

TEST(Recombine, SingleNonChordalExpressionIsUndecided) {
    const auto c5 = cycle_expression(5);
    MonogamyInstance inst;
    inst.scenario = c5.scenario;
    inst.expressions = {c5.expression};
    EXPECT_FALSE(recombine(inst).has_value());
}

TEST(Recombine, TermConservationAcrossBuilders) {
    std::vector<MonogamyInstance> instances;
    instances.push_back(build_one_to_many({2, 2}));
    instances.push_back(build_one_to_many({3, 2}));
    instances.push_back(build_one_to_many({4, 3}));
    instances.push_back(build_one_to_many({2, 2, 2}));
    instances.push_back(build_one_to_many({3, 3, 2}));
    instances.push_back(build_one_to_many({5, 5, 5}));
    instances.push_back(build_contextual_bell(4));
    instances.push_back(build_contextual_bell(5));
    instances.push_back(build_contextual_bell(8));
    instances.push_back(build_multi_cycle({4, 4}));
    instances.push_back(build_multi_cycle({5, 5}));
    instances.push_back(build_multi_cycle({8, 11}));
    instances.push_back(build_chain(2));
    instances.push_back(build_chain(4));
    for (const auto& inst : instances) {
        const auto rec = recombine(inst);
        ASSERT_TRUE(rec.has_value()) << inst.kind;
        EXPECT_EQ(term_multiset(inst.expressions), term_multiset(rec->expressions)) << inst.kind;
        Rational original_sum(0);
        for (const auto& e : inst.expressions)
            original_sum += classical_bound(inst.scenario, e).value;
        EXPECT_EQ(rec->recombined_sum, original_sum) << inst.kind;
        // Every piece certificate is a valid chordal completion.
        for (const auto& piece : rec->pieces) {
            const auto vs = piece.expression.vertices();
            std::map<Vertex, int> local;
            for (std::size_t i = 0; i < vs.size(); ++i)
                local[vs[i]] = static_cast<int>(i);
            Graph filled(static_cast<int>(vs.size()));
            for (const Term& t : piece.expression.terms())
                filled.add_edge(local[t.u], local[t.v]);
            for (const auto& [u, v] : piece.fill_edges) {
                EXPECT_TRUE(inst.scenario.compatible(u, v));
                filled.add_edge(local[u], local[v]);
            }
            PerfectEliminationOrdering order;
            for (Vertex v : piece.elimination_order)
                order.order.push_back(local[v]);
            EXPECT_TRUE(verify_peo(filled, order)) << inst.kind;
        }
    }
}

TEST(Certify, Theorem2Example) {
    const auto inst = build_one_to_many({4, 3});
    const auto report = certify(inst);
    EXPECT_EQ(report.classical_sum, Rational(10));
    EXPECT_EQ(report.structural.kind, StructuralCertificate::Kind::direct);
    ASSERT_TRUE(report.lp_optimum.has_value());
    EXPECT_EQ(*report.lp_optimum, Rational(10));
    EXPECT_EQ(report.verdict, MonogamyReport::Verdict::monogamous);
}

TEST(Certify, Theorem2ThreeBobs) {
    // k = 3 CHSH experiments: bound 3 * 2 = 6.
    const auto inst = build_one_to_many({2, 2, 2});
    const auto report = certify(inst);
    EXPECT_EQ(report.classical_sum, Rational(6));
    EXPECT_EQ(report.structural.kind, StructuralCertificate::Kind::direct);
    ASSERT_TRUE(report.lp_optimum.has_value());
    EXPECT_EQ(*report.lp_optimum, Rational(6));
    EXPECT_EQ(report.verdict, MonogamyReport::Verdict::monogamous);
}

TEST(Certify, Theorem3Examples) {
    for (int n : {4, 5, 8}) {
        const auto inst = build_contextual_bell(n);
        const auto report = certify(inst);
        EXPECT_EQ(report.classical_sum, Rational(n)) << "n=" << n;
        EXPECT_TRUE(report.structural.ok()) << "n=" << n;
        ASSERT_TRUE(report.lp_optimum.has_value());
        EXPECT_EQ(*report.lp_optimum, Rational(n)) << "n=" << n;
        EXPECT_EQ(report.verdict, MonogamyReport::Verdict::monogamous);
    }
}

TEST(Certify, Theorem4SmallExamplesWithLp) {
    const auto four = certify(build_multi_cycle({4, 4}));
    EXPECT_EQ(four.classical_sum, Rational(4));
    ASSERT_TRUE(four.lp_optimum.has_value());
    EXPECT_EQ(*four.lp_optimum, Rational(4));
    EXPECT_EQ(four.verdict, MonogamyReport::Verdict::monogamous);

    const auto five = certify(build_multi_cycle({5, 5}));
    EXPECT_EQ(five.classical_sum, Rational(6));
    ASSERT_TRUE(five.lp_optimum.has_value());
    EXPECT_EQ(*five.lp_optimum, Rational(6));
    EXPECT_EQ(five.verdict, MonogamyReport::Verdict::monogamous);
}

TEST(Certify, Theorem4LargeExampleStructuralOnly) {
    const auto inst = build_multi_cycle({8, 11});
    CertifyOptions opts;
    opts.lp = LpMode::off;
    const auto report = certify(inst, opts);
    EXPECT_EQ(report.classical_sum, Rational(15));
    EXPECT_EQ(report.structural.kind, StructuralCertificate::Kind::direct);
    ASSERT_TRUE(report.structural.recombined_sum.has_value());
    EXPECT_EQ(*report.structural.recombined_sum, Rational(15));
    EXPECT_FALSE(report.lp_optimum.has_value());
    EXPECT_EQ(report.verdict, MonogamyReport::Verdict::monogamous);
    EXPECT_EQ(report.verdict_basis, "structural");
}

TEST(Certify, LoopThreeParties) {
    const auto inst = build_loop({2, 2, 2});
    const auto report = certify(inst);
    EXPECT_EQ(report.classical_sum, Rational(6));
    EXPECT_EQ(report.structural.kind, StructuralCertificate::Kind::pairwise_doubling);
    ASSERT_TRUE(report.lp_optimum.has_value());
    EXPECT_EQ(*report.lp_optimum, Rational(6));
    EXPECT_EQ(report.verdict, MonogamyReport::Verdict::monogamous);
}

TEST(Certify, LoopPairwiseSumsReachFour) {
    const auto inst = build_loop({2, 2, 2});
    for (std::size_t i = 0; i < 3; ++i) {
        MonogamyInstance pair;
        pair.scenario = inst.scenario;
        pair.expressions = {inst.expressions[i], inst.expressions[(i + 1) % 3]};
        pair.shared = shared_measurements(pair.expressions);
        const auto report = certify(pair);
        ASSERT_TRUE(report.lp_optimum.has_value());
        EXPECT_EQ(*report.lp_optimum, Rational(4)) << "pair " << i;
        EXPECT_EQ(report.verdict, MonogamyReport::Verdict::monogamous);
    }
}

TEST(Certify, MixedLoopSizes) {
    const auto inst = build_loop({2, 3, 2});
    const auto report = certify(inst);
    EXPECT_EQ(report.classical_sum, Rational(8));
    EXPECT_EQ(report.structural.kind, StructuralCertificate::Kind::pairwise_doubling);
    ASSERT_TRUE(report.lp_optimum.has_value());
    EXPECT_EQ(*report.lp_optimum, Rational(8));
    EXPECT_EQ(report.verdict, MonogamyReport::Verdict::monogamous);
}

TEST(Certify, FourPartyLoopUsesDisjointPairs) {
    const auto inst = build_loop({2, 2, 2, 2});
    const auto report = certify(inst);
    EXPECT_EQ(report.classical_sum, Rational(8));
    EXPECT_EQ(report.structural.kind, StructuralCertificate::Kind::direct);
    ASSERT_TRUE(report.lp_optimum.has_value());
    EXPECT_EQ(*report.lp_optimum, Rational(8));
    EXPECT_EQ(report.verdict, MonogamyReport::Verdict::monogamous);
}

TEST(Certify, FourLinkChainStructural) {
    // Eq.-(6)-style chain with n = 2: bound 4n = 8, certified by pairing the
    // links into adjacent couples.
    const auto inst = build_chain(4);
    CertifyOptions opts;
    opts.lp = LpMode::off;
    const auto report = certify(inst, opts);
    EXPECT_EQ(report.classical_sum, Rational(8));
    EXPECT_EQ(report.structural.kind, StructuralCertificate::Kind::direct);
    ASSERT_TRUE(report.structural.recombined_sum.has_value());
    EXPECT_EQ(*report.structural.recombined_sum, Rational(8));
    EXPECT_EQ(report.verdict, MonogamyReport::Verdict::monogamous);
    EXPECT_EQ(report.verdict_basis, "structural");
}

TEST(Certify, ChainTwoLinks) {
    const auto report = certify(build_chain(2));
    EXPECT_EQ(report.classical_sum, Rational(4));
    ASSERT_TRUE(report.lp_optimum.has_value());
    EXPECT_EQ(*report.lp_optimum, Rational(4));
    EXPECT_EQ(report.verdict, MonogamyReport::Verdict::monogamous);
}

TEST(Certify, ChainThreeLinksNotMonogamous) {
    const auto report = certify(build_chain(3));
    EXPECT_EQ(report.classical_sum, Rational(6));
    EXPECT_FALSE(report.structural.ok());
    ASSERT_TRUE(report.lp_optimum.has_value());
    EXPECT_GT(*report.lp_optimum, Rational(6));
    EXPECT_EQ(*report.lp_optimum, Rational(8));
    EXPECT_EQ(report.verdict, MonogamyReport::Verdict::not_monogamous);
}

TEST(Certify, StructuralImpliesLpEquality) {
    // Whenever the structural certificate succeeds and the LP runs, the two
    // agree exactly.
    std::vector<MonogamyInstance> instances;
    instances.push_back(build_one_to_many({2, 2}));
    instances.push_back(build_one_to_many({3, 2}));
    instances.push_back(build_contextual_bell(4));
    instances.push_back(build_contextual_bell(5));
    instances.push_back(build_multi_cycle({4, 4}));
    instances.push_back(build_chain(2));
    instances.push_back(build_loop({2, 2, 2}));
    for (const auto& inst : instances) {
        const auto report = certify(inst);
        if (report.structural.ok() && report.lp_optimum) {
            EXPECT_EQ(*report.lp_optimum, report.classical_sum) << inst.kind;
        }
    }
}

TEST(Certify, SingleViolableExpressionIsUndecidedWithoutLp) {
    const auto c5 = cycle_expression(5);
    MonogamyInstance inst;
    inst.scenario = c5.scenario;
    inst.expressions = {c5.expression};
    CertifyOptions opts;
    opts.lp = LpMode::off;
    const auto report = certify(inst, opts);
    EXPECT_FALSE(report.structural.ok());
    EXPECT_EQ(report.verdict, MonogamyReport::Verdict::undecided);
}

TEST(Certify, LpCapSkipsTheLpWithANote) {
    const auto c5 = cycle_expression(5);
    MonogamyInstance inst;
    inst.scenario = c5.scenario;
    inst.expressions = {c5.expression};
    CertifyOptions opts;
    opts.lp_cap = 4;  // 5 edge cliques x 4 outcomes = 20 variables
    const auto report = certify(inst, opts);
    EXPECT_FALSE(report.lp_optimum.has_value());
    bool noted = false;
    for (const auto& note : report.notes)
        if (note.find("LP skipped") != std::string::npos)
            noted = true;
    EXPECT_TRUE(noted);
    EXPECT_EQ(report.verdict, MonogamyReport::Verdict::undecided);
}

TEST(CompletionSearchCap, OversizedGraphReportsTooLarge) {
    const int n = CompletionSearch::kMaxVertices + 2;
    Graph base(n);
    for (int i = 0; i < n; ++i)
        base.add_edge(i, (i + 1) % n);
    EXPECT_EQ(CompletionSearch::run(base, Graph::complete(n)).status,
              CompletionSearch::Status::too_large);
}

TEST(Certify, SharingOnlyOneMeasurementBreaksMonogamy) {
    // CHSH_AB plus CHSH_AC sharing only A1: the LP optimum exceeds 4.
    std::vector<std::string> labels{"A1", "A2", "A3", "B1", "B2", "C1", "C2"};
    std::vector<std::pair<std::string, std::string>> compat;
    for (const auto& a : {"A1", "A2", "A3"})
        for (const auto& x : {"B1", "B2", "C1", "C2"})
            compat.emplace_back(a, x);
    for (const auto& b : {"B1", "B2"})
        for (const auto& c : {"C1", "C2"})
            compat.emplace_back(b, c);
    MonogamyInstance inst;
    inst.scenario = Scenario::create(labels, compat);
    const auto v = [&](const std::string& l) { return inst.scenario.require(l); };
    inst.expressions.push_back(Expression::create(
        inst.scenario, "CHSH_AB",
        {{v("A1"), v("B1"), Rational(1)},
         {v("B1"), v("A2"), Rational(1)},
         {v("A2"), v("B2"), Rational(1)},
         {v("B2"), v("A1"), Rational(-1)}}));
    inst.expressions.push_back(Expression::create(
        inst.scenario, "CHSH_AC",
        {{v("A1"), v("C1"), Rational(1)},
         {v("C1"), v("A3"), Rational(1)},
         {v("A3"), v("C2"), Rational(1)},
         {v("C2"), v("A1"), Rational(-1)}}));
    inst.shared = shared_measurements(inst.expressions);
    EXPECT_EQ(inst.shared, std::vector<Vertex>{v("A1")});
    const auto report = certify(inst);
    EXPECT_EQ(report.classical_sum, Rational(4));
    ASSERT_TRUE(report.lp_optimum.has_value());
    EXPECT_GT(*report.lp_optimum, Rational(4));
    EXPECT_EQ(*report.lp_optimum, Rational(6));
    EXPECT_EQ(report.verdict, MonogamyReport::Verdict::not_monogamous);
}
