#include "doctest.h"
#include "support.hpp"

#include "chbu/etr/etr.hpp"
#include "chbu/lp/rounding.hpp"

using namespace chbu;
using chbu::testing::error_code_of;
using chbu::testing::q;
using chbu::testing::Rng;

namespace {

using P = EtrPoly;

Circuit random_circuit(Rng& rng, std::size_t inputs, std::size_t gates) {
    CircuitBuilder b;
    for (std::size_t i = 0; i < inputs; ++i) b.input();
    const GateKind kinds[] = {GateKind::Const, GateKind::Add,      GateKind::Sub,   GateKind::MulConst, GateKind::Mul,
                              GateKind::Max,   GateKind::Min,      GateKind::Square, GateKind::Double01, GateKind::Sub01};
    for (std::size_t g = 0; g < gates; ++g) {
        GateKind k = kinds[rng.integer(0, 9)];
        std::vector<NodeId> in;
        for (std::size_t a = 0; a < gate_arity(k); ++a)
            in.push_back(static_cast<NodeId>(rng.integer(0, static_cast<long>(b.node_count()) - 1)));
        b.gate(k, in, has_zeta(k) ? rng.rational(-2, 2, 8) : Rational());
    }
    return b.build({b.node_count() - 1}, "random");
}

CHInstance density_instance(std::vector<PiecewisePoly> densities) {
    CHInstance inst;
    for (std::size_t i = 0; i < densities.size(); ++i)
        inst.agents.push_back(Agent{"d" + std::to_string(i), integrate(densities[i])});
    return inst;
}

CHInstance uniform_one() { return density_instance({PiecewisePoly::constant(0, 1, 1)}); }

// Agent a uniform on [0,1], agent b uniform on [0,1/2].
CHInstance pair() {
    return density_instance({PiecewisePoly::constant(0, 1, 1), DensityBuilder(0, 1).constant(0, q("1/2"), 1).build()});
}

ETRSentence single_var(const char* name, Interval box) {
    ETRSentence s;
    s.declare(name, box);
    return s;
}

}  // namespace

TEST_CASE("gate constraints follow the gate semantics") {
    CircuitBuilder b;
    NodeId x = b.input(), y = b.input();
    b.add(x, y);
    auto s = circuit_to_constraints(b.build({2}));
    REQUIRE(s.variables.size() == 3);
    CHECK(s.variables[2].name == "n2");
    REQUIRE(s.assertions.size() == 1);
    CHECK(s.assertions[0] == Formula::atom(P::variable(2), Cmp::Eq, P::variable(0) + P::variable(1)));

    CircuitBuilder mb;
    NodeId a = mb.input(), c = mb.input();
    mb.max(a, c);
    auto ms = circuit_to_constraints(mb.build({2}));
    REQUIRE(ms.assertions.size() == 1);
    const Formula& f = ms.assertions[0];
    CHECK(f.kind == Formula::Kind::Or);
    REQUIRE(f.children.size() == 2);
    CHECK(f.children[0] == Formula::conj({Formula::atom(P::variable(2), Cmp::Eq, P::variable(0)),
                                          Formula::atom(P::variable(0), Cmp::Ge, P::variable(1))}));
    CHECK(evaluate(ms, std::vector<Rational>{1, 2, 2}, 0).holds);
    CHECK_FALSE(evaluate(ms, std::vector<Rational>{1, 2, 1}, 0).holds);

    CircuitBuilder cb;
    cb.cmp_gt(cb.input());
    auto dec = cb.build({1});
    CHECK(error_code_of([&] { circuit_to_constraints(dec); }) == Errc::ComparisonGateForbidden);
}

TEST_CASE("substituted evaluations satisfy the constraints") {
    Rng rng(51);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        auto c = random_circuit(rng, static_cast<std::size_t>(rng.integer(1, 3)), 10);
        auto s = circuit_to_constraints(c);
        for (int k = 0; k < 20; ++k) {
            std::vector<Rational> in;
            for (std::size_t i = 0; i < c.inputs.size(); ++i) in.push_back(rng.rational(-1, 1, 32));
            auto values = evaluate(c, in).values;
            auto t = evaluate(s, values, 0);
            CHECK(t.holds);
            CHECK(t.residual == 0);
            ++checked;
            // Moving the output away from its value breaks the gate producing it.
            auto bad = values;
            bad[c.outputs[0]] += Rational(1, 3);
            CHECK_FALSE(evaluate(s, bad, 0).holds);
        }
    }
    CHECK(checked == 1000);
}

TEST_CASE("text form round-trips") {
    Rng rng(52);
    for (int trial = 0; trial < 20; ++trial) {
        auto s = circuit_to_constraints(random_circuit(rng, 2, 8));
        CHECK(parse_sentence(to_text(s)) == s);
    }
    auto ch = ch_to_etr(pair(), 2);
    CHECK(parse_sentence(to_text(ch)) == ch);

    CircuitBuilder b;
    NodeId x0 = b.input();
    b.input();
    BUInstance bu{1, b.build({b.mul_const(1, x0)}), true};
    auto bs = bu_to_etr(bu);
    CHECK(parse_sentence(to_text(bs)) == bs);

    auto hand = parse_sentence(
        "; a comment\n(declare-var x (box 0 1))\n(declare-var y)\n"
        "(assert (or (= (^ (+ x 1) 2) (* 4 y)) (not (< (- x) -1/2))))\n(assert true)\n(check-sat)\n");
    REQUIRE(hand.variables.size() == 2);
    CHECK(hand.variables[0].box == Interval{0, 1});
    CHECK_FALSE(hand.variables[1].box);
    const Formula& atom = hand.assertions[0].children[0];
    P xp = P::variable(0);
    CHECK(atom.lhs == xp * xp + xp * Rational(2) + P::constant(1));
    CHECK(atom.rhs == P::variable(1) * Rational(4));
    CHECK(parse_sentence(to_text(hand)) == hand);
}

TEST_CASE("parse errors") {
    auto code = [](const char* text) { return error_code_of([&] { parse_sentence(text); }); };
    CHECK(code("(declare-var x)\n(assert (= y 1))\n(check-sat)") == Errc::ParseError);
    CHECK(code("(declare-var x)\n(assert (= x 1)\n(check-sat)") == Errc::ParseError);
    CHECK(code("(declare-var x)\n(assert (= x 1))") == Errc::ParseError);
    CHECK(code("(declare-var x)\n(assert (= x 0.5))\n(check-sat)") == Errc::ParseError);
    CHECK(code("(declare-var x)\n(declare-var x)\n(check-sat)") == Errc::ParseError);
    CHECK(code("(declare-var x (box 1 0))\n(check-sat)") == Errc::ParseError);
    CHECK(code("(declare-var x)\n(assert (~ x 1))\n(check-sat)") == Errc::ParseError);
    CHECK(code("(check-sat)\n(declare-var x)") == Errc::ParseError);
}

TEST_CASE("SMT-LIB export") {
    auto s = single_var("x", Interval{q("-1/2"), 1});
    s.assertions.push_back(Formula::atom(P::variable(0) * P::variable(0), Cmp::Eq, P::constant(q("1/4"))));
    s.assertions.push_back(Formula::conj({}));
    auto text = to_smtlib2(s);
    CHECK(text.find("(set-logic QF_NRA)") != std::string::npos);
    CHECK(text.find("(declare-fun x () Real)") != std::string::npos);
    CHECK(text.find("(<= (- (/ 1.0 2.0)) x)") != std::string::npos);
    CHECK(text.find("(= (* x x) (/ 1.0 4.0))") != std::string::npos);
    CHECK(text.find("(assert true)") != std::string::npos);
    CHECK(text.find("(and)") == std::string::npos);
    CHECK(text.find("(check-sat)") != std::string::npos);
}

TEST_CASE("brute_check examples") {
    auto s = single_var("x", Interval{0, 1});
    P x = P::variable(0);
    s.assertions.push_back(Formula::atom(x * x, Cmp::Eq, P::constant(q("1/4"))));
    auto r = brute_check(s, q("1/8"));
    REQUIRE(r.sat);
    CHECK(r.witness == std::vector<Rational>{q("1/2")});
    CHECK(r.residual == 0);
    CHECK(r.exhausted);

    auto none = single_var("x", Interval{0, 1});
    none.assertions.push_back(Formula::atom(x * x, Cmp::Eq, P::constant(2)));
    auto u = brute_check(none, q("1/8"));
    CHECK_FALSE(u.sat);
    CHECK(u.exhausted);

    ETRSentence free;
    free.declare("y");
    free.assertions.push_back(Formula::atom(P::variable(0) * P::variable(0), Cmp::Eq, P::constant(1)));
    CHECK(error_code_of([&] { brute_check(free, q("1/8")); }) == Errc::UnboundedVariable);
    CHECK(error_code_of([&] { brute_check(s, 0); }) == Errc::InvalidArgument);

    // Defined variables need no box.
    ETRSentence def;
    def.declare("a", Interval{0, 1});
    def.declare("b");
    def.assertions.push_back(Formula::atom(P::variable(1), Cmp::Eq, P::variable(0) * P::variable(0)));
    def.assertions.push_back(Formula::atom(P::variable(1), Cmp::Eq, P::constant(q("9/16"))));
    auto d = brute_check(def, q("1/4"));
    REQUIRE(d.sat);
    CHECK(d.witness == std::vector<Rational>{q("3/4"), q("9/16")});

    auto small = brute_check(s, q("1/8"), {}, BruteOptions{1, 1});
    CHECK_FALSE(small.exhausted);
}

TEST_CASE("brute_check threads agree") {
    ETRSentence s;
    s.declare("a", Interval{-1, 1});
    s.declare("b", Interval{-1, 1});
    P a = P::variable(0), b = P::variable(1);
    s.assertions.push_back(Formula::atom(a * a + b * b, Cmp::Eq, P::constant(q("1/2"))));
    s.assertions.push_back(Formula::atom(a, Cmp::Lt, b));
    auto one = brute_check(s, q("1/16"), {}, BruteOptions{1'000'000, 1});
    auto four = brute_check(s, q("1/16"), {}, BruteOptions{1'000'000, 4});
    REQUIRE(one.sat);
    CHECK(one.residual == 0);
    CHECK(one.witness == four.witness);
}

TEST_CASE("CH sentences") {
    auto one = uniform_one();
    auto s = ch_to_etr(one, 1);
    auto r = brute_check(s, q("1/8"));
    REQUIRE(r.sat);
    CHECK(r.residual == 0);
    auto sol = ch_solution_from_witness(s, one, r.witness);
    CHECK(sol.cuts == std::vector<Rational>{q("1/2")});
    CHECK(verify(one, sol, 0).all_satisfied);

    // One cut cannot halve both agents of the pair.
    auto inst = pair();
    auto s1 = ch_to_etr(inst, 1);
    auto u = brute_check(s1, q("1/8"));
    CHECK_FALSE(u.sat);
    CHECK(u.exhausted);

    // Two cuts can.
    CHSolution known{"", {q("1/4"), q("3/4")}, Sign::Plus};
    REQUIRE(verify(inst, known, 0).all_satisfied);
    auto s2 = ch_to_etr(inst, 2);
    auto w = ch_witness(s2, inst, known);
    auto t = evaluate(s2, w, 0);
    CHECK(t.holds);
    CHECK(t.residual == 0);
    CHECK(ch_solution_from_witness(s2, inst, w) == known);
    auto fixed = brute_check(s2, q("1/8"), {{"x0", q("1/4")}, {"x1", q("-1/2")}, {"x2", q("1/4")}});
    REQUIRE(fixed.sat);
    CHECK(fixed.residual == 0);
    CHECK(fixed.witness == w);
    auto found = brute_check(s2, q("1/4"));
    REQUIRE(found.sat);
    CHECK(found.residual == 0);
    CHECK(verify(inst, ch_solution_from_witness(s2, inst, found.witness), 0).all_satisfied);

    // A solution with fewer cuts than the budget pads with empty pieces.
    auto w1 = ch_witness(ch_to_etr(one, 3), one, CHSolution{"", {q("1/2")}, Sign::Minus});
    CHECK(evaluate(ch_to_etr(one, 3), w1, 0).holds);
    CHECK(error_code_of([&] { ch_witness(s1, inst, known); }) == Errc::BadSolutionShape);
}

TEST_CASE("witness transfer on random linear instances with k = n") {
    Rng rng(53);
    int solved = 0;
    for (int trial = 0; trial < 6; ++trial) {
        std::vector<PiecewisePoly> dens;
        for (int i = 0; i < 2; ++i) {
            Rational a = rng.rational(0, q("1/2"), 8), b = rng.rational(q("1/2"), 1, 8);
            dens.push_back(DensityBuilder(0, 1).constant(0, 1, q("1/4")).constant(a, b, rng.rational(1, 3, 2)).build());
        }
        auto inst = with_circuit_valuations(density_instance(dens));
        auto bu = ch_to_bu(inst);
        auto tr = tucker_solve(bu, q("1/8"), lipschitz_bound(bu.map));
        if (!tr.solved()) continue;
        auto exact = round_to_exact(bu, std::get<ApproxSolution>(tr.outcome).x);
        auto sol = decode_bu_solution(exact.x, inst);
        REQUIRE(verify(inst, sol, 0).all_satisfied);
        ++solved;
        auto s = ch_to_etr(inst, inst.size());
        auto w = ch_witness(s, inst, sol);
        CHECK(evaluate(s, w, 0).holds);
        auto back = ch_solution_from_witness(s, inst, w);
        CHECK(verify(inst, back, 0).all_satisfied);
        std::map<std::string, Rational> pin;
        for (std::size_t j = 0; j <= inst.size(); ++j) pin["x" + std::to_string(j)] = w[s.index("x" + std::to_string(j))];
        auto r = brute_check(s, q("1/8"), pin);
        REQUIRE(r.sat);
        CHECK(r.residual == 0);
    }
    CHECK(solved >= 5);
}

TEST_CASE("BU sentences") {
    CircuitBuilder b;
    NodeId x0 = b.input();
    b.input();
    BUInstance bu{1, b.build({b.mul_const(1, x0)}), true};
    auto s = bu_to_etr(bu);
    auto r = brute_check(s, q("1/4"));
    REQUIRE(r.sat);
    CHECK(r.residual == 0);
    CHECK(r.witness[s.index("x0")] == 0);
    CHECK(abs(r.witness[s.index("x1")]) == 1);

    auto w = bu_witness(s, bu, std::vector<Rational>{0, -1});
    CHECK(evaluate(s, w, 0).holds);
    auto off = bu_witness(s, bu, std::vector<Rational>{q("1/2"), q("1/2")});
    CHECK_FALSE(evaluate(s, off, 0).holds);
    auto not_sphere = bu_witness(s, bu, std::vector<Rational>{0, q("1/2")});
    CHECK_FALSE(evaluate(s, not_sphere, 0).holds);
}
