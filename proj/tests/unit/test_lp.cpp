#include "doctest.h"
#include "support.hpp"

#include "chbu/lp/rounding.hpp"

using namespace chbu;
using chbu::testing::error_code_of;
using chbu::testing::q;
using chbu::testing::Rng;

namespace {

LinearProgram with_vars(std::size_t n, bool is_free = false) {
    LinearProgram lp;
    for (std::size_t j = 0; j < n; ++j) lp.add_variable("", is_free);
    return lp;
}

Circuit random_linear_circuit(Rng& rng, std::size_t inputs, std::size_t gates) {
    CircuitBuilder b;
    for (std::size_t i = 0; i < inputs; ++i) b.input();
    const GateKind kinds[] = {GateKind::Add, GateKind::Sub, GateKind::MulConst, GateKind::Max,
                              GateKind::Min, GateKind::Sub01, GateKind::Const};
    for (std::size_t g = 0; g < gates; ++g) {
        GateKind k = kinds[rng.integer(0, 6)];
        std::vector<NodeId> in;
        for (std::size_t a = 0; a < gate_arity(k); ++a)
            in.push_back(static_cast<NodeId>(rng.integer(0, static_cast<long>(b.node_count()) - 1)));
        Rational zeta = has_zeta(k) ? rng.rational(-2, 2, 4) : Rational();
        b.gate(k, in, zeta);
    }
    std::vector<NodeId> outs{b.node_count() - 1, b.node_count() - 2};
    return b.build(outs, "lin");
}

BUInstance bu_of(Circuit f) {
    std::size_t d = f.outputs.size();
    return BUInstance{d, std::move(f), true};
}

}  // namespace

TEST_CASE("simplex on small programs") {
    auto lp = with_vars(2);
    lp.objective = {-1, -1};
    lp.add_row({1, 2}, Relation::LessEqual, 4);
    lp.add_row({3, 1}, Relation::LessEqual, 6);
    auto r = solve_lp(lp);
    REQUIRE(r.status == LPStatus::Optimal);
    CHECK(r.values == std::vector<Rational>{q("8/5"), q("6/5")});
    CHECK(r.objective == q("-14/5"));

    auto inf = with_vars(1);
    inf.add_row({1}, Relation::GreaterEqual, 1);
    inf.add_row({1}, Relation::LessEqual, 0);
    CHECK(solve_lp(inf).status == LPStatus::Infeasible);

    auto unb = with_vars(1);
    unb.objective = {-1};
    unb.add_row({1}, Relation::GreaterEqual, 0);
    CHECK(solve_lp(unb).status == LPStatus::Unbounded);

    auto fr = with_vars(2, true);
    fr.objective = {1, 0};
    fr.add_row({1, 0}, Relation::GreaterEqual, -3);
    fr.add_row({1, 1}, Relation::Equal, 2);
    auto f = solve_lp(fr);
    REQUIRE(f.status == LPStatus::Optimal);
    CHECK(f.values == std::vector<Rational>{-3, 5});
}

TEST_CASE("Bland's rule terminates on a cycling example") {
    auto lp = with_vars(4);
    lp.objective = {q("-3/4"), 20, q("-1/2"), 6};
    lp.add_row({q("1/4"), -8, -1, 9}, Relation::LessEqual, 0);
    lp.add_row({q("1/2"), -12, q("-1/2"), 3}, Relation::LessEqual, 0);
    lp.add_row({0, 0, 1, 0}, Relation::LessEqual, 1);
    auto r = solve_lp(lp);
    REQUIRE(r.status == LPStatus::Optimal);
    CHECK(r.objective == q("-5/4"));
}

TEST_CASE("strong duality on random programs") {
    Rng rng(41);
    int optimal = 0;
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t n = static_cast<std::size_t>(rng.integer(2, 5)), m = static_cast<std::size_t>(rng.integer(2, 5));
        std::vector<std::vector<Rational>> A(m, std::vector<Rational>(n));
        std::vector<Rational> b(m), c(n);
        for (auto& row : A)
            for (auto& v : row) v = rng.rational(-3, 5, 4);
        for (auto& v : b) v = rng.rational(-2, 4, 4);
        for (auto& v : c) v = rng.rational(0, 5, 4);
        // min c.x, A x >= b, x >= 0
        auto primal = with_vars(n);
        primal.objective = c;
        for (std::size_t i = 0; i < m; ++i) primal.add_row(A[i], Relation::GreaterEqual, b[i]);
        // max b.y, A^T y <= c, y >= 0, written as a minimization
        auto dual = with_vars(m);
        for (std::size_t i = 0; i < m; ++i) dual.objective[i] = -b[i];
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<Rational> row(m);
            for (std::size_t i = 0; i < m; ++i) row[i] = A[i][j];
            dual.add_row(row, Relation::LessEqual, c[j]);
        }
        auto p = solve_lp(primal), d = solve_lp(dual);
        if (p.status != LPStatus::Optimal) {
            CHECK(d.status != LPStatus::Optimal);
            continue;
        }
        ++optimal;
        REQUIRE(d.status == LPStatus::Optimal);
        CHECK(p.objective == -d.objective);
        for (std::size_t i = 0; i < m; ++i) {
            Rational s = 0;
            for (std::size_t j = 0; j < n; ++j) s += A[i][j] * p.values[j];
            CHECK(s >= b[i]);
        }
        for (const auto& v : p.values) CHECK(v.sign() >= 0);
    }
    CHECK(optimal > 20);
}

TEST_CASE("CPLEX export uses integer rows") {
    auto lp = with_vars(2, true);
    lp.names = {"x", "y"};
    lp.objective = {q("1/2"), 0};
    lp.add_row({q("1/2"), q("1/3")}, Relation::LessEqual, 1);
    lp.add_row({1, -1}, Relation::Equal, q("-3/4"));
    auto text = to_cplex_lp(lp);
    CHECK(text.find("Minimize\n obj: x\n") != std::string::npos);
    CHECK(text.find("c1: 3 x + 2 y <= 6") != std::string::npos);
    CHECK(text.find("c2: 4 x - 4 y = -3") != std::string::npos);
    CHECK(text.find(" x free") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
}

TEST_CASE("extract_cell examples") {
    CircuitBuilder b;
    NodeId x = b.input();
    auto g = b.build({b.max(x, b.constant(0))});
    auto pos = extract_cell(g, std::vector<Rational>{q("1/2")});
    REQUIRE(pos.A.size() == 1);
    CHECK(pos.A[0] == std::vector<Rational>{-1});
    CHECK(pos.b[0] == 0);
    CHECK(pos.C[0] == std::vector<Rational>{1});
    CHECK(pos.C0[0] == 0);

    auto neg = extract_cell(g, std::vector<Rational>{q("-1/2")});
    REQUIRE(neg.A.size() == 1);
    CHECK(neg.A[0] == std::vector<Rational>{1});
    CHECK(neg.b[0] == 0);
    CHECK(neg.C[0] == std::vector<Rational>{0});

    CircuitBuilder nb;
    NodeId y = nb.input();
    auto sq = nb.build({nb.square(y)});
    CHECK(error_code_of([&] { extract_cell(sq, std::vector<Rational>{1}); }) == Errc::NonlinearCircuit);
    CHECK(error_code_of([&] { compute_budget(sq); }) == Errc::NonlinearCircuit);
}

TEST_CASE("cells agree with evaluation") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = static_cast<std::size_t>(rng.integer(2, 3));
        auto g = random_linear_circuit(rng, n, 12);
        std::vector<Rational> p;
        for (std::size_t j = 0; j < n; ++j) p.push_back(rng.rational(-1, 1, 16));
        auto cell = extract_cell(g, p);
        CHECK(cell.contains(p));
        CHECK(cell.apply(p) == evaluate(g, p).outputs);
        int hits = 0;
        for (int s = 0; s < 400 && hits < 100; ++s) {
            std::vector<Rational> x = p;
            for (auto& v : x) v += rng.rational(-1, 1, 64) / Rational(rng.integer(1, 8));
            if (!cell.contains(x)) continue;
            ++hits;
            CHECK(cell.apply(x) == evaluate(g, x).outputs);
        }
        CHECK(hits > 0);
    }
}

TEST_CASE("budget audits") {
    CircuitBuilder b;
    NodeId x = b.input();
    b.input();
    auto ident = b.build({b.mul_const(1, x)});
    auto small = compute_budget(ident);
    CHECK(small.m > 0);
    CHECK(small.m < 20);
    CHECK(small.eps == pow2(-(small.m + 1)));

    long prev = 0;
    std::vector<long> ms;
    for (std::size_t n = 1; n <= 6; ++n) {
        CircuitBuilder c;
        std::vector<NodeId> in;
        for (std::size_t j = 0; j < n; ++j) in.push_back(c.input());
        NodeId acc = c.mul_const(2, in[0]);
        auto budget = compute_budget(c.build({acc}));
        CHECK(budget.m > prev);
        prev = budget.m;
        ms.push_back(budget.m);
    }
    // Roughly linear growth: increments stay bounded.
    for (std::size_t i = 1; i < ms.size(); ++i) CHECK(ms[i] - ms[i - 1] <= 8);

    Rng rng(43);
    CircuitBuilder grow;
    for (int i = 0; i < 2; ++i) grow.input();
    long last = 0;
    const GateKind kinds[] = {GateKind::Add, GateKind::Sub, GateKind::MulConst, GateKind::Max, GateKind::Min};
    for (int g = 0; g < 15; ++g) {
        GateKind k = kinds[rng.integer(0, 4)];
        std::vector<NodeId> in;
        for (std::size_t a = 0; a < gate_arity(k); ++a)
            in.push_back(static_cast<NodeId>(rng.integer(0, static_cast<long>(grow.node_count()) - 1)));
        grow.gate(k, in, has_zeta(k) ? rng.rational(-3, 3, 5) : Rational());
        long m = compute_budget(grow.build({grow.node_count() - 1})).m;
        CHECK(m >= last);
        last = m;
    }
}

TEST_CASE("round_to_exact examples") {
    CircuitBuilder b;
    NodeId x0 = b.input();
    b.input();
    auto bu = bu_of(b.build({b.mul_const(1, x0)}));
    Rational eps = q("1/64");
    std::vector<Rational> p{eps / Rational(2), Rational(1) - eps / Rational(2)};
    auto r = round_to_exact(bu, p);
    CHECK(r.x == std::vector<Rational>{0, 1});
    CHECK(r.z == 0);

    std::vector<Rational> exact{0, -1};
    auto same = round_to_exact(bu, exact);
    CHECK(same.x == exact);
    CHECK(same.z == 0);

    CHECK(error_code_of([&] { round_to_exact(bu, std::vector<Rational>{q("1/2"), 0}); }) == Errc::NotOnSphere);
}

TEST_CASE("round_to_exact reports a positive optimum") {
    CircuitBuilder b;
    NodeId x0 = b.input();
    b.input();
    NodeId ramp = b.max(b.sub(x0, b.constant(q("1/2"))), b.constant(0));
    auto bu = bu_of(b.build({b.add(x0, ramp)}));
    CHECK(error_code_of([&] { round_to_exact(bu, std::vector<Rational>{1, 0}); }) == Errc::PositiveOptimum);
}

TEST_CASE("rounding a perturbed solution of a linear CH instance") {
    CHInstance inst;
    inst.agents.push_back(Agent{"a", integrate(PiecewisePoly::constant(0, 1, 1))});
    inst.agents.push_back(Agent{"b", integrate(DensityBuilder(0, 1).constant(0, q("1/2"), 1).build())});
    inst = with_circuit_valuations(inst);
    auto bu = ch_to_bu(inst);
    std::vector<Rational> p{q("1/4") + q("1/200"), q("-1/2"), q("1/4") - q("1/200")};
    CHECK_FALSE(bu_verify(bu, p, 0).passed);
    auto r = round_to_exact(bu, p);
    CHECK(r.z == 0);
    CHECK(r.cell_constraints > 0);
    CHECK(bu_verify(bu, r.x, 0).passed);
    auto sol = decode_bu_solution(r.x, inst);
    CHECK(verify(inst, sol, 0).all_satisfied);

    auto g = antipodal_circuit(bu);
    auto lp = rounding_lp(extract_cell(g, p), p);
    CHECK(lp.variables == 4);
    CHECK(to_cplex_lp(lp).find("z") != std::string::npos);
    CHECK(compute_budget(g).m > 0);
}
