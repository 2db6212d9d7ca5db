#include "doctest.h"
#include "support.hpp"

#include "chbu/ch/model.hpp"
#include "chbu/reductions/reductions.hpp"

using namespace chbu;
using chbu::testing::error_code_of;
using chbu::testing::q;
using chbu::testing::Rng;

namespace {

Polynomial poly(std::size_t vars, std::vector<std::pair<long, std::vector<unsigned>>> terms) {
    Polynomial p{vars, {}};
    for (auto& [c, e] : terms) p.terms.push_back({mpz_class(c), e});
    return p;
}

std::vector<Rational> simplex_point(Rng& rng, std::size_t n) {
    std::vector<long> w(n);
    long s = 0;
    while (s == 0) {
        s = 0;
        for (auto& x : w) s += (x = rng.integer(0, 12));
    }
    std::vector<Rational> out;
    for (auto x : w) out.push_back(Rational(x, s));
    return out;
}

std::vector<Rational> random_profile(Rng& rng, const GameInstance& g) {
    std::vector<Rational> x;
    for (auto n : g.strategies) {
        auto p = simplex_point(rng, n);
        x.insert(x.end(), p.begin(), p.end());
    }
    return x;
}

GameInstance bimatrix(std::string id, std::size_t rows, std::size_t cols, std::vector<long> a, std::vector<long> b) {
    GameInstance g{std::move(id), {rows, cols}, {{}, {}}};
    for (auto v : a) g.payoffs[0].push_back(v);
    for (auto v : b) g.payoffs[1].push_back(v);
    return g;
}

GameInstance matching_pennies() { return bimatrix("pennies", 2, 2, {1, -1, -1, 1}, {-1, 1, 1, -1}); }

GameInstance random_game(Rng& rng, std::vector<std::size_t> strategies) {
    GameInstance g{"random", strategies, {}};
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        g.payoffs.emplace_back();
        for (std::size_t k = 0; k < g.profile_count(); ++k) g.payoffs[i].push_back(rng.integer(-5, 5));
    }
    return g;
}

}  // namespace

TEST_CASE("polynomial arithmetic and sum of squares") {
    auto p = poly(2, {{1, {1, 0}}, {-1, {0, 1}}});            // x - y
    auto r = poly(2, {{1, {1, 0}}, {1, {0, 1}}, {-1, {0, 0}}});  // x + y - 1
    auto qq = conjunction_to_feasible({p, r});
    CHECK(qq.degree() == 2);
    CHECK(qq.eval(std::vector<Rational>{q("1/2"), q("1/2")}) == 0);
    for (long a = 0; a <= 8; ++a)
        for (long b = 0; b <= 8; ++b) {
            std::vector<Rational> x{Rational(a, 8), Rational(b, 8)};
            bool common = p.eval(x) == 0 && r.eval(x) == 0;
            CHECK((qq.eval(x) == 0) == common);
            CHECK(qq.eval(x) >= 0);
        }

    auto single = conjunction_to_feasible({r});
    CHECK(single == r * r);

    auto empty = conjunction_to_feasible({});
    CHECK(empty.terms.empty());
    CHECK(empty.eval(std::vector<Rational>{}) == 0);

    CHECK(error_code_of([&] { conjunction_to_feasible({p, poly(3, {})}); }) == Errc::InvalidArgument);
    CHECK(error_code_of([&] { canonical(poly(2, {{1, {1}}})); }) == Errc::InvalidArgument);
    CHECK(canonical(poly(1, {{2, {1}}, {-2, {1}}, {3, {0}}})) == poly(1, {{3, {0}}}));
}

TEST_CASE("normalization") {
    // 2 X - 1: C = (2, 1), l = 2, C_max = 2
    auto nf = normalize(poly(1, {{2, {1}}, {-1, {0}}}));
    REQUIRE(nf.coefficients.size() == 2);
    // canonical order puts the constant term first
    CHECK(nf.coefficients[0] == q("1/4"));
    CHECK(nf.coefficients[1] == q("1/2"));
    REQUIRE(nf.q1.size() == 1);
    REQUIRE(nf.q2.size() == 1);
    CHECK(nf.q1[0].coef == q("1/2"));
    CHECK(nf.q2[0].coef == q("1/4"));

    Rng rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        Polynomial p{2, {}};
        int terms = static_cast<int>(rng.integer(1, 5));
        for (int t = 0; t < terms; ++t)
            p.terms.push_back({mpz_class(rng.integer(-6, 6)),
                               {static_cast<unsigned>(rng.integer(0, 2)), static_cast<unsigned>(rng.integer(0, 2))}});
        auto c = canonical(p);
        auto n = normalize(p);
        const std::size_t l = c.terms.size();
        for (const auto& cj : n.coefficients) {
            CHECK(cj.sign() > 0);
            CHECK(cj <= Rational(1) / Rational(static_cast<long>(l)));
        }
        for (long a = 0; a <= 4; ++a)
            for (long b = 0; b <= 4; ++b) {
                std::vector<Rational> x{Rational(a, 4), Rational(b, 4)};
                CHECK((n.eval(x) == 0) == (p.eval(x) == 0));
            }
    }
}

TEST_CASE("feasible reduction of 2X - 1") {
    auto red = feasible_to_ch(poly(1, {{2, {1}}, {-1, {0}}}));
    const std::size_t r = red.lowered.circuit.node_count;
    CHECK(red.embedded.finis_present);
    CHECK(red.agent_count() == 4 * r + 1);
    CHECK(red.cut_budget() == 4 * r);
    CHECK(check_certificate(red.lowered.circuit, red.lowered.certificate).empty());

    auto sol = feasible_witness(red, std::vector<Rational>{q("1/2")});
    CHECK(sol.cuts.size() <= red.cut_budget());
    auto verdict = verify(red.embedded.instance, sol, 0);
    CHECK(verdict.all_satisfied);
    CHECK(feasible_point(red, sol) == std::vector<Rational>{q("1/2")});

    CHECK(error_code_of([&] { feasible_witness(red, std::vector<Rational>{q("1/4")}); }) ==
          Errc::ValuesDoNotSatisfyCircuit);

    auto grid = grid_solutions(red.embedded, q("1/32"), 4);
    REQUIRE(!grid.empty());
    for (const auto& s : grid) {
        CHECK(verify(red.embedded.instance, s, 0).all_satisfied);
        CHECK(feasible_point(red, s) == std::vector<Rational>{q("1/2")});
    }
}

TEST_CASE("feasible reduction of X + 1 has no grid solution") {
    auto red = feasible_to_ch(poly(1, {{1, {1}}, {1, {0}}}));
    CHECK(red.normal.q2.empty());
    const std::size_t r = red.lowered.circuit.node_count;
    CHECK(red.agent_count() == 4 * r + 1);
    CHECK(grid_solutions(red.embedded, q("1/32"), 1).empty());
    for (long a = 0; a <= 4; ++a)
        CHECK(error_code_of([&] { feasible_witness(red, std::vector<Rational>{Rational(a, 4)}); }) ==
              Errc::ValuesDoNotSatisfyCircuit);
}

TEST_CASE("feasible reduction of degenerate and quadratic polynomials") {
    auto zero = feasible_to_ch(Polynomial{1, {}});
    auto sol = feasible_witness(zero, std::vector<Rational>{q("1/3")});
    CHECK(verify(zero.embedded.instance, sol, 0).all_satisfied);

    // (x - y)^2 + (x + y - 1)^2 vanishes only at (1/2, 1/2)
    auto p = conjunction_to_feasible({poly(2, {{1, {1, 0}}, {-1, {0, 1}}}),
                                      poly(2, {{1, {1, 0}}, {1, {0, 1}}, {-1, {0, 0}}})});
    auto red = feasible_to_ch(p);
    auto w = feasible_witness(red, std::vector<Rational>{q("1/2"), q("1/2")});
    CHECK(verify(red.embedded.instance, w, 0).all_satisfied);
    CHECK(feasible_point(red, w) == std::vector<Rational>{q("1/2"), q("1/2")});
    CHECK(error_code_of([&] { feasible_witness(red, std::vector<Rational>{q("1/2"), q("1/4")}); }) ==
          Errc::ValuesDoNotSatisfyCircuit);

    // q1 and q2 stay inside [0, 1] on random inputs
    Rng rng(5);
    for (int k = 0; k < 200; ++k) {
        std::vector<Rational> x{rng.unit(), rng.unit()};
        auto v = evaluate(red.q_circuit, x).values;
        for (const auto& z : v) CHECK(unit_interval().contains(z));
        auto lv = evaluate(red.lowered.circuit, x);
        CHECK(lv.outputs[0] - lv.outputs[1] == red.normal.eval(x));
    }
}

TEST_CASE("sorting network") {
    auto two = sorting_network(2);
    CHECK(evaluate(two, std::vector<Rational>{q("1/3"), q("2/3")}).outputs ==
          std::vector<Rational>{q("2/3"), q("1/3")});

    auto one = sorting_network(1);
    CHECK(evaluate(one, std::vector<Rational>{q("3/7")}).outputs == std::vector<Rational>{q("3/7")});

    auto four = sorting_network(4);
    std::vector<Rational> v{q("1/8"), q("2/8"), q("3/8"), q("4/8")};
    std::vector<Rational> want{q("4/8"), q("3/8"), q("2/8"), q("1/8")};
    int perms = 0;
    do {
        CHECK(evaluate(four, v).outputs == want);
        ++perms;
    } while (std::next_permutation(v.begin(), v.end()));
    CHECK(perms == 24);

    // zero-one principle for every width up to 10
    for (std::size_t w = 1; w <= 10; ++w) {
        auto net = sorting_network(w);
        for (const auto& g : net.gates) CHECK((g.kind == GateKind::Max || g.kind == GateKind::Min));
        for (unsigned mask = 0; mask < (1u << w); ++mask) {
            std::vector<Rational> in;
            for (std::size_t k = 0; k < w; ++k) in.push_back(Rational((mask >> k) & 1u ? 1 : 0));
            auto out = evaluate(net, in).outputs;
            CHECK(std::is_sorted(out.begin(), out.end(), [](auto& a, auto& b) { return a > b; }));
        }
    }
    CHECK(error_code_of([] { sorting_network(0); }) == Errc::InvalidArgument);
}

TEST_CASE("game normalization") {
    auto g = normalize_payoffs(matching_pennies());
    for (const auto& u : g.payoffs)
        for (const auto& e : u) CHECK(Interval{0, q("1/4")}.contains(e));
    // N = 4 strategies, K = 2 opponent profiles: (u + 1) / (2 * 4 * 2)
    CHECK(g.payoffs[0] == std::vector<Rational>{q("1/8"), 0, 0, q("1/8")});

    GameInstance bad = matching_pennies();
    bad.payoffs[1].pop_back();
    CHECK(error_code_of([&] { game_to_circuit(bad); }) == Errc::NormalizationFailure);
    CHECK(error_code_of([] { game_to_circuit(GameInstance{}); }) == Errc::NormalizationFailure);
    CHECK(error_code_of([] { game_to_circuit(GameInstance{"z", {2, 0}, {{}, {}}}); }) == Errc::NormalizationFailure);
}

TEST_CASE("matching pennies fixed point") {
    auto gc = game_to_circuit(matching_pennies());
    CHECK(gc.closed.cyclic);
    CHECK(gc.closed.inputs.empty());
    CHECK(gc.closed.merged.size() == 4);
    CHECK(gc.closed.node_count == gc.scaled.node_count - 4);
    CHECK(validate(gc.closed).empty());
    for (const auto& g : gc.scaled.gates) {
        const GateKind allowed[] = {GateKind::Const, GateKind::Add,   GateKind::Mul,  GateKind::Max,
                                    GateKind::Min,   GateKind::Sub01, GateKind::Double01};
        CHECK(std::find(std::begin(allowed), std::end(allowed), g.kind) != std::end(allowed));
    }

    std::vector<Rational> u(4, q("1/2"));
    CHECK(evaluate(gc.scaled, u).outputs == u);
    auto a = closed_assignment(gc, u);
    REQUIRE(a);
    CHECK(satisfies(gc.closed, *a));
    CHECK(regret(matching_pennies(), u) == 0);

    std::vector<Rational> pure{1, 0, 1, 0};
    CHECK(!closed_assignment(gc, pure));
    CHECK(regret(matching_pennies(), pure) > 0);
}

TEST_CASE("scaled circuit equals the unscaled one and the direct map") {
    Rng rng(3);
    std::vector<GameInstance> games{matching_pennies(), random_game(rng, {2, 3}), random_game(rng, {3, 3}),
                                    random_game(rng, {2, 2, 2})};
    for (const auto& g : games) {
        auto gc = game_to_circuit(g);
        for (const auto& r : gc.ranges) CHECK(r.within(unit_interval()));
        CompiledCircuit cs(gc.scaled), cu(gc.unscaled);
        for (int k = 0; k < 250; ++k) {
            auto x = random_profile(rng, g);
            auto a = cs.outputs(x);
            auto b = cu.outputs(x);
            CHECK(a == b);
            CHECK(a == nash_map(gc.normalized, x));
            for (const auto& v : cs.run(x)) CHECK(unit_interval().contains(v));
            for (std::size_t i = 0; i < g.players(); ++i) {
                Rational s = 0;
                for (std::size_t j = 0; j < g.strategies[i]; ++j) s += a[g.offset(i) + j];
                CHECK(s == 1);
            }
        }
    }
}

TEST_CASE("grid fixed points are exactly the grid equilibria") {
    Rng rng(17);
    for (int trial = 0; trial < 8; ++trial) {
        GameInstance g = random_game(rng, {2, 2});
        auto gc = game_to_circuit(g);
        int fixed = 0;
        for (long a = 0; a <= 12; ++a)
            for (long b = 0; b <= 12; ++b) {
                std::vector<Rational> x{Rational(a, 12), Rational(12 - a, 12), Rational(b, 12), Rational(12 - b, 12)};
                bool fp = closed_assignment(gc, x).has_value();
                CHECK(fp == (regret(g, x) == 0));
                fixed += fp;
            }
        (void)fixed;
    }
    // prisoner's dilemma: (defect, defect) is the unique equilibrium
    auto pd = bimatrix("pd", 2, 2, {3, 0, 5, 1}, {3, 5, 0, 1});
    auto gc = game_to_circuit(pd);
    auto a = closed_assignment(gc, std::vector<Rational>{0, 1, 0, 1});
    REQUIRE(a);
    CHECK(satisfies(gc.closed, *a));
    CHECK(!closed_assignment(gc, std::vector<Rational>{1, 0, 1, 0}));
}

TEST_CASE("close_cycle preconditions") {
    CircuitBuilder b;
    NodeId x = b.input();
    auto c = b.build({x});
    CHECK(error_code_of([&] { close_cycle(c); }) == Errc::InvalidArgument);
    CircuitBuilder b2;
    NodeId y = b2.input();
    b2.double01(y);
    CHECK(error_code_of([&] { close_cycle(b2.build({})); }) == Errc::ArityMismatch);
}
