#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chbu/circuit/circuit.hpp"
#include "chbu/circuit/lowering.hpp"
#include "chbu/embed/embed.hpp"
#include "chbu/numerics/rational.hpp"

namespace chbu {

struct PolyTerm {
    mpz_class coef;
    std::vector<unsigned> exps;  // one exponent per variable

    friend bool operator==(const PolyTerm& a, const PolyTerm& b) { return a.coef == b.coef && a.exps == b.exps; }
};

// Integer polynomial in expanded monomial form over variables X_1..X_vars.
struct Polynomial {
    std::size_t vars = 0;
    std::vector<PolyTerm> terms;

    Rational eval(std::span<const Rational> x) const;
    unsigned degree() const;

    friend bool operator==(const Polynomial&, const Polynomial&) = default;
};

// Like terms merged, zero terms dropped, terms ordered by exponent vector.
// Throws InvalidArgument when a term has the wrong number of exponents.
Polynomial canonical(const Polynomial& p);
Polynomial operator+(const Polynomial& a, const Polynomial& b);
Polynomial operator*(const Polynomial& a, const Polynomial& b);

// Sum of squares; the empty conjunction gives the zero polynomial.
Polynomial conjunction_to_feasible(const std::vector<Polynomial>& ps);

struct NormalTerm {
    Rational coef;  // positive
    std::vector<unsigned> exps;
};

// q = q1 - q2 with c_j = |C_j| / (l * max |C|) for the l terms of p.
struct NormalForm {
    std::size_t vars = 0;
    std::vector<NormalTerm> q1, q2;
    std::vector<Rational> coefficients;  // c_j in the canonical term order of p

    static Rational eval(const std::vector<NormalTerm>& q, std::span<const Rational> x);
    Rational eval(std::span<const Rational> x) const { return eval(q1, x) - eval(q2, x); }
};

NormalForm normalize(const Polynomial& p);

struct FeasibleReduction {
    Polynomial source;
    NormalForm normal;
    // Inputs X_1..X_N, outputs (q1, q2); general gates.
    Circuit q_circuit;
    // Special form whose last two nodes carry q1 and q2.
    LoweringResult lowered;
    // Gadget embedding of `lowered` with the finis agent.
    EmbeddedInstance embedded;

    std::size_t agent_count() const { return embedded.instance.size(); }
    std::size_t cut_budget() const { return agent_count() - 1; }
};

FeasibleReduction feasible_to_ch(const Polynomial& p);

// Cuts for a root X of p; ValuesDoNotSatisfyCircuit unless q1(X) = q2(X).
CHSolution feasible_witness(const FeasibleReduction& r, std::span<const Rational> x);
// Reads X back from a solution of the embedded instance.
std::vector<Rational> feasible_point(const FeasibleReduction& r, const CHSolution& sol);

// Normal-form game.  payoffs[i] lists player i's payoff for every pure
// profile, with player 0's strategy the most significant index.
struct GameInstance {
    std::string id;
    std::vector<std::size_t> strategies;
    std::vector<std::vector<Rational>> payoffs;

    std::size_t players() const { return strategies.size(); }
    std::size_t profile_count() const;
    std::size_t total_strategies() const;
    // Position of x_ij in a flattened mixed profile.
    std::size_t offset(std::size_t player) const;
};

// Throws NormalizationFailure on malformed shapes.
void check_game(const GameInstance& g);

// Per player u -> (u - min) / ((max - min) * N * K_i) with K_i the number of
// pure profiles of the other players; constant payoffs become 0.
GameInstance normalize_payoffs(const GameInstance& g);

// v_ij(x) for a flattened mixed profile x.
std::vector<Rational> expected_payoffs(const GameInstance& g, std::span<const Rational> x);
// Largest gain any player gets by switching to a best pure response.
Rational regret(const GameInstance& g, std::span<const Rational> x);
// The map G_I: per player, the projection of x + v(x) onto the simplex.
std::vector<Rational> nash_map(const GameInstance& g, std::span<const Rational> x);

// Odd-even merge comparators (i, j) with i < j; each puts the larger value
// at position i.
std::vector<std::pair<std::size_t, std::size_t>> sorting_comparators(std::size_t width);
// MAX/MIN network sorting its inputs in descending order.
Circuit sorting_network(std::size_t width);

struct GameCircuits {
    GameInstance normalized;
    Circuit unscaled;  // C_I
    Circuit scaled;    // C'_I, acyclic, inputs x and outputs x'
    std::vector<Interval> ranges;  // certified ranges of `scaled` on [0,1]^N
    Circuit closed;    // `scaled` with each input merged into its output
};

GameCircuits game_to_circuit(const GameInstance& g);

// Merges input k into output k for every k.  Requires as many inputs as
// outputs and no output that is itself an input.
Circuit close_cycle(const Circuit& c);

// Node assignment of the closed circuit at profile x, present only when x is
// a fixed point of the scaled circuit.
std::optional<std::vector<Rational>> closed_assignment(const GameCircuits& gc, std::span<const Rational> x);

}  // namespace chbu
