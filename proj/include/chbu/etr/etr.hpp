#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chbu/bu/borsuk_ulam.hpp"
#include "chbu/ch/model.hpp"
#include "chbu/circuit/circuit.hpp"
#include "chbu/numerics/piecewise.hpp"

namespace chbu {

// Sorted (variable index, exponent) pairs; the empty monomial is 1.
using Monomial = std::vector<std::pair<std::size_t, unsigned>>;

// Polynomial over sentence variables in expanded monomial form.
class EtrPoly {
public:
    EtrPoly() = default;
    static EtrPoly constant(const Rational& c);
    static EtrPoly variable(std::size_t v);

    const std::map<Monomial, Rational>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    unsigned degree() const;
    std::vector<std::size_t> variables() const;

    EtrPoly& operator+=(const EtrPoly& o);
    EtrPoly& operator-=(const EtrPoly& o);
    EtrPoly& operator*=(const Rational& c);
    friend EtrPoly operator+(EtrPoly a, const EtrPoly& b) { return a += b; }
    friend EtrPoly operator-(EtrPoly a, const EtrPoly& b) { return a -= b; }
    friend EtrPoly operator*(EtrPoly a, const Rational& c) { return a *= c; }
    friend EtrPoly operator*(const EtrPoly& a, const EtrPoly& b);
    EtrPoly pow(unsigned e) const;

    // Every referenced variable must have a value.
    Rational eval(std::span<const Rational> values) const;
    // Writes p = a * v + r with a a nonzero constant and r free of v.
    std::optional<std::pair<Rational, EtrPoly>> isolate(std::size_t v) const;

    friend bool operator==(const EtrPoly&, const EtrPoly&) = default;

private:
    void add_term(const Monomial& m, const Rational& c);
    std::map<Monomial, Rational> terms_;
};

enum class Cmp { Lt, Le, Eq, Ge, Gt };
std::string_view cmp_symbol(Cmp c);

struct Formula {
    enum class Kind { True, False, Atom, And, Or, Not };
    Kind kind = Kind::True;
    Cmp cmp = Cmp::Eq;
    EtrPoly lhs, rhs;
    std::vector<Formula> children;

    static Formula truth(bool v);
    static Formula atom(EtrPoly lhs, Cmp cmp, EtrPoly rhs);
    static Formula conj(std::vector<Formula> parts);
    static Formula disj(std::vector<Formula> parts);
    static Formula negate(Formula f);

    std::vector<std::size_t> variables() const;

    friend bool operator==(const Formula&, const Formula&) = default;
};

struct EtrVar {
    std::string name;
    std::optional<Interval> box;

    friend bool operator==(const EtrVar&, const EtrVar&) = default;
};

// Existentially quantified sentence: all declared variables are quantified and
// the matrix is the conjunction of the assertions.
struct ETRSentence {
    std::vector<EtrVar> variables;
    std::vector<Formula> assertions;

    std::size_t declare(std::string name, std::optional<Interval> box = {});
    std::optional<std::size_t> find(std::string_view name) const;
    std::size_t index(std::string_view name) const;  // throws InvalidArgument
    EtrPoly var(std::string_view name) const { return EtrPoly::variable(index(name)); }

    friend bool operator==(const ETRSentence&, const ETRSentence&) = default;
};

// Truth value with equalities relaxed to |lhs - rhs| <= tol; the residual is
// the largest equality gap on a satisfied path.
struct Truth {
    bool holds = false;
    Rational residual;
};
Truth evaluate(const Formula& f, std::span<const Rational> values, const Rational& tol);
Truth evaluate(const ETRSentence& s, std::span<const Rational> values, const Rational& tol);

// Text form; the grammar is documented in docs/etr_format.md.
std::string to_text(const ETRSentence& s);
ETRSentence parse_sentence(std::string_view text);
// SMT-LIB 2 (QF_NRA) export for external solvers.
std::string to_smtlib2(const ETRSentence& s);

// Adds one variable per node, named prefix + "n" + id, and the per-gate
// constraints.  With an input box the node variables receive interval-range
// boxes.  Returns the variable of every node.
std::vector<std::size_t> encode_circuit(ETRSentence& s, const Circuit& c, const std::string& prefix,
                                        std::optional<std::vector<Interval>> input_box = {});
ETRSentence circuit_to_constraints(const Circuit& c);

// Sentence true iff the instance has a solution with at most k cuts.
// Variables x_j in [-1, 1] (j = 0..k) describe the pieces as in the BU
// reduction, xp_j = max(x_j, 0) and xm_j = max(-x_j, 0).
ETRSentence ch_to_etr(const CHInstance& inst, std::size_t k);
ETRSentence bu_to_etr(const BUInstance& bu);

// Full assignments for the sentences above built from a solution.
std::vector<Rational> ch_witness(const ETRSentence& s, const CHInstance& inst, const CHSolution& sol);
CHSolution ch_solution_from_witness(const ETRSentence& s, const CHInstance& inst, std::span<const Rational> values);
std::vector<Rational> bu_witness(const ETRSentence& s, const BUInstance& bu, std::span<const Rational> x);

struct BruteOptions {
    std::size_t max_points = 20'000'000;
    unsigned threads = 0;  // 0: hardware concurrency
};

struct BruteResult {
    bool sat = false;
    std::vector<Rational> witness;
    Rational residual;
    std::size_t points = 0;
    bool exhausted = true;  // false when max_points stopped the search
};

// Grid search with equalities relaxed to tolerance `step`.  Variables that an
// equality (or a disjunction of equalities) determines from earlier ones are
// computed rather than enumerated; `fixed` pins variables by name.  Among
// satisfying points the one with the smallest residual is returned.
BruteResult brute_check(const ETRSentence& s, const Rational& step,
                        const std::map<std::string, Rational>& fixed = {}, const BruteOptions& opts = {});

}  // namespace chbu
