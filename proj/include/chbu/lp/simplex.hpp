#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "chbu/numerics/rational.hpp"

namespace chbu {

enum class Relation { LessEqual, GreaterEqual, Equal };

struct LPRow {
    std::vector<Rational> coeffs;
    Relation rel = Relation::LessEqual;
    Rational rhs;
};

// minimize objective . y subject to the rows; variables are nonnegative
// unless marked free.
struct LinearProgram {
    std::size_t variables = 0;
    std::vector<bool> free;
    std::vector<Rational> objective;
    std::vector<LPRow> rows;
    std::vector<std::string> names;  // optional, used by the text export

    std::size_t add_variable(std::string name, bool is_free);
    void add_row(std::vector<Rational> coeffs, Relation rel, Rational rhs);
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

struct LPResult {
    LPStatus status = LPStatus::Infeasible;
    std::vector<Rational> values;
    Rational objective;
    std::size_t pivots = 0;
};

// Two-phase dense tableau simplex in exact arithmetic, Bland's rule.
LPResult solve_lp(const LinearProgram& lp);

// CPLEX LP text; every row is scaled to integer coefficients.
std::string to_cplex_lp(const LinearProgram& lp);

}  // namespace chbu
