#pragma once

#include <cstddef>
#include <vector>

#include "chbu/bu/borsuk_ulam.hpp"
#include "chbu/circuit/circuit.hpp"
#include "chbu/lp/simplex.hpp"

namespace chbu {

// Affine form c . x + k over the circuit inputs.
struct AffineForm {
    std::vector<Rational> coeffs;
    Rational constant;
};

// Region {x : A x <= b} on which the circuit equals C x + C'.
struct LinearCell {
    std::vector<std::vector<Rational>> A;
    std::vector<Rational> b;
    std::vector<std::vector<Rational>> C;
    std::vector<Rational> C0;

    bool contains(std::span<const Rational> x) const;
    std::vector<Rational> apply(std::span<const Rational> x) const;
};

// One inequality per MAX/MIN/SUB_01 gate fixing the branch taken at p (ties
// go to the first input, as in evaluation).
LinearCell extract_cell(const Circuit& g, std::span<const Rational> p);

struct RoundingBudget {
    long m = 0;
    Rational eps;
};

// Hadamard bound (sqrt(k) M)^k with k = inputs + 1 and M the largest integer
// entry reachable in a cell row after clearing denominators.
RoundingBudget compute_budget(const Circuit& g);

// g(x) = f(x) - f(-x) as a circuit over the same inputs.
Circuit antipodal_circuit(const BUInstance& bu);

// The linear program of the rounding step for anchor p, with variables
// x_0..x_n followed by z.
LinearProgram rounding_lp(const LinearCell& cell, std::span<const Rational> p);

struct RoundResult {
    std::vector<Rational> x;
    Rational z;
    std::size_t cell_constraints = 0;
    std::size_t pivots = 0;
};

// Exact solution of the linear BU instance near p.
RoundResult round_to_exact(const BUInstance& bu, std::span<const Rational> p);

}  // namespace chbu
