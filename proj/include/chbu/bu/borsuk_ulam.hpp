#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "chbu/ch/model.hpp"
#include "chbu/circuit/circuit.hpp"
#include "chbu/error.hpp"

namespace chbu {

// f : R^{d+1} -> R^d, evaluated on the L1 sphere.
struct BUInstance {
    std::size_t dimension = 0;
    Circuit map;
    bool linear = false;
};

// b(x)_i = F_i(A_+) for the cuts t_j = t_{j-1} + |x_j| (scaled by the domain
// length).  Every agent must be circuit-backed.
BUInstance ch_to_bu(const CHInstance& inst);

bool on_sphere(std::span<const Rational> x);

// f(x) - f(-x).
std::vector<Rational> antipodal_gap(const BUInstance& bu, std::span<const Rational> x);

struct BUVerdict {
    bool on_sphere = false;
    Rational residual;
    bool passed = false;
    std::optional<Errc> failure;
};

BUVerdict bu_verify(const BUInstance& bu, std::span<const Rational> x, const Rational& tol);

// Cuts from the cumulative widths, with zero coordinates dropped and
// same-sign neighbours merged; padded with the domain end to n cuts.
CHSolution decode_bu_solution(std::span<const Rational> x, const CHInstance& inst, const Rational& tol = 0);

// Decoder circuit over CMP_GT: inputs x_0..x_n, outputs the n cuts followed
// by an indicator that the leftmost piece is positive.
Circuit emit_bu_decoder(std::size_t n, const Rational& domain_length = 1);

// +-(i+1) for the coordinate of largest magnitude (lowest index on ties);
// zero counts as positive.
int tucker_label(std::span<const double> g);
int tucker_label(std::span<const Rational> g);

struct ApproxSolution {
    std::vector<Rational> x;
    Rational residual;
};

struct LipschitzWitness {
    std::vector<Rational> x;
    std::vector<Rational> y;
    Rational ratio;
};

struct TuckerOptions {
    std::size_t max_dimension = 3;
    std::size_t max_vertices = 50'000'000;
    unsigned threads = 0;  // 0: hardware concurrency
};

struct TuckerStats {
    long mesh = 0;  // vertices are a/mesh with a integral
    std::size_t vertices = 0;
    std::size_t candidate_edges = 0;
};

struct TuckerResult {
    std::variant<ApproxSolution, LipschitzWitness> outcome;
    TuckerStats stats;

    bool solved() const { return outcome.index() == 0; }
};

// Exhaustive complementary-edge search on a Freudenthal refinement of the
// cross-polytope boundary with mesh 1/ceil(lambda/eps).
TuckerResult tucker_solve(const BUInstance& bu, const Rational& eps, const Rational& lambda,
                          const TuckerOptions& opts = {});

}  // namespace chbu
