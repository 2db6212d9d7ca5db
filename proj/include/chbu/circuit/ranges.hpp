#pragma once

#include <span>
#include <vector>

#include "chbu/circuit/circuit.hpp"
#include "chbu/numerics/piecewise.hpp"

namespace chbu {

Interval unit_interval();
Interval intersect(const Interval& a, const Interval& b);
// Interval image of a gate on argument ranges.
Interval gate_image(const Gate& g, std::span<const Interval> args);

struct RangeOptions {
    // Clamp outputs of SUB_01 and DOUBLE_01 gates to [0,1] instead of
    // deriving them; used when a circuit is only meaningful on a sub-domain
    // of the input box (the game circuit acts on mixed profiles).
    bool trust_special_gates = false;
};

struct RangeAnalysis {
    std::vector<Interval> ranges;           // per node
    std::vector<std::size_t> trusted_gates; // gates whose range was clamped on trust
};

// Plain interval propagation.
std::vector<Interval> interval_ranges(const Circuit& c, std::span<const Interval> box);

// Interval propagation intersected with affine arithmetic, which keeps
// first-order correlations (e.g. a - a/2 is seen to be nonnegative).
RangeAnalysis certified_ranges(const Circuit& c, std::span<const Interval> box, const RangeOptions& opts = {});

std::vector<Interval> unit_box(std::size_t n);

}  // namespace chbu
