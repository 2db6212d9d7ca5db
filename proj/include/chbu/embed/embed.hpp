#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "chbu/ch/model.hpp"
#include "chbu/circuit/circuit.hpp"
#include "chbu/circuit/lowering.hpp"

namespace chbu {

// Agent roles inside one node block, in cut order.
enum class GadgetAgent { Ad = 0, Mid = 1, Cen = 2, Ex = 3 };

const char* gadget_agent_name(GadgetAgent a);

// Geometry of node i's block [12i, 12i + 12] (0-based node index).
struct NodeGadget {
    std::size_t node = 0;
    Rational base;

    Interval v_a() const { return {base + 1, base + 2}; }
    Interval v_m() const { return {base + 4, base + 5}; }
    Interval v_minus() const { return {base + 7, base + 8}; }
    Interval v_plus() const { return {base + 10, base + 11}; }
    // Interval in which agent `a` of this block is forced to cut.
    Interval window(GadgetAgent a) const;
};

NodeGadget gadget(std::size_t node);

struct EmbeddedInstance {
    CHInstance instance;
    Circuit source;
    // densities[k] is the derivative of agent k's valuation.
    std::vector<PiecewisePoly> densities;
    bool finis_present = false;

    std::size_t node_count() const { return source.node_count; }
    std::size_t agent_of(std::size_t node, GadgetAgent a) const { return 4 * node + static_cast<std::size_t>(a); }
    std::size_t cut_count() const { return 4 * node_count(); }
};

// Builds the 4r-agent instance on [0, 12r].  The circuit must use special
// gates only, its node ids are the block indices.
EmbeddedInstance build_gadgets(const Circuit& c, const SpecialCircuitCertificate& cert);
// Certifies first (UncertifiedCircuit / RangeUnprovable on failure).
EmbeddedInstance build_gadgets(const Circuit& c);

// z holds one value per node.
CHSolution encode_values_to_cuts(const EmbeddedInstance& inst, const std::vector<Rational>& z);

std::vector<Rational> decode_cuts_to_values(const EmbeddedInstance& inst, const CHSolution& sol);

// Appends the agent that is balanced iff the last two nodes carry equal
// values.
EmbeddedInstance add_finis(const EmbeddedInstance& inst);

std::vector<Circuit> integral_circuits(const EmbeddedInstance& inst);

// Per-agent mass inside its window against its total mass.
struct ForcingEntry {
    std::size_t agent = 0;
    Rational window_mass;
    Rational total_mass;
    bool forced = false;
};

// Covers the 4r block agents; the finis agent has no window of its own.
std::vector<ForcingEntry> forcing_report(const EmbeddedInstance& inst);

// Exhaustive search over solutions with exactly one cut strictly inside each
// open window, each cut on the grid base + k*step.  Returns every exactly
// balanced solution found, stopping after `limit`.
std::vector<CHSolution> grid_solutions(const EmbeddedInstance& inst, const Rational& step, std::size_t limit);

}  // namespace chbu
