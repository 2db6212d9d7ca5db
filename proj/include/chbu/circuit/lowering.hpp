#pragma once

#include <string>
#include <vector>

#include "chbu/circuit/circuit.hpp"
#include "chbu/circuit/ranges.hpp"

namespace chbu {

// Inputs of the ADD gate producing `node` are certified inside [0, 1/2].
struct AddProof {
    NodeId node = 0;
    Interval first;
    Interval second;

    friend bool operator==(const AddProof&, const AddProof&) = default;
};

struct SpecialCircuitCertificate {
    std::string circuit_id;
    std::vector<Interval> ranges;
    std::vector<AddProof> add_proofs;
    std::size_t source_nodes = 0;
    std::size_t lowered_nodes = 0;
    // Output nodes of gates whose range constraint was assumed rather than
    // derived.
    std::vector<NodeId> trusted_nodes;

    friend bool operator==(const SpecialCircuitCertificate&, const SpecialCircuitCertificate&) = default;
};

struct LoweringOptions {
    RangeOptions ranges;
};

struct LoweringResult {
    Circuit circuit;
    SpecialCircuitCertificate certificate;
    // Lowered node carrying the value of each source node.
    std::vector<NodeId> node_map;
};

// Rewrites a general circuit into the special gate set.  The result has its
// inputs first (in source order) and its outputs as the last node ids.
LoweringResult lower_to_special(const Circuit& c, const LoweringOptions& opts = {});

// Certifies a circuit that already uses only special gates.
SpecialCircuitCertificate certify_special(const Circuit& c, const RangeOptions& opts = {});

// Structural audit of a certificate against its circuit; empty when valid.
std::vector<std::string> check_certificate(const Circuit& c, const SpecialCircuitCertificate& cert);

// Moves the output nodes to the end (adding MUL_CONST(1) copies where an
// output feeds other gates, is an input, or repeats), keeping inputs first.
struct ReorderResult {
    Circuit circuit;
    std::vector<NodeId> node_map;
    std::vector<NodeId> copies;  // source nodes that received a copy
};
ReorderResult outputs_last(const Circuit& c);

}  // namespace chbu
