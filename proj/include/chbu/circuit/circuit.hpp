#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chbu/numerics/rational.hpp"

namespace chbu {

using NodeId = std::size_t;

enum class GateKind { Const, Add, Sub, MulConst, Mul, Max, Min, Square, Double01, Sub01, CmpGt };

std::string_view gate_kind_name(GateKind k);
GateKind parse_gate_kind(std::string_view name);
std::size_t gate_arity(GateKind k);
bool has_zeta(GateKind k);
bool is_special_kind(GateKind k);

// Instance circuits define CH valuations or BU maps; comparison gates are
// only admitted in decoder circuits.
enum class CircuitRole { Instance, Decoder };

struct Gate {
    GateKind kind = GateKind::Const;
    std::vector<NodeId> in;
    NodeId out = 0;
    Rational zeta;

    friend bool operator==(const Gate&, const Gate&) = default;
};

struct Circuit {
    std::string id;
    std::size_t node_count = 0;
    std::vector<Gate> gates;
    std::vector<NodeId> inputs;
    std::vector<NodeId> outputs;
    bool cyclic = false;
    // For cyclic circuits: (former input id, node it was merged into).
    std::vector<std::pair<NodeId, NodeId>> merged;
    CircuitRole role = CircuitRole::Instance;

    // Gate index producing each node (first producer if duplicated).
    std::vector<std::optional<std::size_t>> producers() const;
    // Gate indices in dependency order, or nullopt if the gates form a cycle.
    std::optional<std::vector<std::size_t>> topological_gate_order() const;
    // Number of gates reading each node.
    std::vector<std::size_t> fanout() const;

    friend bool operator==(const Circuit&, const Circuit&) = default;
};

// Applies gate semantics; used by evaluators and satisfaction checks.
Rational apply_gate(const Gate& g, std::span<const Rational> args);

// Topologically ordered evaluation plan, reusable across many evaluations.
class CompiledCircuit {
public:
    explicit CompiledCircuit(const Circuit& c);

    std::vector<Rational> run(std::span<const Rational> inputs) const;
    std::vector<double> run(std::span<const double> inputs) const;
    // Output values only.
    std::vector<Rational> outputs(std::span<const Rational> inputs) const;
    void outputs(std::span<const double> inputs, std::vector<double>& scratch, std::span<double> out) const;

    const Circuit& circuit() const { return c_; }

private:
    Circuit c_;
    std::vector<std::size_t> order_;
    std::vector<double> zeta_d_;
};

struct EvalResult {
    std::vector<Rational> values;   // every node
    std::vector<Rational> outputs;  // output nodes in order
};

EvalResult evaluate(const Circuit& c, std::span<const Rational> x);

// Whether a full node assignment is consistent with every gate (works for
// cyclic circuits as well).
bool satisfies(const Circuit& c, std::span<const Rational> values);
// First gate whose constraint fails, if any.
std::optional<std::size_t> first_violated_gate(const Circuit& c, std::span<const Rational> values);

enum class ViolationKind {
    ArityMismatch,
    UndefinedNode,
    DuplicateProducer,
    InputProduced,
    UnproducedNode,
    CycleDetected,
    CyclicWithInterface,
    ZetaOutOfRange,
    GateNotSpecial,
    ComparisonGateForbidden,
};

std::string_view violation_name(ViolationKind k);

struct Violation {
    ViolationKind kind;
    std::optional<std::size_t> gate;
    std::string detail;
};

struct ValidateOptions {
    // Restricts the gate set to the special gates with zeta in (0, 1].
    bool special = false;
};

std::vector<Violation> validate(const Circuit& c, const ValidateOptions& opts = {});

// L-infinity Lipschitz constant composed gate by gate.
Rational lipschitz_bound(const Circuit& c);
bool is_linear(const Circuit& c);

class CircuitBuilder {
public:
    NodeId input();
    NodeId constant(const Rational& zeta);
    NodeId add(NodeId a, NodeId b) { return gate(GateKind::Add, {a, b}); }
    NodeId sub(NodeId a, NodeId b) { return gate(GateKind::Sub, {a, b}); }
    NodeId mul_const(const Rational& zeta, NodeId a) { return gate(GateKind::MulConst, {a}, zeta); }
    NodeId mul(NodeId a, NodeId b) { return gate(GateKind::Mul, {a, b}); }
    NodeId max(NodeId a, NodeId b) { return gate(GateKind::Max, {a, b}); }
    NodeId min(NodeId a, NodeId b) { return gate(GateKind::Min, {a, b}); }
    NodeId square(NodeId a) { return gate(GateKind::Square, {a}); }
    NodeId double01(NodeId a) { return gate(GateKind::Double01, {a}); }
    NodeId sub01(NodeId a, NodeId b) { return gate(GateKind::Sub01, {a, b}); }
    NodeId cmp_gt(NodeId a) { return gate(GateKind::CmpGt, {a}); }
    NodeId gate(GateKind kind, std::vector<NodeId> in, const Rational& zeta = Rational());

    // Inlines an acyclic circuit with its inputs bound to args; returns the
    // nodes carrying its outputs.
    std::vector<NodeId> splice(const Circuit& sub, std::span<const NodeId> args);

    std::size_t node_count() const { return node_count_; }
    const std::vector<Gate>& gates() const { return gates_; }

    Circuit build(std::vector<NodeId> outputs, std::string id = {}) const;

private:
    std::size_t node_count_ = 0;
    std::vector<Gate> gates_;
    std::vector<NodeId> inputs_;
};

// Applies a node permutation: new_id[old] gives the new id of each node.
Circuit renumber(const Circuit& c, const std::vector<NodeId>& new_id);

}  // namespace chbu
