#include "chbu/circuit/circuit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>

#include "chbu/error.hpp"

namespace chbu {

namespace {

constexpr std::array<std::pair<GateKind, std::string_view>, 11> kGateNames{{
    {GateKind::Const, "CONST"},
    {GateKind::Add, "ADD"},
    {GateKind::Sub, "SUB"},
    {GateKind::MulConst, "MUL_CONST"},
    {GateKind::Mul, "MUL"},
    {GateKind::Max, "MAX"},
    {GateKind::Min, "MIN"},
    {GateKind::Square, "SQUARE"},
    {GateKind::Double01, "DOUBLE_01"},
    {GateKind::Sub01, "SUB_01"},
    {GateKind::CmpGt, "CMP_GT"},
}};

double apply_gate_double(GateKind kind, double zeta, const double* a) {
    switch (kind) {
        case GateKind::Const: return zeta;
        case GateKind::Add: return a[0] + a[1];
        case GateKind::Sub: return a[0] - a[1];
        case GateKind::MulConst: return zeta * a[0];
        case GateKind::Mul: return a[0] * a[1];
        case GateKind::Max: return a[0] >= a[1] ? a[0] : a[1];
        case GateKind::Min: return a[0] <= a[1] ? a[0] : a[1];
        case GateKind::Square: return a[0] * a[0];
        case GateKind::Double01: return 2.0 * a[0];
        case GateKind::Sub01: return a[0] - a[1] > 0.0 ? a[0] - a[1] : 0.0;
        case GateKind::CmpGt: return a[0] > 0.0 ? 1.0 : 0.0;
    }
    return 0.0;
}

}  // namespace

std::string_view gate_kind_name(GateKind k) {
    for (const auto& [kind, name] : kGateNames)
        if (kind == k) return name;
    return "?";
}

GateKind parse_gate_kind(std::string_view name) {
    for (const auto& [kind, n] : kGateNames)
        if (n == name) return kind;
    fail(Errc::ParseError, "unknown gate kind \"" + std::string(name) + "\"");
}

std::size_t gate_arity(GateKind k) {
    switch (k) {
        case GateKind::Const: return 0;
        case GateKind::MulConst:
        case GateKind::Square:
        case GateKind::Double01:
        case GateKind::CmpGt: return 1;
        default: return 2;
    }
}

bool has_zeta(GateKind k) { return k == GateKind::Const || k == GateKind::MulConst; }

bool is_special_kind(GateKind k) {
    switch (k) {
        case GateKind::Const:
        case GateKind::Add:
        case GateKind::MulConst:
        case GateKind::Square:
        case GateKind::Double01:
        case GateKind::Sub01: return true;
        default: return false;
    }
}

std::vector<std::optional<std::size_t>> Circuit::producers() const {
    std::vector<std::optional<std::size_t>> p(node_count);
    for (std::size_t g = 0; g < gates.size(); ++g)
        if (gates[g].out < node_count && !p[gates[g].out]) p[gates[g].out] = g;
    return p;
}

std::optional<std::vector<std::size_t>> Circuit::topological_gate_order() const {
    auto prod = producers();
    std::vector<std::size_t> pending(gates.size(), 0);
    std::vector<std::vector<std::size_t>> dependents(gates.size());
    for (std::size_t g = 0; g < gates.size(); ++g) {
        for (NodeId in : gates[g].in) {
            if (in >= node_count || !prod[in]) continue;
            ++pending[g];
            dependents[*prod[in]].push_back(g);
        }
    }
    std::deque<std::size_t> ready;
    for (std::size_t g = 0; g < gates.size(); ++g)
        if (pending[g] == 0) ready.push_back(g);
    std::vector<std::size_t> order;
    order.reserve(gates.size());
    while (!ready.empty()) {
        std::size_t g = ready.front();
        ready.pop_front();
        order.push_back(g);
        for (std::size_t d : dependents[g])
            if (--pending[d] == 0) ready.push_back(d);
    }
    if (order.size() != gates.size()) return std::nullopt;
    return order;
}

std::vector<std::size_t> Circuit::fanout() const {
    std::vector<std::size_t> f(node_count, 0);
    for (const auto& g : gates)
        for (NodeId in : g.in)
            if (in < node_count) ++f[in];
    return f;
}

Rational apply_gate(const Gate& g, std::span<const Rational> a) {
    switch (g.kind) {
        case GateKind::Const: return g.zeta;
        case GateKind::Add: return a[0] + a[1];
        case GateKind::Sub: return a[0] - a[1];
        case GateKind::MulConst: return g.zeta * a[0];
        case GateKind::Mul: return a[0] * a[1];
        case GateKind::Max: return max(a[0], a[1]);
        case GateKind::Min: return min(a[0], a[1]);
        case GateKind::Square: return a[0] * a[0];
        case GateKind::Double01: return Rational(2) * a[0];
        case GateKind::Sub01: return a[0] > a[1] ? a[0] - a[1] : Rational(0);
        case GateKind::CmpGt: return a[0].sign() > 0 ? Rational(1) : Rational(0);
    }
    return Rational(0);
}

CompiledCircuit::CompiledCircuit(const Circuit& c) : c_(c) {
    if (c.cyclic) fail(Errc::CyclicCircuit, "circuit \"" + c.id + "\" is cyclic");
    auto order = c.topological_gate_order();
    if (!order) fail(Errc::CyclicCircuit, "gate dependencies of \"" + c.id + "\" contain a cycle");
    order_ = std::move(*order);
    zeta_d_.reserve(c.gates.size());
    for (const auto& g : c.gates) zeta_d_.push_back(g.zeta.to_double());
    for (const auto& g : c.gates) {
        if (g.in.size() != gate_arity(g.kind))
            fail(Errc::ArityMismatch, std::string(gate_kind_name(g.kind)) + " gate with wrong input count");
        for (NodeId in : g.in)
            if (in >= c.node_count) fail(Errc::InvalidArgument, "gate reads undefined node");
        if (g.out >= c.node_count) fail(Errc::InvalidArgument, "gate writes undefined node");
    }
}

std::vector<Rational> CompiledCircuit::run(std::span<const Rational> x) const {
    if (x.size() != c_.inputs.size())
        fail(Errc::ArityMismatch, "expected " + std::to_string(c_.inputs.size()) + " inputs, got " +
                                      std::to_string(x.size()));
    std::vector<Rational> v(c_.node_count);
    for (std::size_t i = 0; i < x.size(); ++i) v[c_.inputs[i]] = x[i];
    std::array<Rational, 2> args;
    for (std::size_t g : order_) {
        const Gate& gate = c_.gates[g];
        for (std::size_t k = 0; k < gate.in.size(); ++k) args[k] = v[gate.in[k]];
        v[gate.out] = apply_gate(gate, std::span<const Rational>(args.data(), gate.in.size()));
    }
    return v;
}

std::vector<double> CompiledCircuit::run(std::span<const double> x) const {
    if (x.size() != c_.inputs.size()) fail(Errc::ArityMismatch, "wrong input count");
    std::vector<double> v(c_.node_count, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) v[c_.inputs[i]] = x[i];
    double args[2];
    for (std::size_t g : order_) {
        const Gate& gate = c_.gates[g];
        for (std::size_t k = 0; k < gate.in.size(); ++k) args[k] = v[gate.in[k]];
        v[gate.out] = apply_gate_double(gate.kind, zeta_d_[g], args);
    }
    return v;
}

std::vector<Rational> CompiledCircuit::outputs(std::span<const Rational> x) const {
    auto v = run(x);
    std::vector<Rational> out;
    out.reserve(c_.outputs.size());
    for (NodeId o : c_.outputs) out.push_back(v[o]);
    return out;
}

void CompiledCircuit::outputs(std::span<const double> x, std::vector<double>& v, std::span<double> out) const {
    v.assign(c_.node_count, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) v[c_.inputs[i]] = x[i];
    double args[2];
    for (std::size_t g : order_) {
        const Gate& gate = c_.gates[g];
        for (std::size_t k = 0; k < gate.in.size(); ++k) args[k] = v[gate.in[k]];
        v[gate.out] = apply_gate_double(gate.kind, zeta_d_[g], args);
    }
    for (std::size_t i = 0; i < c_.outputs.size(); ++i) out[i] = v[c_.outputs[i]];
}

EvalResult evaluate(const Circuit& c, std::span<const Rational> x) {
    CompiledCircuit cc(c);
    EvalResult r;
    r.values = cc.run(x);
    for (NodeId o : c.outputs) r.outputs.push_back(r.values[o]);
    return r;
}

std::optional<std::size_t> first_violated_gate(const Circuit& c, std::span<const Rational> values) {
    if (values.size() != c.node_count) fail(Errc::ArityMismatch, "assignment size differs from node count");
    std::array<Rational, 2> args;
    for (std::size_t g = 0; g < c.gates.size(); ++g) {
        const Gate& gate = c.gates[g];
        for (std::size_t k = 0; k < gate.in.size(); ++k) args[k] = values[gate.in[k]];
        if (apply_gate(gate, std::span<const Rational>(args.data(), gate.in.size())) != values[gate.out]) return g;
    }
    return std::nullopt;
}

bool satisfies(const Circuit& c, std::span<const Rational> values) {
    return !first_violated_gate(c, values).has_value();
}

std::string_view violation_name(ViolationKind k) {
    switch (k) {
        case ViolationKind::ArityMismatch: return "ArityMismatch";
        case ViolationKind::UndefinedNode: return "UndefinedNode";
        case ViolationKind::DuplicateProducer: return "DuplicateProducer";
        case ViolationKind::InputProduced: return "InputProduced";
        case ViolationKind::UnproducedNode: return "UnproducedNode";
        case ViolationKind::CycleDetected: return "CycleDetected";
        case ViolationKind::CyclicWithInterface: return "CyclicWithInterface";
        case ViolationKind::ZetaOutOfRange: return "ZetaOutOfRange";
        case ViolationKind::GateNotSpecial: return "GateNotSpecial";
        case ViolationKind::ComparisonGateForbidden: return "ComparisonGateForbidden";
    }
    return "?";
}

std::vector<Violation> validate(const Circuit& c, const ValidateOptions& opts) {
    std::vector<Violation> out;
    auto add = [&](ViolationKind k, std::optional<std::size_t> g, std::string d) {
        out.push_back(Violation{k, g, std::move(d)});
    };
    std::vector<std::size_t> produced(c.node_count, 0);
    std::vector<char> is_input(c.node_count, 0);
    for (NodeId i : c.inputs) {
        if (i >= c.node_count) add(ViolationKind::UndefinedNode, std::nullopt, "input " + std::to_string(i));
        else is_input[i] = 1;
    }
    for (NodeId o : c.outputs)
        if (o >= c.node_count) add(ViolationKind::UndefinedNode, std::nullopt, "output " + std::to_string(o));

    for (std::size_t g = 0; g < c.gates.size(); ++g) {
        const Gate& gate = c.gates[g];
        std::string name(gate_kind_name(gate.kind));
        if (gate.in.size() != gate_arity(gate.kind))
            add(ViolationKind::ArityMismatch, g, name + " expects " + std::to_string(gate_arity(gate.kind)) + " inputs");
        for (NodeId in : gate.in)
            if (in >= c.node_count) add(ViolationKind::UndefinedNode, g, "reads node " + std::to_string(in));
        if (gate.out >= c.node_count) {
            add(ViolationKind::UndefinedNode, g, "writes node " + std::to_string(gate.out));
        } else {
            if (++produced[gate.out] == 2)
                add(ViolationKind::DuplicateProducer, g, "node " + std::to_string(gate.out) + " has two producers");
            if (is_input[gate.out])
                add(ViolationKind::InputProduced, g, "input node " + std::to_string(gate.out) + " is a gate output");
        }
        if (gate.kind == GateKind::CmpGt && c.role == CircuitRole::Instance)
            add(ViolationKind::ComparisonGateForbidden, g, "CMP_GT in an instance-defining circuit");
        if (opts.special) {
            if (!is_special_kind(gate.kind)) add(ViolationKind::GateNotSpecial, g, name + " is not a special gate");
            if (has_zeta(gate.kind) && (gate.zeta.sign() <= 0 || gate.zeta > Rational(1)))
                add(ViolationKind::ZetaOutOfRange, g, "zeta " + gate.zeta.str() + " outside (0,1]");
        }
    }
    if (c.cyclic) {
        if (!c.inputs.empty() || !c.outputs.empty())
            add(ViolationKind::CyclicWithInterface, std::nullopt, "cyclic circuit declares inputs or outputs");
        for (NodeId v = 0; v < c.node_count; ++v)
            if (produced[v] == 0) add(ViolationKind::UnproducedNode, std::nullopt, "node " + std::to_string(v));
    } else {
        for (NodeId v = 0; v < c.node_count; ++v)
            if (produced[v] == 0 && !is_input[v])
                add(ViolationKind::UnproducedNode, std::nullopt, "node " + std::to_string(v));
        if (!c.topological_gate_order()) add(ViolationKind::CycleDetected, std::nullopt, "gate dependencies are cyclic");
    }
    return out;
}

bool is_linear(const Circuit& c) {
    return std::none_of(c.gates.begin(), c.gates.end(), [](const Gate& g) {
        return g.kind == GateKind::Mul || g.kind == GateKind::Square || g.kind == GateKind::CmpGt;
    });
}

Rational lipschitz_bound(const Circuit& c) {
    if (!is_linear(c)) fail(Errc::NonlinearCircuit, "lipschitz_bound needs a circuit without MUL, SQUARE or CMP_GT");
    if (c.cyclic) fail(Errc::CyclicCircuit, "lipschitz_bound needs an acyclic circuit");
    auto order = c.topological_gate_order();
    if (!order) fail(Errc::CyclicCircuit, "gate dependencies contain a cycle");
    std::vector<Rational> l(c.node_count, Rational(0));
    for (NodeId i : c.inputs) l[i] = 1;
    for (std::size_t gi : *order) {
        const Gate& g = c.gates[gi];
        switch (g.kind) {
            case GateKind::Const: l[g.out] = 0; break;
            case GateKind::Add:
            case GateKind::Sub:
            case GateKind::Sub01: l[g.out] = l[g.in[0]] + l[g.in[1]]; break;
            case GateKind::MulConst: l[g.out] = abs(g.zeta) * l[g.in[0]]; break;
            case GateKind::Max:
            case GateKind::Min: l[g.out] = max(l[g.in[0]], l[g.in[1]]); break;
            case GateKind::Double01: l[g.out] = Rational(2) * l[g.in[0]]; break;
            default: break;
        }
    }
    Rational bound = 0;
    for (NodeId o : c.outputs) bound = max(bound, l[o]);
    return bound;
}

NodeId CircuitBuilder::input() {
    inputs_.push_back(node_count_);
    return node_count_++;
}

NodeId CircuitBuilder::constant(const Rational& zeta) { return gate(GateKind::Const, {}, zeta); }

NodeId CircuitBuilder::gate(GateKind kind, std::vector<NodeId> in, const Rational& zeta) {
    if (in.size() != gate_arity(kind))
        fail(Errc::ArityMismatch, std::string(gate_kind_name(kind)) + " gate with wrong input count");
    for (NodeId n : in)
        if (n >= node_count_) fail(Errc::InvalidArgument, "builder gate reads an unknown node");
    gates_.push_back(Gate{kind, std::move(in), node_count_, zeta});
    return node_count_++;
}

std::vector<NodeId> CircuitBuilder::splice(const Circuit& sub, std::span<const NodeId> args) {
    if (args.size() != sub.inputs.size()) fail(Errc::ArityMismatch, "splice argument count mismatch");
    if (sub.cyclic) fail(Errc::CyclicCircuit, "cannot splice a cyclic circuit");
    auto order = sub.topological_gate_order();
    if (!order) fail(Errc::CyclicCircuit, "cannot splice a cyclic circuit");
    std::vector<std::optional<NodeId>> map(sub.node_count);
    for (std::size_t i = 0; i < args.size(); ++i) map[sub.inputs[i]] = args[i];
    for (std::size_t gi : *order) {
        const Gate& g = sub.gates[gi];
        std::vector<NodeId> in;
        for (NodeId n : g.in) {
            if (!map[n]) fail(Errc::InvalidArgument, "spliced circuit reads an unproduced node");
            in.push_back(*map[n]);
        }
        map[g.out] = gate(g.kind, std::move(in), g.zeta);
    }
    std::vector<NodeId> outs;
    for (NodeId o : sub.outputs) {
        if (!map[o]) fail(Errc::InvalidArgument, "spliced circuit output is unproduced");
        outs.push_back(*map[o]);
    }
    return outs;
}

Circuit CircuitBuilder::build(std::vector<NodeId> outputs, std::string id) const {
    Circuit c;
    c.id = std::move(id);
    c.node_count = node_count_;
    c.gates = gates_;
    c.inputs = inputs_;
    c.outputs = std::move(outputs);
    return c;
}

Circuit renumber(const Circuit& c, const std::vector<NodeId>& new_id) {
    if (new_id.size() != c.node_count) fail(Errc::InvalidArgument, "renumbering must cover every node");
    Circuit r = c;
    for (auto& g : r.gates) {
        for (auto& in : g.in) in = new_id[in];
        g.out = new_id[g.out];
    }
    for (auto& i : r.inputs) i = new_id[i];
    for (auto& o : r.outputs) o = new_id[o];
    for (auto& [a, b] : r.merged) b = new_id[b];
    std::stable_sort(r.gates.begin(), r.gates.end(), [](const Gate& a, const Gate& b) { return a.out < b.out; });
    return r;
}

}  // namespace chbu
