#include "chbu/circuit/lowering.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "chbu/error.hpp"

namespace chbu {

namespace {

const Interval kHalf{Rational(0), Rational(1, 2)};

Interval scale(const Interval& iv, const Rational& s) { return {iv.lo * s, iv.hi * s}; }

std::string show(const Interval& iv) { return "[" + iv.lo.str() + ", " + iv.hi.str() + "]"; }

// Builds the special circuit gate by gate, deriving each node's range from
// its arguments and, where the node realizes an algebraic identity over the
// source circuit, from the identity's known range.
class SpecialEmitter {
public:
    NodeId input(const Interval& r) {
        NodeId n = b_.input();
        ranges_.push_back(r);
        return n;
    }

    NodeId emit(GateKind kind, std::vector<NodeId> in, const Rational& zeta = Rational(),
                std::optional<Interval> hint = std::nullopt, bool trusted = false) {
        std::vector<Interval> args;
        for (NodeId n : in) args.push_back(ranges_[n]);
        Gate probe{kind, in, 0, zeta};
        Interval r = gate_image(probe, args);
        if (hint) r = intersect(r, *hint);
        std::string where = std::string(gate_kind_name(kind)) + " producing node " + std::to_string(b_.node_count());
        auto need = [&](bool ok, const std::string& what) {
            if (!ok && !trusted) fail(Errc::RangeUnprovable, where + ": " + what);
        };
        switch (kind) {
            case GateKind::Add:
                need(args[0].within(kHalf) && args[1].within(kHalf),
                     "adder inputs " + show(args[0]) + ", " + show(args[1]) + " not inside [0, 1/2]");
                break;
            case GateKind::Double01: need(args[0].within(kHalf), "doubler input " + show(args[0])); break;
            case GateKind::Square: need(args[0].within(unit_interval()), "square input " + show(args[0])); break;
            case GateKind::Sub01:
                need(args[0].within(unit_interval()) && args[1].within(unit_interval()), "subtractor inputs");
                break;
            case GateKind::Const:
            case GateKind::MulConst:
                if (zeta.sign() <= 0 || zeta > Rational(1)) fail(Errc::RangeUnprovable, where + ": zeta " + zeta.str());
                break;
            default: fail(Errc::RangeUnprovable, where + ": not a special gate");
        }
        if (trusted) r = intersect(r, unit_interval());
        if (r.lo > r.hi) fail(Errc::RangeUnprovable, where + ": empty range");
        need(r.within(unit_interval()), "value range " + show(r) + " leaves [0, 1]");
        NodeId out = b_.gate(kind, std::move(in), zeta);
        ranges_.push_back(r);
        if (kind == GateKind::Add) proofs_.push_back(AddProof{out, args[0], args[1]});
        if (trusted) trusted_.push_back(out);
        return out;
    }

    NodeId half(NodeId n) {
        auto it = halves_.find(n);
        if (it != halves_.end()) return it->second;
        NodeId h = emit(GateKind::MulConst, {n}, Rational(1, 2));
        halves_.emplace(n, h);
        return h;
    }

    NodeId one() {
        if (!one_) one_ = emit(GateKind::Const, {}, Rational(1));
        return *one_;
    }

    NodeId zero() {
        if (!zero_) zero_ = emit(GateKind::Sub01, {one(), one()});
        return *zero_;
    }

    // (a + b) / 2 with both halves in [0, 1/2].
    NodeId mean(NodeId a, NodeId b, std::optional<Interval> hint = std::nullopt) {
        return emit(GateKind::Add, {half(a), half(b)}, Rational(), hint);
    }

    const CircuitBuilder& builder() const { return b_; }
    const std::vector<Interval>& ranges() const { return ranges_; }
    const std::vector<AddProof>& proofs() const { return proofs_; }
    const std::vector<NodeId>& trusted() const { return trusted_; }

private:
    CircuitBuilder b_;
    std::vector<Interval> ranges_;
    std::vector<AddProof> proofs_;
    std::vector<NodeId> trusted_;
    std::map<NodeId, NodeId> halves_;
    std::optional<NodeId> one_, zero_;
};

}  // namespace

ReorderResult outputs_last(const Circuit& src) {
    if (src.cyclic) fail(Errc::CyclicCircuit, "outputs_last needs an acyclic circuit");
    Circuit c = src;
    ReorderResult res;
    auto fan = c.fanout();
    std::set<NodeId> inputs(c.inputs.begin(), c.inputs.end());
    std::set<NodeId> seen;
    for (auto& o : c.outputs) {
        bool copy = inputs.count(o) || fan[o] > 0 || seen.count(o);
        seen.insert(o);
        if (!copy) continue;
        res.copies.push_back(o);
        NodeId fresh = c.node_count++;
        c.gates.push_back(Gate{GateKind::MulConst, {o}, fresh, Rational(1)});
        o = fresh;
    }
    auto order = c.topological_gate_order();
    if (!order) fail(Errc::CyclicCircuit, "gate dependencies contain a cycle");
    std::vector<NodeId> new_id(c.node_count, c.node_count);
    std::vector<char> is_output(c.node_count, 0);
    for (NodeId o : c.outputs) is_output[o] = 1;
    NodeId next = 0;
    for (NodeId i : c.inputs) new_id[i] = next++;
    for (std::size_t g : *order) {
        NodeId out = c.gates[g].out;
        if (!is_output[out] && new_id[out] == c.node_count) new_id[out] = next++;
    }
    for (NodeId v = 0; v < c.node_count; ++v)
        if (!is_output[v] && new_id[v] == c.node_count) new_id[v] = next++;
    for (NodeId o : c.outputs) new_id[o] = next++;
    res.circuit = renumber(c, new_id);
    res.node_map.assign(new_id.begin(), new_id.begin() + static_cast<std::ptrdiff_t>(src.node_count));
    return res;
}

LoweringResult lower_to_special(const Circuit& c, const LoweringOptions& opts) {
    for (const auto& g : c.gates)
        if (g.kind == GateKind::CmpGt) fail(Errc::ComparisonGateForbidden, "comparison gates cannot be lowered");
    if (c.cyclic) fail(Errc::CyclicCircuit, "lowering needs an acyclic circuit");
    auto order = c.topological_gate_order();
    if (!order) fail(Errc::CyclicCircuit, "lowering needs an acyclic circuit");

    RangeAnalysis src = certified_ranges(c, unit_box(c.inputs.size()), opts.ranges);
    std::set<std::size_t> trusted_src(src.trusted_gates.begin(), src.trusted_gates.end());
    for (NodeId v = 0; v < c.node_count; ++v)
        if (!src.ranges[v].within(unit_interval()))
            fail(Errc::RangeUnprovable,
                 "node " + std::to_string(v) + " has range " + show(src.ranges[v]) + " outside [0, 1]");

    SpecialEmitter e;
    std::vector<std::optional<NodeId>> m(c.node_count);
    for (NodeId i : c.inputs) m[i] = e.input(src.ranges[i]);

    for (std::size_t gi : *order) {
        const Gate& g = c.gates[gi];
        const Interval& R = src.ranges[g.out];
        auto arg = [&](std::size_t k) {
            if (!m[g.in[k]]) fail(Errc::InvalidArgument, "gate reads an unproduced node");
            return *m[g.in[k]];
        };
        NodeId out = 0;
        switch (g.kind) {
            case GateKind::Const:
                out = g.zeta.is_zero() ? e.zero() : e.emit(GateKind::Const, {}, g.zeta, R);
                break;
            case GateKind::Add: {
                NodeId h = e.mean(arg(0), arg(1), scale(R, Rational(1, 2)));
                out = e.emit(GateKind::Double01, {h}, Rational(), R);
                break;
            }
            case GateKind::Sub: out = e.emit(GateKind::Sub01, {arg(0), arg(1)}, Rational(), R); break;
            case GateKind::MulConst: {
                if (g.zeta.sign() < 0)
                    fail(Errc::RangeUnprovable, "negative constant " + g.zeta.str() + " has no special-gate form");
                if (g.zeta.is_zero()) {
                    out = e.zero();
                } else if (g.zeta <= Rational(1)) {
                    out = e.emit(GateKind::MulConst, {arg(0)}, g.zeta, R);
                } else {
                    long k = ceil_log2(g.zeta);
                    out = e.emit(GateKind::MulConst, {arg(0)}, g.zeta / pow2(k), scale(R, pow2(-k)));
                    for (long j = k - 1; j >= 0; --j) out = e.emit(GateKind::Double01, {out}, Rational(), scale(R, pow2(-j)));
                }
                break;
            }
            case GateKind::Mul: {
                NodeId a = arg(0), b = arg(1);
                NodeId s = e.mean(a, b);
                NodeId sq = e.emit(GateKind::Square, {s});
                NodeId t = e.emit(GateKind::Add, {e.emit(GateKind::Square, {e.half(a)}), e.emit(GateKind::Square, {e.half(b)})});
                NodeId diff = e.emit(GateKind::Sub01, {sq, t}, Rational(), scale(R, Rational(1, 2)));
                out = e.emit(GateKind::Double01, {diff}, Rational(), R);
                break;
            }
            case GateKind::Square: out = e.emit(GateKind::Square, {arg(0)}, Rational(), R); break;
            case GateKind::Max:
            case GateKind::Min: {
                NodeId a = arg(0), b = arg(1);
                NodeId p = e.mean(a, b);
                NodeId q = e.mean(e.emit(GateKind::Sub01, {a, b}), e.emit(GateKind::Sub01, {b, a}));
                if (g.kind == GateKind::Max) {
                    NodeId h = e.mean(p, q, scale(R, Rational(1, 2)));
                    out = e.emit(GateKind::Double01, {h}, Rational(), R);
                } else {
                    out = e.emit(GateKind::Sub01, {p, q}, Rational(), R);
                }
                break;
            }
            case GateKind::Double01:
                out = e.emit(GateKind::Double01, {arg(0)}, Rational(), R, trusted_src.count(gi) > 0);
                break;
            case GateKind::Sub01:
                out = e.emit(GateKind::Sub01, {arg(0), arg(1)}, Rational(), R, trusted_src.count(gi) > 0);
                break;
            case GateKind::CmpGt: break;
        }
        m[g.out] = out;
    }

    std::vector<NodeId> outs;
    for (NodeId o : c.outputs) {
        if (!m[o]) fail(Errc::InvalidArgument, "output node is never produced");
        outs.push_back(*m[o]);
    }
    Circuit lowered = e.builder().build(outs, c.id.empty() ? "special" : c.id + "/special");
    ReorderResult ro = outputs_last(lowered);

    LoweringResult res;
    res.circuit = std::move(ro.circuit);
    auto& cert = res.certificate;
    cert.circuit_id = res.circuit.id;
    cert.ranges.assign(res.circuit.node_count, Interval{0, 0});
    for (NodeId v = 0; v < lowered.node_count; ++v) cert.ranges[ro.node_map[v]] = e.ranges()[v];
    std::vector<char> mapped(res.circuit.node_count, 0);
    for (NodeId v : ro.node_map) mapped[v] = 1;
    for (const auto& g : res.circuit.gates)
        if (!mapped[g.out]) cert.ranges[g.out] = cert.ranges[g.in[0]];
    for (const auto& p : e.proofs()) cert.add_proofs.push_back(AddProof{ro.node_map[p.node], p.first, p.second});
    for (NodeId t : e.trusted()) cert.trusted_nodes.push_back(ro.node_map[t]);
    std::sort(cert.add_proofs.begin(), cert.add_proofs.end(), [](const AddProof& x, const AddProof& y) { return x.node < y.node; });
    std::sort(cert.trusted_nodes.begin(), cert.trusted_nodes.end());
    cert.source_nodes = c.node_count;
    cert.lowered_nodes = res.circuit.node_count;
    res.node_map.resize(c.node_count);
    for (NodeId v = 0; v < c.node_count; ++v) res.node_map[v] = ro.node_map[*m[v]];
    return res;
}

SpecialCircuitCertificate certify_special(const Circuit& c, const RangeOptions& opts) {
    auto violations = validate(c, ValidateOptions{true});
    if (!violations.empty())
        fail(Errc::UncertifiedCircuit, std::string(violation_name(violations.front().kind)) + ": " + violations.front().detail);
    RangeAnalysis ra = certified_ranges(c, unit_box(c.inputs.size()), opts);
    std::set<std::size_t> trusted(ra.trusted_gates.begin(), ra.trusted_gates.end());
    SpecialCircuitCertificate cert;
    cert.circuit_id = c.id;
    cert.ranges = ra.ranges;
    cert.source_nodes = cert.lowered_nodes = c.node_count;
    for (std::size_t gi = 0; gi < c.gates.size(); ++gi) {
        const Gate& g = c.gates[gi];
        std::string where = std::string(gate_kind_name(g.kind)) + " producing node " + std::to_string(g.out);
        if (trusted.count(gi)) {
            cert.trusted_nodes.push_back(g.out);
            continue;
        }
        if (!ra.ranges[g.out].within(unit_interval()))
            fail(Errc::RangeUnprovable, where + ": range " + show(ra.ranges[g.out]));
        if (g.kind == GateKind::Add) {
            const Interval &x = ra.ranges[g.in[0]], &y = ra.ranges[g.in[1]];
            if (!x.within(kHalf) || !y.within(kHalf)) fail(Errc::RangeUnprovable, where + ": adder inputs exceed 1/2");
            cert.add_proofs.push_back(AddProof{g.out, x, y});
        }
        if (g.kind == GateKind::Double01 && !ra.ranges[g.in[0]].within(kHalf))
            fail(Errc::RangeUnprovable, where + ": doubler input exceeds 1/2");
    }
    std::sort(cert.add_proofs.begin(), cert.add_proofs.end(), [](const AddProof& x, const AddProof& y) { return x.node < y.node; });
    std::sort(cert.trusted_nodes.begin(), cert.trusted_nodes.end());
    return cert;
}

std::vector<std::string> check_certificate(const Circuit& c, const SpecialCircuitCertificate& cert) {
    std::vector<std::string> problems;
    for (const auto& v : validate(c, ValidateOptions{true}))
        problems.push_back(std::string(violation_name(v.kind)) + ": " + v.detail);
    if (cert.ranges.size() != c.node_count) {
        problems.push_back("certificate covers " + std::to_string(cert.ranges.size()) + " nodes, circuit has " +
                           std::to_string(c.node_count));
        return problems;
    }
    if (!cert.circuit_id.empty() && !c.id.empty() && cert.circuit_id != c.id)
        problems.push_back("certificate belongs to circuit \"" + cert.circuit_id + "\"");
    for (NodeId v = 0; v < c.node_count; ++v)
        if (!cert.ranges[v].within(unit_interval()) || cert.ranges[v].lo > cert.ranges[v].hi)
            problems.push_back("node " + std::to_string(v) + " range " + show(cert.ranges[v]) + " not inside [0, 1]");
    std::map<NodeId, const AddProof*> proofs;
    for (const auto& p : cert.add_proofs) proofs[p.node] = &p;
    std::set<NodeId> trusted(cert.trusted_nodes.begin(), cert.trusted_nodes.end());
    for (const auto& g : c.gates) {
        if (g.in.size() != gate_arity(g.kind)) continue;
        bool bad_ref = std::any_of(g.in.begin(), g.in.end(), [&](NodeId n) { return n >= c.node_count; });
        if (bad_ref || g.out >= c.node_count) continue;
        std::string where = std::string(gate_kind_name(g.kind)) + " producing node " + std::to_string(g.out);
        if (g.kind == GateKind::Add) {
            auto it = proofs.find(g.out);
            if (it == proofs.end()) {
                problems.push_back(where + ": no adder proof");
            } else if (it->second->first != cert.ranges[g.in[0]] || it->second->second != cert.ranges[g.in[1]] ||
                       !it->second->first.within(kHalf) || !it->second->second.within(kHalf)) {
                problems.push_back(where + ": adder proof does not match certified input ranges inside [0, 1/2]");
            }
        }
        if (g.kind == GateKind::Double01 && !trusted.count(g.out) && !cert.ranges[g.in[0]].within(kHalf))
            problems.push_back(where + ": doubler input not inside [0, 1/2]");
        if (g.kind == GateKind::Const && !cert.ranges[g.out].contains(g.zeta))
            problems.push_back(where + ": constant outside its certified range");
    }
    return problems;
}

}  // namespace chbu
