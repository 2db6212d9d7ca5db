#include <map>

#include "chbu/bu/borsuk_ulam.hpp"

namespace chbu {

namespace {

class Nodes {
public:
    explicit Nodes(CircuitBuilder& b) : b_(b) {}

    NodeId constant(const Rational& v) {
        auto it = consts_.find(v);
        if (it != consts_.end()) return it->second;
        return consts_.emplace(v, b_.constant(v)).first->second;
    }
    NodeId relu(NodeId x) { return b_.max(x, constant(0)); }
    NodeId abs(NodeId x) { return b_.add(relu(x), relu(b_.mul_const(-1, x))); }

private:
    CircuitBuilder& b_;
    std::map<Rational, NodeId> consts_;
};

}  // namespace

BUInstance ch_to_bu(const CHInstance& inst) {
    const std::size_t n = inst.size();
    if (n == 0) fail(Errc::InvalidArgument, "instance has no agents");
    for (const auto& a : inst.agents)
        if (!std::holds_alternative<Circuit>(a.valuation))
            fail(Errc::NonCircuitValuation, "agent " + a.name + " is not circuit-backed");

    CircuitBuilder b;
    Nodes k(b);
    std::vector<NodeId> x;
    for (std::size_t j = 0; j <= n; ++j) x.push_back(b.input());
    const Rational& L = inst.domain_length;
    auto scale = [&](NodeId v) { return L == Rational(1) ? v : b.mul_const(L, v); };

    // t[j] = |x_0| + ... + |x_{j-1}|, p[j] = max(x_j, 0).
    std::vector<NodeId> t{k.constant(0)}, p;
    for (std::size_t j = 0; j <= n; ++j) {
        NodeId a = k.abs(x[j]);
        t.push_back(j == 0 ? a : b.add(t.back(), a));
        p.push_back(k.relu(x[j]));
    }
    std::vector<NodeId> outs;
    for (const auto& a : inst.agents) {
        const Circuit& F = std::get<Circuit>(a.valuation);
        auto at = [&](NodeId pos) { return b.splice(F, std::vector<NodeId>{scale(pos)})[0]; };
        std::optional<NodeId> total;
        for (std::size_t j = 0; j <= n; ++j) {
            NodeId left = at(t[j]);
            NodeId q = b.sub(at(j == 0 ? p[j] : b.add(t[j], p[j])), left);
            total = total ? b.add(*total, q) : q;
        }
        outs.push_back(*total);
    }
    BUInstance bu;
    bu.dimension = n;
    bu.map = b.build(outs, inst.id.empty() ? std::string("bu") : inst.id + "/bu");
    bu.linear = is_linear(bu.map);
    return bu;
}

bool on_sphere(std::span<const Rational> x) {
    Rational s = 0;
    for (const auto& v : x) s += abs(v);
    return s == Rational(1);
}

std::vector<Rational> antipodal_gap(const BUInstance& bu, std::span<const Rational> x) {
    CompiledCircuit cc(bu.map);
    std::vector<Rational> neg;
    for (const auto& v : x) neg.push_back(-v);
    auto a = cc.outputs(x), b = cc.outputs(neg);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

BUVerdict bu_verify(const BUInstance& bu, std::span<const Rational> x, const Rational& tol) {
    BUVerdict v;
    if (x.size() != bu.map.inputs.size()) {
        v.failure = Errc::ArityMismatch;
        return v;
    }
    v.on_sphere = on_sphere(x);
    v.residual = 0;
    for (const auto& g : antipodal_gap(bu, x)) v.residual = max(v.residual, abs(g));
    if (!v.on_sphere) v.failure = Errc::NotOnSphere;
    else if (v.residual > tol) v.failure = Errc::NotABUSolution;
    v.passed = !v.failure;
    return v;
}

CHSolution decode_bu_solution(std::span<const Rational> x, const CHInstance& inst, const Rational& tol) {
    const std::size_t n = inst.size();
    if (x.size() != n + 1)
        fail(Errc::ArityMismatch, "expected " + std::to_string(n + 1) + " coordinates, got " + std::to_string(x.size()));
    if (!on_sphere(x)) fail(Errc::NotOnSphere, "sum of |x_j| differs from 1");
    const Rational& L = inst.domain_length;
    SignedCuts s;
    Rational t = 0;
    for (std::size_t j = 0; j <= n; ++j) {
        if (j > 0) s.cuts.push_back(L * t);
        t += abs(x[j]);
        s.signs.push_back(x[j].sign() < 0 ? Sign::Minus : Sign::Plus);
    }
    CHSolution sol = canonicalize(s, L);
    sol.id = inst.id.empty() ? std::string("bu-decoded") : inst.id + "/bu-decoded";
    auto v = verify(inst, sol, tol);
    if (!v.all_satisfied) fail(Errc::NotABUSolution, "decoded cuts leave imbalance " + v.max_imbalance.str());
    return sol;
}

Circuit emit_bu_decoder(std::size_t n, const Rational& domain_length) {
    CircuitBuilder b;
    Nodes k(b);
    std::vector<NodeId> y;
    for (std::size_t j = 0; j <= n; ++j) y.push_back(b.input());
    NodeId one = k.constant(1);
    auto positive = [&](NodeId v) { return b.cmp_gt(v); };
    auto negative = [&](NodeId v) { return b.cmp_gt(b.mul_const(-1, v)); };
    auto is_zero = [&](NodeId v) { return b.sub(b.sub(one, positive(v)), negative(v)); };
    // If y[j] is zero, swap it with y[j+1].
    auto bubble = [&](std::size_t j) {
        NodeId moved = b.mul(is_zero(y[j]), y[j + 1]);
        y[j] = b.add(y[j], moved);
        y[j + 1] = b.sub(y[j + 1], moved);
    };
    auto bubble_pass = [&](std::size_t from) {
        for (std::size_t j = from; j < n; ++j) bubble(j);
    };
    for (std::size_t pass = 0; pass < n; ++pass) bubble_pass(0);
    // Merging right to left lets a run of equal signs collapse into its
    // leftmost entry; each merge leaves one zero that is moved to the end.
    for (std::size_t j = n; j-- > 0;) {
        NodeId same = b.add(b.mul(positive(y[j]), positive(y[j + 1])), b.mul(negative(y[j]), negative(y[j + 1])));
        NodeId moved = b.mul(same, y[j + 1]);
        y[j] = b.add(y[j], moved);
        y[j + 1] = b.sub(y[j + 1], moved);
        bubble_pass(j + 1);
    }
    std::vector<NodeId> outs;
    std::optional<NodeId> t;
    for (std::size_t j = 0; j < n; ++j) {
        NodeId a = k.abs(y[j]);
        t = t ? b.add(*t, a) : a;
        outs.push_back(domain_length == Rational(1) ? b.mul_const(1, *t) : b.mul_const(domain_length, *t));
    }
    outs.push_back(positive(y[0]));
    Circuit c = b.build(outs, "bu-decoder");
    c.role = CircuitRole::Decoder;
    return c;
}

}  // namespace chbu
