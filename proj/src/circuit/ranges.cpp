#include "chbu/circuit/ranges.hpp"

#include <map>

#include "chbu/error.hpp"

namespace chbu {

namespace {

// center + sum_i coeff_i * e_i with every noise symbol e_i in [-1, 1].
struct Affine {
    Rational center;
    std::map<std::size_t, Rational> terms;

    Rational radius() const {
        Rational r = 0;
        for (const auto& [k, v] : terms) r += abs(v);
        return r;
    }
    Interval range() const {
        Rational r = radius();
        return {center - r, center + r};
    }
};

Affine constant_form(const Rational& v) { return Affine{v, {}}; }

Affine combine(const Affine& a, const Rational& sa, const Affine& b, const Rational& sb) {
    Affine r{a.center * sa + b.center * sb, {}};
    for (const auto& [k, v] : a.terms) r.terms[k] += v * sa;
    for (const auto& [k, v] : b.terms) r.terms[k] += v * sb;
    std::erase_if(r.terms, [](const auto& kv) { return kv.second.is_zero(); });
    return r;
}

Affine scaled(const Affine& a, const Rational& s) { return combine(a, s, constant_form(0), 0); }

class NoiseSource {
public:
    explicit NoiseSource(std::size_t first) : next_(first) {}
    std::size_t fresh() { return next_++; }

private:
    std::size_t next_;
};

Affine from_interval(const Interval& iv, NoiseSource& ns) {
    Affine a{(iv.lo + iv.hi) / Rational(2), {}};
    Rational half = (iv.hi - iv.lo) / Rational(2);
    if (!half.is_zero()) a.terms[ns.fresh()] = half;
    return a;
}

Affine product(const Affine& x, const Affine& y, NoiseSource& ns) {
    Affine r{x.center * y.center, {}};
    for (const auto& [k, v] : x.terms) r.terms[k] += v * y.center;
    for (const auto& [k, v] : y.terms) r.terms[k] += v * x.center;
    std::erase_if(r.terms, [](const auto& kv) { return kv.second.is_zero(); });
    Rational err = x.radius() * y.radius();
    if (!err.is_zero()) r.terms[ns.fresh()] = err;
    return r;
}

Affine squared(const Affine& x, NoiseSource& ns) {
    Affine r{x.center * x.center, {}};
    for (const auto& [k, v] : x.terms) r.terms[k] = Rational(2) * v * x.center;
    std::erase_if(r.terms, [](const auto& kv) { return kv.second.is_zero(); });
    // (sum c_i e_i)^2 lies in [0, rad^2].
    Rational half = x.radius() * x.radius() / Rational(2);
    if (!half.is_zero()) {
        r.center += half;
        r.terms[ns.fresh()] = half;
    }
    return r;
}

// max(d, 0) for d known to lie in [l, u].  When the sign of d is unknown the
// result is a fresh symbol over [0, u]; this keeps the correlation carried by
// the other operand of MAX/MIN (max(a, b) - b is seen to be nonnegative).
Affine relu(const Affine& d, const Interval& dr, NoiseSource& ns) {
    if (dr.lo.sign() >= 0) return d;
    if (dr.hi.sign() <= 0) return constant_form(0);
    return from_interval({Rational(0), dr.hi}, ns);
}

}  // namespace

Interval unit_interval() { return {Rational(0), Rational(1)}; }

Interval intersect(const Interval& a, const Interval& b) { return {max(a.lo, b.lo), min(a.hi, b.hi)}; }

std::vector<Interval> unit_box(std::size_t n) { return std::vector<Interval>(n, unit_interval()); }

Interval gate_image(const Gate& g, std::span<const Interval> a) {
    switch (g.kind) {
        case GateKind::Const: return {g.zeta, g.zeta};
        case GateKind::Add: return {a[0].lo + a[1].lo, a[0].hi + a[1].hi};
        case GateKind::Sub: return {a[0].lo - a[1].hi, a[0].hi - a[1].lo};
        case GateKind::MulConst:
            return g.zeta.sign() >= 0 ? Interval{g.zeta * a[0].lo, g.zeta * a[0].hi}
                                      : Interval{g.zeta * a[0].hi, g.zeta * a[0].lo};
        case GateKind::Mul: {
            Rational p[4] = {a[0].lo * a[1].lo, a[0].lo * a[1].hi, a[0].hi * a[1].lo, a[0].hi * a[1].hi};
            Interval r{p[0], p[0]};
            for (const auto& v : p) r = {min(r.lo, v), max(r.hi, v)};
            return r;
        }
        case GateKind::Max: return {max(a[0].lo, a[1].lo), max(a[0].hi, a[1].hi)};
        case GateKind::Min: return {min(a[0].lo, a[1].lo), min(a[0].hi, a[1].hi)};
        case GateKind::Square: {
            Rational l2 = a[0].lo * a[0].lo, h2 = a[0].hi * a[0].hi;
            if (a[0].lo.sign() <= 0 && a[0].hi.sign() >= 0) return {Rational(0), max(l2, h2)};
            return {min(l2, h2), max(l2, h2)};
        }
        case GateKind::Double01: return {Rational(2) * a[0].lo, Rational(2) * a[0].hi};
        case GateKind::Sub01:
            return {max(a[0].lo - a[1].hi, Rational(0)), max(a[0].hi - a[1].lo, Rational(0))};
        case GateKind::CmpGt:
            if (a[0].lo.sign() > 0) return {Rational(1), Rational(1)};
            if (a[0].hi.sign() <= 0) return {Rational(0), Rational(0)};
            return unit_interval();
    }
    return unit_interval();
}

std::vector<Interval> interval_ranges(const Circuit& c, std::span<const Interval> box) {
    if (box.size() != c.inputs.size()) fail(Errc::ArityMismatch, "box dimension differs from input count");
    if (c.cyclic) fail(Errc::CyclicCircuit, "range analysis needs an acyclic circuit");
    auto order = c.topological_gate_order();
    if (!order) fail(Errc::CyclicCircuit, "range analysis needs an acyclic circuit");
    std::vector<Interval> r(c.node_count, Interval{0, 0});
    for (std::size_t i = 0; i < box.size(); ++i) r[c.inputs[i]] = box[i];
    std::vector<Interval> args;
    for (std::size_t gi : *order) {
        const Gate& g = c.gates[gi];
        args.clear();
        for (NodeId n : g.in) args.push_back(r[n]);
        r[g.out] = gate_image(g, args);
    }
    return r;
}

RangeAnalysis certified_ranges(const Circuit& c, std::span<const Interval> box, const RangeOptions& opts) {
    if (box.size() != c.inputs.size()) fail(Errc::ArityMismatch, "box dimension differs from input count");
    if (c.cyclic) fail(Errc::CyclicCircuit, "range analysis needs an acyclic circuit");
    auto order = c.topological_gate_order();
    if (!order) fail(Errc::CyclicCircuit, "range analysis needs an acyclic circuit");

    RangeAnalysis out;
    out.ranges.assign(c.node_count, Interval{0, 0});
    std::vector<Affine> form(c.node_count, constant_form(0));
    NoiseSource ns(0);
    for (std::size_t i = 0; i < box.size(); ++i) {
        out.ranges[c.inputs[i]] = box[i];
        form[c.inputs[i]] = from_interval(box[i], ns);
    }
    std::vector<Interval> args;
    for (std::size_t gi : *order) {
        const Gate& g = c.gates[gi];
        args.clear();
        for (NodeId n : g.in) args.push_back(out.ranges[n]);
        Interval iv = gate_image(g, args);
        const Affine* a = g.in.empty() ? nullptr : &form[g.in[0]];
        const Affine* b = g.in.size() > 1 ? &form[g.in[1]] : nullptr;
        Affine f;
        switch (g.kind) {
            case GateKind::Const: f = constant_form(g.zeta); break;
            case GateKind::Add: f = combine(*a, 1, *b, 1); break;
            case GateKind::Sub: f = combine(*a, 1, *b, -1); break;
            case GateKind::MulConst: f = scaled(*a, g.zeta); break;
            case GateKind::Double01: f = scaled(*a, 2); break;
            case GateKind::Mul: f = product(*a, *b, ns); break;
            case GateKind::Square: f = squared(*a, ns); break;
            case GateKind::Sub01:
            case GateKind::Max:
            case GateKind::Min: {
                Affine d = combine(*a, 1, *b, -1);
                Interval dr = intersect(d.range(), {args[0].lo - args[1].hi, args[0].hi - args[1].lo});
                Affine r = relu(d, dr, ns);
                if (g.kind == GateKind::Sub01) f = r;
                else if (g.kind == GateKind::Max) f = combine(*b, 1, r, 1);
                else f = combine(*a, 1, r, -1);
                break;
            }
            case GateKind::CmpGt:
                f = from_interval(iv, ns);
                break;
        }
        Interval fin = intersect(iv, f.range());
        if (fin.lo > fin.hi) fail(Errc::RangeUnprovable, "empty range at node " + std::to_string(g.out));
        if (opts.trust_special_gates && (g.kind == GateKind::Sub01 || g.kind == GateKind::Double01)) {
            bool pre_ok = g.kind == GateKind::Sub01
                              ? args[0].within(unit_interval()) && args[1].within(unit_interval())
                              : args[0].within({Rational(0), Rational(1, 2)});
            Interval clamped = intersect(fin, unit_interval());
            if (!pre_ok || clamped != fin) {
                out.trusted_gates.push_back(gi);
                fin = clamped;
                f = from_interval(fin, ns);
            }
        }
        out.ranges[g.out] = fin;
        form[g.out] = std::move(f);
    }
    return out;
}

}  // namespace chbu
