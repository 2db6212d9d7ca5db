#include "chbu/lp/rounding.hpp"

#include <algorithm>

#include "chbu/error.hpp"

namespace chbu {

bool LinearCell::contains(std::span<const Rational> x) const {
    for (std::size_t r = 0; r < A.size(); ++r) {
        Rational s = 0;
        for (std::size_t j = 0; j < x.size(); ++j) s += A[r][j] * x[j];
        if (s > b[r]) return false;
    }
    return true;
}

std::vector<Rational> LinearCell::apply(std::span<const Rational> x) const {
    std::vector<Rational> out;
    for (std::size_t r = 0; r < C.size(); ++r) {
        Rational s = C0[r];
        for (std::size_t j = 0; j < x.size(); ++j) s += C[r][j] * x[j];
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

AffineForm lin(const AffineForm& a, const Rational& sa, const AffineForm& b, const Rational& sb) {
    AffineForm r{std::vector<Rational>(a.coeffs.size()), a.constant * sa + b.constant * sb};
    for (std::size_t j = 0; j < r.coeffs.size(); ++j) r.coeffs[j] = a.coeffs[j] * sa + b.coeffs[j] * sb;
    return r;
}

std::vector<std::size_t> order_of(const Circuit& g) {
    if (g.cyclic) fail(Errc::CyclicCircuit, "cell extraction needs an acyclic circuit");
    auto order = g.topological_gate_order();
    if (!order) fail(Errc::CyclicCircuit, "cell extraction needs an acyclic circuit");
    return *order;
}

}  // namespace

LinearCell extract_cell(const Circuit& g, std::span<const Rational> p) {
    if (!is_linear(g)) fail(Errc::NonlinearCircuit, "cell extraction needs a linear circuit");
    if (p.size() != g.inputs.size()) fail(Errc::ArityMismatch, "point dimension differs from input count");
    const std::size_t n = p.size();
    auto order = order_of(g);
    auto values = evaluate(g, p).values;
    AffineForm zero{std::vector<Rational>(n), Rational(0)};
    std::vector<AffineForm> form(g.node_count, zero);
    for (std::size_t j = 0; j < n; ++j) form[g.inputs[j]].coeffs[j] = 1;

    LinearCell cell;
    // Records lhs <= rhs as (lhs - rhs) . x <= rhs.const - lhs.const.
    auto require_le = [&](const AffineForm& lhs, const AffineForm& rhs) {
        AffineForm d = lin(lhs, 1, rhs, -1);
        bool trivial = std::all_of(d.coeffs.begin(), d.coeffs.end(), [](const Rational& v) { return v.is_zero(); });
        if (trivial) return;
        cell.A.push_back(std::move(d.coeffs));
        cell.b.push_back(-d.constant);
    };
    for (std::size_t gi : order) {
        const Gate& gate = g.gates[gi];
        auto in = [&](std::size_t k) -> const AffineForm& { return form[gate.in[k]]; };
        auto val = [&](std::size_t k) -> const Rational& { return values[gate.in[k]]; };
        AffineForm f = zero;
        switch (gate.kind) {
            case GateKind::Const: f.constant = gate.zeta; break;
            case GateKind::Add: f = lin(in(0), 1, in(1), 1); break;
            case GateKind::Sub: f = lin(in(0), 1, in(1), -1); break;
            case GateKind::MulConst: f = lin(in(0), gate.zeta, zero, 0); break;
            case GateKind::Double01: f = lin(in(0), 2, zero, 0); break;
            case GateKind::Max:
                if (val(0) >= val(1)) {
                    require_le(in(1), in(0));
                    f = in(0);
                } else {
                    require_le(in(0), in(1));
                    f = in(1);
                }
                break;
            case GateKind::Min:
                if (val(0) <= val(1)) {
                    require_le(in(0), in(1));
                    f = in(0);
                } else {
                    require_le(in(1), in(0));
                    f = in(1);
                }
                break;
            case GateKind::Sub01: {
                AffineForm d = lin(in(0), 1, in(1), -1);
                if (val(0) > val(1)) {
                    require_le(zero, d);
                    f = d;
                } else {
                    require_le(d, zero);
                }
                break;
            }
            default: fail(Errc::NonlinearCircuit, "gate " + std::string(gate_kind_name(gate.kind)) + " is not linear");
        }
        form[gate.out] = std::move(f);
    }
    for (NodeId o : g.outputs) {
        cell.C.push_back(form[o].coeffs);
        cell.C0.push_back(form[o].constant);
    }
    return cell;
}

RoundingBudget compute_budget(const Circuit& g) {
    if (!is_linear(g)) fail(Errc::NonlinearCircuit, "budget needs a linear circuit");
    auto order = order_of(g);
    // Per node: bound on the coefficient magnitudes, bound on the constant,
    // and a common multiple of all denominators reachable in any cell.
    struct Bound {
        Rational coef, constant;
        mpz_class den = 1;
    };
    std::vector<Bound> bd(g.node_count);
    for (NodeId i : g.inputs) bd[i].coef = 1;
    auto lcm = [](const mpz_class& a, const mpz_class& b) {
        mpz_class r;
        mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
        return r;
    };
    for (std::size_t gi : order) {
        const Gate& gate = g.gates[gi];
        const Bound* a = gate.in.empty() ? nullptr : &bd[gate.in[0]];
        const Bound* b = gate.in.size() > 1 ? &bd[gate.in[1]] : nullptr;
        Bound r;
        switch (gate.kind) {
            case GateKind::Const: r = Bound{0, abs(gate.zeta), gate.zeta.den()}; break;
            case GateKind::Add:
            case GateKind::Sub:
            case GateKind::Sub01: r = Bound{a->coef + b->coef, a->constant + b->constant, lcm(a->den, b->den)}; break;
            case GateKind::Max:
            case GateKind::Min:
                r = Bound{max(a->coef, b->coef), max(a->constant, b->constant), lcm(a->den, b->den)};
                break;
            case GateKind::MulConst:
                r = Bound{a->coef * abs(gate.zeta), a->constant * abs(gate.zeta), a->den * gate.zeta.den()};
                break;
            case GateKind::Double01: r = Bound{a->coef * 2, a->constant * 2, a->den}; break;
            default: fail(Errc::NonlinearCircuit, "budget needs a linear circuit");
        }
        bd[gate.out] = std::move(r);
    }
    // Cell rows are differences of two node forms, hence the factor 2.
    Rational big = 1;
    mpz_class den = 1;
    for (const auto& x : bd) {
        big = max(big, max(x.coef, x.constant));
        den = lcm(den, x.den);
    }
    mpz_class M = ceil(Rational(2) * big * Rational(den));
    const long k = static_cast<long>(g.inputs.size()) + 1;
    mpz_class N = M * M * k;
    long bits = static_cast<long>(mpz_sizeinbase(N.get_mpz_t(), 2));
    RoundingBudget out;
    out.m = (k * bits + 1) / 2;
    out.eps = pow2(-(out.m + 1));
    return out;
}

Circuit antipodal_circuit(const BUInstance& bu) {
    CircuitBuilder b;
    std::vector<NodeId> x, nx;
    for (std::size_t j = 0; j < bu.map.inputs.size(); ++j) x.push_back(b.input());
    for (NodeId v : x) nx.push_back(b.mul_const(-1, v));
    auto fx = b.splice(bu.map, x), fn = b.splice(bu.map, nx);
    std::vector<NodeId> outs;
    for (std::size_t i = 0; i < fx.size(); ++i) outs.push_back(b.sub(fx[i], fn[i]));
    return b.build(outs, bu.map.id.empty() ? std::string("antipodal") : bu.map.id + "/antipodal");
}

LinearProgram rounding_lp(const LinearCell& cell, std::span<const Rational> p) {
    const std::size_t n = p.size();
    LinearProgram lp;
    for (std::size_t j = 0; j < n; ++j) lp.add_variable("x" + std::to_string(j), true);
    std::size_t z = lp.add_variable("z", false);
    lp.objective[z] = 1;
    auto row = [&] { return std::vector<Rational>(n + 1); };
    for (std::size_t r = 0; r < cell.A.size(); ++r) {
        auto a = row();
        std::copy(cell.A[r].begin(), cell.A[r].end(), a.begin());
        lp.add_row(std::move(a), Relation::LessEqual, cell.b[r]);
    }
    for (std::size_t i = 0; i < cell.C.size(); ++i) {
        for (int s : {1, -1}) {
            auto a = row();
            for (std::size_t j = 0; j < n; ++j) a[j] = Rational(s) * cell.C[i][j];
            a[z] = -1;
            lp.add_row(std::move(a), Relation::LessEqual, Rational(-s) * cell.C0[i]);
        }
    }
    auto sphere = row();
    for (std::size_t j = 0; j < n; ++j) {
        Rational s = p[j].sign() < 0 ? Rational(-1) : Rational(1);
        auto a = row();
        a[j] = s;
        lp.add_row(std::move(a), Relation::GreaterEqual, 0);
        sphere[j] = s;
    }
    lp.add_row(std::move(sphere), Relation::Equal, 1);
    return lp;
}

RoundResult round_to_exact(const BUInstance& bu, std::span<const Rational> p) {
    if (!is_linear(bu.map)) fail(Errc::NonlinearCircuit, "rounding needs a linear map");
    if (p.size() != bu.map.inputs.size()) fail(Errc::ArityMismatch, "point dimension differs from input count");
    if (!on_sphere(p)) fail(Errc::NotOnSphere, "anchor point is not on the L1 sphere");
    Circuit g = antipodal_circuit(bu);
    RoundResult out;
    auto gp = evaluate(g, p).outputs;
    if (std::all_of(gp.begin(), gp.end(), [](const Rational& v) { return v.is_zero(); })) {
        out.x.assign(p.begin(), p.end());
        out.z = 0;
        return out;
    }
    LinearCell cell = extract_cell(g, p);
    out.cell_constraints = cell.A.size();
    LinearProgram lp = rounding_lp(cell, p);
    LPResult res = solve_lp(lp);
    out.pivots = res.pivots;
    if (res.status == LPStatus::Infeasible) fail(Errc::InfeasibleLP, "the rounding LP has no feasible point");
    if (res.status == LPStatus::Unbounded) fail(Errc::UnboundedVariable, "the rounding LP is unbounded");
    if (res.objective.sign() > 0)
        fail(Errc::PositiveOptimum, "optimum z* = " + res.objective.str() + " > 0; the anchor is too far from a zero");
    out.x.assign(res.values.begin(), res.values.end() - 1);
    out.z = res.objective;
    return out;
}

}  // namespace chbu
