#include "chbu/embed/embed.hpp"

#include <algorithm>
#include <map>

#include "chbu/error.hpp"

namespace chbu {

const char* gadget_agent_name(GadgetAgent a) {
    switch (a) {
        case GadgetAgent::Ad: return "ad";
        case GadgetAgent::Mid: return "mid";
        case GadgetAgent::Cen: return "cen";
        case GadgetAgent::Ex: return "ex";
    }
    return "?";
}

Interval NodeGadget::window(GadgetAgent a) const {
    Rational lo = base + Rational(3 * static_cast<long>(a));
    return {lo, lo + 3};
}

NodeGadget gadget(std::size_t node) { return NodeGadget{node, Rational(12 * static_cast<long>(node))}; }

namespace {

constexpr GadgetAgent kAgents[] = {GadgetAgent::Ad, GadgetAgent::Mid, GadgetAgent::Cen, GadgetAgent::Ex};

Rational span_of(std::size_t r) { return Rational(12 * static_cast<long>(r)); }

// Two height-4 guards around a pair of unit value intervals.
PiecewisePoly plain_agent(const Rational& L, const Rational& guard, const Interval& left, const Interval& right) {
    return DensityBuilder(0, L)
        .constant(guard, guard + 1, 4)
        .constant(guard + 2, guard + 3, 4)
        .constant(left.lo, left.hi, 1)
        .constant(right.lo, right.hi, 1)
        .build();
}

Rational half_of(const Interval& v) { return v.lo + Rational(1, 2); }

PiecewisePoly ad_density(const Gate* g, const NodeGadget& me, const Rational& L) {
    const Rational& b = me.base;
    DensityBuilder d(0, L);
    d.constant(b, b + 1, 4);
    if (!g) {
        d.constant(b + 2, b + 3, 4);
        return d.build();
    }
    auto in_plus = [&](std::size_t k) { return gadget(g->in[k]).v_plus(); };
    Interval va = me.v_a();
    switch (g->kind) {
        case GateKind::Const:
            d.constant(b + 2, b + 3, 4).constant(va.lo, va.hi, 1);
            if (g->zeta < Rational(1, 2)) d.constant(b, b + 1, Rational(1) - Rational(2) * g->zeta);
            if (g->zeta > Rational(1, 2)) d.constant(b + 2, b + 3, Rational(2) * g->zeta - Rational(1));
            break;
        case GateKind::MulConst: {
            const Rational& z = g->zeta;
            d.constant(b + 1 + z, b + 2 + z, 4);
            d.constant(in_plus(0).lo, in_plus(0).hi, 1);
            d.constant(b + 1, b + 1 + z, Rational(1) / z);
            break;
        }
        case GateKind::Add:
            d.constant(b + 2, b + 3, 4).constant(va.lo, va.hi, 1);
            for (std::size_t k = 0; k < 2; ++k) d.constant(in_plus(k).lo, half_of(in_plus(k)), 1);
            break;
        case GateKind::Square:
            d.constant(b + 2, b + 3, 4).constant(va.lo, va.hi, 1);
            d.ramp(in_plus(0).lo, in_plus(0).hi, 2);
            break;
        case GateKind::Double01:
            d.constant(b + 2, b + 3, 4).constant(va.lo, va.hi, Rational(1, 2));
            d.constant(in_plus(0).lo, half_of(in_plus(0)), 1);
            break;
        case GateKind::Sub01: {
            Interval vk = gadget(g->in[1]).v_minus();
            d.constant(b + 2, b + 3, 4).constant(va.lo, va.hi, 1).constant(b, b + 1, 1);
            d.constant(in_plus(0).lo, in_plus(0).hi, 1);
            d.constant(vk.lo, vk.hi, 1);
            break;
        }
        default:
            fail(Errc::UncertifiedCircuit, "gate " + std::string(gate_kind_name(g->kind)) + " has no gadget");
    }
    return d.build();
}

void require_special(const Circuit& c) {
    auto v = validate(c, ValidateOptions{true});
    if (!v.empty())
        fail(Errc::UncertifiedCircuit, std::string(violation_name(v.front().kind)) + ": " + v.front().detail);
    if (c.cyclic || c.node_count == 0) fail(Errc::UncertifiedCircuit, "need a nonempty acyclic circuit");
}

}  // namespace

EmbeddedInstance build_gadgets(const Circuit& c, const SpecialCircuitCertificate& cert) {
    require_special(c);
    auto problems = check_certificate(c, cert);
    if (!problems.empty()) fail(Errc::UncertifiedCircuit, problems.front());

    const std::size_t r = c.node_count;
    const Rational L = span_of(r);
    auto producers = c.producers();

    EmbeddedInstance out;
    out.source = c;
    out.instance.id = c.id.empty() ? std::string("embedded") : c.id + "/embedded";
    out.instance.domain_length = L;
    for (std::size_t i = 0; i < r; ++i) {
        NodeGadget me = gadget(i);
        const Gate* g = producers[i] ? &c.gates[*producers[i]] : nullptr;
        for (GadgetAgent a : kAgents) {
            PiecewisePoly density;
            switch (a) {
                case GadgetAgent::Ad: density = ad_density(g, me, L); break;
                case GadgetAgent::Mid: density = plain_agent(L, me.base + 3, me.v_a(), me.v_m()); break;
                case GadgetAgent::Cen: density = plain_agent(L, me.base + 6, me.v_m(), me.v_minus()); break;
                case GadgetAgent::Ex: density = plain_agent(L, me.base + 9, me.v_minus(), me.v_plus()); break;
            }
            std::string name = std::string(gadget_agent_name(a)) + "_" + std::to_string(i);
            out.instance.agents.push_back(Agent{name, integrate(density)});
            out.densities.push_back(std::move(density));
        }
    }
    return out;
}

EmbeddedInstance build_gadgets(const Circuit& c) {
    require_special(c);
    return build_gadgets(c, certify_special(c));
}

CHSolution encode_values_to_cuts(const EmbeddedInstance& inst, const std::vector<Rational>& z) {
    const Circuit& c = inst.source;
    if (z.size() != c.node_count)
        fail(Errc::ValuesDoNotSatisfyCircuit,
             "expected " + std::to_string(c.node_count) + " node values, got " + std::to_string(z.size()));
    for (std::size_t i = 0; i < z.size(); ++i)
        if (!unit_interval().contains(z[i]))
            fail(Errc::ValuesDoNotSatisfyCircuit, "value of node " + std::to_string(i) + " outside [0,1]");
    if (auto bad = first_violated_gate(c, z))
        fail(Errc::ValuesDoNotSatisfyCircuit, "gate producing node " + std::to_string(c.gates[*bad].out) + " is violated");
    if (inst.finis_present && z[z.size() - 2] != z.back())
        fail(Errc::ValuesDoNotSatisfyCircuit, "the last two node values differ");

    auto producers = c.producers();
    CHSolution sol;
    sol.id = inst.instance.id + "/encoded";
    sol.leftmost = Sign::Minus;
    for (std::size_t i = 0; i < z.size(); ++i) {
        NodeGadget me = gadget(i);
        Rational ad = me.v_a().lo + z[i];
        if (producers[i]) {
            const Gate& g = c.gates[*producers[i]];
            if (g.kind == GateKind::Sub01 && z[g.in[0]] < z[g.in[1]])
                ad = me.v_a().lo - (z[g.in[1]] - z[g.in[0]]) / Rational(5);
        }
        sol.cuts.push_back(ad);
        sol.cuts.push_back(me.v_m().lo + z[i]);
        sol.cuts.push_back(me.v_minus().lo + z[i]);
        sol.cuts.push_back(me.v_plus().lo + z[i]);
    }
    return sol;
}

std::vector<Rational> decode_cuts_to_values(const EmbeddedInstance& inst, const CHSolution& sol) {
    const std::size_t r = inst.node_count();
    const Rational L = inst.instance.domain_length;
    if (sol.cuts.size() > inst.instance.size())
        fail(Errc::SolutionDoesNotSatisfyAgents, "more cuts than agents");
    auto verdict = verify(inst.instance, sol, 0);
    if (verdict.shape_error) fail(Errc::SolutionDoesNotSatisfyAgents, *verdict.shape_error);
    if (!verdict.all_satisfied)
        fail(Errc::SolutionDoesNotSatisfyAgents, "imbalance " + verdict.max_imbalance.str());

    auto canon = canonicalize(sol, L);
    std::vector<Rational> inner;
    for (const auto& t : canon.cuts)
        if (t.sign() > 0 && t < L) inner.push_back(t);

    std::vector<Rational> z(r);
    for (std::size_t i = 0; i < r; ++i) {
        NodeGadget me = gadget(i);
        Interval w = me.window(GadgetAgent::Ex);
        std::vector<Rational> here;
        for (const auto& t : inner)
            if (w.lo < t && t < w.hi) here.push_back(t);
        if (here.size() != 1)
            fail(Errc::CutOutsideExpectedInterval,
                 "window of ex_" + std::to_string(i) + " holds " + std::to_string(here.size()) + " cuts");
        if (!me.v_plus().contains(here[0]))
            fail(Errc::CutOutsideExpectedInterval,
                 "cut " + here[0].str() + " of ex_" + std::to_string(i) + " lies outside its value interval");
        z[i] = here[0] - me.v_plus().lo;
    }
    if (auto bad = first_violated_gate(inst.source, z))
        fail(Errc::ValuesDoNotSatisfyCircuit,
             "decoded values violate the gate producing node " + std::to_string(inst.source.gates[*bad].out));
    return z;
}

EmbeddedInstance add_finis(const EmbeddedInstance& inst) {
    if (inst.finis_present) return inst;
    const Circuit& c = inst.source;
    const std::size_t r = c.node_count;
    if (r < 2 || c.outputs.size() < 2 || c.outputs[c.outputs.size() - 2] != r - 2 || c.outputs.back() != r - 1)
        fail(Errc::MissingOutputPair, "the last two nodes must be the final two outputs");
    EmbeddedInstance out = inst;
    Interval p = gadget(r - 2).v_plus(), m = gadget(r - 1).v_minus();
    auto density = DensityBuilder(0, inst.instance.domain_length).constant(p.lo, p.hi, 1).constant(m.lo, m.hi, 1).build();
    out.instance.agents.push_back(Agent{"finis", integrate(density)});
    out.densities.push_back(std::move(density));
    out.finis_present = true;
    return out;
}

std::vector<Circuit> integral_circuits(const EmbeddedInstance& inst) {
    std::vector<Circuit> out;
    for (std::size_t k = 0; k < inst.densities.size(); ++k)
        out.push_back(integral_circuit(inst.densities[k], inst.instance.agents[k].name));
    return out;
}

std::vector<ForcingEntry> forcing_report(const EmbeddedInstance& inst) {
    std::vector<ForcingEntry> out;
    const Rational L = inst.instance.domain_length;
    for (std::size_t i = 0; i < inst.node_count(); ++i) {
        for (GadgetAgent a : kAgents) {
            std::size_t k = inst.agent_of(i, a);
            const auto& F = std::get<PiecewisePoly>(inst.instance.agents[k].valuation);
            Interval w = gadget(i).window(a);
            ForcingEntry e{k, F.eval(w.hi) - F.eval(w.lo), F.eval(L) - F.eval(0), false};
            e.forced = Rational(2) * e.window_mass > e.total_mass;
            out.push_back(std::move(e));
        }
    }
    return out;
}

namespace {

class GridSearch {
public:
    GridSearch(const EmbeddedInstance& inst, const Rational& step, std::size_t limit)
        : inst_(inst), step_(step), limit_(limit), windows_(inst.cut_count()) {
        for (std::size_t k = 0; k < inst.instance.size(); ++k) {
            // Last window touched by the agent's support; it is checked once
            // that window has its cut.
            std::size_t last = 0;
            const auto& d = inst.densities[k];
            for (std::size_t s = 0; s < d.piece_count(); ++s) {
                const Coeffs& c = d.pieces()[s];
                if (c[0].is_zero() && c[1].is_zero() && c[2].is_zero()) continue;
                mpz_class w = ceil(d.breakpoints()[s + 1] / Rational(3)) - 1;
                last = std::max(last, static_cast<std::size_t>(w.get_ui()));
            }
            checks_[std::min(last, windows_ - 1)].push_back(k);
        }
        for (std::size_t w = 0; w < windows_; ++w) {
            Rational lo = Rational(3 * static_cast<long>(w));
            for (Rational t = lo + step_; t < lo + 3; t += step_) grid_[w].push_back(t);
        }
    }

    std::vector<CHSolution> run() {
        cuts_.clear();
        dfs(0);
        return std::move(found_);
    }

private:
    bool balanced(std::size_t k, std::size_t w) const {
        const auto& F = std::get<PiecewisePoly>(inst_.instance.agents[k].valuation);
        Rational diff = 0, prev = F.eval(0);
        int sign = -1;
        auto step = [&](const Rational& t) {
            Rational f = F.eval(t);
            diff += Rational(sign) * (f - prev);
            prev = f;
            sign = -sign;
        };
        for (std::size_t j = 0; j <= w; ++j) step(cuts_[j]);
        step(inst_.instance.domain_length);
        return diff.is_zero();
    }

    void dfs(std::size_t w) {
        if (found_.size() >= limit_) return;
        if (w == windows_) {
            found_.push_back(CHSolution{inst_.instance.id + "/grid", cuts_, Sign::Minus});
            return;
        }
        for (const auto& t : grid_[w]) {
            cuts_.push_back(t);
            bool ok = std::all_of(checks_[w].begin(), checks_[w].end(), [&](std::size_t k) { return balanced(k, w); });
            if (ok) dfs(w + 1);
            cuts_.pop_back();
            if (found_.size() >= limit_) return;
        }
    }

    const EmbeddedInstance& inst_;
    Rational step_;
    std::size_t limit_;
    std::size_t windows_;
    std::map<std::size_t, std::vector<std::size_t>> checks_;
    std::map<std::size_t, std::vector<Rational>> grid_;
    std::vector<Rational> cuts_;
    std::vector<CHSolution> found_;
};

}  // namespace

std::vector<CHSolution> grid_solutions(const EmbeddedInstance& inst, const Rational& step, std::size_t limit) {
    if (step.sign() <= 0) fail(Errc::InvalidArgument, "grid step must be positive");
    return GridSearch(inst, step, limit).run();
}

}  // namespace chbu
