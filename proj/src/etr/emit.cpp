#include <unordered_map>

#include "chbu/circuit/ranges.hpp"
#include "chbu/error.hpp"
#include "chbu/etr/etr.hpp"

namespace chbu {

namespace {

using P = EtrPoly;

Formula eq(P a, P b) { return Formula::atom(std::move(a), Cmp::Eq, std::move(b)); }
Formula ge(P a, P b) { return Formula::atom(std::move(a), Cmp::Ge, std::move(b)); }
Formula le(P a, P b) { return Formula::atom(std::move(a), Cmp::Le, std::move(b)); }

// (out = a and a >= b) or (out = b and b >= a)
Formula pick(const P& out, const P& a, const P& b, Cmp keep_first) {
    return Formula::disj({Formula::conj({eq(out, a), Formula::atom(a, keep_first, b)}),
                          Formula::conj({eq(out, b), Formula::atom(b, keep_first, a)})});
}

Formula gate_formula(const Gate& g, const std::vector<std::size_t>& var) {
    P out = P::variable(var[g.out]);
    auto in = [&](std::size_t k) { return P::variable(var[g.in[k]]); };
    switch (g.kind) {
        case GateKind::Const: return eq(out, P::constant(g.zeta));
        case GateKind::Add: return eq(out, in(0) + in(1));
        case GateKind::Sub: return eq(out, in(0) - in(1));
        case GateKind::MulConst: return eq(out, in(0) * g.zeta);
        case GateKind::Mul: return eq(out, in(0) * in(1));
        case GateKind::Square: return eq(out, in(0) * in(0));
        case GateKind::Double01: return eq(out, in(0) * Rational(2));
        case GateKind::Max: return pick(out, in(0), in(1), Cmp::Ge);
        case GateKind::Min: return pick(out, in(0), in(1), Cmp::Le);
        case GateKind::Sub01: {
            P d = in(0) - in(1);
            return Formula::disj({Formula::conj({eq(out, d), ge(in(0), in(1))}),
                                  Formula::conj({eq(out, P()), le(in(0), in(1))})});
        }
        case GateKind::CmpGt: break;
    }
    fail(Errc::ComparisonGateForbidden, "comparison gates have no ETR encoding here");
}

// x_j in [-1, 1] with xp_j = max(x_j, 0), xm_j = max(-x_j, 0), sign
// consistency and sum_j (xp_j + xm_j) = 1.  Returns (xp_j, xm_j) as
// polynomials.
std::vector<std::pair<P, P>> sphere_block(ETRSentence& s, std::size_t count) {
    std::vector<std::size_t> x, xp, xm;
    for (std::size_t j = 0; j < count; ++j) x.push_back(s.declare("x" + std::to_string(j), Interval{-1, 1}));
    for (std::size_t j = 0; j < count; ++j) {
        xp.push_back(s.declare("xp" + std::to_string(j), Interval{0, 1}));
        xm.push_back(s.declare("xm" + std::to_string(j), Interval{0, 1}));
    }
    std::vector<std::pair<P, P>> out;
    P sum;
    for (std::size_t j = 0; j < count; ++j) {
        P xj = P::variable(x[j]), p = P::variable(xp[j]), m = P::variable(xm[j]);
        s.assertions.push_back(pick(p, xj, P(), Cmp::Ge));
        s.assertions.push_back(pick(m, xj * Rational(-1), P(), Cmp::Ge));
        s.assertions.push_back(eq(p * m, P()));
        sum += p + m;
        out.emplace_back(p, m);
    }
    s.assertions.push_back(eq(sum, P::constant(1)));
    return out;
}

std::size_t count_coordinates(const ETRSentence& s) {
    std::size_t k = 0;
    while (s.find("x" + std::to_string(k))) ++k;
    if (k == 0) fail(Errc::InvalidArgument, "sentence has no x_j coordinates");
    return k;
}

class NameIndex {
public:
    explicit NameIndex(const ETRSentence& s) {
        for (std::size_t i = 0; i < s.variables.size(); ++i) idx_.emplace(s.variables[i].name, i);
    }
    std::size_t operator()(const std::string& name) const {
        auto it = idx_.find(name);
        if (it == idx_.end()) fail(Errc::InvalidArgument, "sentence lacks variable " + name);
        return it->second;
    }

private:
    std::unordered_map<std::string, std::size_t> idx_;
};

void set_coordinates(std::vector<Rational>& values, const NameIndex& at, std::span<const Rational> x) {
    for (std::size_t j = 0; j < x.size(); ++j) {
        auto sj = std::to_string(j);
        values[at("x" + sj)] = x[j];
        values[at("xp" + sj)] = x[j].sign() > 0 ? x[j] : Rational(0);
        values[at("xm" + sj)] = x[j].sign() < 0 ? -x[j] : Rational(0);
    }
}

void set_nodes(std::vector<Rational>& values, const NameIndex& at, const std::string& prefix, const Circuit& c,
               std::span<const Rational> in) {
    auto v = evaluate(c, in).values;
    for (std::size_t n = 0; n < v.size(); ++n) values[at(prefix + "n" + std::to_string(n))] = v[n];
}

std::string agent_prefix(std::size_t i, char side, std::size_t j) {
    return "a" + std::to_string(i) + "." + side + std::to_string(j) + ".";
}

}  // namespace

std::vector<std::size_t> encode_circuit(ETRSentence& s, const Circuit& c, const std::string& prefix,
                                        std::optional<std::vector<Interval>> input_box) {
    for (const auto& g : c.gates)
        if (g.kind == GateKind::CmpGt) fail(Errc::ComparisonGateForbidden, "comparison gates have no ETR encoding here");
    std::optional<std::vector<Interval>> boxes;
    if (input_box) boxes = interval_ranges(c, *input_box);
    std::vector<std::size_t> var(c.node_count);
    for (std::size_t v = 0; v < c.node_count; ++v)
        var[v] = s.declare(prefix + "n" + std::to_string(v), boxes ? std::optional<Interval>((*boxes)[v]) : std::nullopt);
    for (const auto& g : c.gates) s.assertions.push_back(gate_formula(g, var));
    return var;
}

ETRSentence circuit_to_constraints(const Circuit& c) {
    ETRSentence s;
    encode_circuit(s, c, "");
    return s;
}

ETRSentence ch_to_etr(const CHInstance& inst, std::size_t k) {
    CHInstance ci = with_circuit_valuations(inst);
    const Rational& L = ci.domain_length;
    ETRSentence s;
    auto parts = sphere_block(s, k + 1);
    std::vector<P> t{P()};
    for (const auto& [p, m] : parts) t.push_back(t.back() + p + m);
    const std::vector<Interval> box{Interval{0, L}};
    for (std::size_t i = 0; i < ci.size(); ++i) {
        const Circuit& F = std::get<Circuit>(ci.agents[i].valuation);
        P plus, minus;
        for (std::size_t j = 0; j <= k; ++j) {
            for (char side : {'p', 'm'}) {
                auto var = encode_circuit(s, F, agent_prefix(i, side, j), box);
                const P& w = side == 'p' ? parts[j].first : parts[j].second;
                s.assertions.push_back(eq(P::variable(var[F.inputs[0]]), (t[j] + w) * L));
                (side == 'p' ? plus : minus) += P::variable(var[F.outputs[0]]);
            }
        }
        s.assertions.push_back(eq(plus, minus));
    }
    return s;
}

ETRSentence bu_to_etr(const BUInstance& bu) {
    const Circuit& f = bu.map;
    const std::size_t n = f.inputs.size();
    ETRSentence s;
    sphere_block(s, n);
    const std::vector<Interval> box(n, Interval{-1, 1});
    auto vp = encode_circuit(s, f, "fp.", box);
    auto vm = encode_circuit(s, f, "fm.", box);
    for (std::size_t j = 0; j < n; ++j) {
        P xj = s.var("x" + std::to_string(j));
        s.assertions.push_back(eq(P::variable(vp[f.inputs[j]]), xj));
        s.assertions.push_back(eq(P::variable(vm[f.inputs[j]]), xj * Rational(-1)));
    }
    for (std::size_t i = 0; i < f.outputs.size(); ++i)
        s.assertions.push_back(eq(P::variable(vp[f.outputs[i]]), P::variable(vm[f.outputs[i]])));
    return s;
}

std::vector<Rational> ch_witness(const ETRSentence& s, const CHInstance& inst, const CHSolution& sol) {
    check_shape(inst, sol);
    const std::size_t pieces = count_coordinates(s);
    if (sol.cuts.size() + 1 > pieces)
        fail(Errc::BadSolutionShape, "solution uses " + std::to_string(sol.cuts.size()) + " cuts, sentence allows " +
                                         std::to_string(pieces - 1));
    const Rational& L = inst.domain_length;
    std::vector<Rational> x(pieces);
    Rational prev = 0;
    Sign sign = sol.leftmost;
    for (std::size_t j = 0; j <= sol.cuts.size(); ++j) {
        Rational end = j < sol.cuts.size() ? sol.cuts[j] : L;
        Rational w = (end - prev) / L;
        x[j] = sign == Sign::Plus ? w : -w;
        prev = end;
        sign = flip(sign);
    }
    NameIndex at(s);
    std::vector<Rational> values(s.variables.size());
    set_coordinates(values, at, x);
    CHInstance ci = with_circuit_valuations(inst);
    Rational t = 0;
    for (std::size_t j = 0; j < pieces; ++j) {
        Rational p = x[j].sign() > 0 ? x[j] : Rational(0), m = x[j].sign() < 0 ? -x[j] : Rational(0);
        for (std::size_t i = 0; i < ci.size(); ++i) {
            const Circuit& F = std::get<Circuit>(ci.agents[i].valuation);
            set_nodes(values, at, agent_prefix(i, 'p', j), F, std::vector<Rational>{L * (t + p)});
            set_nodes(values, at, agent_prefix(i, 'm', j), F, std::vector<Rational>{L * (t + m)});
        }
        t += abs(x[j]);
    }
    return values;
}

CHSolution ch_solution_from_witness(const ETRSentence& s, const CHInstance& inst, std::span<const Rational> values) {
    if (values.size() != s.variables.size()) fail(Errc::ArityMismatch, "assignment size differs from the variable count");
    const std::size_t pieces = count_coordinates(s);
    std::vector<Rational> x;
    for (std::size_t j = 0; j < pieces; ++j) x.push_back(values[s.index("x" + std::to_string(j))]);
    if (!on_sphere(x)) fail(Errc::NotOnSphere, "sum of |x_j| differs from 1");
    const Rational& L = inst.domain_length;
    SignedCuts sc;
    Rational t = 0;
    for (std::size_t j = 0; j < pieces; ++j) {
        if (j > 0) sc.cuts.push_back(L * t);
        t += abs(x[j]);
        sc.signs.push_back(x[j].sign() < 0 ? Sign::Minus : Sign::Plus);
    }
    CHSolution sol = canonicalize(sc, L);
    sol.id = inst.id.empty() ? std::string("etr-witness") : inst.id + "/etr-witness";
    return sol;
}

std::vector<Rational> bu_witness(const ETRSentence& s, const BUInstance& bu, std::span<const Rational> x) {
    if (x.size() != bu.map.inputs.size()) fail(Errc::ArityMismatch, "point dimension differs from input count");
    NameIndex at(s);
    std::vector<Rational> values(s.variables.size());
    set_coordinates(values, at, x);
    std::vector<Rational> neg;
    for (const auto& v : x) neg.push_back(-v);
    set_nodes(values, at, "fp.", bu.map, x);
    set_nodes(values, at, "fm.", bu.map, neg);
    return values;
}

}  // namespace chbu
