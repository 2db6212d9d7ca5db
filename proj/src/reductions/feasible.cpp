#include <algorithm>
#include <map>

#include "chbu/error.hpp"
#include "chbu/reductions/reductions.hpp"

namespace chbu {

namespace {

Rational power(const Rational& x, unsigned e) {
    Rational r = 1;
    for (unsigned k = 0; k < e; ++k) r *= x;
    return r;
}

Rational monomial_value(const std::vector<unsigned>& exps, std::span<const Rational> x) {
    Rational r = 1;
    for (std::size_t v = 0; v < exps.size(); ++v) r *= power(x[v], exps[v]);
    return r;
}

void check_point(std::size_t vars, std::span<const Rational> x) {
    if (x.size() != vars)
        fail(Errc::ArityMismatch, "point has " + std::to_string(x.size()) + " coordinates, polynomial has " +
                                      std::to_string(vars) + " variables");
}

// Builds q1 and q2 with CONST, ADD, MUL_CONST, MUL and SQUARE gates.
class TermCircuit {
public:
    explicit TermCircuit(std::size_t vars) {
        for (std::size_t v = 0; v < vars; ++v) x_.push_back(b_.input());
    }

    NodeId sum(const std::vector<NormalTerm>& q) {
        std::vector<NodeId> level;
        for (const auto& t : q) level.push_back(term(t));
        if (level.empty()) level.push_back(b_.constant(0));
        while (level.size() > 1) {
            std::vector<NodeId> next;
            for (std::size_t k = 0; k + 1 < level.size(); k += 2) next.push_back(b_.add(level[k], level[k + 1]));
            if (level.size() % 2) next.push_back(level.back());
            level = std::move(next);
        }
        return level[0];
    }

    Circuit build(NodeId q1, NodeId q2) const { return b_.build({q1, q2}, "feasible-q"); }

private:
    NodeId term(const NormalTerm& t) {
        std::optional<NodeId> mono;
        for (std::size_t v = 0; v < t.exps.size(); ++v) {
            if (t.exps[v] == 0) continue;
            NodeId pw = power(v, t.exps[v]);
            mono = mono ? b_.mul(*mono, pw) : pw;
        }
        return mono ? b_.mul_const(t.coef, *mono) : b_.constant(t.coef);
    }

    NodeId power(std::size_t v, unsigned e) {
        auto key = std::make_pair(v, e);
        if (auto it = powers_.find(key); it != powers_.end()) return it->second;
        NodeId r;
        if (e == 1) {
            r = x_[v];
        } else {
            NodeId h = power(v, e / 2);
            r = b_.square(h);
            if (e % 2) r = b_.mul(r, x_[v]);
        }
        powers_.emplace(key, r);
        return r;
    }

    CircuitBuilder b_;
    std::vector<NodeId> x_;
    std::map<std::pair<std::size_t, unsigned>, NodeId> powers_;
};

}  // namespace

Rational Polynomial::eval(std::span<const Rational> x) const {
    check_point(vars, x);
    Rational r = 0;
    for (const auto& t : terms) r += Rational(t.coef) * monomial_value(t.exps, x);
    return r;
}

unsigned Polynomial::degree() const {
    unsigned d = 0;
    for (const auto& t : terms) {
        unsigned s = 0;
        for (auto e : t.exps) s += e;
        d = std::max(d, s);
    }
    return d;
}

Polynomial canonical(const Polynomial& p) {
    std::map<std::vector<unsigned>, mpz_class> acc;
    for (const auto& t : p.terms) {
        if (t.exps.size() != p.vars)
            fail(Errc::InvalidArgument, "term has " + std::to_string(t.exps.size()) + " exponents for " +
                                            std::to_string(p.vars) + " variables");
        acc[t.exps] += t.coef;
    }
    Polynomial out{p.vars, {}};
    for (auto& [exps, c] : acc)
        if (c != 0) out.terms.push_back({c, exps});
    return out;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    if (a.vars != b.vars) fail(Errc::InvalidArgument, "polynomials have different variable counts");
    Polynomial s{a.vars, a.terms};
    s.terms.insert(s.terms.end(), b.terms.begin(), b.terms.end());
    return canonical(s);
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.vars != b.vars) fail(Errc::InvalidArgument, "polynomials have different variable counts");
    Polynomial s{a.vars, {}};
    for (const auto& ta : a.terms)
        for (const auto& tb : b.terms) {
            PolyTerm t{ta.coef * tb.coef, ta.exps};
            for (std::size_t v = 0; v < t.exps.size() && v < tb.exps.size(); ++v) t.exps[v] += tb.exps[v];
            s.terms.push_back(std::move(t));
        }
    return canonical(s);
}

Polynomial conjunction_to_feasible(const std::vector<Polynomial>& ps) {
    if (ps.empty()) return {};
    Polynomial q{ps[0].vars, {}};
    for (const auto& p : ps) {
        if (p.vars != q.vars) fail(Errc::InvalidArgument, "conjunction mixes variable counts");
        Polynomial c = canonical(p);
        q = q + c * c;
    }
    return q;
}

Rational NormalForm::eval(const std::vector<NormalTerm>& q, std::span<const Rational> x) {
    Rational r = 0;
    for (const auto& t : q) r += t.coef * monomial_value(t.exps, x);
    return r;
}

NormalForm normalize(const Polynomial& p) {
    Polynomial c = canonical(p);
    NormalForm nf;
    nf.vars = c.vars;
    if (c.terms.empty()) return nf;
    mpz_class cmax = 0;
    for (const auto& t : c.terms) cmax = std::max<mpz_class>(cmax, abs(t.coef));
    const Rational scale = Rational(mpz_class(cmax * static_cast<unsigned long>(c.terms.size())));
    for (const auto& t : c.terms) {
        Rational cj = Rational(mpz_class(abs(t.coef))) / scale;
        nf.coefficients.push_back(cj);
        (t.coef > 0 ? nf.q1 : nf.q2).push_back({cj, t.exps});
    }
    return nf;
}

FeasibleReduction feasible_to_ch(const Polynomial& p) {
    FeasibleReduction r;
    r.source = canonical(p);
    r.normal = normalize(r.source);
    TermCircuit tc(r.normal.vars);
    NodeId q1 = tc.sum(r.normal.q1);
    NodeId q2 = tc.sum(r.normal.q2);
    r.q_circuit = tc.build(q1, q2);
    r.lowered = lower_to_special(r.q_circuit);
    const Circuit& low = r.lowered.circuit;
    const std::size_t n = low.node_count;
    if (low.outputs.size() != 2 || n < 2 || low.outputs[0] != n - 2 || low.outputs[1] != n - 1)
        fail(Errc::MissingOutputPair, "lowered circuit does not end with the q1, q2 nodes");
    r.embedded = add_finis(build_gadgets(low, r.lowered.certificate));
    return r;
}

CHSolution feasible_witness(const FeasibleReduction& r, std::span<const Rational> x) {
    check_point(r.normal.vars, x);
    auto z = evaluate(r.lowered.circuit, x).values;
    return encode_values_to_cuts(r.embedded, z);
}

std::vector<Rational> feasible_point(const FeasibleReduction& r, const CHSolution& sol) {
    auto z = decode_cuts_to_values(r.embedded, sol);
    std::vector<Rational> x;
    for (NodeId in : r.lowered.circuit.inputs) x.push_back(z[in]);
    return x;
}

}  // namespace chbu
