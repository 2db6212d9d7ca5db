#include "chbu/ch/model.hpp"

#include <algorithm>
#include <map>

#include "chbu/error.hpp"

namespace chbu {

Sign parse_sign(std::string_view text) {
    if (text == "+") return Sign::Plus;
    if (text == "-") return Sign::Minus;
    fail(Errc::ParseError, "sign must be \"+\" or \"-\", got \"" + std::string(text) + "\"");
}

Rational integral_at(const Agent& a, const Rational& t) { return ValuationEvaluator(a)(t); }

ValuationEvaluator::ValuationEvaluator(const Agent& a) {
    if (const auto* p = std::get_if<PiecewisePoly>(&a.valuation)) {
        poly_ = p;
    } else {
        const auto& c = std::get<Circuit>(a.valuation);
        if (c.inputs.size() != 1 || c.outputs.size() != 1)
            fail(Errc::ArityMismatch, "valuation circuit of " + a.name + " must have one input and one output");
        circuit_.emplace(c);
    }
}

Rational ValuationEvaluator::operator()(const Rational& t) const {
    if (poly_) return poly_->eval(t);
    return circuit_->outputs(std::vector<Rational>{t})[0];
}

void check_shape(const CHInstance& inst, const CHSolution& sol) {
    for (std::size_t j = 0; j < sol.cuts.size(); ++j) {
        const Rational& t = sol.cuts[j];
        if (t.sign() < 0 || t > inst.domain_length)
            fail(Errc::BadSolutionShape, "cut " + t.str() + " outside [0, " + inst.domain_length.str() + "]");
        if (j > 0 && t < sol.cuts[j - 1]) fail(Errc::BadSolutionShape, "cuts are not ascending");
    }
}

namespace {

std::pair<Rational, Rational> split_with(const ValuationEvaluator& F, const CHInstance& inst, const CHSolution& sol) {
    Rational plus = 0, minus = 0;
    Sign s = sol.leftmost;
    Rational prev_t = 0, prev_f = F(Rational(0));
    auto account = [&](const Rational& t) {
        Rational f = F(t);
        (s == Sign::Plus ? plus : minus) += f - prev_f;
        prev_t = t;
        prev_f = f;
        s = flip(s);
    };
    for (const auto& t : sol.cuts) account(t);
    account(inst.domain_length);
    return {plus, minus};
}

}  // namespace

std::pair<Rational, Rational> value_split(const CHInstance& inst, const CHSolution& sol, std::size_t agent) {
    check_shape(inst, sol);
    if (agent >= inst.agents.size()) fail(Errc::BadSolutionShape, "agent index out of range");
    return split_with(ValuationEvaluator(inst.agents[agent]), inst, sol);
}

Verdict verify(const CHInstance& inst, const CHSolution& sol, const Rational& tol) {
    Verdict v;
    try {
        check_shape(inst, sol);
    } catch (const Error& e) {
        v.shape_error = e.what();
        return v;
    }
    v.all_satisfied = true;
    v.max_imbalance = 0;
    for (const auto& a : inst.agents) {
        auto [plus, minus] = split_with(ValuationEvaluator(a), inst, sol);
        Rational gap = abs(plus - minus);
        bool ok = gap <= tol;
        v.all_satisfied = v.all_satisfied && ok;
        v.max_imbalance = max(v.max_imbalance, gap);
        v.agents.push_back(AgentVerdict{std::move(plus), std::move(minus), ok});
    }
    return v;
}

CHSolution canonicalize(const SignedCuts& s, const Rational& L) {
    if (s.signs.size() != s.cuts.size() + 1) fail(Errc::BadSolutionShape, "need one sign per piece");
    struct Piece {
        Rational a, b;
        Sign sign;
    };
    std::vector<Piece> pieces;
    Rational left = 0;
    for (std::size_t j = 0; j <= s.cuts.size(); ++j) {
        Rational right = j < s.cuts.size() ? s.cuts[j] : L;
        if (right < left) fail(Errc::BadSolutionShape, "cuts are not ascending");
        if (left < right) {
            if (!pieces.empty() && pieces.back().sign == s.signs[j]) pieces.back().b = right;
            else pieces.push_back(Piece{left, right, s.signs[j]});
        }
        left = right;
    }
    CHSolution out;
    out.leftmost = pieces.empty() ? s.signs.front() : pieces.front().sign;
    for (std::size_t j = 0; j + 1 < pieces.size(); ++j) out.cuts.push_back(pieces[j].b);
    while (out.cuts.size() < s.cuts.size()) out.cuts.push_back(L);
    return out;
}

CHSolution canonicalize(const CHSolution& sol, const Rational& L) {
    SignedCuts s{sol.cuts, {}};
    Sign sign = sol.leftmost;
    for (std::size_t j = 0; j <= sol.cuts.size(); ++j, sign = flip(sign)) s.signs.push_back(sign);
    CHSolution out = canonicalize(s, L);
    out.id = sol.id;
    return out;
}

CHInstance normalize(const CHInstance& inst) {
    const Rational& L = inst.domain_length;
    if (L.sign() <= 0) fail(Errc::InvalidArgument, "domain length must be positive");
    CHInstance out;
    out.id = inst.id.empty() ? std::string() : inst.id + "/normalized";
    out.domain_length = 1;
    for (const auto& a : inst.agents) {
        if (const auto* p = std::get_if<PiecewisePoly>(&a.valuation)) {
            out.agents.push_back(Agent{a.name, p->scaled_domain(Rational(1) / L)});
        } else {
            const auto& c = std::get<Circuit>(a.valuation);
            CircuitBuilder b;
            NodeId s = b.input();
            NodeId t = L == Rational(1) ? s : b.mul_const(L, s);
            auto outs = b.splice(c, std::vector<NodeId>{t});
            out.agents.push_back(Agent{a.name, b.build(outs, c.id)});
        }
    }
    return out;
}

CHSolution normalize_solution(const CHSolution& sol, const Rational& L) {
    CHSolution out = sol;
    for (auto& t : out.cuts) t /= L;
    return out;
}

std::vector<std::string> validate_instance(const CHInstance& inst) {
    std::vector<std::string> problems;
    if (inst.domain_length.sign() <= 0) problems.push_back("domain length must be positive");
    for (std::size_t i = 0; i < inst.agents.size(); ++i) {
        const Agent& a = inst.agents[i];
        std::string who = "agent " + std::to_string(i) + (a.name.empty() ? "" : " (" + a.name + ")");
        if (const auto* F = std::get_if<PiecewisePoly>(&a.valuation)) {
            if (F->lo().sign() != 0 || F->hi() != inst.domain_length)
                problems.push_back(who + ": valuation domain differs from [0, domain_length]");
            if (!F->integral_form()) problems.push_back(who + ": valuation is not flagged as integral form");
            if (F->eval(F->lo()).sign() != 0) problems.push_back(who + ": F(0) is not 0");
            auto f = F->derivative();
            for (std::size_t s = 0; s < f.piece_count(); ++s) {
                const Coeffs& c = f.pieces()[s];
                Rational h = f.breakpoints()[s + 1] - f.breakpoints()[s];
                if (c[0].sign() < 0 || (c[0] + c[1] * h).sign() < 0) {
                    problems.push_back(who + ": density negative on piece " + std::to_string(s));
                    break;
                }
            }
        } else {
            const auto& c = std::get<Circuit>(a.valuation);
            if (c.inputs.size() != 1 || c.outputs.size() != 1) {
                problems.push_back(who + ": valuation circuit needs one input and one output");
                continue;
            }
            auto v = validate(c);
            if (!v.empty()) {
                problems.push_back(who + ": " + std::string(violation_name(v.front().kind)) + " " + v.front().detail);
                continue;
            }
            if (integral_at(a, Rational(0)).sign() != 0) problems.push_back(who + ": F(0) is not 0");
        }
    }
    return problems;
}

Circuit integral_circuit(const PiecewisePoly& density, std::string id) {
    CircuitBuilder b;
    NodeId t = b.input();
    std::map<Rational, NodeId> consts;
    auto constant = [&](const Rational& v) {
        auto it = consts.find(v);
        if (it != consts.end()) return it->second;
        NodeId n = b.constant(v);
        consts.emplace(v, n);
        return n;
    };
    std::optional<NodeId> total;
    const auto& bp = density.breakpoints();
    for (std::size_t s = 0; s < density.piece_count(); ++s) {
        const Coeffs& c = density.pieces()[s];
        if (!c[2].is_zero())
            fail(Errc::UnsupportedPieceKind, "piece " + std::to_string(s) + " of the density is quadratic");
        if (c[0].is_zero() && c[1].is_zero()) continue;
        NodeId d = b.min(b.max(t, constant(bp[s])), constant(bp[s + 1]));
        NodeId u = b.sub(d, constant(bp[s]));
        std::optional<NodeId> term;
        if (!c[0].is_zero()) term = c[0] == Rational(1) ? u : b.mul_const(c[0], u);
        if (!c[1].is_zero()) {
            NodeId sq = b.mul(u, u);
            Rational k = c[1] / Rational(2);
            NodeId r = k == Rational(1) ? sq : b.mul_const(k, sq);
            term = term ? b.add(*term, r) : r;
        }
        total = total ? b.add(*total, *term) : *term;
    }
    if (!total) total = constant(0);
    // The input may itself be the result for a unit density on [0, L] only
    // after clamping, so the output is always a gate node.
    return b.build({*total}, std::move(id));
}

CHInstance with_circuit_valuations(const CHInstance& inst) {
    CHInstance out = inst;
    for (auto& a : out.agents) {
        if (const auto* F = std::get_if<PiecewisePoly>(&a.valuation)) {
            if (F->lo().sign() != 0) fail(Errc::InvalidArgument, "valuation domain must start at 0");
            a.valuation = integral_circuit(F->derivative(), a.name);
        }
    }
    return out;
}

bool is_linear_instance(const CHInstance& inst) {
    return std::all_of(inst.agents.begin(), inst.agents.end(), [](const Agent& a) {
        if (const auto* F = std::get_if<PiecewisePoly>(&a.valuation)) return F->degree() <= 1;
        return is_linear(std::get<Circuit>(a.valuation));
    });
}

}  // namespace chbu
