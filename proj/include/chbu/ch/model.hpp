#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "chbu/circuit/circuit.hpp"
#include "chbu/numerics/piecewise.hpp"

namespace chbu {

enum class Sign { Plus, Minus };

inline Sign flip(Sign s) { return s == Sign::Plus ? Sign::Minus : Sign::Plus; }
inline char sign_char(Sign s) { return s == Sign::Plus ? '+' : '-'; }
Sign parse_sign(std::string_view text);

// F_i either as an integral-form piecewise polynomial or as a one-input,
// one-output circuit computing it.
using IntegralValuation = std::variant<PiecewisePoly, Circuit>;

struct Agent {
    std::string name;
    IntegralValuation valuation;
};

struct CHInstance {
    std::string id;
    Rational domain_length = 1;
    std::vector<Agent> agents;

    std::size_t size() const { return agents.size(); }
};

struct CHSolution {
    std::string id;
    std::vector<Rational> cuts;
    Sign leftmost = Sign::Minus;

    friend bool operator==(const CHSolution& a, const CHSolution& b) {
        return a.cuts == b.cuts && a.leftmost == b.leftmost;
    }
};

// Evaluates F_i(t) for one agent; circuit agents are compiled on each call,
// so prefer ValuationEvaluator in loops.
Rational integral_at(const Agent& a, const Rational& t);

class ValuationEvaluator {
public:
    explicit ValuationEvaluator(const Agent& a);
    Rational operator()(const Rational& t) const;

private:
    const PiecewisePoly* poly_ = nullptr;
    std::optional<CompiledCircuit> circuit_;
};

// Throws BadSolutionShape unless cuts ascend inside [0, domain_length].
void check_shape(const CHInstance& inst, const CHSolution& sol);

// (F_i(A+), F_i(A-)).
std::pair<Rational, Rational> value_split(const CHInstance& inst, const CHSolution& sol, std::size_t agent);

struct AgentVerdict {
    Rational plus;
    Rational minus;
    bool satisfied = false;
};

struct Verdict {
    std::optional<std::string> shape_error;
    std::vector<AgentVerdict> agents;
    bool all_satisfied = false;
    Rational max_imbalance;
};

Verdict verify(const CHInstance& inst, const CHSolution& sol, const Rational& tol);

// Cuts with an explicit sign per piece (cuts.size() + 1 signs).
struct SignedCuts {
    std::vector<Rational> cuts;
    std::vector<Sign> signs;
};

CHSolution canonicalize(const SignedCuts& s, const Rational& domain_length);
CHSolution canonicalize(const CHSolution& sol, const Rational& domain_length);

// Rescales the domain to [0, 1]; solutions transfer by dividing cuts by the
// old domain length.
CHInstance normalize(const CHInstance& inst);
CHSolution normalize_solution(const CHSolution& sol, const Rational& domain_length);

// Structural audit: F_i(0) = 0, F_i nondecreasing, domains and circuit
// shapes consistent.  Empty when valid.
std::vector<std::string> validate_instance(const CHInstance& inst);

// Circuit computing F(t) = integral of a density with constant or linear
// pieces, built from D_s(t) = min(max(t, p_{s-1}), p_s).
Circuit integral_circuit(const PiecewisePoly& density, std::string id = {});

// Replaces piecewise valuations by equivalent circuits.
CHInstance with_circuit_valuations(const CHInstance& inst);

bool is_linear_instance(const CHInstance& inst);

}  // namespace chbu
