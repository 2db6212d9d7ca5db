#include "chbu/lp/simplex.hpp"

#include <cstdint>
#include <optional>
#include <sstream>

#include "chbu/error.hpp"

namespace chbu {

std::size_t LinearProgram::add_variable(std::string name, bool is_free) {
    names.push_back(std::move(name));
    free.push_back(is_free);
    objective.emplace_back(0);
    for (auto& r : rows) r.coeffs.emplace_back(0);
    return variables++;
}

void LinearProgram::add_row(std::vector<Rational> coeffs, Relation rel, Rational rhs) {
    if (coeffs.size() != variables) fail(Errc::InvalidArgument, "row width differs from the variable count");
    rows.push_back(LPRow{std::move(coeffs), rel, std::move(rhs)});
}

namespace {

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : t_(rows, std::vector<Rational>(cols + 1)), basis_(rows), cols_(cols) {}

    Rational& at(std::size_t i, std::size_t j) { return t_[i][j]; }
    Rational& rhs(std::size_t i) { return t_[i][cols_]; }
    std::size_t& basis(std::size_t i) { return basis_[i]; }
    std::size_t rows() const { return t_.size(); }
    std::size_t cols() const { return cols_; }

    void remove_row(std::size_t i) {
        t_.erase(t_.begin() + static_cast<long>(i));
        basis_.erase(basis_.begin() + static_cast<long>(i));
    }

    void pivot(std::size_t r, std::size_t e) {
        Rational p = t_[r][e];
        for (auto& v : t_[r]) v /= p;
        for (std::size_t i = 0; i < t_.size(); ++i) {
            if (i == r || t_[i][e].is_zero()) continue;
            Rational f = t_[i][e];
            for (std::size_t j = 0; j <= cols_; ++j)
                if (!t_[r][j].is_zero()) t_[i][j] -= f * t_[r][j];
        }
        basis_[r] = e;
    }

    // Minimizes cost over the current basis with Bland's rule; columns with
    // banned[j] never enter.  Returns false when unbounded.
    bool optimize(const std::vector<Rational>& cost, const std::vector<bool>& banned, std::size_t& pivots) {
        for (;;) {
            std::optional<std::size_t> enter;
            for (std::size_t j = 0; j < cols_ && !enter; ++j) {
                if (banned[j]) continue;
                Rational r = cost[j];
                for (std::size_t i = 0; i < t_.size(); ++i)
                    if (!t_[i][j].is_zero()) r -= cost[basis_[i]] * t_[i][j];
                if (r.sign() < 0) enter = j;
            }
            if (!enter) return true;
            std::optional<std::size_t> leave;
            Rational best;
            for (std::size_t i = 0; i < t_.size(); ++i) {
                if (t_[i][*enter].sign() <= 0) continue;
                Rational ratio = t_[i][cols_] / t_[i][*enter];
                if (!leave || ratio < best || (ratio == best && basis_[i] < basis_[*leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (!leave) return false;
            pivot(*leave, *enter);
            ++pivots;
        }
    }

private:
    std::vector<std::vector<Rational>> t_;
    std::vector<std::size_t> basis_;
    std::size_t cols_;
};

}  // namespace

LPResult solve_lp(const LinearProgram& lp) {
    if (lp.free.size() != lp.variables || lp.objective.size() != lp.variables)
        fail(Errc::InvalidArgument, "linear program metadata is inconsistent");
    // Column layout: structural columns (free variables split in two), then
    // one slack/surplus per inequality, then one artificial per row that
    // needs it.
    std::vector<std::size_t> pos(lp.variables), neg(lp.variables, SIZE_MAX);
    std::size_t col = 0;
    for (std::size_t v = 0; v < lp.variables; ++v) {
        pos[v] = col++;
        if (lp.free[v]) neg[v] = col++;
    }
    const std::size_t structural = col;
    struct Norm {
        std::vector<Rational> a;
        Relation rel;
        Rational b;
    };
    std::vector<Norm> rows;
    for (const auto& r : lp.rows) {
        Norm n{std::vector<Rational>(structural), r.rel, r.rhs};
        for (std::size_t v = 0; v < lp.variables; ++v) {
            n.a[pos[v]] = r.coeffs[v];
            if (neg[v] != SIZE_MAX) n.a[neg[v]] = -r.coeffs[v];
        }
        if (n.b.sign() < 0) {
            for (auto& x : n.a) x = -x;
            n.b = -n.b;
            if (n.rel == Relation::LessEqual) n.rel = Relation::GreaterEqual;
            else if (n.rel == Relation::GreaterEqual) n.rel = Relation::LessEqual;
        }
        rows.push_back(std::move(n));
    }
    std::size_t slacks = 0, artificials = 0;
    for (const auto& r : rows) {
        if (r.rel != Relation::Equal) ++slacks;
        if (r.rel != Relation::LessEqual) ++artificials;
    }
    const std::size_t total = structural + slacks + artificials;
    Tableau t(rows.size(), total);
    std::vector<bool> artificial(total, false);
    std::size_t s = structural, a = structural + slacks;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < structural; ++j) t.at(i, j) = rows[i].a[j];
        t.rhs(i) = rows[i].b;
        switch (rows[i].rel) {
            case Relation::LessEqual:
                t.at(i, s) = 1;
                t.basis(i) = s++;
                break;
            case Relation::GreaterEqual:
                t.at(i, s++) = -1;
                [[fallthrough]];
            case Relation::Equal:
                t.at(i, a) = 1;
                artificial[a] = true;
                t.basis(i) = a++;
                break;
        }
    }

    LPResult res;
    std::vector<Rational> phase1(total);
    for (std::size_t j = 0; j < total; ++j)
        if (artificial[j]) phase1[j] = 1;
    std::vector<bool> none(total, false);
    t.optimize(phase1, none, res.pivots);
    Rational infeas = 0;
    for (std::size_t i = 0; i < t.rows(); ++i)
        if (artificial[t.basis(i)]) infeas += t.rhs(i);
    if (infeas.sign() > 0) {
        res.status = LPStatus::Infeasible;
        return res;
    }
    for (std::size_t i = t.rows(); i-- > 0;) {
        if (!artificial[t.basis(i)]) continue;
        std::optional<std::size_t> j;
        for (std::size_t c = 0; c < total && !j; ++c)
            if (!artificial[c] && !t.at(i, c).is_zero()) j = c;
        if (j) {
            t.pivot(i, *j);
            ++res.pivots;
        } else {
            t.remove_row(i);
        }
    }

    std::vector<Rational> cost(total);
    for (std::size_t v = 0; v < lp.variables; ++v) {
        cost[pos[v]] = lp.objective[v];
        if (neg[v] != SIZE_MAX) cost[neg[v]] = -lp.objective[v];
    }
    if (!t.optimize(cost, artificial, res.pivots)) {
        res.status = LPStatus::Unbounded;
        return res;
    }
    std::vector<Rational> colval(total);
    for (std::size_t i = 0; i < t.rows(); ++i) colval[t.basis(i)] = t.rhs(i);
    res.values.assign(lp.variables, Rational(0));
    res.objective = 0;
    for (std::size_t v = 0; v < lp.variables; ++v) {
        res.values[v] = colval[pos[v]];
        if (neg[v] != SIZE_MAX) res.values[v] -= colval[neg[v]];
        res.objective += lp.objective[v] * res.values[v];
    }
    res.status = LPStatus::Optimal;
    return res;
}

namespace {

std::string var_name(const LinearProgram& lp, std::size_t v) {
    if (v < lp.names.size() && !lp.names[v].empty()) return lp.names[v];
    return "x" + std::to_string(v);
}

// Writes sum_j k_j v_j where k = scale * coeffs is integral.
void write_terms(std::ostream& os, const LinearProgram& lp, const std::vector<Rational>& coeffs, const mpz_class& scale) {
    bool first = true;
    for (std::size_t v = 0; v < coeffs.size(); ++v) {
        if (coeffs[v].is_zero()) continue;
        Rational k = coeffs[v] * Rational(scale);
        os << (k.sign() < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
        Rational m = abs(k);
        if (m != Rational(1)) os << m.num().get_str() << ' ';
        os << var_name(lp, v);
        first = false;
    }
    if (first) os << "0 " << var_name(lp, 0);
}

mpz_class denominator_lcm(const std::vector<Rational>& coeffs, const Rational* extra) {
    mpz_class l = 1;
    for (const auto& c : coeffs) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.den().get_mpz_t());
    if (extra) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), extra->den().get_mpz_t());
    return l;
}

}  // namespace

std::string to_cplex_lp(const LinearProgram& lp) {
    std::ostringstream os;
    os << "Minimize\n obj: ";
    write_terms(os, lp, lp.objective, denominator_lcm(lp.objective, nullptr));
    os << "\nSubject To\n";
    for (std::size_t i = 0; i < lp.rows.size(); ++i) {
        const auto& r = lp.rows[i];
        mpz_class scale = denominator_lcm(r.coeffs, &r.rhs);
        os << " c" << i + 1 << ": ";
        write_terms(os, lp, r.coeffs, scale);
        os << (r.rel == Relation::LessEqual ? " <= " : r.rel == Relation::GreaterEqual ? " >= " : " = ");
        os << (r.rhs * Rational(scale)).num().get_str() << '\n';
    }
    os << "Bounds\n";
    for (std::size_t v = 0; v < lp.variables; ++v)
        if (lp.free[v]) os << ' ' << var_name(lp, v) << " free\n";
    os << "End\n";
    return os.str();
}

}  // namespace chbu
