#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "chbu/error.hpp"
#include "chbu/etr/etr.hpp"

namespace chbu {

EtrPoly EtrPoly::constant(const Rational& c) {
    EtrPoly p;
    p.add_term({}, c);
    return p;
}

EtrPoly EtrPoly::variable(std::size_t v) {
    EtrPoly p;
    p.add_term({{v, 1}}, 1);
    return p;
}

void EtrPoly::add_term(const Monomial& m, const Rational& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (inserted) return;
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
}

unsigned EtrPoly::degree() const {
    unsigned d = 0;
    for (const auto& [m, c] : terms_) {
        unsigned s = 0;
        for (const auto& [v, e] : m) s += e;
        d = std::max(d, s);
    }
    return d;
}

std::vector<std::size_t> EtrPoly::variables() const {
    std::set<std::size_t> vs;
    for (const auto& [m, c] : terms_)
        for (const auto& [v, e] : m) vs.insert(v);
    return {vs.begin(), vs.end()};
}

EtrPoly& EtrPoly::operator+=(const EtrPoly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

EtrPoly& EtrPoly::operator-=(const EtrPoly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
}

EtrPoly& EtrPoly::operator*=(const Rational& c) {
    if (c.is_zero()) {
        terms_.clear();
        return *this;
    }
    for (auto& [m, v] : terms_) v *= c;
    return *this;
}

namespace {

Monomial times(const Monomial& a, const Monomial& b) {
    Monomial r;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) r.push_back(a[i++]);
        else if (i == a.size() || b[j].first < a[i].first) r.push_back(b[j++]);
        else {
            r.emplace_back(a[i].first, a[i].second + b[j].second);
            ++i;
            ++j;
        }
    }
    return r;
}

}  // namespace

EtrPoly operator*(const EtrPoly& a, const EtrPoly& b) {
    EtrPoly r;
    for (const auto& [ma, ca] : a.terms_)
        for (const auto& [mb, cb] : b.terms_) r.add_term(times(ma, mb), ca * cb);
    return r;
}

EtrPoly EtrPoly::pow(unsigned e) const {
    EtrPoly r = constant(1);
    for (unsigned i = 0; i < e; ++i) r = r * *this;
    return r;
}

Rational EtrPoly::eval(std::span<const Rational> values) const {
    Rational s = 0;
    for (const auto& [m, c] : terms_) {
        Rational t = c;
        for (const auto& [v, e] : m)
            for (unsigned k = 0; k < e; ++k) t *= values[v];
        s += t;
    }
    return s;
}

std::optional<std::pair<Rational, EtrPoly>> EtrPoly::isolate(std::size_t v) const {
    std::optional<Rational> a;
    EtrPoly rest;
    for (const auto& [m, c] : terms_) {
        bool has = std::any_of(m.begin(), m.end(), [&](const auto& p) { return p.first == v; });
        if (!has) {
            rest.add_term(m, c);
            continue;
        }
        if (m.size() != 1 || m[0].second != 1) return std::nullopt;
        a = c;
    }
    if (!a) return std::nullopt;
    return std::make_pair(*a, std::move(rest));
}

std::string_view cmp_symbol(Cmp c) {
    switch (c) {
        case Cmp::Lt: return "<";
        case Cmp::Le: return "<=";
        case Cmp::Eq: return "=";
        case Cmp::Ge: return ">=";
        case Cmp::Gt: return ">";
    }
    return "?";
}

Formula Formula::truth(bool v) {
    Formula f;
    f.kind = v ? Kind::True : Kind::False;
    return f;
}

Formula Formula::atom(EtrPoly lhs, Cmp cmp, EtrPoly rhs) {
    Formula f;
    f.kind = Kind::Atom;
    f.cmp = cmp;
    f.lhs = std::move(lhs);
    f.rhs = std::move(rhs);
    return f;
}

Formula Formula::conj(std::vector<Formula> parts) {
    Formula f;
    f.kind = Kind::And;
    f.children = std::move(parts);
    return f;
}

Formula Formula::disj(std::vector<Formula> parts) {
    Formula f;
    f.kind = Kind::Or;
    f.children = std::move(parts);
    return f;
}

Formula Formula::negate(Formula g) {
    Formula f;
    f.kind = Kind::Not;
    f.children.push_back(std::move(g));
    return f;
}

std::vector<std::size_t> Formula::variables() const {
    std::set<std::size_t> vs;
    auto walk = [&](const Formula& f, auto& self) -> void {
        if (f.kind == Kind::Atom) {
            for (auto v : f.lhs.variables()) vs.insert(v);
            for (auto v : f.rhs.variables()) vs.insert(v);
        }
        for (const auto& c : f.children) self(c, self);
    };
    walk(*this, walk);
    return {vs.begin(), vs.end()};
}

std::size_t ETRSentence::declare(std::string name, std::optional<Interval> box) {
    if (find(name)) fail(Errc::InvalidArgument, "variable " + name + " declared twice");
    if (box && box->lo > box->hi) fail(Errc::InvalidArgument, "empty box for " + name);
    variables.push_back(EtrVar{std::move(name), std::move(box)});
    return variables.size() - 1;
}

std::optional<std::size_t> ETRSentence::find(std::string_view name) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
        if (variables[i].name == name) return i;
    return std::nullopt;
}

std::size_t ETRSentence::index(std::string_view name) const {
    auto i = find(name);
    if (!i) fail(Errc::InvalidArgument, "unknown variable " + std::string(name));
    return *i;
}

Truth evaluate(const Formula& f, std::span<const Rational> values, const Rational& tol) {
    using K = Formula::Kind;
    switch (f.kind) {
        case K::True: return {true, 0};
        case K::False: return {false, 0};
        case K::Atom: {
            Rational d = f.lhs.eval(values) - f.rhs.eval(values);
            switch (f.cmp) {
                case Cmp::Eq: {
                    Rational r = abs(d);
                    return {r <= tol, r};
                }
                case Cmp::Lt: return {d.sign() < 0, 0};
                case Cmp::Le: return {d.sign() <= 0, 0};
                case Cmp::Ge: return {d.sign() >= 0, 0};
                case Cmp::Gt: return {d.sign() > 0, 0};
            }
            break;
        }
        case K::And: {
            Truth t{true, 0};
            for (const auto& c : f.children) {
                Truth s = evaluate(c, values, tol);
                if (!s.holds) return {false, s.residual};
                t.residual = max(t.residual, s.residual);
            }
            return t;
        }
        case K::Or: {
            std::optional<Rational> best;
            for (const auto& c : f.children) {
                Truth s = evaluate(c, values, tol);
                if (s.holds && (!best || s.residual < *best)) best = s.residual;
            }
            if (best) return {true, *best};
            return {false, 0};
        }
        case K::Not: return {!evaluate(f.children.at(0), values, tol).holds, 0};
    }
    return {false, 0};
}

Truth evaluate(const ETRSentence& s, std::span<const Rational> values, const Rational& tol) {
    if (values.size() != s.variables.size()) fail(Errc::ArityMismatch, "assignment size differs from the variable count");
    Truth t{true, 0};
    for (const auto& a : s.assertions) {
        Truth u = evaluate(a, values, tol);
        if (!u.holds) return {false, u.residual};
        t.residual = max(t.residual, u.residual);
    }
    return t;
}

// ---------------------------------------------------------------------------
// Text form

namespace {

struct TextStyle {
    // Writes one rational constant.
    std::string (*number)(const Rational&);
    // SMT-LIB has no empty conjunction or disjunction.
    bool smt = false;
};

std::string plain_number(const Rational& r) { return r.str(); }

std::string smt_number(const Rational& r) {
    auto mag = [](const mpz_class& z) { return z.get_str() + ".0"; };
    Rational a = abs(r);
    std::string s = a.is_integer() ? mag(a.num()) : "(/ " + mag(a.num()) + " " + mag(a.den()) + ")";
    return r.sign() < 0 ? "(- " + s + ")" : s;
}

void write_poly(std::ostream& os, const ETRSentence& s, const EtrPoly& p, const TextStyle& st) {
    auto monomial = [&](const Monomial& m, const Rational& c) {
        std::vector<std::string> f;
        if (m.empty() || c != Rational(1)) f.push_back(st.number(c));
        for (const auto& [v, e] : m)
            for (unsigned k = 0; k < e; ++k) f.push_back(s.variables[v].name);
        if (f.size() == 1) return f[0];
        std::string out = "(*";
        for (const auto& x : f) out += " " + x;
        return out + ")";
    };
    const auto& t = p.terms();
    if (t.empty()) {
        os << st.number(0);
        return;
    }
    if (t.size() == 1) {
        os << monomial(t.begin()->first, t.begin()->second);
        return;
    }
    os << "(+";
    for (const auto& [m, c] : t) os << ' ' << monomial(m, c);
    os << ')';
}

void write_formula(std::ostream& os, const ETRSentence& s, const Formula& f, const TextStyle& st) {
    using K = Formula::Kind;
    switch (f.kind) {
        case K::True: os << "true"; return;
        case K::False: os << "false"; return;
        case K::Atom:
            os << '(' << cmp_symbol(f.cmp) << ' ';
            write_poly(os, s, f.lhs, st);
            os << ' ';
            write_poly(os, s, f.rhs, st);
            os << ')';
            return;
        case K::And:
        case K::Or:
        case K::Not:
            if (st.smt && f.children.empty() && f.kind != K::Not) {
                os << (f.kind == K::And ? "true" : "false");
                return;
            }
            os << '(' << (f.kind == K::And ? "and" : f.kind == K::Or ? "or" : "not");
            for (const auto& c : f.children) {
                os << ' ';
                write_formula(os, s, c, st);
            }
            os << ')';
            return;
    }
}

struct Sx {
    bool is_list = false;
    std::string atom;
    std::vector<Sx> list;
    std::size_t line = 0;
};

[[noreturn]] void parse_fail(std::size_t line, const std::string& msg) {
    fail(Errc::ParseError, "line " + std::to_string(line) + ": " + msg);
}

std::vector<Sx> read_sexprs(std::string_view text) {
    std::vector<Sx> top;
    std::vector<Sx> stack;
    std::size_t line = 1;
    for (std::size_t i = 0; i < text.size();) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == ';') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (c == '(') {
            Sx s;
            s.is_list = true;
            s.line = line;
            stack.push_back(std::move(s));
            ++i;
        } else if (c == ')') {
            if (stack.empty()) parse_fail(line, "unbalanced ')'");
            Sx s = std::move(stack.back());
            stack.pop_back();
            (stack.empty() ? top : stack.back().list).push_back(std::move(s));
            ++i;
        } else {
            std::size_t j = i;
            while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '(' &&
                   text[j] != ')' && text[j] != ';')
                ++j;
            Sx s;
            s.atom = std::string(text.substr(i, j - i));
            s.line = line;
            if (stack.empty()) parse_fail(line, "bare token '" + s.atom + "' outside a form");
            stack.back().list.push_back(std::move(s));
            i = j;
        }
    }
    if (!stack.empty()) parse_fail(line, "unbalanced '('");
    return top;
}

bool is_number_token(const std::string& a) {
    if (a.empty()) return false;
    std::size_t i = a[0] == '-' ? 1 : 0;
    return i < a.size() && std::isdigit(static_cast<unsigned char>(a[i]));
}

bool is_name_token(const std::string& a) {
    if (a.empty() || !(std::isalpha(static_cast<unsigned char>(a[0])) || a[0] == '_')) return false;
    return std::all_of(a.begin(), a.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; });
}

Rational number_of(const Sx& s) {
    try {
        return Rational::parse(s.atom);
    } catch (const Error&) {
        parse_fail(s.line, "bad number '" + s.atom + "'");
    }
}

const std::string& head_of(const Sx& s) {
    if (!s.is_list || s.list.empty() || s.list[0].is_list) parse_fail(s.line, "expected a form with an operator");
    return s.list[0].atom;
}

class SentenceReader {
public:
    explicit SentenceReader(ETRSentence& s) : s_(s) {}

    EtrPoly term(const Sx& x) const {
        if (!x.is_list) {
            if (is_number_token(x.atom)) return EtrPoly::constant(number_of(x));
            auto v = s_.find(x.atom);
            if (!v) parse_fail(x.line, "undeclared variable '" + x.atom + "'");
            return EtrPoly::variable(*v);
        }
        const std::string& op = head_of(x);
        std::size_t argc = x.list.size() - 1;
        auto arg = [&](std::size_t i) { return term(x.list[i + 1]); };
        if (op == "+" || op == "*") {
            if (argc == 0) parse_fail(x.line, "'" + op + "' needs arguments");
            EtrPoly r = arg(0);
            for (std::size_t i = 1; i < argc; ++i) r = op == "+" ? r + arg(i) : r * arg(i);
            return r;
        }
        if (op == "-") {
            if (argc == 0) parse_fail(x.line, "'-' needs arguments");
            if (argc == 1) return arg(0) * Rational(-1);
            EtrPoly r = arg(0);
            for (std::size_t i = 1; i < argc; ++i) r -= arg(i);
            return r;
        }
        if (op == "^") {
            if (argc != 2 || x.list[2].is_list) parse_fail(x.line, "'^' takes a term and an exponent");
            Rational e = number_of(x.list[2]);
            if (!e.is_integer() || e.sign() < 0 || e > Rational(64)) parse_fail(x.line, "bad exponent");
            return arg(0).pow(static_cast<unsigned>(e.num().get_ui()));
        }
        parse_fail(x.line, "unknown term operator '" + op + "'");
    }

    Formula formula(const Sx& x) const {
        if (!x.is_list) {
            if (x.atom == "true") return Formula::truth(true);
            if (x.atom == "false") return Formula::truth(false);
            parse_fail(x.line, "expected a formula, got '" + x.atom + "'");
        }
        const std::string& op = head_of(x);
        std::vector<Formula> parts;
        if (op == "and" || op == "or" || op == "not") {
            for (std::size_t i = 1; i < x.list.size(); ++i) parts.push_back(formula(x.list[i]));
            if (op == "and") return Formula::conj(std::move(parts));
            if (op == "or") return Formula::disj(std::move(parts));
            if (parts.size() != 1) parse_fail(x.line, "'not' takes one formula");
            return Formula::negate(std::move(parts[0]));
        }
        for (Cmp c : {Cmp::Lt, Cmp::Le, Cmp::Eq, Cmp::Ge, Cmp::Gt}) {
            if (op != cmp_symbol(c)) continue;
            if (x.list.size() != 3) parse_fail(x.line, "comparison takes two terms");
            return Formula::atom(term(x.list[1]), c, term(x.list[2]));
        }
        parse_fail(x.line, "unknown formula operator '" + op + "'");
    }

private:
    ETRSentence& s_;
};

}  // namespace

std::string to_text(const ETRSentence& s) {
    TextStyle st{plain_number};
    std::ostringstream os;
    for (const auto& v : s.variables) {
        os << "(declare-var " << v.name;
        if (v.box) os << " (box " << v.box->lo << ' ' << v.box->hi << ')';
        os << ")\n";
    }
    for (const auto& a : s.assertions) {
        os << "(assert ";
        write_formula(os, s, a, st);
        os << ")\n";
    }
    os << "(check-sat)\n";
    return os.str();
}

ETRSentence parse_sentence(std::string_view text) {
    ETRSentence s;
    SentenceReader reader(s);
    bool done = false;
    for (const auto& form : read_sexprs(text)) {
        if (done) parse_fail(form.line, "content after (check-sat)");
        const std::string& head = head_of(form);
        if (head == "declare-var") {
            if (form.list.size() < 2 || form.list.size() > 3 || form.list[1].is_list)
                parse_fail(form.line, "declare-var takes a name and an optional box");
            const std::string& name = form.list[1].atom;
            if (!is_name_token(name)) parse_fail(form.line, "bad variable name '" + name + "'");
            if (s.find(name)) parse_fail(form.line, "variable '" + name + "' declared twice");
            std::optional<Interval> box;
            if (form.list.size() == 3) {
                const Sx& b = form.list[2];
                if (head_of(b) != "box" || b.list.size() != 3 || b.list[1].is_list || b.list[2].is_list)
                    parse_fail(b.line, "expected (box lo hi)");
                box = Interval{number_of(b.list[1]), number_of(b.list[2])};
                if (box->lo > box->hi) parse_fail(b.line, "empty box");
            }
            s.declare(name, box);
        } else if (head == "assert") {
            if (form.list.size() != 2) parse_fail(form.line, "assert takes one formula");
            s.assertions.push_back(reader.formula(form.list[1]));
        } else if (head == "check-sat") {
            done = true;
        } else {
            parse_fail(form.line, "unknown command '" + head + "'");
        }
    }
    if (!done) fail(Errc::ParseError, "missing (check-sat)");
    return s;
}

std::string to_smtlib2(const ETRSentence& s) {
    TextStyle st{smt_number, true};
    std::ostringstream os;
    os << "(set-logic QF_NRA)\n";
    for (const auto& v : s.variables) os << "(declare-fun " << v.name << " () Real)\n";
    for (const auto& v : s.variables)
        if (v.box)
            os << "(assert (and (<= " << smt_number(v.box->lo) << ' ' << v.name << ") (<= " << v.name << ' '
               << smt_number(v.box->hi) << ")))\n";
    for (const auto& a : s.assertions) {
        os << "(assert ";
        write_formula(os, s, a, st);
        os << ")\n";
    }
    os << "(check-sat)\n(exit)\n";
    return os.str();
}

}  // namespace chbu
