#include <algorithm>
#include <atomic>
#include <deque>
#include <thread>

#include "chbu/error.hpp"
#include "chbu/etr/etr.hpp"

namespace chbu {

namespace {

struct Definition {
    EtrPoly expr;
    const Formula* guard = nullptr;  // branch that must hold for this value
};

struct Step {
    enum class Kind { Fixed, Enumerate, Define };
    Kind kind = Kind::Enumerate;
    std::size_t var = 0;
    std::vector<Rational> values;  // Fixed or Enumerate
    std::vector<Definition> defs;  // Define
    std::vector<const Formula*> checks;  // conjuncts complete after this step
};

void flatten(const Formula& f, std::vector<const Formula*>& out) {
    if (f.kind == Formula::Kind::And) {
        for (const auto& c : f.children) flatten(c, out);
    } else {
        out.push_back(&f);
    }
}

std::optional<EtrPoly> solve_for(const Formula& f, std::size_t v) {
    if (f.kind != Formula::Kind::Atom || f.cmp != Cmp::Eq) return std::nullopt;
    auto iso = (f.lhs - f.rhs).isolate(v);
    if (!iso) return std::nullopt;
    return iso->second * (Rational(-1) / iso->first);
}

// Values of v forced by conjunct f once every other variable is known.
std::optional<std::vector<Definition>> definitions(const Formula& f, std::size_t v) {
    if (auto e = solve_for(f, v)) return std::vector<Definition>{{*e, nullptr}};
    if (f.kind != Formula::Kind::Or || f.children.empty()) return std::nullopt;
    std::vector<Definition> defs;
    for (const auto& branch : f.children) {
        std::optional<EtrPoly> e = solve_for(branch, v);
        if (!e && branch.kind == Formula::Kind::And)
            for (const auto& part : branch.children)
                if ((e = solve_for(part, v))) break;
        if (!e) return std::nullopt;
        defs.push_back({*e, &branch});
    }
    return defs;
}

std::vector<Rational> grid(const Interval& box, const Rational& step) {
    std::vector<Rational> g;
    for (Rational x = box.lo; x <= box.hi; x += step) g.push_back(x);
    if (g.empty() || g.back() != box.hi) g.push_back(box.hi);
    return g;
}

std::vector<Step> make_plan(const ETRSentence& s, const Rational& step, const std::map<std::string, Rational>& fixed,
                            std::vector<const Formula*>& initial_checks) {
    std::vector<const Formula*> cons;
    for (const auto& a : s.assertions) flatten(a, cons);
    const std::size_t nv = s.variables.size();
    std::vector<std::vector<std::size_t>> vars_of(cons.size()), uses(nv);
    std::vector<std::size_t> open(cons.size());
    std::deque<std::size_t> ready;
    for (std::size_t c = 0; c < cons.size(); ++c) {
        vars_of[c] = cons[c]->variables();
        open[c] = vars_of[c].size();
        for (auto v : vars_of[c]) uses[v].push_back(c);
        if (open[c] == 1) ready.push_back(c);
    }
    std::vector<bool> assigned(nv, false);
    std::vector<std::size_t> position(nv);
    std::vector<Step> plan;
    auto assign = [&](Step st) {
        std::size_t v = st.var;
        assigned[v] = true;
        position[v] = plan.size();
        plan.push_back(std::move(st));
        for (auto c : uses[v])
            if (--open[c] == 1) ready.push_back(c);
    };
    for (const auto& [name, value] : fixed) {
        Step st;
        st.kind = Step::Kind::Fixed;
        st.var = s.index(name);
        st.values = {value};
        assign(std::move(st));
    }
    std::size_t next = 0;
    while (plan.size() < nv) {
        while (!ready.empty()) {
            std::size_t c = ready.front();
            ready.pop_front();
            if (open[c] != 1) continue;
            std::size_t v = *std::find_if(vars_of[c].begin(), vars_of[c].end(), [&](auto u) { return !assigned[u]; });
            auto defs = definitions(*cons[c], v);
            if (!defs) continue;
            Step st;
            st.kind = Step::Kind::Define;
            st.var = v;
            st.defs = std::move(*defs);
            assign(std::move(st));
        }
        if (plan.size() == nv) break;
        while (assigned[next]) ++next;
        const auto& box = s.variables[next].box;
        if (!box) fail(Errc::UnboundedVariable, "variable " + s.variables[next].name + " has no box and no definition");
        Step st;
        st.kind = Step::Kind::Enumerate;
        st.var = next;
        st.values = grid(*box, step);
        assign(std::move(st));
    }
    for (std::size_t c = 0; c < cons.size(); ++c) {
        if (vars_of[c].empty()) {
            initial_checks.push_back(cons[c]);
            continue;
        }
        std::size_t at = 0;
        for (auto v : vars_of[c]) at = std::max(at, position[v]);
        plan[at].checks.push_back(cons[c]);
    }
    return plan;
}

struct Shared {
    const ETRSentence& s;
    const std::vector<Step>& plan;
    Rational tol;
    std::size_t max_points;
    std::atomic<std::size_t> points{0};
    std::atomic<bool> budget_hit{false};
    std::atomic<std::size_t> zero_found_by{SIZE_MAX};
};

class Worker {
public:
    Worker(Shared& sh, std::size_t id, std::size_t split, std::size_t from, std::size_t to)
        : sh_(sh), id_(id), split_(split), from_(from), to_(to), values_(sh.s.variables.size()) {}

    void run() { dfs(0, Rational(0)); }

    std::optional<Rational> best;
    std::vector<Rational> witness;

private:
    bool stopping() const { return sh_.budget_hit.load() || sh_.zero_found_by.load() < id_ || (best && best->is_zero()); }

    void dfs(std::size_t i, const Rational& residual) {
        if (i == sh_.plan.size()) {
            if (!best || residual < *best) {
                best = residual;
                witness = values_;
                if (residual.is_zero()) {
                    std::size_t cur = sh_.zero_found_by.load();
                    while (id_ < cur && !sh_.zero_found_by.compare_exchange_weak(cur, id_)) {
                    }
                }
            }
            return;
        }
        const Step& st = sh_.plan[i];
        const auto& box = sh_.s.variables[st.var].box;
        auto attempt = [&](const Rational& v) {
            if (stopping()) return;
            if (sh_.points.fetch_add(1) >= sh_.max_points) {
                sh_.budget_hit = true;
                return;
            }
            if (box && !box->contains(v)) return;
            values_[st.var] = v;
            Rational r = residual;
            for (const Formula* c : st.checks) {
                Truth t = evaluate(*c, values_, sh_.tol);
                if (!t.holds) return;
                r = max(r, t.residual);
            }
            dfs(i + 1, r);
        };
        switch (st.kind) {
            case Step::Kind::Fixed: attempt(st.values[0]); break;
            case Step::Kind::Enumerate: {
                std::size_t lo = 0, hi = st.values.size();
                if (i == split_) {
                    lo = from_;
                    hi = to_;
                }
                for (std::size_t k = lo; k < hi && !stopping(); ++k) attempt(st.values[k]);
                break;
            }
            case Step::Kind::Define: {
                std::vector<Rational> tried;
                for (const auto& d : st.defs) {
                    Rational v = d.expr.eval(values_);
                    if (std::find(tried.begin(), tried.end(), v) != tried.end()) continue;
                    if (d.guard) {
                        values_[st.var] = v;
                        if (!evaluate(*d.guard, values_, sh_.tol).holds) continue;
                    }
                    tried.push_back(v);
                    attempt(v);
                }
                break;
            }
        }
    }

    Shared& sh_;
    std::size_t id_, split_, from_, to_;
    std::vector<Rational> values_;
};

}  // namespace

BruteResult brute_check(const ETRSentence& s, const Rational& step, const std::map<std::string, Rational>& fixed,
                        const BruteOptions& opts) {
    if (step.sign() <= 0) fail(Errc::InvalidArgument, "grid step must be positive");
    std::vector<const Formula*> initial;
    auto plan = make_plan(s, step, fixed, initial);
    BruteResult res;
    std::vector<Rational> empty(s.variables.size());
    Rational r0 = 0;
    for (const Formula* c : initial) {
        Truth t = evaluate(*c, empty, step);
        if (!t.holds) return res;
        r0 = max(r0, t.residual);
    }
    if (plan.empty()) {
        res.sat = true;
        res.residual = r0;
        return res;
    }

    Shared sh{s, plan, step, opts.max_points};
    auto split = std::find_if(plan.begin(), plan.end(), [](const Step& st) { return st.kind == Step::Kind::Enumerate; });
    std::size_t split_at = static_cast<std::size_t>(split - plan.begin());
    std::size_t width = split == plan.end() ? 1 : split->values.size();
    unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    std::size_t parts = std::min<std::size_t>(threads, width);
    std::vector<Worker> workers;
    for (std::size_t w = 0; w < parts; ++w)
        workers.emplace_back(sh, w, split_at, w * width / parts, (w + 1) * width / parts);
    if (parts == 1) {
        workers[0].run();
    } else {
        std::vector<std::thread> pool;
        for (auto& w : workers) pool.emplace_back([&w] { w.run(); });
        for (auto& t : pool) t.join();
    }
    res.points = sh.points.load();
    res.exhausted = !sh.budget_hit.load();
    for (auto& w : workers) {
        if (!w.best) continue;
        Rational r = max(*w.best, r0);
        if (!res.sat || r < res.residual) {
            res.sat = true;
            res.residual = r;
            res.witness = std::move(w.witness);
        }
    }
    return res;
}

}  // namespace chbu
