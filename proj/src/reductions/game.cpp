#include <algorithm>
#include <map>

#include "chbu/circuit/ranges.hpp"
#include "chbu/error.hpp"
#include "chbu/reductions/reductions.hpp"

namespace chbu {

namespace {

// Strategy of every player in pure profile `index`.
std::vector<std::size_t> unrank(const GameInstance& g, std::size_t index) {
    std::vector<std::size_t> s(g.players());
    for (std::size_t k = g.players(); k-- > 0;) {
        s[k] = index % g.strategies[k];
        index /= g.strategies[k];
    }
    return s;
}

void check_profile(const GameInstance& g, std::span<const Rational> x) {
    if (x.size() != g.total_strategies())
        fail(Errc::ArityMismatch, "profile has " + std::to_string(x.size()) + " entries, game has " +
                                      std::to_string(g.total_strategies()) + " strategies");
}

std::vector<Rational> sorted_desc(std::vector<Rational> v) {
    std::sort(v.begin(), v.end(), [](const Rational& a, const Rational& b) { return a > b; });
    return v;
}

class GameBuilder {
public:
    explicit GameBuilder(const GameInstance& g) : g_(g) {
        for (std::size_t k = 0; k < g.total_strategies(); ++k) x_.push_back(b_.input());
    }

    NodeId x(std::size_t i, std::size_t j) const { return x_[g_.offset(i) + j]; }

    NodeId constant(const Rational& c) {
        auto it = consts_.find(c);
        if (it != consts_.end()) return it->second;
        return consts_.emplace(c, b_.constant(c)).first->second;
    }

    // c * a through a MUL gate against a shared constant node.
    NodeId scale(const Rational& c, NodeId a) { return b_.mul(constant(c), a); }

    // v_ij as a balanced sum of payoff-weighted products, absent when every
    // payoff is zero.
    std::optional<NodeId> payoff(std::size_t i, std::size_t j) {
        std::vector<NodeId> terms;
        for (std::size_t prof = 0; prof < g_.profile_count(); ++prof) {
            auto s = unrank(g_, prof);
            if (s[i] != j) continue;
            const Rational& u = g_.payoffs[i][prof];
            if (u.is_zero()) continue;
            std::optional<NodeId> prod;
            std::vector<NodeId> key;
            for (std::size_t k = 0; k < g_.players(); ++k) {
                if (k == i) continue;
                key.push_back(x(k, s[k]));
                auto it = products_.find(key);
                if (it != products_.end()) {
                    prod = it->second;
                    continue;
                }
                prod = prod ? b_.mul(*prod, key.back()) : key.back();
                products_.emplace(key, *prod);
            }
            terms.push_back(prod ? scale(u, *prod) : constant(u));
        }
        if (terms.empty()) return std::nullopt;
        while (terms.size() > 1) {
            std::vector<NodeId> next;
            for (std::size_t k = 0; k + 1 < terms.size(); k += 2) next.push_back(b_.add(terms[k], terms[k + 1]));
            if (terms.size() % 2) next.push_back(terms.back());
            terms = std::move(next);
        }
        return terms[0];
    }

    CircuitBuilder& b() { return b_; }
    Circuit build(const std::vector<NodeId>& outputs, std::string id) const { return b_.build(outputs, std::move(id)); }

private:
    const GameInstance& g_;
    CircuitBuilder b_;
    std::vector<NodeId> x_;
    std::map<Rational, NodeId> consts_;
    std::map<std::vector<NodeId>, NodeId> products_;
};

Circuit build_unscaled(const GameInstance& g) {
    GameBuilder gb(g);
    auto& b = gb.b();
    std::vector<NodeId> outs;
    for (std::size_t i = 0; i < g.players(); ++i) {
        const std::size_t n = g.strategies[i];
        std::vector<NodeId> y;
        for (std::size_t j = 0; j < n; ++j) {
            auto v = gb.payoff(i, j);
            y.push_back(v ? b.add(gb.x(i, j), *v) : gb.x(i, j));
        }
        auto z = b.splice(sorting_network(n), y);
        std::optional<NodeId> sum, t;
        for (std::size_t l = 1; l <= n; ++l) {
            sum = sum ? b.add(*sum, z[l - 1]) : z[0];
            NodeId tl = b.mul_const(Rational(1, static_cast<long>(l)), b.sub(*sum, gb.constant(1)));
            t = t ? b.max(*t, tl) : tl;
        }
        for (std::size_t j = 0; j < n; ++j) outs.push_back(b.max(b.sub(y[j], *t), gb.constant(0)));
    }
    return gb.build(outs, g.id + "/C");
}

// Every value is kept in [0, 1]: p = (x + v)/2, a running mean B_l of the
// sorted p's divided by 2, t''_l = B_l + 1/2 - 1/(4l), t' = 2 (t'' - 1/2)
// and x' = 2 (p - t').
Circuit build_scaled(const GameInstance& g) {
    GameBuilder gb(g);
    auto& b = gb.b();
    const Rational half(1, 2);
    std::vector<NodeId> outs;
    for (std::size_t i = 0; i < g.players(); ++i) {
        const std::size_t n = g.strategies[i];
        std::vector<NodeId> p;
        for (std::size_t j = 0; j < n; ++j) {
            NodeId hx = gb.scale(half, gb.x(i, j));
            auto v = gb.payoff(i, j);
            p.push_back(v ? b.add(hx, gb.scale(half, *v)) : hx);
        }
        auto q = b.splice(sorting_network(n), p);
        std::optional<NodeId> mean, t2;
        for (std::size_t l = 1; l <= n; ++l) {
            const long ll = static_cast<long>(l);
            NodeId part = gb.scale(Rational(1, 2 * ll), q[l - 1]);
            mean = mean ? b.add(gb.scale(Rational(ll - 1, ll), *mean), part) : part;
            NodeId tl = b.sub01(b.add(*mean, gb.constant(half)), gb.constant(Rational(1, 4 * ll)));
            t2 = t2 ? b.max(*t2, tl) : tl;
        }
        NodeId t1 = b.double01(b.sub01(*t2, gb.constant(half)));
        for (std::size_t j = 0; j < n; ++j) outs.push_back(b.double01(b.sub01(p[j], t1)));
    }
    return gb.build(outs, g.id + "/C'");
}

}  // namespace

std::size_t GameInstance::profile_count() const {
    std::size_t k = 1;
    for (auto n : strategies) k *= n;
    return k;
}

std::size_t GameInstance::total_strategies() const {
    std::size_t k = 0;
    for (auto n : strategies) k += n;
    return k;
}

std::size_t GameInstance::offset(std::size_t player) const {
    std::size_t k = 0;
    for (std::size_t i = 0; i < player; ++i) k += strategies[i];
    return k;
}

void check_game(const GameInstance& g) {
    if (g.players() == 0) fail(Errc::NormalizationFailure, "game has no players");
    for (std::size_t i = 0; i < g.players(); ++i)
        if (g.strategies[i] == 0) fail(Errc::NormalizationFailure, "player " + std::to_string(i) + " has no strategies");
    if (g.payoffs.size() != g.players())
        fail(Errc::NormalizationFailure, "expected one payoff tensor per player, got " + std::to_string(g.payoffs.size()));
    for (std::size_t i = 0; i < g.players(); ++i)
        if (g.payoffs[i].size() != g.profile_count())
            fail(Errc::NormalizationFailure, "payoff tensor of player " + std::to_string(i) + " has " +
                                                 std::to_string(g.payoffs[i].size()) + " entries, expected " +
                                                 std::to_string(g.profile_count()));
}

GameInstance normalize_payoffs(const GameInstance& g) {
    check_game(g);
    GameInstance out = g;
    const Rational total(static_cast<long>(g.total_strategies()));
    for (std::size_t i = 0; i < g.players(); ++i) {
        auto& u = out.payoffs[i];
        auto [lo, hi] = std::minmax_element(u.begin(), u.end());
        Rational low = *lo, span = *hi - *lo;
        const Rational others(static_cast<long>(g.profile_count() / g.strategies[i]));
        for (auto& e : u) e = span.is_zero() ? Rational(0) : (e - low) / (span * total * others);
    }
    return out;
}

std::vector<Rational> expected_payoffs(const GameInstance& g, std::span<const Rational> x) {
    check_game(g);
    check_profile(g, x);
    std::vector<Rational> v(g.total_strategies());
    for (std::size_t prof = 0; prof < g.profile_count(); ++prof) {
        auto s = unrank(g, prof);
        for (std::size_t i = 0; i < g.players(); ++i) {
            Rational w = g.payoffs[i][prof];
            for (std::size_t k = 0; k < g.players() && !w.is_zero(); ++k)
                if (k != i) w *= x[g.offset(k) + s[k]];
            v[g.offset(i) + s[i]] += w;
        }
    }
    return v;
}

Rational regret(const GameInstance& g, std::span<const Rational> x) {
    auto v = expected_payoffs(g, x);
    Rational worst = 0;
    for (std::size_t i = 0; i < g.players(); ++i) {
        const std::size_t o = g.offset(i);
        Rational best = v[o], got = 0;
        for (std::size_t j = 0; j < g.strategies[i]; ++j) {
            best = max(best, v[o + j]);
            got += x[o + j] * v[o + j];
        }
        worst = max(worst, best - got);
    }
    return worst;
}

std::vector<Rational> nash_map(const GameInstance& g, std::span<const Rational> x) {
    auto v = expected_payoffs(g, x);
    std::vector<Rational> out(x.size());
    for (std::size_t i = 0; i < g.players(); ++i) {
        const std::size_t o = g.offset(i), n = g.strategies[i];
        std::vector<Rational> y(n);
        for (std::size_t j = 0; j < n; ++j) y[j] = x[o + j] + v[o + j];
        auto z = sorted_desc(y);
        Rational sum = 0, t;
        for (std::size_t l = 1; l <= n; ++l) {
            sum += z[l - 1];
            Rational tl = (sum - 1) / Rational(static_cast<long>(l));
            t = l == 1 ? tl : max(t, tl);
        }
        for (std::size_t j = 0; j < n; ++j) out[o + j] = max(y[j] - t, Rational(0));
    }
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> sorting_comparators(std::size_t width) {
    std::size_t n = 1;
    while (n < width) n <<= 1;
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t p = 1; p < n; p <<= 1)
        for (std::size_t k = p; k >= 1; k >>= 1)
            for (std::size_t j = k % p; j + k < n; j += 2 * k)
                for (std::size_t i = 0; i < std::min(k, n - j - k); ++i) {
                    std::size_t a = i + j, b = i + j + k;
                    // Padding positions hold -infinity and are already in place.
                    if (a / (2 * p) == b / (2 * p) && b < width) out.emplace_back(a, b);
                }
    return out;
}

Circuit sorting_network(std::size_t width) {
    if (width == 0) fail(Errc::InvalidArgument, "sorting network needs width >= 1");
    CircuitBuilder b;
    std::vector<NodeId> wire;
    for (std::size_t k = 0; k < width; ++k) wire.push_back(b.input());
    for (auto [i, j] : sorting_comparators(width)) {
        NodeId hi = b.max(wire[i], wire[j]);
        NodeId lo = b.min(wire[i], wire[j]);
        wire[i] = hi;
        wire[j] = lo;
    }
    return b.build(wire, "sort" + std::to_string(width));
}

Circuit close_cycle(const Circuit& c) {
    if (c.cyclic) fail(Errc::CyclicCircuit, "circuit is already closed");
    if (c.inputs.size() != c.outputs.size()) fail(Errc::ArityMismatch, "closing needs as many outputs as inputs");
    std::vector<std::optional<NodeId>> target(c.node_count);
    for (std::size_t k = 0; k < c.inputs.size(); ++k) {
        if (std::find(c.inputs.begin(), c.inputs.end(), c.outputs[k]) != c.inputs.end())
            fail(Errc::InvalidArgument, "output " + std::to_string(k) + " is an input node");
        target[c.inputs[k]] = c.outputs[k];
    }
    std::vector<NodeId> compact(c.node_count);
    std::size_t next = 0;
    for (NodeId v = 0; v < c.node_count; ++v)
        if (!target[v]) compact[v] = next++;
    auto id = [&](NodeId v) { return compact[target[v] ? *target[v] : v]; };
    Circuit out;
    out.id = c.id + "/closed";
    out.node_count = next;
    out.cyclic = true;
    out.role = c.role;
    for (const auto& g : c.gates) {
        Gate h = g;
        for (auto& in : h.in) in = id(in);
        h.out = id(h.out);
        out.gates.push_back(std::move(h));
    }
    for (NodeId in : c.inputs) out.merged.emplace_back(in, id(in));
    return out;
}

GameCircuits game_to_circuit(const GameInstance& g) {
    GameCircuits gc;
    gc.normalized = normalize_payoffs(g);
    if (gc.normalized.id.empty()) gc.normalized.id = "game";
    gc.unscaled = build_unscaled(gc.normalized);
    gc.scaled = build_scaled(gc.normalized);
    RangeOptions trust;
    trust.trust_special_gates = true;
    auto ra = certified_ranges(gc.scaled, unit_box(gc.scaled.inputs.size()), trust);
    for (NodeId v = 0; v < gc.scaled.node_count; ++v)
        if (!ra.ranges[v].within(unit_interval()))
            fail(Errc::RangeUnprovable, "node " + std::to_string(v) + " of the scaled game circuit leaves [0, 1]");
    gc.ranges = std::move(ra.ranges);
    gc.closed = close_cycle(gc.scaled);
    return gc;
}

std::optional<std::vector<Rational>> closed_assignment(const GameCircuits& gc, std::span<const Rational> x) {
    auto r = evaluate(gc.scaled, x);
    if (r.outputs != std::vector<Rational>(x.begin(), x.end())) return std::nullopt;
    std::vector<Rational> values(gc.closed.node_count);
    std::vector<bool> is_input(gc.scaled.node_count, false);
    for (NodeId in : gc.scaled.inputs) is_input[in] = true;
    std::size_t next = 0;
    for (NodeId v = 0; v < gc.scaled.node_count; ++v)
        if (!is_input[v]) values[next++] = r.values[v];
    return values;
}

}  // namespace chbu
