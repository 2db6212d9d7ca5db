#include <fstream>
#include <sstream>

#include "chbu/error.hpp"
#include "chbu/io/json.hpp"

namespace chbu {

namespace {

template <class T>
std::vector<T> list(const Json& j, const char* key) {
    return j.at(key).get<std::vector<T>>();
}

std::string text_or(const Json& j, const char* key, std::string dflt) {
    return j.contains(key) ? j.at(key).get<std::string>() : std::move(dflt);
}

}  // namespace

void to_json(Json& j, const Rational& r) { j = r.str(); }

void from_json(const Json& j, Rational& r) {
    if (j.is_string()) {
        r = Rational::parse(j.get<std::string>());
    } else if (j.is_number_integer()) {
        r = Rational(j.get<long>());
    } else {
        fail(Errc::ParseError, "expected a rational as \"p/q\", got " + j.dump());
    }
}

void to_json(Json& j, const Interval& v) { j = Json::array({v.lo, v.hi}); }

void from_json(const Json& j, Interval& v) {
    auto e = j.get<std::vector<Rational>>();
    if (e.size() != 2) fail(Errc::ParseError, "interval needs two endpoints");
    v = Interval{e[0], e[1]};
}

void to_json(Json& j, const PiecewisePoly& p) {
    j = Json::object();
    j["breakpoints"] = p.breakpoints();
    Json pieces = Json::array();
    for (const auto& c : p.pieces()) pieces.push_back(Json::array({c[0], c[1], c[2]}));
    j["pieces"] = std::move(pieces);
    j["integral"] = p.integral_form();
}

void from_json(const Json& j, PiecewisePoly& p) {
    std::vector<Coeffs> pieces;
    for (const auto& pj : j.at("pieces")) {
        auto c = pj.get<std::vector<Rational>>();
        if (c.empty() || c.size() > 3) fail(Errc::ParseError, "a piece has one to three coefficients");
        Coeffs k;
        for (std::size_t d = 0; d < c.size(); ++d) k[d] = c[d];
        pieces.push_back(k);
    }
    p = PiecewisePoly(list<Rational>(j, "breakpoints"), std::move(pieces), j.value("integral", false));
}

void to_json(Json& j, const Circuit& c) {
    j = Json::object();
    if (!c.id.empty()) j["id"] = c.id;
    j["node_count"] = c.node_count;
    j["inputs"] = c.inputs;
    j["outputs"] = c.outputs;
    Json gates = Json::array();
    for (const auto& g : c.gates) {
        Json gj{{"kind", std::string(gate_kind_name(g.kind))}, {"in", g.in}, {"out", g.out}};
        if (has_zeta(g.kind)) gj["zeta"] = g.zeta;
        gates.push_back(std::move(gj));
    }
    j["gates"] = std::move(gates);
    j["cyclic"] = c.cyclic;
    if (!c.merged.empty()) j["merged"] = c.merged;
    if (c.role == CircuitRole::Decoder) j["role"] = "decoder";
}

void from_json(const Json& j, Circuit& c) {
    c = Circuit{};
    c.id = text_or(j, "id", "");
    c.inputs = list<NodeId>(j, "inputs");
    c.outputs = list<NodeId>(j, "outputs");
    c.cyclic = j.value("cyclic", false);
    if (j.contains("merged")) c.merged = j.at("merged").get<std::vector<std::pair<NodeId, NodeId>>>();
    std::string role = text_or(j, "role", "instance");
    if (role == "decoder") {
        c.role = CircuitRole::Decoder;
    } else if (role != "instance") {
        fail(Errc::ParseError, "unknown circuit role \"" + role + "\"");
    }
    std::size_t top = 0;
    auto see = [&](NodeId v) { top = std::max(top, v + 1); };
    for (const auto& gj : j.at("gates")) {
        Gate g;
        g.kind = parse_gate_kind(gj.at("kind").get<std::string>());
        g.in = gj.at("in").get<std::vector<NodeId>>();
        g.out = gj.at("out").get<NodeId>();
        if (has_zeta(g.kind)) {
            if (!gj.contains("zeta")) fail(Errc::ParseError, std::string(gate_kind_name(g.kind)) + " gate lacks zeta");
            g.zeta = gj.at("zeta").get<Rational>();
        }
        for (NodeId v : g.in) see(v);
        see(g.out);
        c.gates.push_back(std::move(g));
    }
    for (NodeId v : c.inputs) see(v);
    for (NodeId v : c.outputs) see(v);
    c.node_count = j.value("node_count", top);
    if (c.node_count < top) fail(Errc::ParseError, "node_count is smaller than the largest node id");
}

void to_json(Json& j, const CHInstance& inst) {
    j = Json::object();
    j["id"] = inst.id;
    j["domain_length"] = inst.domain_length;
    Json agents = Json::array();
    for (const auto& a : inst.agents) {
        Json aj{{"name", a.name}};
        if (const auto* p = std::get_if<PiecewisePoly>(&a.valuation)) {
            aj["piecewise"] = *p;
        } else {
            aj["circuit"] = std::get<Circuit>(a.valuation);
        }
        agents.push_back(std::move(aj));
    }
    j["agents"] = std::move(agents);
}

void from_json(const Json& j, CHInstance& inst) {
    inst = CHInstance{};
    inst.id = text_or(j, "id", "");
    inst.domain_length = j.value("domain_length", Rational(1));
    for (const auto& aj : j.at("agents")) {
        Agent a;
        a.name = text_or(aj, "name", "");
        if (aj.contains("piecewise") == aj.contains("circuit"))
            fail(Errc::ParseError, "agent \"" + a.name + "\" needs exactly one of piecewise, circuit");
        if (aj.contains("piecewise")) {
            a.valuation = aj.at("piecewise").get<PiecewisePoly>();
        } else {
            a.valuation = aj.at("circuit").get<Circuit>();
        }
        inst.agents.push_back(std::move(a));
    }
}

void to_json(Json& j, const CHSolution& sol) {
    j = Json::object();
    if (!sol.id.empty()) j["id"] = sol.id;
    j["cuts"] = sol.cuts;
    j["leftmost_sign"] = std::string(1, sign_char(sol.leftmost));
}

void from_json(const Json& j, CHSolution& sol) {
    sol.id = text_or(j, "id", "");
    sol.cuts = list<Rational>(j, "cuts");
    sol.leftmost = parse_sign(text_or(j, "leftmost_sign", "-"));
}

void to_json(Json& j, const EmbeddedInstance& e) {
    to_json(j, e.instance);
    j["source_circuit"] = e.source;
    Json map = Json::array();
    for (std::size_t v = 0; v < e.node_count(); ++v)
        map.push_back(Json::array({e.agent_of(v, GadgetAgent::Ad), e.agent_of(v, GadgetAgent::Mid),
                                   e.agent_of(v, GadgetAgent::Cen), e.agent_of(v, GadgetAgent::Ex)}));
    j["node_map"] = std::move(map);
    j["finis"] = e.finis_present;
}

void from_json(const Json& j, EmbeddedInstance& e) {
    auto stored = j.get<CHInstance>();
    auto source = j.at("source_circuit").get<Circuit>();
    e = build_gadgets(source);
    if (j.value("finis", false)) e = add_finis(e);
    Json rebuilt = e.instance;
    if (rebuilt.at("agents") != j.at("agents") || stored.domain_length != e.instance.domain_length)
        fail(Errc::ParseError, "embedded instance does not match the gadgets of its source circuit");
    e.instance.id = stored.id;
}

void to_json(Json& j, const BUInstance& bu) {
    j = Json{{"dimension", bu.dimension}, {"linear", bu.linear}, {"map", bu.map}};
}

void from_json(const Json& j, BUInstance& bu) {
    bu.map = j.at("map").get<Circuit>();
    bu.dimension = j.value("dimension", bu.map.outputs.size());
    bu.linear = j.value("linear", false);
}

void to_json(Json& j, const ApproxSolution& s) { j = Json{{"x", s.x}, {"residual", s.residual}}; }

void from_json(const Json& j, ApproxSolution& s) {
    s.x = list<Rational>(j, "x");
    s.residual = j.value("residual", Rational(0));
}

void to_json(Json& j, const Polynomial& p) {
    Json terms = Json::array();
    for (const auto& t : p.terms) {
        Json c = t.coef.fits_slong_p() ? Json(t.coef.get_si()) : Json(t.coef.get_str());
        terms.push_back(Json{{"coef", std::move(c)}, {"exps", t.exps}});
    }
    j = Json{{"vars", p.vars}, {"terms", std::move(terms)}};
}

void from_json(const Json& j, Polynomial& p) {
    p = Polynomial{j.at("vars").get<std::size_t>(), {}};
    for (const auto& tj : j.at("terms")) {
        PolyTerm t;
        const Json& c = tj.at("coef");
        if (c.is_number_integer()) {
            t.coef = c.get<long>();
        } else if (c.is_string() && Rational::parse(c.get<std::string>()).is_integer()) {
            t.coef = Rational::parse(c.get<std::string>()).num();
        } else {
            fail(Errc::ParseError, "polynomial coefficients are integers, got " + c.dump());
        }
        t.exps = tj.at("exps").get<std::vector<unsigned>>();
        p.terms.push_back(std::move(t));
    }
    p = canonical(p);
}

void to_json(Json& j, const GameInstance& g) {
    j = Json{{"id", g.id}, {"strategies", g.strategies}, {"payoffs", g.payoffs}};
}

void from_json(const Json& j, GameInstance& g) {
    g.id = text_or(j, "id", "");
    g.strategies = list<std::size_t>(j, "strategies");
    g.payoffs = j.at("payoffs").get<std::vector<std::vector<Rational>>>();
}

Json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::ParseError, what + ": " + e.what());
    }
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::ParseError, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str(), path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path);
    if (!out) fail(Errc::InvalidArgument, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace chbu
