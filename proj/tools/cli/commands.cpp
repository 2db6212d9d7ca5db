#include "cli/commands.hpp"

#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>

#include "chbu/bu/borsuk_ulam.hpp"
#include "chbu/circuit/lowering.hpp"
#include "chbu/etr/etr.hpp"
#include "chbu/io/json.hpp"
#include "chbu/lp/rounding.hpp"
#include "chbu/reductions/reductions.hpp"

namespace chbu::cli {

int exit_code_for(Errc code) {
    switch (code) {
        case Errc::ParseError:
        case Errc::InvalidArgument:
        case Errc::ArityMismatch:
        case Errc::CyclicCircuit:
        case Errc::OutOfDomain:
        case Errc::NormalizationFailure: return ParseFailure;
        case Errc::ValuesDoNotSatisfyCircuit:
        case Errc::SolutionDoesNotSatisfyAgents:
        case Errc::CutOutsideExpectedInterval:
        case Errc::NotOnSphere:
        case Errc::NotABUSolution:
        case Errc::BadSolutionShape: return VerificationFailure;
        default: return Refused;
    }
}

Json Report::to_json() const {
    Json j;
    j["command"] = command;
    j["status"] = status;
    j["exit_code"] = exit_code;
    j["provenance"] = provenance;
    j["details"] = details;
    return j;
}

std::vector<Rational> parse_rational_list(const std::string& text) {
    std::vector<Rational> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(Rational::parse(item));
    return out;
}

namespace {

template <class T>
T load(const std::string& path, const char* what) {
    return parse_json<T>(read_json_file(path), std::string(what) + " " + path);
}

Json named_values(const ETRSentence& s, const std::vector<Rational>& values) {
    Json j = Json::object();
    for (std::size_t v = 0; v < s.variables.size(); ++v) j[s.variables[v].name] = values[v];
    return j;
}

void emit(Report& r, const std::string& out, const Json& artifact) {
    if (out.empty()) {
        r.details["artifact"] = artifact;
    } else {
        write_json_file(out, artifact);
        r.details["written"] = out;
    }
}

void emit_text(Report& r, const std::string& out, const std::string& text) {
    if (out.empty()) {
        r.details["artifact"] = text;
        return;
    }
    std::ofstream f(out);
    if (!f) fail(Errc::InvalidArgument, "cannot write " + out);
    f << text;
    r.details["written"] = out;
}

Json verdict_json(const Verdict& v) {
    Json agents = Json::array();
    for (const auto& a : v.agents) agents.push_back(Json{{"plus", a.plus}, {"minus", a.minus}, {"satisfied", a.satisfied}});
    Json j{{"all_satisfied", v.all_satisfied}, {"max_imbalance", v.max_imbalance}, {"agents", std::move(agents)}};
    if (v.shape_error) j["shape_error"] = *v.shape_error;
    return j;
}

// Which artifact a JSON document holds.
std::string kind_of(const Json& j) {
    if (j.contains("gates")) return "circuit";
    if (j.contains("source_circuit")) return "embedded";
    if (j.contains("agents")) return "instance";
    if (j.contains("map")) return "bu";
    if (j.contains("terms")) return "polynomial";
    if (j.contains("strategies")) return "game";
    if (j.contains("cuts")) return "solution";
    if (j.contains("x")) return "approx";
    fail(Errc::ParseError, "unrecognised artifact");
}

// CH instance from either a plain or an embedded instance file.
CHInstance load_instance(const std::string& path, std::optional<EmbeddedInstance>* embedded = nullptr) {
    Json j = read_json_file(path);
    if (j.contains("source_circuit")) {
        auto e = parse_json<EmbeddedInstance>(j, "embedded instance " + path);
        if (embedded) *embedded = e;
        return e.instance;
    }
    return parse_json<CHInstance>(j, "instance " + path);
}

// ---------------------------------------------------------------- validate

void cmd_validate(Report& r, const std::string& in, bool special) {
    Json j = read_json_file(in);
    std::string kind = kind_of(j);
    r.details["kind"] = kind;
    std::vector<std::string> problems;
    if (kind == "circuit") {
        auto c = parse_json<Circuit>(j, "circuit");
        r.trace("circuit", c.id);
        ValidateOptions vo;
        vo.special = special;
        for (const auto& v : validate(c, vo))
            problems.push_back(std::string(violation_name(v.kind)) +
                               (v.gate ? " at gate " + std::to_string(*v.gate) : std::string()) + ": " + v.detail);
        r.details["nodes"] = c.node_count;
        r.details["gates"] = c.gates.size();
        r.details["cyclic"] = c.cyclic;
        if (problems.empty() && !c.cyclic) {
            r.details["linear"] = is_linear(c);
            if (special) {
                auto cert = certify_special(c);
                r.details["certified_ranges"] = cert.ranges;
            }
        }
    } else if (kind == "instance") {
        auto inst = parse_json<CHInstance>(j, "instance");
        r.trace("instance", inst.id);
        problems = validate_instance(inst);
        r.details["agents"] = inst.size();
    } else if (kind == "embedded") {
        auto e = parse_json<EmbeddedInstance>(j, "embedded instance");
        r.trace("circuit", e.source.id);
        r.trace("instance", e.instance.id);
        r.details["agents"] = e.instance.size();
        r.details["finis"] = e.finis_present;
    } else if (kind == "bu") {
        auto bu = parse_json<BUInstance>(j, "bu instance");
        r.trace("bu", bu.map.id);
        for (const auto& v : validate(bu.map)) problems.push_back(std::string(violation_name(v.kind)) + ": " + v.detail);
        if (bu.map.inputs.size() != bu.dimension + 1 || bu.map.outputs.size() != bu.dimension)
            problems.push_back("map must have dimension + 1 inputs and dimension outputs");
        if (bu.linear && problems.empty() && !is_linear(bu.map)) problems.push_back("flagged linear but is not");
    } else if (kind == "polynomial") {
        auto p = parse_json<Polynomial>(j, "polynomial");
        r.details["vars"] = p.vars;
        r.details["terms"] = p.terms.size();
        r.details["degree"] = p.degree();
    } else if (kind == "game") {
        auto g = parse_json<GameInstance>(j, "game");
        r.trace("game", g.id);
        check_game(g);
        r.details["players"] = g.players();
    } else {
        problems.push_back("artifact kind " + kind + " cannot be validated on its own");
    }
    r.details["problems"] = problems;
    if (!problems.empty()) {
        r.failed(ParseFailure, std::to_string(problems.size()) + " problem(s), first: " + problems[0]);
    } else {
        r.note(kind + " is valid");
    }
}

// ------------------------------------------------------------------- lower

void cmd_lower(Report& r, const std::string& in, const std::string& out, bool trust, std::size_t samples,
               std::uint64_t seed) {
    auto c = load<Circuit>(in, "circuit");
    r.trace("circuit", c.id);
    LoweringOptions lo;
    lo.ranges.trust_special_gates = trust;
    auto res = lower_to_special(c, lo);
    r.trace("circuit", res.circuit.id);
    auto problems = check_certificate(res.circuit, res.certificate);
    r.details["source_nodes"] = res.certificate.source_nodes;
    r.details["lowered_nodes"] = res.certificate.lowered_nodes;
    r.details["add_proofs"] = res.certificate.add_proofs.size();
    r.details["trusted_nodes"] = res.certificate.trusted_nodes;
    r.details["certificate_problems"] = problems;

    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<long> k(0, 64);
    CompiledCircuit src(c), low(res.circuit);
    std::size_t mismatches = 0, escapes = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        std::vector<Rational> x;
        for (std::size_t i = 0; i < c.inputs.size(); ++i) x.push_back(Rational(k(gen), 64));
        auto v = low.run(x);
        if (src.outputs(x) != low.outputs(x)) ++mismatches;
        for (const auto& z : v)
            if (!unit_interval().contains(z)) ++escapes;
    }
    r.details["samples"] = Json{{"count", samples}, {"seed", seed}, {"output_mismatches", mismatches},
                                {"values_outside_unit", escapes}};
    emit(r, out, res.circuit);
    if (!problems.empty() || mismatches || (escapes && !trust)) {
        r.failed(VerificationFailure, "lowered circuit failed its own checks");
    } else {
        r.note("lowered " + std::to_string(c.node_count) + " nodes to " + std::to_string(res.circuit.node_count));
    }
}

// ------------------------------------------------------------------- embed

void cmd_embed(Report& r, const std::string& in, const std::string& out, bool finis, bool lower) {
    auto c = load<Circuit>(in, "circuit");
    r.trace("circuit", c.id);
    if (lower) {
        c = lower_to_special(c).circuit;
        r.trace("circuit", c.id);
    }
    auto e = build_gadgets(c);
    if (finis) e = add_finis(e);
    r.trace("instance", e.instance.id);
    r.details["nodes"] = e.node_count();
    r.details["agents"] = e.instance.size();
    r.details["cut_budget"] = e.instance.size() - (finis ? 1 : 0);
    r.details["domain_length"] = e.instance.domain_length;
    emit(r, out, e);
    r.note("embedded " + std::to_string(e.node_count()) + " node(s) as " + std::to_string(e.instance.size()) +
           " agents");
}

// ------------------------------------------------------------ encode/decode

void cmd_encode(Report& r, const std::string& in, const std::string& values, const std::string& inputs,
                const std::string& out) {
    std::optional<EmbeddedInstance> e;
    load_instance(in, &e);
    if (!e) fail(Errc::ParseError, "encode needs an embedded instance");
    r.trace("circuit", e->source.id);
    r.trace("instance", e->instance.id);
    if (values.empty() == inputs.empty()) fail(Errc::InvalidArgument, "give exactly one of --values, --inputs");
    std::vector<Rational> z = values.empty() ? evaluate(e->source, parse_rational_list(inputs)).values
                                             : parse_rational_list(values);
    auto sol = encode_values_to_cuts(*e, z);
    r.trace("solution", sol.id);
    auto v = verify(e->instance, sol, 0);
    r.details["cuts"] = sol.cuts.size();
    r.details["verdict"] = Json{{"all_satisfied", v.all_satisfied}, {"max_imbalance", v.max_imbalance}};
    emit(r, out, sol);
    if (!v.all_satisfied) {
        r.failed(VerificationFailure, "encoded cuts do not balance every agent");
    } else {
        r.note("encoded " + std::to_string(z.size()) + " values as " + std::to_string(sol.cuts.size()) + " cuts");
    }
}

void cmd_decode(Report& r, const std::string& in, const std::string& sol_path, const std::string& out) {
    std::optional<EmbeddedInstance> e;
    load_instance(in, &e);
    if (!e) fail(Errc::ParseError, "decode needs an embedded instance");
    auto sol = load<CHSolution>(sol_path, "solution");
    r.trace("circuit", e->source.id);
    r.trace("instance", e->instance.id);
    r.trace("solution", sol.id);
    auto z = decode_cuts_to_values(*e, sol);
    Json art{{"values", z}};
    std::vector<Rational> ins, outs;
    for (auto v : e->source.inputs) ins.push_back(z[v]);
    for (auto v : e->source.outputs) outs.push_back(z[v]);
    art["inputs"] = ins;
    art["outputs"] = outs;
    emit(r, out, art);
    r.note("decoded " + std::to_string(z.size()) + " node values");
}

// --------------------------------------------------------------- BU side

void cmd_ch2bu(Report& r, const std::string& in, const std::string& out) {
    auto inst = load_instance(in);
    r.trace("instance", inst.id);
    auto bu = ch_to_bu(with_circuit_valuations(inst));
    r.trace("bu", bu.map.id);
    r.details["dimension"] = bu.dimension;
    r.details["linear"] = bu.linear;
    r.details["lipschitz_bound"] = lipschitz_bound(bu.map);
    emit(r, out, bu);
    r.note("BU instance of dimension " + std::to_string(bu.dimension));
}

void cmd_solve_bu(Report& r, const std::string& in, const std::string& eps_text, const std::string& lambda_text,
                  std::size_t max_dim, unsigned threads, const std::string& out) {
    auto bu = load<BUInstance>(in, "bu instance");
    r.trace("bu", bu.map.id);
    Rational eps = Rational::parse(eps_text);
    Rational lambda = lambda_text.empty() ? lipschitz_bound(bu.map) : Rational::parse(lambda_text);
    TuckerOptions opts;
    opts.max_dimension = max_dim;
    opts.threads = threads;
    auto res = tucker_solve(bu, eps, lambda, opts);
    r.details["epsilon"] = eps;
    r.details["lambda"] = lambda;
    r.details["mesh"] = res.stats.mesh;
    r.details["vertices"] = res.stats.vertices;
    if (const auto* w = std::get_if<LipschitzWitness>(&res.outcome)) {
        r.details["lipschitz_witness"] = Json{{"x", w->x}, {"y", w->y}, {"ratio", w->ratio}};
        r.failed(VerificationFailure, "lambda is not a Lipschitz constant; witness ratio " + w->ratio.str());
        return;
    }
    auto sol = std::get<ApproxSolution>(res.outcome);
    r.trace("solution", bu.map.id + "/tucker");
    r.details["residual"] = sol.residual;
    emit(r, out, sol);
    if (sol.residual > eps) {
        r.failed(VerificationFailure, "residual " + sol.residual.str() + " exceeds epsilon");
    } else {
        r.note("residual " + sol.residual.str() + " <= " + eps.str());
    }
}

void cmd_round(Report& r, const std::string& in, const std::string& sol_path, const std::string& inst_path,
               const std::string& out, const std::string& ch_out) {
    auto bu = load<BUInstance>(in, "bu instance");
    auto approx = load<ApproxSolution>(sol_path, "approximate solution");
    r.trace("bu", bu.map.id);
    r.trace("solution", bu.map.id + "/tucker");
    auto res = round_to_exact(bu, approx.x);
    auto v = bu_verify(bu, res.x, 0);
    r.trace("solution", bu.map.id + "/exact");
    r.details["cell_constraints"] = res.cell_constraints;
    r.details["pivots"] = res.pivots;
    r.details["bu_verify"] = Json{{"on_sphere", v.on_sphere}, {"residual", v.residual}, {"passed", v.passed}};
    emit(r, out, ApproxSolution{res.x, v.residual});
    if (!v.passed) {
        r.failed(VerificationFailure, "rounded point is not an exact BU solution");
        return;
    }
    if (!inst_path.empty()) {
        auto inst = load_instance(inst_path);
        auto sol = decode_bu_solution(res.x, inst);
        auto cv = verify(inst, sol, 0);
        r.trace("solution", sol.id);
        r.details["ch_verdict"] = Json{{"all_satisfied", cv.all_satisfied}, {"max_imbalance", cv.max_imbalance}};
        if (!ch_out.empty()) write_json_file(ch_out, Json(sol));
        if (!cv.all_satisfied) {
            r.failed(VerificationFailure, "decoded cuts do not satisfy every agent");
            return;
        }
    }
    r.note("exact BU solution found");
}

// ------------------------------------------------------------------ verify

void cmd_verify(Report& r, const std::string& inst_path, const std::string& bu_path, const std::string& sol_path,
                const std::string& tol_text, long max_cuts) {
    Rational tol = Rational::parse(tol_text);
    r.details["tol"] = tol;
    if (inst_path.empty() == bu_path.empty()) fail(Errc::InvalidArgument, "give exactly one of --instance, --bu");
    if (!bu_path.empty()) {
        auto bu = load<BUInstance>(bu_path, "bu instance");
        auto sol = load<ApproxSolution>(sol_path, "solution");
        r.trace("bu", bu.map.id);
        auto v = bu_verify(bu, sol.x, tol);
        r.details["bu_verify"] = Json{{"on_sphere", v.on_sphere}, {"residual", v.residual}, {"passed", v.passed}};
        if (!v.passed) {
            r.failed(VerificationFailure, "BU residual " + v.residual.str() + " exceeds tolerance");
        } else {
            r.note("BU solution verified, residual " + v.residual.str());
        }
        return;
    }
    std::optional<EmbeddedInstance> e;
    auto inst = load_instance(inst_path, &e);
    auto sol = load<CHSolution>(sol_path, "solution");
    if (e) r.trace("circuit", e->source.id);
    r.trace("instance", inst.id);
    r.trace("solution", sol.id);
    auto v = verify(inst, sol, tol);
    r.details["verdict"] = verdict_json(v);
    r.details["cuts"] = sol.cuts.size();
    const long budget = max_cuts >= 0 ? max_cuts : static_cast<long>(inst.size());
    r.details["cut_budget"] = budget;
    if (!v.all_satisfied) {
        r.failed(VerificationFailure, "max imbalance " + v.max_imbalance.str() + " exceeds tolerance");
    } else if (static_cast<long>(sol.cuts.size()) > budget) {
        r.failed(VerificationFailure, "solution uses more than " + std::to_string(budget) + " cuts");
    } else {
        r.note("all " + std::to_string(inst.size()) + " agents satisfied with " + std::to_string(sol.cuts.size()) +
               " cuts");
    }
}

// --------------------------------------------------------------------- ETR

void cmd_emit_etr(Report& r, const std::string& inst_path, const std::string& bu_path, const std::string& circ_path,
                  long cuts, const std::string& format, const std::string& sol_path, const std::string& witness_out,
                  const std::string& out) {
    int given = !inst_path.empty() + !bu_path.empty() + !circ_path.empty();
    if (given != 1) fail(Errc::InvalidArgument, "give exactly one of --instance, --bu, --circuit");
    ETRSentence s;
    std::optional<std::vector<Rational>> witness;
    if (!inst_path.empty()) {
        auto inst = load_instance(inst_path);
        r.trace("instance", inst.id);
        std::size_t k = cuts >= 0 ? static_cast<std::size_t>(cuts) : inst.size();
        s = ch_to_etr(inst, k);
        r.details["cuts"] = k;
        if (!sol_path.empty()) {
            auto sol = load<CHSolution>(sol_path, "solution");
            r.trace("solution", sol.id);
            witness = ch_witness(s, inst, sol);
        }
    } else if (!bu_path.empty()) {
        auto bu = load<BUInstance>(bu_path, "bu instance");
        r.trace("bu", bu.map.id);
        s = bu_to_etr(bu);
        if (!sol_path.empty()) witness = bu_witness(s, bu, load<ApproxSolution>(sol_path, "solution").x);
    } else {
        auto c = load<Circuit>(circ_path, "circuit");
        r.trace("circuit", c.id);
        s = circuit_to_constraints(c);
    }
    r.details["variables"] = s.variables.size();
    r.details["assertions"] = s.assertions.size();
    if (format == "smt2") {
        emit_text(r, out, to_smtlib2(s));
    } else if (format == "text") {
        emit_text(r, out, to_text(s));
    } else {
        fail(Errc::InvalidArgument, "unknown format " + format);
    }
    if (witness) {
        auto t = evaluate(s, *witness, 0);
        r.details["witness_holds"] = t.holds;
        if (!witness_out.empty()) write_json_file(witness_out, Json{{"values", named_values(s, *witness)}});
        if (!t.holds) {
            r.failed(VerificationFailure, "the solution's assignment does not satisfy the sentence");
            return;
        }
    }
    r.note("sentence with " + std::to_string(s.variables.size()) + " variables");
}

void cmd_check_etr(Report& r, const std::string& path, const std::string& step_text,
                   const std::vector<std::string>& fixes, const std::string& witness_path, std::size_t budget,
                   unsigned threads) {
    std::ifstream f(path);
    if (!f) fail(Errc::ParseError, "cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    auto s = parse_sentence(ss.str());
    Rational step = Rational::parse(step_text);
    std::map<std::string, Rational> fixed;
    if (!witness_path.empty()) {
        Json w = read_json_file(witness_path);
        for (const auto& [name, value] : w.at("values").items()) fixed[name] = parse_json<Rational>(value, name);
    }
    for (const auto& fx : fixes) {
        auto eq = fx.find('=');
        if (eq == std::string::npos) fail(Errc::ParseError, "--fix expects name=p/q, got " + fx);
        fixed[fx.substr(0, eq)] = Rational::parse(fx.substr(eq + 1));
    }
    for (const auto& [name, value] : fixed) s.index(name);
    BruteOptions opts;
    opts.max_points = budget;
    opts.threads = threads;
    auto res = brute_check(s, step, fixed, opts);
    r.details["step"] = step;
    r.details["fixed"] = fixed.size();
    r.details["points"] = res.points;
    r.details["exhausted"] = res.exhausted;
    r.details["sat"] = res.sat;
    if (res.sat) {
        r.details["residual"] = res.residual;
        r.details["witness"] = named_values(s, res.witness);
        r.details["exact"] = evaluate(s, res.witness, 0).holds;
        r.note(std::string("SAT at grid step ") + step.str() + ", residual " + res.residual.str());
    } else {
        r.failed(VerificationFailure, res.exhausted ? "UNKNOWN: no grid point satisfies the sentence"
                                                    : "UNKNOWN: point budget exhausted");
    }
}

// -------------------------------------------------------------- reductions

void cmd_reduce_feasible(Report& r, const std::string& in, const std::string& out, const std::string& root,
                         const std::string& witness_out) {
    Json j = read_json_file(in);
    Polynomial p;
    if (j.is_array()) {
        p = conjunction_to_feasible(parse_json<std::vector<Polynomial>>(j, "conjunction " + in));
        r.details["conjunction"] = j.size();
    } else {
        p = parse_json<Polynomial>(j, "polynomial " + in);
    }
    auto red = feasible_to_ch(p);
    r.trace("circuit", red.q_circuit.id);
    r.trace("circuit", red.lowered.circuit.id);
    r.trace("instance", red.embedded.instance.id);
    r.details["vars"] = red.normal.vars;
    r.details["coefficients"] = red.normal.coefficients;
    r.details["q1_terms"] = red.normal.q1.size();
    r.details["q2_terms"] = red.normal.q2.size();
    r.details["nodes"] = red.lowered.circuit.node_count;
    r.details["agents"] = red.agent_count();
    r.details["cut_budget"] = red.cut_budget();
    emit(r, out, red.embedded);
    if (!root.empty()) {
        auto sol = feasible_witness(red, parse_rational_list(root));
        r.trace("solution", sol.id);
        auto v = verify(red.embedded.instance, sol, 0);
        r.details["witness_verdict"] = Json{{"all_satisfied", v.all_satisfied}, {"cuts", sol.cuts.size()}};
        if (!witness_out.empty()) write_json_file(witness_out, Json(sol));
        if (!v.all_satisfied || sol.cuts.size() > red.cut_budget()) {
            r.failed(VerificationFailure, "encoded root does not give an (n, n-1) solution");
            return;
        }
    }
    r.note("(n, n-1) instance with n = " + std::to_string(red.agent_count()));
}

void cmd_reduce_game(Report& r, const std::string& in, const std::string& out, const std::string& scaled_out,
                     const std::string& unscaled_out, const std::string& profile, bool expect_fixed) {
    auto g = load<GameInstance>(in, "game");
    r.trace("game", g.id);
    auto gc = game_to_circuit(g);
    r.trace("circuit", gc.scaled.id);
    r.trace("circuit", gc.closed.id);
    r.details["players"] = g.players();
    r.details["strategies"] = g.strategies;
    r.details["scaled_nodes"] = gc.scaled.node_count;
    r.details["closed_nodes"] = gc.closed.node_count;
    r.details["normalized_payoffs"] = gc.normalized.payoffs;
    emit(r, out, gc.closed);
    if (!scaled_out.empty()) write_json_file(scaled_out, Json(gc.scaled));
    if (!unscaled_out.empty()) write_json_file(unscaled_out, Json(gc.unscaled));
    if (profile.empty()) {
        r.note("closed circuit with " + std::to_string(gc.closed.node_count) + " nodes");
        return;
    }
    auto x = parse_rational_list(profile);
    auto image = evaluate(gc.scaled, x).outputs;
    auto assignment = closed_assignment(gc, x);
    r.details["image"] = image;
    r.details["fixed_point"] = assignment.has_value();
    r.details["closed_satisfied"] = assignment && satisfies(gc.closed, *assignment);
    r.details["regret"] = regret(g, x);
    if (expect_fixed && !assignment) {
        r.failed(VerificationFailure, "profile is not a fixed point of G_I");
    } else {
        r.note(assignment ? "profile is a fixed point (regret 0)" : "profile is not a fixed point");
    }
}

}  // namespace

void register_commands(CLI::App& app, Report& report) {
    auto sub = [&app](const char* name, const char* help) { return app.add_subcommand(name, help); };
    auto at_run = [&report](CLI::App* s, std::function<void(Report&)> body) {
        std::string name = s->get_name();
        s->callback([&report, name, body] {
            report.command = name;
            body(report);
        });
    };

    {
        auto o = std::make_shared<std::pair<std::string, bool>>();
        auto* s = sub("validate", "check any artifact file against its schema and invariants");
        s->add_option("input", o->first, "artifact file")->required();
        s->add_flag("--special", o->second, "require the special gate set and certify ranges");
        at_run(s, [o](Report& r) { cmd_validate(r, o->first, o->second); });
    }
    {
        struct O { std::string in, out; bool trust = false; std::size_t samples = 200; std::uint64_t seed = 1; };
        auto o = std::make_shared<O>();
        auto* s = sub("lower", "rewrite a circuit into the certified special gate set");
        s->add_option("input", o->in, "circuit file")->required();
        s->add_option("-o,--out", o->out, "lowered circuit file");
        s->add_flag("--trust", o->trust, "clamp SUB_01 / DOUBLE_01 ranges instead of deriving them");
        s->add_option("--samples", o->samples, "random inputs for the equivalence cross-check");
        s->add_option("--seed", o->seed, "seed of the cross-check");
        at_run(s, [o](Report& r) { cmd_lower(r, o->in, o->out, o->trust, o->samples, o->seed); });
    }
    {
        struct O { std::string in, out; bool finis = false, lower = false; };
        auto o = std::make_shared<O>();
        auto* s = sub("embed", "build the 4-agents-per-node CH instance of a special circuit");
        s->add_option("input", o->in, "circuit file")->required();
        s->add_option("-o,--out", o->out, "embedded instance file");
        s->add_flag("--finis", o->finis, "append the finis agent for the last two nodes");
        s->add_flag("--lower", o->lower, "lower a general circuit first");
        at_run(s, [o](Report& r) { cmd_embed(r, o->in, o->out, o->finis, o->lower); });
    }
    {
        struct O { std::string in, values, inputs, out; };
        auto o = std::make_shared<O>();
        auto* s = sub("encode", "turn node values into cuts of an embedded instance");
        s->add_option("--instance", o->in, "embedded instance file")->required();
        s->add_option("--values", o->values, "one value per node, comma separated p/q");
        s->add_option("--inputs", o->inputs, "circuit inputs; node values are evaluated");
        s->add_option("-o,--out", o->out, "solution file");
        at_run(s, [o](Report& r) { cmd_encode(r, o->in, o->values, o->inputs, o->out); });
    }
    {
        struct O { std::string in, sol, out; };
        auto o = std::make_shared<O>();
        auto* s = sub("decode", "read node values back from a solution of an embedded instance");
        s->add_option("--instance", o->in, "embedded instance file")->required();
        s->add_option("--solution", o->sol, "solution file")->required();
        s->add_option("-o,--out", o->out, "values file");
        at_run(s, [o](Report& r) { cmd_decode(r, o->in, o->sol, o->out); });
    }
    {
        struct O { std::string in, out; };
        auto o = std::make_shared<O>();
        auto* s = sub("ch2bu", "reduce a CH instance to a Borsuk-Ulam instance");
        s->add_option("--instance", o->in, "CH instance file")->required();
        s->add_option("-o,--out", o->out, "BU instance file");
        at_run(s, [o](Report& r) { cmd_ch2bu(r, o->in, o->out); });
    }
    {
        struct O { std::string in, eps, lambda, out; std::size_t max_dim = 3; unsigned threads = 0; };
        auto o = std::make_shared<O>();
        auto* s = sub("solve-bu", "epsilon-approximate BU solution by Tucker labelling");
        s->add_option("--bu", o->in, "BU instance file")->required();
        s->add_option("--epsilon", o->eps, "target residual, p/q")->required();
        s->add_option("--lambda", o->lambda, "Lipschitz constant, p/q (default: computed bound)");
        s->add_option("--max-dimension", o->max_dim, "refuse larger dimensions");
        s->add_option("--threads", o->threads, "worker threads, 0 for all cores");
        s->add_option("-o,--out", o->out, "approximate solution file");
        at_run(s, [o](Report& r) { cmd_solve_bu(r, o->in, o->eps, o->lambda, o->max_dim, o->threads, o->out); });
    }
    {
        struct O { std::string in, sol, inst, out, ch_out; };
        auto o = std::make_shared<O>();
        auto* s = sub("round", "round an approximate solution of a linear BU instance to an exact one");
        s->add_option("--bu", o->in, "BU instance file")->required();
        s->add_option("--solution", o->sol, "approximate solution file")->required();
        s->add_option("--instance", o->inst, "CH instance to decode the exact point against");
        s->add_option("-o,--out", o->out, "exact solution file");
        s->add_option("--ch-out", o->ch_out, "decoded CH solution file");
        at_run(s, [o](Report& r) { cmd_round(r, o->in, o->sol, o->inst, o->out, o->ch_out); });
    }
    {
        struct O { std::string inst, bu, sol, tol = "0"; long max_cuts = -1; };
        auto o = std::make_shared<O>();
        auto* s = sub("verify", "check a CH or BU solution exactly");
        s->add_option("--instance", o->inst, "CH or embedded instance file");
        s->add_option("--bu", o->bu, "BU instance file");
        s->add_option("--solution", o->sol, "solution file")->required();
        s->add_option("--tol", o->tol, "tolerance, p/q (0 is exact)");
        s->add_option("--max-cuts", o->max_cuts, "cut budget (default: number of agents)");
        at_run(s, [o](Report& r) { cmd_verify(r, o->inst, o->bu, o->sol, o->tol, o->max_cuts); });
    }
    {
        struct O { std::string inst, bu, circ, format = "text", sol, witness_out, out; long cuts = -1; };
        auto o = std::make_shared<O>();
        auto* s = sub("emit-etr", "write the ETR sentence of an instance or circuit");
        s->add_option("--instance", o->inst, "CH instance file");
        s->add_option("--bu", o->bu, "BU instance file");
        s->add_option("--circuit", o->circ, "circuit file (gate constraints only)");
        s->add_option("--cuts", o->cuts, "cut budget k (default: number of agents)");
        s->add_option("--format", o->format, "text or smt2");
        s->add_option("--solution", o->sol, "solution whose assignment is checked and exported");
        s->add_option("--witness-out", o->witness_out, "assignment file for check-etr");
        s->add_option("-o,--out", o->out, "sentence file");
        at_run(s, [o](Report& r) {
            cmd_emit_etr(r, o->inst, o->bu, o->circ, o->cuts, o->format, o->sol, o->witness_out, o->out);
        });
    }
    {
        struct O { std::string in, step = "1/8", witness; std::vector<std::string> fix; std::size_t budget = 20'000'000; unsigned threads = 0; };
        auto o = std::make_shared<O>();
        auto* s = sub("check-etr", "grid search for a satisfying assignment of a sentence");
        s->add_option("input", o->in, "sentence file in text form")->required();
        s->add_option("--step", o->step, "grid step and equality tolerance, p/q");
        s->add_option("--fix", o->fix, "name=p/q, repeatable");
        s->add_option("--witness", o->witness, "assignment file pinning variables");
        s->add_option("--budget", o->budget, "maximum grid points");
        s->add_option("--threads", o->threads, "worker threads, 0 for all cores");
        at_run(s, [o](Report& r) { cmd_check_etr(r, o->in, o->step, o->fix, o->witness, o->budget, o->threads); });
    }
    {
        struct O { std::string in, out, root, witness_out; };
        auto o = std::make_shared<O>();
        auto* s = sub("reduce-feasible", "reduce p(X) = 0 on [0,1]^N to an (n, n-1) CH instance");
        s->add_option("input", o->in, "polynomial file, or an array of polynomials for a conjunction")->required();
        s->add_option("-o,--out", o->out, "embedded instance file");
        s->add_option("--root", o->root, "a root of p, comma separated p/q, to encode");
        s->add_option("--witness-out", o->witness_out, "solution file for the encoded root");
        at_run(s, [o](Report& r) { cmd_reduce_feasible(r, o->in, o->out, o->root, o->witness_out); });
    }
    {
        struct O { std::string in, out, scaled, unscaled, profile; bool expect = false; };
        auto o = std::make_shared<O>();
        auto* s = sub("reduce-game", "build the cyclic circuit whose fixed points are the Nash equilibria");
        s->add_option("input", o->in, "game file")->required();
        s->add_option("-o,--out", o->out, "closed circuit file");
        s->add_option("--scaled-out", o->scaled, "acyclic scaled circuit file");
        s->add_option("--unscaled-out", o->unscaled, "acyclic unscaled circuit file");
        s->add_option("--profile", o->profile, "mixed profile to test, comma separated p/q");
        s->add_flag("--expect-fixed", o->expect, "fail unless the profile is a fixed point");
        at_run(s, [o](Report& r) {
            cmd_reduce_game(r, o->in, o->out, o->scaled, o->unscaled, o->profile, o->expect);
        });
    }
}

}  // namespace chbu::cli
