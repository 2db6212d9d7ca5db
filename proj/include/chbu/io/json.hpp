#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "chbu/bu/borsuk_ulam.hpp"
#include "chbu/ch/model.hpp"
#include "chbu/circuit/circuit.hpp"
#include "chbu/embed/embed.hpp"
#include "chbu/numerics/piecewise.hpp"
#include "chbu/reductions/reductions.hpp"

namespace chbu {

using Json = nlohmann::ordered_json;

// Rationals are written as "p/q" strings; integers are also accepted on
// input, decimals never.
void to_json(Json& j, const Rational& r);
void from_json(const Json& j, Rational& r);

void to_json(Json& j, const Interval& v);
void from_json(const Json& j, Interval& v);

void to_json(Json& j, const PiecewisePoly& p);
void from_json(const Json& j, PiecewisePoly& p);

void to_json(Json& j, const Circuit& c);
void from_json(const Json& j, Circuit& c);

void to_json(Json& j, const CHInstance& inst);
void from_json(const Json& j, CHInstance& inst);

void to_json(Json& j, const CHSolution& sol);
void from_json(const Json& j, CHSolution& sol);

// The instance fields plus "source_circuit", "node_map" and "finis".  On
// input the gadgets are rebuilt from the source circuit and compared with the
// stored agents.
void to_json(Json& j, const EmbeddedInstance& e);
void from_json(const Json& j, EmbeddedInstance& e);

void to_json(Json& j, const BUInstance& bu);
void from_json(const Json& j, BUInstance& bu);

void to_json(Json& j, const ApproxSolution& s);
void from_json(const Json& j, ApproxSolution& s);

void to_json(Json& j, const Polynomial& p);
void from_json(const Json& j, Polynomial& p);

void to_json(Json& j, const GameInstance& g);
void from_json(const Json& j, GameInstance& g);

// Converts, turning library exceptions of the JSON reader into ParseError.
template <class T>
T parse_json(const Json& j, const std::string& what) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::ParseError, what + ": " + e.what());
    }
}

Json parse_json_text(const std::string& text, const std::string& what);
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace chbu
