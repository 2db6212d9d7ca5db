#pragma once

#include <string>
#include <vector>

#include "chbu/error.hpp"
#include "chbu/io/json.hpp"

namespace chbu::cli {

enum ExitCode : int { Ok = 0, ParseFailure = 1, Refused = 2, VerificationFailure = 3 };

int exit_code_for(Errc code);

// Machine-readable outcome of one command; the human summary goes to stderr.
struct Report {
    std::string command;
    std::string status = "ok";
    int exit_code = Ok;
    std::vector<std::string> provenance;
    Json details = Json::object();
    std::vector<std::string> summary;

    void note(std::string line) { summary.push_back(std::move(line)); }
    void trace(const std::string& kind, const std::string& id) {
        provenance.push_back(kind + ":" + (id.empty() ? std::string("(unnamed)") : id));
    }
    void failed(int code, std::string why) {
        exit_code = code;
        status = code == VerificationFailure ? "verification-failed" : (code == Refused ? "refused" : "invalid");
        note(std::move(why));
    }
    Json to_json() const;
};

std::vector<Rational> parse_rational_list(const std::string& text);

}  // namespace chbu::cli
