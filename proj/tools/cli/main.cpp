#include <iostream>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/report.hpp"

int main(int argc, char** argv) {
    using namespace chbu::cli;
    CLI::App app{"Consensus Halving, Borsuk-Ulam and ETR reduction toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string report_path;
    bool quiet = false;
    app.add_option("--report", report_path, "also write the JSON report to this file");
    app.add_flag("-q,--quiet", quiet, "no human summary on stderr");

    Report report;
    register_commands(app, report);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return ParseFailure;
    } catch (const chbu::Error& e) {
        report.failed(exit_code_for(e.code()), e.what());
        report.details["error"] = std::string(chbu::errc_name(e.code()));
    }

    chbu::Json out = report.to_json();
    std::cout << out.dump(2) << '\n';
    if (!report_path.empty()) {
        try {
            chbu::write_json_file(report_path, out);
        } catch (const chbu::Error& e) {
            std::cerr << e.what() << '\n';
            return ParseFailure;
        }
    }
    if (!quiet)
        for (const auto& line : report.summary) std::cerr << report.command << ": " << line << '\n';
    return report.exit_code;
}
