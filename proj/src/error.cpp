#include "chbu/error.hpp"

namespace chbu {

std::string_view errc_name(Errc code) {
    switch (code) {
        case Errc::ParseError: return "ParseError";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::OutOfDomain: return "OutOfDomain";
        case Errc::DegreeTooHigh: return "DegreeTooHigh";
        case Errc::CyclicCircuit: return "CyclicCircuit";
        case Errc::ArityMismatch: return "ArityMismatch";
        case Errc::RangeUnprovable: return "RangeUnprovable";
        case Errc::NonlinearCircuit: return "NonlinearCircuit";
        case Errc::ComparisonGateForbidden: return "ComparisonGateForbidden";
        case Errc::BadSolutionShape: return "BadSolutionShape";
        case Errc::UncertifiedCircuit: return "UncertifiedCircuit";
        case Errc::ValuesDoNotSatisfyCircuit: return "ValuesDoNotSatisfyCircuit";
        case Errc::SolutionDoesNotSatisfyAgents: return "SolutionDoesNotSatisfyAgents";
        case Errc::CutOutsideExpectedInterval: return "CutOutsideExpectedInterval";
        case Errc::MissingOutputPair: return "MissingOutputPair";
        case Errc::UnsupportedPieceKind: return "UnsupportedPieceKind";
        case Errc::NonCircuitValuation: return "NonCircuitValuation";
        case Errc::NotOnSphere: return "NotOnSphere";
        case Errc::NotABUSolution: return "NotABUSolution";
        case Errc::DimensionTooLarge: return "DimensionTooLarge";
        case Errc::NoCertifiedEdge: return "NoCertifiedEdge";
        case Errc::InfeasibleLP: return "InfeasibleLP";
        case Errc::PositiveOptimum: return "PositiveOptimum";
        case Errc::UnboundedVariable: return "UnboundedVariable";
        case Errc::NormalizationFailure: return "NormalizationFailure";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

void fail(Errc code, const std::string& detail) { throw Error(code, detail); }

}  // namespace chbu
