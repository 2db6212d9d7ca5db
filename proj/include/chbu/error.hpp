#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chbu {

enum class Errc {
    ParseError,
    InvalidArgument,
    OutOfDomain,
    DegreeTooHigh,
    CyclicCircuit,
    ArityMismatch,
    RangeUnprovable,
    NonlinearCircuit,
    ComparisonGateForbidden,
    BadSolutionShape,
    UncertifiedCircuit,
    ValuesDoNotSatisfyCircuit,
    SolutionDoesNotSatisfyAgents,
    CutOutsideExpectedInterval,
    MissingOutputPair,
    UnsupportedPieceKind,
    NonCircuitValuation,
    NotOnSphere,
    NotABUSolution,
    DimensionTooLarge,
    NoCertifiedEdge,
    InfeasibleLP,
    PositiveOptimum,
    UnboundedVariable,
    NormalizationFailure,
};

std::string_view errc_name(Errc code);

// Every failure raised by the library carries one of the codes above so that
// callers (tests, the CLI) can dispatch on the kind rather than on text.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail);

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& detail);

}  // namespace chbu
