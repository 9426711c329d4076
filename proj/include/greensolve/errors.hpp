#pragma once

#include <stdexcept>
#include <string>

namespace greensolve {

/// Base class of every failure raised by the library. `kind()` is the stable
/// machine-readable name that the CLI writes into its error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define GREENSOLVE_DEFINE_ERROR(Name)                                              \
    class Name : public Error {                                                    \
    public:                                                                        \
        explicit Name(const std::string& message) : Error(#Name, message) {}       \
    }

// linalg
GREENSOLVE_DEFINE_ERROR(SingularMatrix);
GREENSOLVE_DEFINE_ERROR(NoConvergence);
GREENSOLVE_DEFINE_ERROR(Overflow);
GREENSOLVE_DEFINE_ERROR(DimensionMismatch);
// generator
GREENSOLVE_DEFINE_ERROR(SpectrumHit);
GREENSOLVE_DEFINE_ERROR(DomainError);
GREENSOLVE_DEFINE_ERROR(DecayViolation);
// cutoff
GREENSOLVE_DEFINE_ERROR(SeparationError);
// green
GREENSOLVE_DEFINE_ERROR(NearZero);
GREENSOLVE_DEFINE_ERROR(GridError);
// harmonic
GREENSOLVE_DEFINE_ERROR(TooFewSamples);
GREENSOLVE_DEFINE_ERROR(WindowTooWide);
// solver
GREENSOLVE_DEFINE_ERROR(ResonanceError);
GREENSOLVE_DEFINE_ERROR(InsufficientSpan);
GREENSOLVE_DEFINE_ERROR(OracleUnavailable);
GREENSOLVE_DEFINE_ERROR(NonResonanceViolation);
GREENSOLVE_DEFINE_ERROR(SpectrumNotInF);
GREENSOLVE_DEFINE_ERROR(PreconditionEvidenceFailure);
// io / cli
GREENSOLVE_DEFINE_ERROR(ConfigError);

#undef GREENSOLVE_DEFINE_ERROR

} // namespace greensolve
