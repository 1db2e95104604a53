#pragma once

#include <stdexcept>
#include <string>

namespace qfz {

enum class Errc {
    NotSymmetric,
    OddDiagonal,
    Singular,
    DimensionMismatch,
    ModulusDividesLevel,
    TableOverflow,
    BudgetExceeded,
    NotStabilized,
    DomainError,
    PrecisionLoss,
    PoleError,
    MissingMeasure,
    SingularGamma,
    PoleProximity,
    MissingConstants,
    VariantMismatch,
    ParityViolation,
    UnresolvedConstants,
    BelowYMin,
    IllConditioned,
    CorruptRecord,
    InvalidArgument,
};

const char* errc_name(Errc c) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace qfz
