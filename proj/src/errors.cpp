#include "qfz/errors.hpp"

namespace qfz {

const char* errc_name(Errc c) noexcept
{
    switch (c) {
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::OddDiagonal: return "OddDiagonal";
    case Errc::Singular: return "Singular";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ModulusDividesLevel: return "ModulusDividesLevel";
    case Errc::TableOverflow: return "TableOverflow";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::NotStabilized: return "NotStabilized";
    case Errc::DomainError: return "DomainError";
    case Errc::PrecisionLoss: return "PrecisionLoss";
    case Errc::PoleError: return "PoleError";
    case Errc::MissingMeasure: return "MissingMeasure";
    case Errc::SingularGamma: return "SingularGamma";
    case Errc::PoleProximity: return "PoleProximity";
    case Errc::MissingConstants: return "MissingConstants";
    case Errc::VariantMismatch: return "VariantMismatch";
    case Errc::ParityViolation: return "ParityViolation";
    case Errc::UnresolvedConstants: return "UnresolvedConstants";
    case Errc::BelowYMin: return "BelowYMin";
    case Errc::IllConditioned: return "IllConditioned";
    case Errc::CorruptRecord: return "CorruptRecord";
    case Errc::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

} // namespace qfz
