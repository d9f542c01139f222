#include "kvlu/error.hpp"

namespace kvlu {

std::string_view to_string(Errc code)
{
    switch (code) {
    case Errc::EmptyStream: return "EmptyStream";
    case Errc::NonMonotonicTime: return "NonMonotonicTime";
    case Errc::MissingAnthropometry: return "MissingAnthropometry";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::BadFieldCount: return "BadFieldCount";
    case Errc::NonNumericValue: return "NonNumericValue";
    case Errc::NoTemporalOverlap: return "NoTemporalOverlap";
    case Errc::EvenWindow: return "EvenWindow";
    case Errc::StreamTooShort: return "StreamTooShort";
    case Errc::InsufficientSwingSamples: return "InsufficientSwingSamples";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::NoCycles: return "NoCycles";
    case Errc::DegeneratePairs: return "DegeneratePairs";
    case Errc::NoAnchor: return "NoAnchor";
    case Errc::FewerThanTwoAnchors: return "FewerThanTwoAnchors";
    case Errc::EmptyGroup: return "EmptyGroup";
    case Errc::NonPositiveTruth: return "NonPositiveTruth";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::Io: return "Io";
    }
    return "Unknown";
}

Error::Error(Errc code, std::string where, const std::string& detail,
             std::vector<std::size_t> indices)
    : std::runtime_error(where + ": " + std::string(to_string(code)) +
                         (detail.empty() ? std::string() : ": " + detail)),
      code_(code), where_(std::move(where)), indices_(std::move(indices))
{
}

}  // namespace kvlu
