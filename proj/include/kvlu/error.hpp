#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kvlu {

enum class Errc {
    EmptyStream,
    NonMonotonicTime,
    MissingAnthropometry,
    OutOfRange,
    MalformedHeader,
    BadFieldCount,
    NonNumericValue,
    NoTemporalOverlap,
    EvenWindow,
    StreamTooShort,
    InsufficientSwingSamples,
    TooFewSamples,
    NoCycles,
    DegeneratePairs,
    NoAnchor,
    FewerThanTwoAnchors,
    EmptyGroup,
    NonPositiveTruth,
    InvalidConfig,
    Io,
};

std::string_view to_string(Errc code);

// Every failure raised by the library. `where` names the module and
// operation ("gait::detect_swing") so the CLI can report it verbatim.
class Error : public std::runtime_error {
public:
    Error(Errc code, std::string where, const std::string& detail,
          std::vector<std::size_t> indices = {});

    Errc code() const noexcept { return code_; }
    const std::string& where() const noexcept { return where_; }
    // Offending sample indices (NonMonotonicTime) or 1-based line/column
    // (BadFieldCount, NonNumericValue).
    const std::vector<std::size_t>& indices() const noexcept { return indices_; }

private:
    Errc code_;
    std::string where_;
    std::vector<std::size_t> indices_;
};

}  // namespace kvlu
