#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "lpdiss/criteria.hpp"
#include "lpdiss/scalar.hpp"

namespace lpdiss {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal representation (at most 17 significant digits).
std::string format_double(double v);

Json json_of_verdict(const Verdict& v);
Json json_of_witness(const CheckWitness& w);
Json json_of_interval(const AngleInterval& iv);
Json json_of_p_interval(const PInterval& iv);
Json json_of_shift(const ShiftReport& r);

/// Report with the fixed top-level key set. No timestamps or hostnames:
/// rerunning with the same config reproduces the bytes.
Json make_report(const std::string& command, std::uint64_t seed);

/// Writes text to path atomically (temp file in the same directory + rename).
void write_atomic(const std::string& path, const std::string& text);

/// Flat key,value CSV rendering of a report.
std::string report_to_csv(const Json& report);

}  // namespace lpdiss
