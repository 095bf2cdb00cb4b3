#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rcafuse {

// All pipeline time is UTC nanoseconds since the Unix epoch, signed 64-bit.
using NsTime = std::int64_t;

inline constexpr NsTime kNsPerSecond = 1'000'000'000;
inline constexpr NsTime kNsPerMinute = 60 * kNsPerSecond;
inline constexpr NsTime kNsPerHour = 60 * kNsPerMinute;

// Parses "YYYY-MM-DDThh:mm:ssZ" (second precision, literal Z, nothing else)
// into UTC nanoseconds. Throws Error{MalformedTimestamp} on any other shape
// and Error{TimestampOverflow} outside the representable ns range.
NsTime iso_to_ns(const std::string& iso);

// Inverse of iso_to_ns; ns is floored to whole seconds.
std::string ns_to_iso(NsTime ns);

// Trace startTime microseconds -> nanoseconds, exact x1000.
// Throws Error{TimestampOverflow} when the product leaves the int64 range
// or the input is negative.
NsTime us_to_ns_checked(std::int64_t start_us);

// "YYYY-MM-DD_HH" for the UTC hour containing ns.
std::string hour_key(NsTime ns);

// Every UTC hour key intersecting [start_ns, end_ns], ascending, unique.
std::vector<std::string> hour_keys_between(NsTime start_ns, NsTime end_ns);

// "YYYY-MM-DD" for the UTC day containing ns.
std::string date_key(NsTime ns);

// Display form in fixed UTC+8, used only when rendering reports.
std::string ns_to_beijing_display(NsTime ns);

}  // namespace rcafuse
