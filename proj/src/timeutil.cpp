#include "rcafuse/timeutil.hpp"

#include "rcafuse/errors.hpp"

#include <chrono>
#include <cstdio>
#include <limits>

namespace rcafuse {

namespace {

bool all_digits(const std::string& s, std::size_t from, std::size_t count) {
    for (std::size_t i = from; i < from + count; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
    }
    return true;
}

int field(const std::string& s, std::size_t from, std::size_t count) {
    int v = 0;
    for (std::size_t i = from; i < from + count; ++i) v = v * 10 + (s[i] - '0');
    return v;
}

// Floor division for possibly-negative timestamps.
std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

NsTime iso_to_ns(const std::string& iso) {
    // Shape: 0123456789012345678
    //        YYYY-MM-DDThh:mm:ssZ  (20 chars)
    if (iso.size() != 20 || iso[4] != '-' || iso[7] != '-' || iso[10] != 'T' ||
        iso[13] != ':' || iso[16] != ':' || iso[19] != 'Z' ||
        !all_digits(iso, 0, 4) || !all_digits(iso, 5, 2) || !all_digits(iso, 8, 2) ||
        !all_digits(iso, 11, 2) || !all_digits(iso, 14, 2) || !all_digits(iso, 17, 2)) {
        throw Error(ErrorCode::MalformedTimestamp, "expected YYYY-MM-DDThh:mm:ssZ, got \"" + iso + "\"");
    }
    const int year = field(iso, 0, 4);
    const int month = field(iso, 5, 2);
    const int day = field(iso, 8, 2);
    const int hh = field(iso, 11, 2);
    const int mm = field(iso, 14, 2);
    const int ss = field(iso, 17, 2);

    const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{unsigned(month)},
                                          std::chrono::day{unsigned(day)}};
    if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) {
        throw Error(ErrorCode::MalformedTimestamp, "invalid calendar components in \"" + iso + "\"");
    }

    const std::int64_t days = std::chrono::sys_days(ymd).time_since_epoch().count();
    const std::int64_t seconds = days * 86400 + hh * 3600 + mm * 60 + ss;
    std::int64_t ns = 0;
    if (__builtin_mul_overflow(seconds, kNsPerSecond, &ns)) {
        throw Error(ErrorCode::TimestampOverflow, "\"" + iso + "\" outside the nanosecond range");
    }
    return ns;
}

std::string ns_to_iso(NsTime ns) {
    const std::int64_t sec = floor_div(ns, kNsPerSecond);
    const std::int64_t days = floor_div(sec, 86400);
    const std::int64_t sod = sec - days * 86400;

    const std::chrono::year_month_day ymd{
        std::chrono::sys_days{std::chrono::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()), int(sod / 3600),
                  int((sod / 60) % 60), int(sod % 60));
    return buf;
}

NsTime us_to_ns_checked(std::int64_t start_us) {
    if (start_us < 0) {
        throw Error(ErrorCode::TimestampOverflow, "negative microsecond timestamp");
    }
    NsTime out = 0;
    if (__builtin_mul_overflow(start_us, std::int64_t{1000}, &out)) {
        throw Error(ErrorCode::TimestampOverflow,
                    "microsecond value " + std::to_string(start_us) + " exceeds the nanosecond range");
    }
    return out;
}

std::string hour_key(NsTime ns) {
    const std::int64_t sec = floor_div(ns, kNsPerSecond);
    const std::int64_t days = floor_div(sec, 86400);
    const std::int64_t hour = (sec - days * 86400) / 3600;
    const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u_%02d", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()), int(hour));
    return buf;
}

std::vector<std::string> hour_keys_between(NsTime start_ns, NsTime end_ns) {
    std::vector<std::string> keys;
    if (end_ns < start_ns) return keys;
    const std::int64_t first = floor_div(start_ns, kNsPerHour);
    const std::int64_t last = floor_div(end_ns, kNsPerHour);
    keys.reserve(static_cast<std::size_t>(last - first + 1));
    for (std::int64_t h = first; h <= last; ++h) {
        keys.push_back(hour_key(h * kNsPerHour));
    }
    return keys;
}

std::string date_key(NsTime ns) {
    const std::int64_t sec = floor_div(ns, kNsPerSecond);
    const std::int64_t days = floor_div(sec, 86400);
    const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
}

std::string ns_to_beijing_display(NsTime ns) {
    const std::string iso = ns_to_iso(ns + 8 * kNsPerHour);
    // "YYYY-MM-DD hh:mm:ss+08:00"
    std::string out = iso.substr(0, 10) + " " + iso.substr(11, 8) + "+08:00";
    return out;
}

}  // namespace rcafuse
