// Minimal locale-independent CSV writer (RFC 4180 dialect, '.' decimal).
#pragma once

#include <charconv>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

namespace ehsc::csv {

/// Shortest representation that round-trips.
inline std::string format(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string quote(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

/// Writes one row; the newline is emitted on destruction.
class Row {
public:
    explicit Row(std::ostream& out) : out_(out) {}
    Row(const Row&) = delete;
    Row& operator=(const Row&) = delete;
    ~Row() { out_ << '\n'; }

    template <class T> Row& operator<<(const T& v) {
        sep();
        if constexpr (std::is_same_v<T, bool>) {
            out_ << (v ? 1 : 0);
        } else if constexpr (std::is_floating_point_v<T>) {
            out_ << format(static_cast<double>(v));
        } else if constexpr (std::is_integral_v<T>) {
            out_ << v;
        } else {
            out_ << quote(v);
        }
        return *this;
    }

    Row& empty() {
        sep();
        return *this;
    }

private:
    void sep() {
        if (!first_) out_ << ',';
        first_ = false;
    }

    std::ostream& out_;
    bool first_ = true;
};

} // namespace ehsc::csv
