#pragma once

#include <cmath>
#include <type_traits>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace spdec {

// NaN renders as an empty field.
inline std::string csv_num(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    CsvWriter& field(const std::string& s) {
        if (!first_) out_ << ',';
        out_ << s;
        first_ = false;
        return *this;
    }
    CsvWriter& field(const char* s) { return field(std::string(s)); }
    CsvWriter& field(double v) { return field(csv_num(v)); }
    template <class T>
        requires std::is_integral_v<T>
    CsvWriter& field(T v) { return field(std::to_string(v)); }
    void endrow() {
        out_ << '\n';
        first_ = true;
    }

private:
    std::ostream& out_;
    bool first_ = true;
};

}  // namespace spdec
