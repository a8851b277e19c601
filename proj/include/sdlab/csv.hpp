#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include "sdlab/errors.hpp"

namespace sdlab {

// 17 significant digits round-trips every double exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

// Accumulates CSV text in memory; LF line endings. Building the whole
// payload first keeps writes atomic enough for byte-for-byte comparison.
class CsvBuilder {
public:
    explicit CsvBuilder(const std::string& header) { text_ = header + "\n"; }

    CsvBuilder& field(const std::string& s) {
        if (!row_open_) {
            row_open_ = true;
        } else {
            text_ += ',';
        }
        text_ += s;
        return *this;
    }

    CsvBuilder& field(double v) { return field(format_double(v)); }
    CsvBuilder& field(long long v) { return field(std::to_string(v)); }

    void end_row() {
        text_ += '\n';
        row_open_ = false;
    }

    const std::string& text() const { return text_; }

private:
    std::string text_;
    bool row_open_ = false;
};

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw argument_error("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw argument_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw argument_error("cannot open for reading: " + path);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

} // namespace sdlab
