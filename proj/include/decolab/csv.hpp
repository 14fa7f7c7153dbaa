// csv.hpp -- deterministic CSV emission: RFC-4180 fields, '.' decimal
// separator, 17 significant digits, LF line endings, byte-identical for
// identical inputs. Content hashes use 64-bit FNV-1a.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "decolab/errors.hpp"

namespace decolab {

inline std::string format_value(double v) {
    if (std::isnan(v)) return "NaN";
    if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct CsvFile {
    std::string path;
    std::string hash;  // hex fnv1a64 of the byte content
};

inline std::string render_csv(const std::vector<std::string>& header,
                              const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw ValidationError("emit_csv: row width does not match the header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_value(row[i]);
        }
        out += '\n';
    }
    return out;
}

inline CsvFile emit_csv(const std::string& path, const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& rows) {
    const std::string content = render_csv(header, rows);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("emit_csv: cannot open " + path);
    f.write(content.data(), std::streamsize(content.size()));
    if (!f) throw IoError("emit_csv: write failed for " + path);
    return {path, hex64(fnv1a64(content))};
}

}  // namespace decolab
