#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "densq/error.hpp"
#include "densq/measure.hpp"

namespace densq {

/// Measure CSV: header `x0,...,x{d-1},w`, one atom per row. Values are
/// written with 17 significant digits so reading back is lossless.
inline void write_measure_csv(std::ostream& os, const WeightedPointMeasure& m) {
    for (std::size_t k = 0; k < m.dim(); ++k) os << 'x' << k << ',';
    os << "w\n";
    char buf[64];
    auto put = [&](double v) {
        auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general,
                                 std::numeric_limits<double>::max_digits10);
        os.write(buf, res.ptr - buf);
    };
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (double c : m.point(i)) {
            put(c);
            os << ',';
        }
        put(m.weight(i));
        os << '\n';
    }
}

inline WeightedPointMeasure read_measure_csv(std::istream& is, const std::string& source = "<stream>") {
    std::string line;
    if (!std::getline(is, line)) throw DomainError(source + ": empty measure file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 2 || header.back() != "w")
        throw DomainError(source + ": header must be x0,...,x{d-1},w");
    const std::size_t dim = header.size() - 1;
    for (std::size_t k = 0; k < dim; ++k)
        if (header[k] != "x" + std::to_string(k)) throw DomainError(source + ": header must be x0,...,x{d-1},w");

    std::vector<double> coords;
    std::vector<double> weights;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t col = 0;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (true) {
            double v = 0.0;
            while (p < end && *p == ' ') ++p;
            auto res = std::from_chars(p, end, v);
            if (res.ec != std::errc{})
                throw DomainError(source + ":" + std::to_string(lineno) + ": cannot parse column " + std::to_string(col));
            p = res.ptr;
            while (p < end && *p == ' ') ++p;
            (col < dim ? coords : weights).push_back(v);
            ++col;
            if (p == end) break;
            if (*p != ',') throw DomainError(source + ":" + std::to_string(lineno) + ": unexpected character");
            ++p;
        }
        if (col != dim + 1)
            throw DomainError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(dim + 1) +
                              " columns, found " + std::to_string(col));
    }
    return WeightedPointMeasure(dim, std::move(coords), std::move(weights));
}

inline WeightedPointMeasure load_measure_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open measure file " + path.string());
    return read_measure_csv(in, path.string());
}

/// Writes `content` to `path` through a temporary sibling and a rename, so a
/// failed run never leaves a partial file behind.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DomainError("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw DomainError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline void save_measure_csv(const std::filesystem::path& path, const WeightedPointMeasure& m) {
    std::ostringstream os;
    write_measure_csv(os, m);
    write_file_atomic(path, os.str());
}

} // namespace densq
