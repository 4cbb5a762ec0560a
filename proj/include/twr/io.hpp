// SPDX-License-Identifier: Apache-2.0
//
// Binary map container and CSV helpers. Containers carry the magic
// "TWRMAP1\0", a kind byte, u32-LE dimensions and f32-LE row-major data.
// CSV values are printed with %.17g so reruns are byte-identical.

#ifndef TWR_IO_HPP
#define TWR_IO_HPP

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "twr/common.hpp"
#include "twr/matrix.hpp"

namespace twr {

inline constexpr char kMapMagic[8] = {'T', 'W', 'R', 'M', 'A', 'P', '1', '\0'};

enum class ContainerKind : std::uint8_t {
    r2tm = 0,
    d2tm = 1,
    pcrd = 2,
    feature = 3,
};

struct MapContainer {
    ContainerKind kind = ContainerKind::r2tm;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<float> data;  // row-major
};

inline void write_container(std::ostream& out, const MapContainer& c) {
    out.write(kMapMagic, 8);
    const std::uint8_t kind = static_cast<std::uint8_t>(c.kind);
    out.write(reinterpret_cast<const char*>(&kind), 1);
    out.write(reinterpret_cast<const char*>(&c.rows), 4);
    out.write(reinterpret_cast<const char*>(&c.cols), 4);
    out.write(reinterpret_cast<const char*>(c.data.data()),
              static_cast<std::streamsize>(c.data.size() * sizeof(float)));
    if (!out) throw DataError("write_container: stream write failed");
}

inline MapContainer read_container(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMapMagic, 8) != 0)
        throw DataError("read_container: bad magic");
    MapContainer c;
    std::uint8_t kind = 0;
    in.read(reinterpret_cast<char*>(&kind), 1);
    in.read(reinterpret_cast<char*>(&c.rows), 4);
    in.read(reinterpret_cast<char*>(&c.cols), 4);
    if (!in || c.rows == 0 || c.cols == 0 || kind > 3)
        throw DataError("read_container: bad header");
    c.kind = static_cast<ContainerKind>(kind);
    c.data.resize(static_cast<std::size_t>(c.rows) * c.cols);
    in.read(reinterpret_cast<char*>(c.data.data()),
            static_cast<std::streamsize>(c.data.size() * sizeof(float)));
    if (!in) throw DataError("read_container: truncated data");
    return c;
}

inline MapContainer to_container(const RealMatrix& m, ContainerKind kind) {
    MapContainer c;
    c.kind = kind;
    c.rows = static_cast<std::uint32_t>(m.rows());
    c.cols = static_cast<std::uint32_t>(m.cols());
    c.data.resize(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        c.data[i] = static_cast<float>(m.storage()[i]);
    return c;
}

/// Shortest round-trippable decimal form of a double.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Accuracy difference as a percentage with two decimals ("6.00").
inline std::string format_pct(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw DataError("CsvWriter: cannot open " + path);
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
        if (!out_) throw DataError("CsvWriter: write failed");
    }

private:
    std::ofstream out_;
};

/// Minimal CSV reader: no quoting, comma separated, newline rows.
inline std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("read_csv: cannot open " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                cells.push_back(line.substr(start));
                break;
            }
            cells.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

}  // namespace twr

#endif  // TWR_IO_HPP
