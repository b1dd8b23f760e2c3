#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "cone_domain.hpp"
#include "error.hpp"

namespace conemt {

// 17 significant digits round-trips every double.
inline std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Plain CSV with a header row and LF line endings.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : columns_(header.size())
    {
        row(header);
    }

    void row(const std::vector<std::string>& cells)
    {
        if (cells.size() != columns_) throw ShapeError("CsvWriter: wrong number of cells");
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) out_ << ',';
            out_ << cells[k];
        }
        out_ << '\n';
    }

    void row(std::initializer_list<double> cells)
    {
        std::vector<std::string> s;
        for (double c : cells) s.push_back(fmt(c));
        row(s);
    }

    std::string str() const { return out_.str(); }

    void save(const std::string& path) const
    {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw FileError("cannot open for writing: " + path);
        f << out_.str();
        if (!f) throw FileError("write failed: " + path);
    }

private:
    std::size_t columns_;
    std::ostringstream out_;
};

inline void write_csv(const GridFunction& u, const std::string& path)
{
    const LogGrid& g = u.grid();
    CsvWriter w({"r", "y", "value"});
    for (std::size_t i = 0; i < g.nr(); ++i)
        for (std::size_t j = 0; j < g.ny(); ++j) w.row({g.r(i), g.y(j), u.at(i, j)});
    w.save(path);
}

namespace detail {

template <class T>
void put_le(std::ostream& os, T v)
{
    static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t k = 0; k < sizeof(T) / 2; ++k) std::swap(b[k], b[sizeof(T) - 1 - k]);
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& is, const std::string& path)
{
    unsigned char b[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw FileError("truncated binary grid file: " + path);
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t k = 0; k < sizeof(T) / 2; ++k) std::swap(b[k], b[sizeof(T) - 1 - k]);
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

}  // namespace detail

// header: uint64 nr, uint64 ny, float64 r_max, uint32 kind; then nr*ny float64 values
inline void write_binary(const GridFunction& u, const std::string& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FileError("cannot open for writing: " + path);
    const LogGrid& g = u.grid();
    detail::put_le<std::uint64_t>(f, g.nr());
    detail::put_le<std::uint64_t>(f, g.ny());
    detail::put_le<double>(f, g.domain().r_max);
    detail::put_le<std::uint32_t>(f, static_cast<std::uint32_t>(g.domain().kind));
    for (double v : u.values()) detail::put_le<double>(f, v);
    if (!f) throw FileError("write failed: " + path);
}

inline GridFunction read_binary(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FileError("cannot open for reading: " + path);
    auto nr = detail::get_le<std::uint64_t>(f, path);
    auto ny = detail::get_le<std::uint64_t>(f, path);
    auto r_max = detail::get_le<double>(f, path);
    auto kind = detail::get_le<std::uint32_t>(f, path);
    if (kind > 1) throw FileError("unknown domain kind in " + path);
    if (nr < 3 || ny < 3 || nr > (1u << 20) || ny > (1u << 20)) throw FileError("bad grid shape in " + path);
    LogGrid g(ConeDomain(static_cast<DomainKind>(kind), r_max), nr, ny);
    std::vector<double> v(g.size());
    for (double& x : v) x = detail::get_le<double>(f, path);
    return GridFunction(g, std::move(v));
}

}  // namespace conemt
