#pragma once

// Locale-independent CSV for sampled paths and JSON for coefficient sets.

#include "schauder/dyadic_core.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

namespace schauder::io {

/// Shortest decimal that round-trips to the same double.
[[nodiscard]] inline std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) throw ValidationError("cannot format value");
    return {buf, ptr};
}

/// Exact decimal expansion of a level-N dyadic time (N fractional digits suffice).
[[nodiscard]] inline std::string format_dyadic(double t, int level) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, t, std::chars_format::fixed, level);
    if (ec != std::errc{}) throw ValidationError("cannot format time");
    return {buf, ptr};
}

[[nodiscard]] inline double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ValidationError("not a number: '" + std::string(s) + "'");
    }
    return x;
}

inline void write_csv(std::ostream& os, const SampledPath& path,
                      const std::vector<std::string>& column_names = {}) {
    const std::size_t d = path.dims();
    if (!column_names.empty() && column_names.size() != d) {
        throw ShapeError("column name count does not match path dimension");
    }
    os << 't';
    for (std::size_t k = 0; k < d; ++k) {
        os << ',' << (column_names.empty() ? "x" + std::to_string(k + 1) : column_names[k]);
    }
    os << '\n';
    for (std::size_t i = 0; i < path.size(); ++i) {
        os << format_dyadic(path.time(i), path.level());
        for (std::size_t k = 0; k < d; ++k) os << ',' << format_double(path(i, k));
        os << '\n';
    }
}

[[nodiscard]] inline std::string to_csv(const SampledPath& path) {
    std::ostringstream os;
    write_csv(os, path);
    return os.str();
}

inline void save_csv(const std::string& filename, const SampledPath& path) {
    std::ofstream os(filename, std::ios::binary);
    if (!os) throw ValidationError("cannot open '" + filename + "' for writing");
    write_csv(os, path);
    if (!os) throw ValidationError("write to '" + filename + "' failed");
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline int level_from_rows(std::size_t rows) {
    for (int n = 0; n <= kMaxGridLevel; ++n) {
        if ((std::size_t{1} << n) + 1 == rows) return n;
    }
    throw ValidationError("row count " + std::to_string(rows) + " is not 2^N + 1");
}

}  // namespace detail

/// Reads a path CSV with header `t,x1,...,xd`. The times must be the dyadic grid.
[[nodiscard]] inline SampledPath read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("empty CSV input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = detail::split(line, ',');
    if (header.size() < 2 || header[0] != "t") {
        throw ValidationError("CSV header must start with 't' and name at least one column");
    }
    const std::size_t d = header.size() - 1;
    std::vector<double> times;
    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = detail::split(line, ',');
        if (cells.size() != d + 1) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(d + 1) + " fields");
        }
        times.push_back(parse_double(cells[0]));
        for (std::size_t k = 1; k <= d; ++k) values.push_back(parse_double(cells[k]));
    }
    const int level = detail::level_from_rows(times.size());
    const DyadicGrid grid(level);
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] != grid.time(i)) {
            throw ValidationError("line " + std::to_string(i + 2) + ": time " +
                                  format_double(times[i]) + " is not the dyadic point " +
                                  format_dyadic(grid.time(i), level));
        }
    }
    return SampledPath(grid, d, std::move(values));
}

[[nodiscard]] inline SampledPath load_csv(const std::string& filename) {
    std::ifstream is(filename, std::ios::binary);
    if (!is) throw ValidationError("cannot open '" + filename + "'");
    return read_csv(is);
}

[[nodiscard]] inline nlohmann::json to_json(const SchauderCoefficients& c) {
    using nlohmann::json;
    auto vec = [](std::span<const double> s) { return json(std::vector<double>(s.begin(), s.end())); };
    json levels = json::array();
    const std::size_t d = c.dims();
    for (int p = 0; p <= c.max_level(); ++p) {
        json lvl = json::array();
        auto data = c.level(p);
        for (std::size_t off = 0; off < data.size(); off += d) lvl.push_back(vec(data.subspan(off, d)));
        levels.push_back(std::move(lvl));
    }
    return json{{"max_level", c.max_level()},
                {"dims", d},
                {"c_init", vec(c.c_init())},
                {"c_00", vec(c.c_00())},
                {"levels", std::move(levels)}};
}

[[nodiscard]] inline SchauderCoefficients coefficients_from_json(const nlohmann::json& j) {
    try {
        const int max_level = j.at("max_level").get<int>();
        const auto d = j.at("dims").get<std::size_t>();
        SchauderCoefficients c(max_level, d);
        auto fill = [d](const nlohmann::json& arr, std::span<double> out) {
            const auto v = arr.get<std::vector<double>>();
            if (v.size() != d) throw ShapeError("coefficient vector has wrong dimension");
            std::copy(v.begin(), v.end(), out.begin());
        };
        fill(j.at("c_init"), c.c_init());
        fill(j.at("c_00"), c.c_00());
        const auto& levels = j.at("levels");
        if (levels.size() != static_cast<std::size_t>(max_level + 1)) {
            throw ShapeError("levels array does not match max_level");
        }
        for (int p = 0; p <= max_level; ++p) {
            const auto& lvl = levels.at(static_cast<std::size_t>(p));
            if (lvl.size() != (std::size_t{1} << p)) {
                throw ShapeError("generation " + std::to_string(p) + " has wrong length");
            }
            for (std::size_t m = 1; m <= lvl.size(); ++m) fill(lvl.at(m - 1), c.at(p, m));
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed coefficient JSON: ") + e.what());
    }
}

}  // namespace schauder::io
