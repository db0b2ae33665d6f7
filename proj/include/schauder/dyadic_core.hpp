#pragma once

// Dyadic grids, sampled paths and the Schauder (Faber-Schauder) transform.
//
// A path sampled on the level-N dyadic grid {j 2^-N} is expanded as
//
//   f = c_init + c_00 t + sum_{p=0}^{N-1} sum_{m=1}^{2^p} f_pm phi_pm(t),
//
// where phi_pm is the tent supported on [(m-1)2^-p, m 2^-p] with peak 1/2 at
// the midpoint and f_pm = 2 f(t1) - f(t0) - f(t2) is the rescaled second-order
// increment. The expansion truncated after generation p is the piecewise
// linear interpolation of f on the level-(p+1) grid.

#include "schauder/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace schauder {

inline constexpr int kMaxGridLevel = 24;

class DyadicGrid {
public:
    DyadicGrid() = default;

    explicit DyadicGrid(int level) : level_(level) {
        if (level < 0 || level > kMaxGridLevel) {
            throw IndexError("grid level " + std::to_string(level) + " outside [0, " +
                             std::to_string(kMaxGridLevel) + "]");
        }
    }

    [[nodiscard]] int level() const noexcept { return level_; }
    [[nodiscard]] std::size_t intervals() const noexcept { return std::size_t{1} << level_; }
    [[nodiscard]] std::size_t size() const noexcept { return intervals() + 1; }
    [[nodiscard]] double spacing() const noexcept { return std::ldexp(1.0, -level_); }
    [[nodiscard]] double time(std::size_t i) const noexcept {
        return std::ldexp(static_cast<double>(i), -level_);
    }

    [[nodiscard]] std::vector<double> points() const {
        std::vector<double> t(size());
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = time(i);
        return t;
    }

    /// Index on this grid of point i of a coarser grid.
    [[nodiscard]] std::size_t index_of_coarse(std::size_t i, int coarse_level) const noexcept {
        return i << (level_ - coarse_level);
    }

    friend bool operator==(const DyadicGrid&, const DyadicGrid&) = default;

private:
    int level_ = 0;
};

/// A d-dimensional path sampled at the 2^N + 1 points of a dyadic grid.
/// Values are stored row-major: row i holds the d components at time i 2^-N.
class SampledPath {
public:
    SampledPath() = default;

    SampledPath(DyadicGrid grid, std::size_t dims)
        : grid_(grid), dims_(dims), values_(grid.size() * dims, 0.0) {
        if (dims == 0) throw ShapeError("path dimension must be positive");
    }

    SampledPath(DyadicGrid grid, std::size_t dims, std::vector<double> values)
        : grid_(grid), dims_(dims), values_(std::move(values)) {
        if (dims == 0) throw ShapeError("path dimension must be positive");
        if (values_.size() != grid_.size() * dims_) {
            throw ShapeError("expected " + std::to_string(grid_.size() * dims_) +
                             " samples, got " + std::to_string(values_.size()));
        }
        validate();
    }

    /// Samples f on the level-N grid. f is called as f(t, out) with out of length dims.
    template <class F>
    [[nodiscard]] static SampledPath from_function(int level, std::size_t dims, F&& f) {
        SampledPath path(DyadicGrid(level), dims);
        for (std::size_t i = 0; i < path.size(); ++i) f(path.time(i), path.row(i));
        path.validate();
        return path;
    }

    /// Scalar convenience: f(t) -> double.
    template <class F>
    [[nodiscard]] static SampledPath from_scalar(int level, F&& f) {
        return from_function(level, 1, [&](double t, std::span<double> out) { out[0] = f(t); });
    }

    [[nodiscard]] static SampledPath from_components(int level,
                                                     const std::vector<std::vector<double>>& comps) {
        SampledPath path(DyadicGrid(level), comps.size());
        for (std::size_t k = 0; k < comps.size(); ++k) {
            if (comps[k].size() != path.size()) throw ShapeError("component length mismatch");
            for (std::size_t i = 0; i < path.size(); ++i) path(i, k) = comps[k][i];
        }
        path.validate();
        return path;
    }

    [[nodiscard]] const DyadicGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] int level() const noexcept { return grid_.level(); }
    [[nodiscard]] std::size_t dims() const noexcept { return dims_; }
    [[nodiscard]] std::size_t size() const noexcept { return grid_.size(); }
    [[nodiscard]] double time(std::size_t i) const noexcept { return grid_.time(i); }

    [[nodiscard]] double operator()(std::size_t i, std::size_t k) const noexcept {
        return values_[i * dims_ + k];
    }
    [[nodiscard]] double& operator()(std::size_t i, std::size_t k) noexcept {
        return values_[i * dims_ + k];
    }

    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
        return {values_.data() + i * dims_, dims_};
    }
    [[nodiscard]] std::span<double> row(std::size_t i) noexcept {
        return {values_.data() + i * dims_, dims_};
    }

    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

    [[nodiscard]] std::vector<double> component(std::size_t k) const {
        std::vector<double> out(size());
        for (std::size_t i = 0; i < size(); ++i) out[i] = (*this)(i, k);
        return out;
    }

    [[nodiscard]] SampledPath component_path(std::size_t k) const {
        return SampledPath(grid_, 1, component(k));
    }

    /// Throws ValidationError if any sample is not finite.
    void validate() const {
        for (std::size_t j = 0; j < values_.size(); ++j) {
            if (!std::isfinite(values_[j])) {
                throw ValidationError("non-finite sample at row " + std::to_string(j / dims_));
            }
        }
    }

    /// Samples at the points of a coarser grid.
    [[nodiscard]] SampledPath restrict_to(int coarse_level) const {
        if (coarse_level < 0 || coarse_level > level()) {
            throw IndexError("cannot restrict level " + std::to_string(level()) + " to " +
                             std::to_string(coarse_level));
        }
        SampledPath out(DyadicGrid(coarse_level), dims_);
        for (std::size_t i = 0; i < out.size(); ++i) {
            auto src = row(grid_.index_of_coarse(i, coarse_level));
            std::copy(src.begin(), src.end(), out.row(i).begin());
        }
        return out;
    }

    /// Euclidean norm of row i.
    [[nodiscard]] double row_norm(std::size_t i) const noexcept {
        double s = 0.0;
        for (double x : row(i)) s += x * x;
        return std::sqrt(s);
    }

    [[nodiscard]] double sup_norm() const noexcept {
        double m = 0.0;
        for (std::size_t i = 0; i < size(); ++i) m = std::max(m, row_norm(i));
        return m;
    }

    SampledPath& operator+=(const SampledPath& o) {
        require_same_shape(o);
        for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += o.values_[j];
        return *this;
    }
    SampledPath& operator-=(const SampledPath& o) {
        require_same_shape(o);
        for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= o.values_[j];
        return *this;
    }
    SampledPath& operator*=(double s) noexcept {
        for (double& x : values_) x *= s;
        return *this;
    }

    friend SampledPath operator+(SampledPath a, const SampledPath& b) { return a += b; }
    friend SampledPath operator-(SampledPath a, const SampledPath& b) { return a -= b; }
    friend SampledPath operator*(double s, SampledPath a) { return a *= s; }

    void require_same_shape(const SampledPath& o) const {
        if (o.grid_ != grid_ || o.dims_ != dims_) {
            throw ShapeError("path shape mismatch: level " + std::to_string(level()) + " dims " +
                             std::to_string(dims_) + " vs level " + std::to_string(o.level()) +
                             " dims " + std::to_string(o.dims_));
        }
    }

private:
    DyadicGrid grid_;
    std::size_t dims_ = 1;
    std::vector<double> values_ = std::vector<double>(2, 0.0);
};

struct DyadicTimes {
    double t0, t1, t2;
};

/// The times t^0, t^1, t^2 attached to the Schauder index (p, m).
[[nodiscard]] inline DyadicTimes dyadic_times(int p, std::size_t m) {
    if (p == -1 && m == 0) return {0.0, 0.0, 1.0};
    if (p == 0 && m == 0) return {0.0, 1.0, 1.0};
    if (p < 0 || p > 62 || m < 1 || m > (std::size_t{1} << p)) {
        throw IndexError("no Schauder index (" + std::to_string(p) + ", " + std::to_string(m) + ")");
    }
    const auto mm = static_cast<double>(m);
    return {std::ldexp(mm - 1.0, -p), std::ldexp(2.0 * mm - 1.0, -p - 1), std::ldexp(mm, -p)};
}

/// Tent phi_pm with peak 1/2, including the special functions phi_{-1,0} = 1 and
/// phi_{0,0} = t.
[[nodiscard]] inline double schauder_function(int p, std::size_t m, double t) {
    if (p == -1 && m == 0) return 1.0;
    if (p == 0 && m == 0) return t;
    const auto [t0, t1, t2] = dyadic_times(p, m);
    if (t <= t0 || t >= t2) return 0.0;
    const double scale = std::ldexp(1.0, p);
    return t <= t1 ? scale * (t - t0) : scale * (t2 - t);
}

/// Rescaled Haar function chi_pm = d phi_pm / dt (right-continuous).
[[nodiscard]] inline double haar_function(int p, std::size_t m, double t) {
    if (p == -1 && m == 0) return 0.0;
    if (p == 0 && m == 0) return 1.0;
    const auto [t0, t1, t2] = dyadic_times(p, m);
    const double scale = std::ldexp(1.0, p);
    if (t >= t0 && t < t1) return scale;
    if (t >= t1 && t < t2) return -scale;
    return 0.0;
}

/// Schauder coefficients of a d-dimensional path. Generation p holds 2^p
/// d-vectors for m = 1..2^p; the (-1,0) and (0,0) slots are stored separately.
class SchauderCoefficients {
public:
    SchauderCoefficients() = default;

    SchauderCoefficients(int max_level, std::size_t dims)
        : max_level_(max_level), dims_(dims), c_init_(dims, 0.0), c_00_(dims, 0.0) {
        if (dims == 0) throw ShapeError("coefficient dimension must be positive");
        if (max_level < -1 || max_level >= kMaxGridLevel) {
            throw IndexError("max_level " + std::to_string(max_level) + " out of range");
        }
        levels_.resize(static_cast<std::size_t>(max_level + 1));
        for (int p = 0; p <= max_level; ++p) {
            levels_[static_cast<std::size_t>(p)].assign((std::size_t{1} << p) * dims, 0.0);
        }
    }

    /// Highest tent generation present; -1 when only the two special slots exist.
    [[nodiscard]] int max_level() const noexcept { return max_level_; }
    [[nodiscard]] std::size_t dims() const noexcept { return dims_; }

    [[nodiscard]] std::span<const double> c_init() const noexcept { return c_init_; }
    [[nodiscard]] std::span<double> c_init() noexcept { return c_init_; }
    [[nodiscard]] std::span<const double> c_00() const noexcept { return c_00_; }
    [[nodiscard]] std::span<double> c_00() noexcept { return c_00_; }

    /// All coefficients of tent generation p, m-major.
    [[nodiscard]] std::span<const double> level(int p) const {
        check_level(p);
        return levels_[static_cast<std::size_t>(p)];
    }
    [[nodiscard]] std::span<double> level(int p) {
        check_level(p);
        return levels_[static_cast<std::size_t>(p)];
    }

    /// Coefficient f_pm; (-1,0) and (0,0) address the special slots.
    [[nodiscard]] std::span<const double> at(int p, std::size_t m) const {
        if (p == -1 && m == 0) return c_init();
        if (p == 0 && m == 0) return c_00();
        check_index(p, m);
        return level(p).subspan((m - 1) * dims_, dims_);
    }
    [[nodiscard]] std::span<double> at(int p, std::size_t m) {
        if (p == -1 && m == 0) return c_init();
        if (p == 0 && m == 0) return c_00();
        check_index(p, m);
        return level(p).subspan((m - 1) * dims_, dims_);
    }

    friend bool operator==(const SchauderCoefficients&, const SchauderCoefficients&) = default;

private:
    void check_level(int p) const {
        if (p < 0 || p > max_level_) {
            throw IndexError("generation " + std::to_string(p) + " not stored (max_level " +
                             std::to_string(max_level_) + ")");
        }
    }
    void check_index(int p, std::size_t m) const {
        check_level(p);
        if (m < 1 || m > (std::size_t{1} << p)) {
            throw IndexError("position " + std::to_string(m) + " outside generation " +
                             std::to_string(p));
        }
    }

    int max_level_ = -1;
    std::size_t dims_ = 1;
    std::vector<double> c_init_ = {0.0};
    std::vector<double> c_00_ = {0.0};
    std::vector<std::vector<double>> levels_;
};

/// Schauder coefficients of a sampled path. A level-N path resolves tent
/// generations 0..N-1 exactly; the result has max_level N-1.
[[nodiscard]] inline SchauderCoefficients analyze(const SampledPath& path) {
    const int n = path.level();
    const std::size_t d = path.dims();
    SchauderCoefficients c(n - 1, d);
    const std::size_t last = path.size() - 1;
    for (std::size_t k = 0; k < d; ++k) {
        c.c_init()[k] = path(0, k);
        c.c_00()[k] = path(last, k) - path(0, k);
    }
    for (int p = 0; p < n; ++p) {
        const std::size_t stride = std::size_t{1} << (n - p);
        const std::size_t half = stride / 2;
        auto lvl = c.level(p);
        const std::size_t count = std::size_t{1} << p;
        for (std::size_t m = 0; m < count; ++m) {
            const std::size_t i0 = m * stride;
            for (std::size_t k = 0; k < d; ++k) {
                lvl[m * d + k] = 2.0 * path(i0 + half, k) - path(i0, k) - path(i0 + stride, k);
            }
        }
    }
    return c;
}

/// Evaluates S_K f = c_init + c_00 t + sum_{p<=K} Delta_p f on the target grid,
/// where K = min(max_generation, coeffs.max_level()). The partial sum is
/// built by midpoint refinement and is exact at every grid point.
[[nodiscard]] inline SampledPath synthesize(const SchauderCoefficients& coeffs, int target_level,
                                            int max_generation) {
    const std::size_t d = coeffs.dims();
    const int k = std::min(max_generation, coeffs.max_level());
    if (k < -1) throw IndexError("max_generation below -1");
    const DyadicGrid target(target_level);
    if (k == -1) {
        SampledPath out(target, d);
        for (std::size_t i = 0; i < out.size(); ++i)
            for (std::size_t j = 0; j < d; ++j) out(i, j) = coeffs.c_init()[j];
        return out;
    }

    // Values on the level-(k+1) grid by successive midpoint refinement.
    const int built_level = k + 1;
    SampledPath built(DyadicGrid(built_level), d);
    const std::size_t last = built.size() - 1;
    for (std::size_t j = 0; j < d; ++j) {
        built(0, j) = coeffs.c_init()[j];
        built(last, j) = coeffs.c_init()[j] + coeffs.c_00()[j];
    }
    for (int p = 0; p <= k; ++p) {
        const std::size_t stride = std::size_t{1} << (built_level - p);
        const std::size_t half = stride / 2;
        auto lvl = coeffs.level(p);
        const std::size_t count = std::size_t{1} << p;
        for (std::size_t m = 0; m < count; ++m) {
            const std::size_t i0 = m * stride;
            for (std::size_t j = 0; j < d; ++j) {
                built(i0 + half, j) =
                    0.5 * (built(i0, j) + built(i0 + stride, j)) + 0.5 * lvl[m * d + j];
            }
        }
    }
    if (target_level <= built_level) return built.restrict_to(target_level);

    SampledPath out(target, d);
    const std::size_t ratio = std::size_t{1} << (target_level - built_level);
    for (std::size_t c = 0; c + 1 < built.size(); ++c) {
        for (std::size_t r = 0; r <= ratio; ++r) {
            const double w = static_cast<double>(r) / static_cast<double>(ratio);
            for (std::size_t j = 0; j < d; ++j) {
                out(c * ratio + r, j) = (1.0 - w) * built(c, j) + w * built(c + 1, j);
            }
        }
    }
    return out;
}

[[nodiscard]] inline SampledPath synthesize(const SchauderCoefficients& coeffs, int target_level) {
    return synthesize(coeffs, target_level, coeffs.max_level());
}

/// Schauder block Delta_p f on the target grid (p = -1 is the constant f(0),
/// p = 0 includes the linear c_00 t term).
[[nodiscard]] inline SampledPath block(const SchauderCoefficients& coeffs, int p, int target_level) {
    if (p < -1 || p > coeffs.max_level()) {
        throw IndexError("block " + std::to_string(p) + " outside [-1, " +
                         std::to_string(coeffs.max_level()) + "]");
    }
    const std::size_t d = coeffs.dims();
    SampledPath out(DyadicGrid(target_level), d);
    if (p == -1) {
        for (std::size_t i = 0; i < out.size(); ++i)
            for (std::size_t j = 0; j < d; ++j) out(i, j) = coeffs.c_init()[j];
        return out;
    }
    if (p == 0) {
        for (std::size_t i = 0; i < out.size(); ++i)
            for (std::size_t j = 0; j < d; ++j) out(i, j) = coeffs.c_00()[j] * out.time(i);
    }
    const std::size_t count = std::size_t{1} << p;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double t = out.time(i);
        // At most one tent of generation p is non-zero at t.
        const double scaled = std::ldexp(t, p);
        auto m = static_cast<std::size_t>(scaled) + 1;
        if (m > count) m = count;
        const double phi = schauder_function(p, m, t);
        if (phi == 0.0) continue;
        auto c = coeffs.at(p, m);
        for (std::size_t j = 0; j < d; ++j) out(i, j) += c[j] * phi;
    }
    return out;
}

[[nodiscard]] inline SampledPath block(const SchauderCoefficients& coeffs, int p) {
    return block(coeffs, p, coeffs.max_level() + 1);
}

/// S_p f = sum_{q<=p} Delta_q f on the target grid.
[[nodiscard]] inline SampledPath partial_sum(const SchauderCoefficients& coeffs, int p,
                                             int target_level) {
    if (p < -1 || p > coeffs.max_level()) {
        throw IndexError("partial sum " + std::to_string(p) + " outside [-1, " +
                         std::to_string(coeffs.max_level()) + "]");
    }
    return synthesize(coeffs, target_level, p);
}

[[nodiscard]] inline SampledPath partial_sum(const SchauderCoefficients& coeffs, int p) {
    return partial_sum(coeffs, p, coeffs.max_level() + 1);
}

/// Linear interpolation of path between the points of the level-`coarse_level`
/// grid, evaluated on the path's own grid. Equals S_{coarse_level-1} of the path.
[[nodiscard]] inline SampledPath interpolate_from(const SampledPath& path, int coarse_level) {
    if (coarse_level < 0 || coarse_level > path.level()) {
        throw IndexError("interpolation level " + std::to_string(coarse_level) + " outside [0, " +
                         std::to_string(path.level()) + "]");
    }
    if (coarse_level == path.level()) return path;
    const std::size_t d = path.dims();
    SampledPath out(path.grid(), d);
    const std::size_t ratio = std::size_t{1} << (path.level() - coarse_level);
    const std::size_t cells = std::size_t{1} << coarse_level;
    for (std::size_t c = 0; c < cells; ++c) {
        const std::size_t i0 = c * ratio;
        const std::size_t i1 = i0 + ratio;
        for (std::size_t r = 0; r <= ratio; ++r) {
            const double w = static_cast<double>(r) / static_cast<double>(ratio);
            for (std::size_t j = 0; j < d; ++j) {
                out(i0 + r, j) = (1.0 - w) * path(i0, j) + w * path(i1, j);
            }
        }
    }
    return out;
}

/// Constant path equal to the initial value: S_{-1} f.
[[nodiscard]] inline SampledPath initial_value_path(const SampledPath& path) {
    SampledPath out(path.grid(), path.dims());
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = 0; j < path.dims(); ++j) out(i, j) = path(0, j);
    return out;
}

namespace detail {

inline double euclid(std::span<const double> x) noexcept {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

}  // namespace detail

/// The Schauder Hölder functional sup_{p,m} 2^{p alpha} |f_pm|. The two special
/// slots carry weight 1; vector coefficients are measured in the Euclidean norm.
[[nodiscard]] inline double holder_norm(const SchauderCoefficients& coeffs, double alpha) {
    double sup = std::max(detail::euclid(coeffs.c_init()), detail::euclid(coeffs.c_00()));
    const std::size_t d = coeffs.dims();
    for (int p = 0; p <= coeffs.max_level(); ++p) {
        auto lvl = coeffs.level(p);
        double level_max = 0.0;
        for (std::size_t off = 0; off < lvl.size(); off += d) {
            level_max = std::max(level_max, detail::euclid(lvl.subspan(off, d)));
        }
        sup = std::max(sup, std::exp2(p * alpha) * level_max);
    }
    return sup;
}

[[nodiscard]] inline double holder_norm(const SampledPath& path, double alpha) {
    return holder_norm(analyze(path), alpha);
}

struct HolderReport {
    std::vector<double> alpha_grid;
    std::vector<double> weighted_sups;
    std::vector<double> per_level_max;  // index p = 0..max_level
    double estimated_alpha = std::numeric_limits<double>::quiet_NaN();
};

/// Ordinary least-squares slope of y against x.
[[nodiscard]] inline double ols_slope(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

[[nodiscard]] inline std::vector<double> default_alpha_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 19; ++i) grid.push_back(0.1 * i);
    return grid;
}

/// Per-level coefficient maxima, weighted sups over an alpha grid, and the
/// decay exponent estimated by regressing log2(per-level max) on p.
[[nodiscard]] inline HolderReport holder_report(const SchauderCoefficients& coeffs,
                                                std::vector<double> alpha_grid = default_alpha_grid()) {
    HolderReport report;
    report.alpha_grid = std::move(alpha_grid);
    for (double a : report.alpha_grid) report.weighted_sups.push_back(holder_norm(coeffs, a));
    const std::size_t d = coeffs.dims();
    // The regression uses the finer half of the generations: coarse levels hold
    // too few coefficients for their maximum to follow the decay rate.
    const int first_fit = coeffs.max_level() >= 5 ? (coeffs.max_level() + 1) / 2 : 0;
    std::vector<double> xs, ys;
    for (int p = 0; p <= coeffs.max_level(); ++p) {
        auto lvl = coeffs.level(p);
        double level_max = 0.0;
        for (std::size_t off = 0; off < lvl.size(); off += d) {
            level_max = std::max(level_max, detail::euclid(lvl.subspan(off, d)));
        }
        report.per_level_max.push_back(level_max);
        if (level_max > 0.0 && p >= first_fit) {
            xs.push_back(p);
            ys.push_back(std::log2(level_max));
        }
    }
    if (xs.size() >= 3) report.estimated_alpha = -ols_slope(xs, ys);
    return report;
}

}  // namespace schauder
