#pragma once

// Sample paths of Brownian motion and fractional Brownian motion, and
// Levy-area convergence diagnostics.

#include "schauder/operators.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace schauder {

/// Counter-based normal variates. Every draw is a pure function of
/// (seed, stream, component, slot, index), so a coefficient's value does not
/// depend on the order in which coefficients are generated.
///
/// The key is a splitmix64 hash chain over the five fields; a standard
/// normal is produced by Box-Muller from the uniforms hash(key) and
/// hash(key ^ 0xD1B54A32D192ED03).
namespace rng {

enum class Stream : std::uint64_t { brownian = 0x42, fbm = 0x46 };

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

[[nodiscard]] constexpr std::uint64_t key(std::uint64_t seed, Stream stream, std::uint64_t component,
                                          std::uint64_t slot, std::uint64_t index) noexcept {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
    h = splitmix64(h ^ component);
    h = splitmix64(h ^ slot);
    return splitmix64(h ^ index);
}

/// Uniform on (0, 1].
[[nodiscard]] inline double uniform(std::uint64_t k) noexcept {
    return static_cast<double>((splitmix64(k) >> 11) + 1) * 0x1.0p-53;
}

[[nodiscard]] inline double normal(std::uint64_t k) noexcept {
    const double u1 = uniform(k);
    const double u2 = uniform(k ^ 0xD1B54A32D192ED03ULL);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Slot numbering for Schauder indices: (0,0) -> 0, generation p -> p + 1.
[[nodiscard]] constexpr std::uint64_t schauder_slot(int p) noexcept {
    return static_cast<std::uint64_t>(p + 1);
}

}  // namespace rng

/// Brownian coefficients: c_init = 0, c_00 ~ N(0, I), f_pm = 2^{-p/2} xi_pm.
[[nodiscard]] inline SchauderCoefficients brownian_coefficients(int max_level, std::size_t dims,
                                                                std::uint64_t seed) {
    SchauderCoefficients c(max_level, dims);
    for (std::size_t k = 0; k < dims; ++k) c.c_00()[k] = rng::normal(rng::key(seed, rng::Stream::brownian, k, 0, 0));
    for (int p = 0; p <= max_level; ++p) {
        const double scale = std::exp2(-0.5 * p);
        for (std::size_t m = 1; m <= (std::size_t{1} << p); ++m) {
            auto slot = c.at(p, m);
            for (std::size_t k = 0; k < dims; ++k) {
                slot[k] = scale * rng::normal(rng::key(seed, rng::Stream::brownian, k, rng::schauder_slot(p), m));
            }
        }
    }
    return c;
}

/// Levy-Ciesielski Brownian motion sampled on the level-N grid.
[[nodiscard]] inline SampledPath brownian_path(int level, std::size_t dims, std::uint64_t seed) {
    if (level < 1) throw ValidationError("Brownian paths need level >= 1");
    if (dims == 0) throw ValidationError("dimension must be positive");
    return synthesize(brownian_coefficients(level - 1, dims, seed), level);
}

using Covariance = std::function<double(double, double)>;

/// R(s,t) = 1/2 (t^{2H} + s^{2H} - |t - s|^{2H}).
[[nodiscard]] inline Covariance fbm_covariance(double hurst) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw ValidationError("Hurst index must lie in (0, 1)");
    return [h2 = 2.0 * hurst](double s, double t) {
        return 0.5 * (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
    };
}

/// Covariance of the increments over [s0, s1] and [t0, t1].
[[nodiscard]] inline double rectangle_increment(const Covariance& r, double s0, double s1, double t0, double t1) {
    return r(s1, t1) - r(s1, t0) - r(s0, t1) + r(s0, t0);
}

inline constexpr int kMaxFbmLevel = 12;

/// Exact Gaussian sampler on the level-N grid: the increment covariance is
/// factored once and reused for every seed.
class FbmGenerator {
public:
    FbmGenerator(int level, double hurst) : level_(level), hurst_(hurst) {
        if (level < 1 || level > kMaxFbmLevel) {
            throw ValidationError("fBm level must lie in [1, " + std::to_string(kMaxFbmLevel) + "]");
        }
        const auto r = fbm_covariance(hurst);
        const DyadicGrid grid(level);
        const auto n = static_cast<Eigen::Index>(grid.intervals());
        Eigen::MatrixXd cov(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j <= i; ++j) {
                const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
                cov(i, j) = cov(j, i) =
                    rectangle_increment(r, grid.time(ui), grid.time(ui + 1), grid.time(uj), grid.time(uj + 1));
            }
        factor_ = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(cov);
        if (factor_->info() != Eigen::Success) {
            const double jitter = 1e-12 * cov.diagonal().maxCoeff();
            cov.diagonal().array() += jitter;
            factor_ = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(cov);
            if (factor_->info() != Eigen::Success) {
                throw FactorizationError("fBm increment covariance is not positive definite");
            }
        }
    }

    [[nodiscard]] int level() const noexcept { return level_; }
    [[nodiscard]] double hurst() const noexcept { return hurst_; }

    [[nodiscard]] SampledPath sample(std::size_t dims, std::uint64_t seed) const {
        if (dims == 0) throw ValidationError("dimension must be positive");
        const DyadicGrid grid(level_);
        const auto n = static_cast<Eigen::Index>(grid.intervals());
        SampledPath path(grid, dims);
        Eigen::VectorXd xi(n);
        for (std::size_t k = 0; k < dims; ++k) {
            for (Eigen::Index i = 0; i < n; ++i) {
                xi(i) = rng::normal(rng::key(seed, rng::Stream::fbm, k, 0, static_cast<std::uint64_t>(i)));
            }
            const Eigen::VectorXd inc = factor_->matrixL() * xi;
            double x = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                x += inc(i);
                path(static_cast<std::size_t>(i) + 1, k) = x;
            }
        }
        return path;
    }

private:
    int level_;
    double hurst_;
    std::shared_ptr<Eigen::LLT<Eigen::MatrixXd>> factor_;
};

[[nodiscard]] inline SampledPath fbm_path(int level, double hurst, std::size_t dims, std::uint64_t seed) {
    return FbmGenerator(level, hurst).sample(dims, seed);
}

/// L(S_{K-1} X, S_{K-1} X) for K = k_min..k_max with per-level deltas and
/// 2 alpha-weighted norms. The returned value is the k_max area.
[[nodiscard]] inline LevyArea levy_area_sequence(const SampledPath& x, int k_min, int k_max, double alpha) {
    if (k_min < 0 || k_min > k_max) throw ValidationError("need 0 <= k_min <= k_max");
    if (k_max > x.level()) throw IndexError("k_max exceeds the path level");
    const std::size_t d = x.dims();
    const auto layout = ProductLayout::make(Product::outer, d, d);
    LevyArea area;
    area.level = k_max;
    area.k_min = k_min;
    area.degenerate = d < 2;
    area.value = SampledPath(x.grid(), d * d);
    SampledPath previous = area.value;  // L_{K-1}
    auto record = [&](int k) {
        if (k < k_min) return;
        area.deltas.push_back((area.value - previous).sup_norm());
        area.weighted_norms.push_back(holder_norm(area.value, 2.0 * alpha));
    };
    // L_0 = L_1 = 0; term p moves L_p to L_{p+1}.
    record(0);
    if (k_max >= 1) record(1);
    if (!area.degenerate && k_max >= 2) {
        SampledPath lower = interpolate_from(x, 1);
        for (int p = 1; p < k_max; ++p) {
            SampledPath upper = interpolate_from(x, p + 1);
            previous = area.value;
            detail::accumulate_integral(area.value, upper - lower, lower, layout, detail::Integrand::left);
            detail::accumulate_integral(area.value, lower, upper - lower, layout, detail::Integrand::right, -1.0);
            record(p + 1);
            lower = std::move(upper);
        }
    } else {
        for (int k = 2; k <= k_max; ++k) record(k);
    }
    const std::size_t h = area.deltas.size();
    area.converged = h < 3 || (area.deltas[h - 3] > area.deltas[h - 2] && area.deltas[h - 2] > area.deltas[h - 1]);
    if (area.degenerate) area.converged = true;
    return area;
}

/// max over grid-aligned intervals [s,t] at the given level of
/// sum_{i,j} |R_rect(cell_i, cell_j)|^rho / |t - s|.
[[nodiscard]] inline double rho_var_statistic(const Covariance& r, int level, double rho) {
    if (!(rho > 0.0)) throw ValidationError("rho must be positive");
    const DyadicGrid grid(level);
    const std::size_t n = grid.intervals();
    // prefix[(a)(n+1) + b] = sum_{i<a, j<b} |rect_ij|^rho
    std::vector<double> prefix((n + 1) * (n + 1), 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double v = std::pow(
                std::abs(rectangle_increment(r, grid.time(i), grid.time(i + 1), grid.time(j), grid.time(j + 1))), rho);
            prefix[(i + 1) * (n + 1) + j + 1] =
                v + prefix[i * (n + 1) + j + 1] + prefix[(i + 1) * (n + 1) + j] - prefix[i * (n + 1) + j];
        }
    double sup = 0.0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b <= n; ++b) {
            const double mass = prefix[b * (n + 1) + b] - prefix[a * (n + 1) + b] - prefix[b * (n + 1) + a] +
                                prefix[a * (n + 1) + a];
            sup = std::max(sup, mass / (grid.time(b) - grid.time(a)));
        }
    return sup;
}

[[nodiscard]] inline double rho_var_statistic(double hurst, int level, double rho) {
    return rho_var_statistic(fbm_covariance(hurst), level, rho);
}

}  // namespace schauder
