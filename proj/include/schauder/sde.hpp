#pragma once

// Pathwise SDEs  dy = b(y) dt + sigma(y) dv  (Stratonovich or Ito).
//
// The solution is computed on the level-K grid of the driver. On a window of
// length lambda = 2^{-k0} the Picard map
//
//   Gamma(y)(t) = y(s) + int_s^t b(y) dr + I(sigma(y), dv)(s, t)  [- 1/2 int Dsigma(y) sigma(y) d[v,v]]
//
// is iterated with both integrals discretised by the trapezoid rule on grid
// cells (the Ito correction by left-point sums), and iterates are compared in
// the paracontrolled distance of the window rescaled to [0, 1]. k0 grows until
// the first window contracts with factor below 1/2.

#include "schauder/ito.hpp"
#include "schauder/processes.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace schauder {

enum class SdeMode { stratonovich, ito };

struct SdeProblem {
    SmoothMap drift;      // R^n -> R^n
    SmoothMap diffusion;  // R^n -> R^{n x d}, row-major; Jacobian entry ((i*d + j)*n + k)
    std::vector<double> y0;
    SampledPath driver;
    LevyArea area;
    std::optional<QuadraticVariation> qv;  // [v, v] on the driver grid, Ito mode only
    SdeMode mode = SdeMode::stratonovich;
    double alpha = 0.45;
};

struct SdeSolution {
    ControlledPath y;
    std::vector<int> picard_iterations;     // per window
    std::vector<double> window_boundaries;  // dyadic times, first 0, last 1
    std::vector<double> residuals;          // final distance per window
    int k0 = 0;
    double lambda = 1.0;
    double contraction_factor = 0.0;
};

struct SolveOptions {
    double tol = 1e-8;
    int max_iter = 200;
    int max_halvings = 6;
};

/// sigma(y) = theta y on the scalar line.
[[nodiscard]] inline SmoothMap gbm_diffusion(double theta) { return SmoothMap::linear({theta}, 1, 1); }

[[nodiscard]] inline SmoothMap zero_drift(std::size_t n) {
    return SmoothMap::constant(std::vector<double>(n, 0.0), n);
}

namespace detail {

struct SdeGrid {
    SampledPath v;                  // driver at level K
    std::optional<SampledPath> q;   // [v, v] at level K
};

class PicardWindow {
public:
    PicardWindow(const SdeProblem& problem, const SdeGrid& grid, std::size_t begin, std::size_t end)
        : problem_(problem), grid_(grid), begin_(begin), end_(end) {
        const std::size_t cells = end - begin;
        int level = 0;
        while ((std::size_t{1} << level) < cells) ++level;
        window_grid_ = DyadicGrid(level);
        const std::size_t d = grid.v.dims();
        v_window_ = SampledPath(window_grid_, d);
        for (std::size_t i = 0; i <= cells; ++i)
            for (std::size_t j = 0; j < d; ++j) v_window_(i, j) = grid.v(begin + i, j) - grid.v(begin, j);
    }

    [[nodiscard]] std::size_t points() const noexcept { return end_ - begin_ + 1; }

    /// Gamma(y) for a window path y (points() rows, n columns) started at y_start.
    [[nodiscard]] SampledPath apply(const SampledPath& y) const {
        const std::size_t n = problem_.y0.size();
        const std::size_t d = grid_.v.dims();
        const double dt = grid_.v.grid().spacing();
        SampledPath out(window_grid_, n);
        std::vector<double> b0(n), b1(n), s0(n * d), s1(n * d), jac(n * d * n);
        for (std::size_t k = 0; k < n; ++k) out(0, k) = y(0, k);
        problem_.drift.value(y.row(0), b1);
        problem_.diffusion.value(y.row(0), s1);
        for (std::size_t r = 0; r + 1 < points(); ++r) {
            b0.swap(b1);
            s0.swap(s1);
            problem_.drift.value(y.row(r + 1), b1);
            problem_.diffusion.value(y.row(r + 1), s1);
            auto dv0 = grid_.v.row(begin_ + r), dv1 = grid_.v.row(begin_ + r + 1);
            for (std::size_t i = 0; i < n; ++i) {
                double inc = 0.5 * (b0[i] + b1[i]) * dt;
                for (std::size_t j = 0; j < d; ++j) inc += 0.5 * (s0[i * d + j] + s1[i * d + j]) * (dv1[j] - dv0[j]);
                out(r + 1, i) = out(r, i) + inc;
            }
            if (problem_.mode == SdeMode::ito) {
                problem_.diffusion.jacobian(y.row(r), jac);
                auto q0 = grid_.q->row(begin_ + r), q1 = grid_.q->row(begin_ + r + 1);
                for (std::size_t i = 0; i < n; ++i) {
                    double corr = 0.0;
                    for (std::size_t j = 0; j < d; ++j)
                        for (std::size_t l = 0; l < d; ++l) {
                            double g = 0.0;  // (sigma^{ij})^{v,l} = sum_k d_k sigma^{ij} sigma^{kl}
                            for (std::size_t k = 0; k < n; ++k) g += jac[(i * d + j) * n + k] * s0[k * d + l];
                            corr += g * (q1[j * d + l] - q0[j * d + l]);
                        }
                    out(r + 1, i) -= 0.5 * corr;
                }
            }
        }
        out.validate();
        return out;
    }

    [[nodiscard]] ControlledPath controlled(const SampledPath& y) const {
        return {y, schauder::apply(problem_.diffusion, y), v_window_, problem_.alpha, problem_.alpha};
    }

    [[nodiscard]] double distance(const SampledPath& a, const SampledPath& b) const {
        return paracontrolled_distance(controlled(a), controlled(b));
    }

    [[nodiscard]] SampledPath constant(std::span<const double> start) const {
        SampledPath y(window_grid_, start.size());
        for (std::size_t i = 0; i < y.size(); ++i) std::copy(start.begin(), start.end(), y.row(i).begin());
        return y;
    }

private:
    const SdeProblem& problem_;
    const SdeGrid& grid_;
    std::size_t begin_, end_;
    DyadicGrid window_grid_;
    SampledPath v_window_;
};

inline void validate_problem(const SdeProblem& problem, int level) {
    const std::size_t n = problem.y0.size();
    const std::size_t d = problem.driver.dims();
    if (n == 0) throw ValidationError("initial value is empty");
    if (problem.drift.in_dim != n || problem.drift.out_dim != n) throw ShapeError("drift must map R^n to R^n");
    if (problem.diffusion.in_dim != n || problem.diffusion.out_dim != n * d) {
        throw ShapeError("diffusion must map R^n to n x d matrices");
    }
    if (!problem.drift.value || !problem.diffusion.value || !problem.diffusion.jacobian) {
        throw ValidationError("drift and diffusion need value callbacks and a diffusion Jacobian");
    }
    if (level < 1 || level > problem.driver.level()) {
        throw IndexError("solver level " + std::to_string(level) + " outside [1, " +
                         std::to_string(problem.driver.level()) + "]");
    }
    if (problem.area.level > 0 && problem.area.value.grid() != problem.driver.grid()) {
        throw ShapeError("area and driver live on different grids");
    }
    if (problem.mode == SdeMode::ito) {
        if (!problem.qv) throw ValidationError("Ito mode needs the quadratic variation of the driver");
        if (problem.qv->values.grid() != problem.driver.grid() || problem.qv->values.dims() != d * d) {
            throw ShapeError("quadratic variation does not match the driver");
        }
    }
    if (!(problem.alpha > 1.0 / 3.0 && problem.alpha < 1.0)) {
        throw ValidationError("alpha must lie in (1/3, 1)");
    }
}

}  // namespace detail

[[nodiscard]] inline SdeSolution solve(const SdeProblem& problem, int level, const SolveOptions& options = {}) {
    detail::validate_problem(problem, level);
    if (!(options.tol > 0.0)) throw ValidationError("tolerance must be positive");
    const std::size_t n = problem.y0.size();
    detail::SdeGrid grid{problem.driver.restrict_to(level), std::nullopt};
    if (problem.mode == SdeMode::ito) grid.q = problem.qv->values.restrict_to(level);

    SdeSolution sol;
    // Choose the window length from the contraction of the first window.
    int k0 = 0;
    for (;; ++k0) {
        if (k0 > options.max_halvings || k0 >= level) {
            throw NonContractionError("no contraction on the first window after " + std::to_string(k0 - 1) +
                                      " halvings (last factor " + std::to_string(sol.contraction_factor) + ")");
        }
        const std::size_t cells = std::size_t{1} << (level - k0);
        detail::PicardWindow window(problem, grid, 0, cells);
        const SampledPath y0 = window.constant(problem.y0);
        const SampledPath y1 = window.apply(y0);
        const SampledPath y2 = window.apply(y1);
        const double d1 = window.distance(y1, y0);
        const double d2 = window.distance(y2, y1);
        sol.contraction_factor = d1 > 0.0 ? d2 / d1 : 0.0;
        if (sol.contraction_factor < 0.5) break;
    }
    sol.k0 = k0;
    sol.lambda = std::ldexp(1.0, -k0);

    const std::size_t cells = std::size_t{1} << (level - k0);
    const std::size_t windows = std::size_t{1} << k0;
    SampledPath y(DyadicGrid(level), n);
    std::vector<double> start = problem.y0;
    sol.window_boundaries.push_back(0.0);
    for (std::size_t w = 0; w < windows; ++w) {
        detail::PicardWindow window(problem, grid, w * cells, (w + 1) * cells);
        SampledPath current = window.constant(start);
        double residual = 0.0;
        int iterations = 0;
        while (true) {
            SampledPath next = window.apply(current);
            residual = window.distance(next, current);
            ++iterations;
            current = std::move(next);
            if (residual < options.tol) break;
            if (iterations >= options.max_iter) {
                throw ConvergenceError("Picard iteration did not reach tolerance on window " + std::to_string(w),
                                       residual);
            }
        }
        for (std::size_t i = 0; i < window.points(); ++i)
            for (std::size_t k = 0; k < n; ++k) y(w * cells + i, k) = current(i, k);
        auto last = current.row(current.size() - 1);
        start.assign(last.begin(), last.end());
        sol.picard_iterations.push_back(iterations);
        sol.residuals.push_back(residual);
        sol.window_boundaries.push_back(static_cast<double>(w + 1) * sol.lambda);
    }
    SampledPath sigma = apply(problem.diffusion, y);
    sol.y = ControlledPath(std::move(y), std::move(sigma), grid.v, problem.alpha, problem.alpha);
    return sol;
}

/// ||y - y~||_inf / (||v - v~||_alpha + ||L - L~||_{2 alpha} + |y0 - y~0|); 0 when both vanish.
[[nodiscard]] inline double solution_sensitivity(const SdeProblem& problem, const SdeProblem& perturbed, int level,
                                                 const SolveOptions& options = {}) {
    const SdeSolution a = solve(problem, level, options);
    const SdeSolution b = solve(perturbed, level, options);
    const double num = (a.y.f() - b.y.f()).sup_norm();
    double den = holder_norm(problem.driver - perturbed.driver, problem.alpha);
    if (problem.area.value.grid() == perturbed.area.value.grid() &&
        problem.area.value.dims() == perturbed.area.value.dims()) {
        den += holder_norm(problem.area.value - perturbed.area.value, 2.0 * problem.alpha);
    }
    double dy = 0.0;
    for (std::size_t k = 0; k < problem.y0.size(); ++k) dy += std::pow(problem.y0[k] - perturbed.y0[k], 2);
    den += std::sqrt(dy);
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
}

}  // namespace schauder
