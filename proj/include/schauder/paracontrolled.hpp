#pragma once

// Paracontrolled paths, composition with smooth maps, the commutator and the
// rough integral.

#include "schauder/operators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace schauder {

/// A map R^in -> R^out with its Jacobian (out x in, row-major) and an optional
/// Hessian (out x in x in).
struct SmoothMap {
    using Eval = std::function<void(std::span<const double>, std::span<double>)>;

    std::size_t in_dim = 1;
    std::size_t out_dim = 1;
    Eval value;
    Eval jacobian;
    Eval hessian;

    [[nodiscard]] static SmoothMap identity(std::size_t n) {
        return {n, n,
                [](std::span<const double> x, std::span<double> y) { std::copy(x.begin(), x.end(), y.begin()); },
                [n](std::span<const double>, std::span<double> j) {
                    std::fill(j.begin(), j.end(), 0.0);
                    for (std::size_t k = 0; k < n; ++k) j[k * n + k] = 1.0;
                },
                [](std::span<const double>, std::span<double> h) { std::fill(h.begin(), h.end(), 0.0); }};
    }

    /// Scalar map from a function and its first two derivatives.
    [[nodiscard]] static SmoothMap from_scalar(std::function<double(double)> f,
                                               std::function<double(double)> df,
                                               std::function<double(double)> d2f = {}) {
        SmoothMap m{1, 1,
                    [f](std::span<const double> x, std::span<double> y) { y[0] = f(x[0]); },
                    [df](std::span<const double> x, std::span<double> j) { j[0] = df(x[0]); },
                    {}};
        if (d2f) m.hessian = [d2f](std::span<const double> x, std::span<double> h) { h[0] = d2f(x[0]); };
        return m;
    }

    [[nodiscard]] static SmoothMap square() {
        return from_scalar([](double x) { return x * x; }, [](double x) { return 2.0 * x; },
                           [](double) { return 2.0; });
    }

    [[nodiscard]] static SmoothMap constant(std::vector<double> c, std::size_t in_dim) {
        const std::size_t out = c.size();
        return {in_dim, out,
                [c](std::span<const double>, std::span<double> y) { std::copy(c.begin(), c.end(), y.begin()); },
                [](std::span<const double>, std::span<double> j) { std::fill(j.begin(), j.end(), 0.0); },
                [](std::span<const double>, std::span<double> h) { std::fill(h.begin(), h.end(), 0.0); }};
    }

    /// x -> A x with A out x in, row-major.
    [[nodiscard]] static SmoothMap linear(std::vector<double> a, std::size_t out_dim, std::size_t in_dim) {
        if (a.size() != out_dim * in_dim) throw ShapeError("linear map has wrong number of entries");
        return {in_dim, out_dim,
                [a, out_dim, in_dim](std::span<const double> x, std::span<double> y) {
                    for (std::size_t i = 0; i < out_dim; ++i) {
                        double s = 0.0;
                        for (std::size_t k = 0; k < in_dim; ++k) s += a[i * in_dim + k] * x[k];
                        y[i] = s;
                    }
                },
                [a](std::span<const double>, std::span<double> j) { std::copy(a.begin(), a.end(), j.begin()); },
                [](std::span<const double>, std::span<double> h) { std::fill(h.begin(), h.end(), 0.0); }};
    }
};

/// Applies F row by row.
[[nodiscard]] inline SampledPath apply(const SmoothMap& F, const SampledPath& x) {
    if (x.dims() != F.in_dim) throw ShapeError("map input dimension does not match path");
    SampledPath out(x.grid(), F.out_dim);
    for (std::size_t i = 0; i < x.size(); ++i) F.value(x.row(i), out.row(i));
    out.validate();
    return out;
}

/// Jacobian of F along x: an (out x in)-matrix path.
[[nodiscard]] inline SampledPath apply_jacobian(const SmoothMap& F, const SampledPath& x) {
    if (x.dims() != F.in_dim) throw ShapeError("map input dimension does not match path");
    SampledPath out(x.grid(), F.out_dim * F.in_dim);
    for (std::size_t i = 0; i < x.size(); ++i) F.jacobian(x.row(i), out.row(i));
    out.validate();
    return out;
}

/// A path f controlled by v: f = pi_<(f^v, v) + f#, with f^v an (n x d)-matrix path.
class ControlledPath {
public:
    ControlledPath() = default;

    ControlledPath(SampledPath f, SampledPath derivative, SampledPath reference, double alpha, double beta)
        : f_(std::move(f)), derivative_(std::move(derivative)), reference_(std::move(reference)),
          alpha_(alpha), beta_(beta) {
        detail::require_common_grid(f_, reference_);
        detail::require_common_grid(f_, derivative_);
        const std::size_t n = f_.dims();
        const std::size_t d = reference_.dims();
        if (derivative_.dims() == 1 && n * d != 1) {
            if (n != d) throw ShapeError("scalar derivative needs dim f == dim v");
            SampledPath expanded(f_.grid(), n * d);
            for (std::size_t i = 0; i < f_.size(); ++i)
                for (std::size_t k = 0; k < n; ++k) expanded(i, k * d + k) = derivative_(i, 0);
            derivative_ = std::move(expanded);
        }
        if (derivative_.dims() != n * d) {
            throw ShapeError("derivative has " + std::to_string(derivative_.dims()) + " entries, expected " +
                             std::to_string(n * d));
        }
        if (!(alpha > 0.0 && beta > 0.0 && alpha + beta < 2.0)) {
            throw ValidationError("exponents must satisfy alpha, beta > 0 and alpha + beta < 2");
        }
        remainder_ = f_ - paraproduct(derivative_, reference_).value;
    }

    [[nodiscard]] const SampledPath& f() const noexcept { return f_; }
    [[nodiscard]] const SampledPath& derivative() const noexcept { return derivative_; }
    [[nodiscard]] const SampledPath& reference() const noexcept { return reference_; }
    [[nodiscard]] const SampledPath& remainder() const noexcept { return remainder_; }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double beta() const noexcept { return beta_; }
    [[nodiscard]] std::size_t dims() const noexcept { return f_.dims(); }
    [[nodiscard]] int level() const noexcept { return f_.level(); }

    /// ||f^v||_beta and ||f#||_{alpha+beta}.
    [[nodiscard]] double derivative_norm() const { return holder_norm(derivative_, beta_); }
    [[nodiscard]] double remainder_norm() const { return holder_norm(remainder_, alpha_ + beta_); }
    [[nodiscard]] double norm() const { return derivative_norm() + remainder_norm(); }

private:
    SampledPath f_;
    SampledPath derivative_;
    SampledPath reference_;
    SampledPath remainder_;
    double alpha_ = 0.5;
    double beta_ = 0.5;
};

[[nodiscard]] inline ControlledPath make_controlled(SampledPath f, SampledPath f_v, SampledPath v,
                                                    double alpha, double beta) {
    return {std::move(f), std::move(f_v), std::move(v), alpha, beta};
}

/// ||x^v - y^v||_beta + ||x# - y#||_{alpha+beta}, using x's exponents.
[[nodiscard]] inline double paracontrolled_distance(const ControlledPath& x, const ControlledPath& y) {
    return holder_norm(x.derivative() - y.derivative(), x.beta()) +
           holder_norm(x.remainder() - y.remainder(), x.alpha() + x.beta());
}

/// (F(f), DF(f) f^v) controlled by the same reference.
[[nodiscard]] inline ControlledPath compose_smooth(const SmoothMap& F, const ControlledPath& x) {
    const std::size_t n = x.dims();
    const std::size_t d = x.reference().dims();
    if (F.in_dim != n) throw ShapeError("map input dimension does not match controlled path");
    SampledPath value = apply(F, x.f());
    SampledPath derivative(x.f().grid(), F.out_dim * d);
    std::vector<double> jac(F.out_dim * n);
    for (std::size_t i = 0; i < x.f().size(); ++i) {
        F.jacobian(x.f().row(i), jac);
        auto fv = x.derivative().row(i);
        auto out = derivative.row(i);
        for (std::size_t a = 0; a < F.out_dim; ++a)
            for (std::size_t l = 0; l < d; ++l) {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) s += jac[a * n + k] * fv[k * d + l];
                out[a * d + l] = s;
            }
    }
    derivative.validate();
    return {std::move(value), std::move(derivative), x.reference(), x.alpha(), x.beta()};
}

namespace detail {

/// Scalar commutator L_K(pi_<(f, v), w) - int f dA with A = L_K(v, w) given.
inline SampledPath commutator_with_area(const SampledPath& f, const SampledPath& v, const SampledPath& w,
                                        const SampledPath& area, int level) {
    SampledPath para = paraproduct(f, v).value;
    SampledPath out = levy_area_partial(para, w, level).value;
    out -= left_point_integral(f, area);
    return out;
}

}  // namespace detail

/// C_K(f, v, w) = L_K(pi_<(f, v), w) - int f dL_K(v, w), componentwise over all
/// entries of f, v, w. Entry (a*dv + b)*dw + c is C(f^a, v^b, w^c).
[[nodiscard]] inline SampledPath commutator(const SampledPath& f, const SampledPath& v, const SampledPath& w,
                                            int level) {
    detail::require_common_grid(f, v);
    detail::require_common_grid(f, w);
    detail::require_level(f, level);
    const std::size_t fa = f.dims(), dv = v.dims(), dw = w.dims();
    SampledPath out(f.grid(), fa * dv * dw);
    std::vector<SampledPath> fc, vc, wc;
    for (std::size_t a = 0; a < fa; ++a) fc.push_back(f.component_path(a));
    for (std::size_t b = 0; b < dv; ++b) vc.push_back(v.component_path(b));
    for (std::size_t c = 0; c < dw; ++c) wc.push_back(w.component_path(c));
    for (std::size_t b = 0; b < dv; ++b)
        for (std::size_t c = 0; c < dw; ++c) {
            const SampledPath area = levy_area_partial(vc[b], wc[c], level).value;
            for (std::size_t a = 0; a < fa; ++a) {
                const SampledPath comp = detail::commutator_with_area(fc[a], vc[b], wc[c], area, level);
                const std::size_t idx = (a * dv + b) * dw + c;
                for (std::size_t i = 0; i < out.size(); ++i) out(i, idx) = comp(i, 0);
            }
        }
    return out;
}

/// The five pieces of the rough integral at one level; their sum is `total`.
struct RoughDecomposition {
    SampledPath symmetric;       // S(f, v)
    SampledPath paraproduct;     // pi_<(f, v)
    SampledPath remainder_area;  // L(f#, v)
    SampledPath commutator;      // sum_{j,l} C(f^v_{jl}, v^l, v^j)
    SampledPath area_integral;   // sum_{j,l} int f^v_{jl} dL(v^l, v^j)
    SampledPath total;
};

struct RoughIntegral {
    ControlledPath integral;
    std::optional<RoughDecomposition> decomposition;
};

namespace detail {

inline void require_area_matches(const ControlledPath& x, const LevyArea& levy) {
    const std::size_t d = x.reference().dims();
    if (levy.value.grid() != x.reference().grid() || levy.value.dims() != d * d) {
        throw ShapeError("Levy area does not match the reference path");
    }
    require_level(x.reference(), levy.level);
}

inline RoughDecomposition rough_decomposition(const ControlledPath& x, const LevyArea& levy) {
    const int level = levy.level;
    const SampledPath& f = x.f();
    const SampledPath& v = x.reference();
    const std::size_t n_entries = f.dims();  // n * d entries of the integrand
    const std::size_t d = v.dims();
    const std::size_t n = n_entries / d;
    const SampledPath& fv = x.derivative();  // entry (i*d + j)*d + l

    RoughDecomposition dec{symmetric_part(f, v, level).value, paraproduct(f, v, level).value,
                           levy_area_partial(x.remainder(), v, level).value,
                           SampledPath(f.grid(), n), SampledPath(f.grid(), n), SampledPath(f.grid(), n)};

    std::vector<SampledPath> vc;
    for (std::size_t j = 0; j < d; ++j) vc.push_back(v.component_path(j));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t l = 0; l < d; ++l) {
                const SampledPath coeff = fv.component_path((i * d + j) * d + l);
                const SampledPath area = levy.value.component_path(l * d + j);
                const SampledPath comm = commutator_with_area(coeff, vc[l], vc[j], area, level);
                const SampledPath integ = left_point_integral(coeff, area);
                for (std::size_t r = 0; r < f.size(); ++r) {
                    dec.commutator(r, i) += comm(r, 0);
                    dec.area_integral(r, i) += integ(r, 0);
                }
            }
    dec.total = dec.symmetric + dec.paraproduct + dec.remainder_area + dec.commutator + dec.area_integral;
    return dec;
}

}  // namespace detail

/// I(S_{K-1} f, dS_{K-1} v) with K the level of the area, packaged as a path
/// controlled by v with derivative f. The integrand f holds n x d matrices.
[[nodiscard]] inline RoughIntegral rough_integral(const ControlledPath& x, const LevyArea& levy,
                                                  bool with_decomposition = false) {
    detail::require_area_matches(x, levy);
    SampledPath value = integral(x.f(), x.reference(), levy.level);
    RoughIntegral out{ControlledPath(std::move(value), x.f(), x.reference(), x.alpha(), x.alpha()),
                      std::nullopt};
    if (with_decomposition) out.decomposition = detail::rough_decomposition(x, levy);
    return out;
}

struct ConvergenceStudy {
    std::vector<int> levels;
    std::vector<double> errors;  // ||I_K - I_ref||_inf for every level but the reference
    int reference_level = 0;
    std::optional<double> slope;  // log2(error) against K; empty if any error is zero
};

/// Self-convergence of I(S_{K-1} f, dS_{K-1} v) against the finest listed level.
[[nodiscard]] inline ConvergenceStudy convergence_rate_study(const ControlledPath& x, std::vector<int> levels) {
    if (levels.size() < 3) throw ValidationError("a convergence study needs at least 3 levels");
    std::sort(levels.begin(), levels.end());
    ConvergenceStudy study;
    study.reference_level = levels.back();
    const SampledPath ref = integral(x.f(), x.reference(), study.reference_level);
    bool all_positive = true;
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
        const double err = (integral(x.f(), x.reference(), levels[k]) - ref).sup_norm();
        study.levels.push_back(levels[k]);
        study.errors.push_back(err);
        all_positive = all_positive && err > 0.0;
    }
    if (all_positive && study.errors.size() >= 2) {
        std::vector<double> xs(study.levels.begin(), study.levels.end()), ys;
        for (double e : study.errors) ys.push_back(std::log2(e));
        study.slope = ols_slope(xs, ys);
    }
    return study;
}

}  // namespace schauder
