#pragma once

// Non-anticipating dyadic Riemann sums, dyadic quadratic variation and the
// pathwise Ito integral.

#include "schauder/paracontrolled.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace schauder {

namespace detail {

inline void require_k(const SampledPath& x, int k) {
    if (k < 0 || k > x.level()) {
        throw IndexError("dyadic level " + std::to_string(k) + " exceeds path level " +
                         std::to_string(x.level()));
    }
}

}  // namespace detail

/// sum_m f(t0_km) (v(t2_km ^ t) - v(t0_km ^ t)) on the working grid.
[[nodiscard]] inline SampledPath ito_riemann_sum(const SampledPath& f, const SampledPath& v, int k,
                                                 Product product = Product::matvec) {
    detail::require_common_grid(f, v);
    detail::require_k(f, k);
    const auto layout = ProductLayout::make(product, f.dims(), v.dims());
    SampledPath out(f.grid(), layout.out_dims);
    const std::size_t stride = std::size_t{1} << (f.level() - k);
    std::vector<double> completed(layout.out_dims, 0.0);
    for (std::size_t i = 1; i < out.size(); ++i) {
        const std::size_t start = ((i - 1) / stride) * stride;
        auto fs = f.row(start);
        auto v0 = v.row(start), v1 = v.row(i);
        auto o = out.row(i);
        std::copy(completed.begin(), completed.end(), o.begin());
        for (const auto& term : layout.terms) o[term.out] += fs[term.a] * (v1[term.b] - v0[term.b]);
        if (i % stride == 0) std::copy(o.begin(), o.end(), completed.begin());
    }
    return out;
}

struct QuadraticVariation {
    int level = 0;
    SampledPath values;
    /// [f,v]_j(1) for j = 0..level.
    std::vector<std::vector<double>> endpoint_history;
};

namespace detail {

/// [f,v]_k on the working grid: products of level-k increments, clipped at t.
inline SampledPath qv_path(const SampledPath& f, const SampledPath& v, int k, const ProductLayout& layout) {
    SampledPath out(f.grid(), layout.out_dims);
    const std::size_t stride = std::size_t{1} << (f.level() - k);
    std::vector<double> completed(layout.out_dims, 0.0);
    for (std::size_t i = 1; i < out.size(); ++i) {
        const std::size_t start = ((i - 1) / stride) * stride;
        auto f0 = f.row(start), f1 = f.row(i);
        auto v0 = v.row(start), v1 = v.row(i);
        auto o = out.row(i);
        std::copy(completed.begin(), completed.end(), o.begin());
        for (const auto& term : layout.terms) o[term.out] += (f1[term.a] - f0[term.a]) * (v1[term.b] - v0[term.b]);
        if (i % stride == 0) std::copy(o.begin(), o.end(), completed.begin());
    }
    return out;
}

inline std::vector<double> qv_endpoint(const SampledPath& f, const SampledPath& v, int k,
                                       const ProductLayout& layout) {
    std::vector<double> out(layout.out_dims, 0.0);
    const std::size_t stride = std::size_t{1} << (f.level() - k);
    for (std::size_t s = 0; s + stride < f.size(); s += stride) {
        auto f0 = f.row(s), f1 = f.row(s + stride);
        auto v0 = v.row(s), v1 = v.row(s + stride);
        for (const auto& term : layout.terms) out[term.out] += (f1[term.a] - f0[term.a]) * (v1[term.b] - v0[term.b]);
    }
    return out;
}

}  // namespace detail

/// Direct dyadic quadratic covariation [f,v]_k.
[[nodiscard]] inline QuadraticVariation qv_k(const SampledPath& f, const SampledPath& v, int k,
                                             Product product = Product::outer) {
    detail::require_common_grid(f, v);
    detail::require_k(f, k);
    const auto layout = ProductLayout::make(product, f.dims(), v.dims());
    QuadraticVariation qv{k, detail::qv_path(f, v, k, layout), {}};
    for (int j = 0; j <= k; ++j) qv.endpoint_history.push_back(detail::qv_endpoint(f, v, j, layout));
    return qv;
}

/// [f,v]_k(1) from the Schauder coefficients:
/// 2^{-k} ( c_00(f) c_00(v) + sum_{p<k} 2^p sum_m f_pm v_pm ).
[[nodiscard]] inline std::vector<double> cesaro_endpoint(const SchauderCoefficients& f,
                                                         const SchauderCoefficients& v, int k,
                                                         Product product = Product::outer) {
    if (k < 0 || k > f.max_level() + 1 || k > v.max_level() + 1) {
        throw IndexError("Cesaro level " + std::to_string(k) + " needs generations below it");
    }
    const auto layout = ProductLayout::make(product, f.dims(), v.dims());
    std::vector<double> out(layout.out_dims, 0.0);
    auto add = [&](std::span<const double> a, std::span<const double> b, double w) {
        for (const auto& term : layout.terms) out[term.out] += w * a[term.a] * b[term.b];
    };
    add(f.c_00(), v.c_00(), 1.0);
    for (int p = 0; p < k; ++p) {
        const double w = std::ldexp(1.0, p);
        for (std::size_t m = 1; m <= (std::size_t{1} << p); ++m) add(f.at(p, m), v.at(p, m), w);
    }
    for (double& x : out) x = std::ldexp(x, -k);
    return out;
}

/// [S_{k-1} f, S_{k-1} v]_k built level by level from
///   [S_j f, S_j v]_{j+1} = 1/2 [S_{j-1} f, S_{j-1} v]_j + R_j
///                          + [S_{j-1} f, Delta_j v]_{j+1} + [Delta_j f, S_j v]_{j+1},
/// where R_j corrects the clipped level-j cell containing t.
[[nodiscard]] inline QuadraticVariation qv_recursive(const SampledPath& f, const SampledPath& v, int k,
                                                     Product product = Product::outer) {
    detail::require_common_grid(f, v);
    detail::require_k(f, k);
    const auto layout = ProductLayout::make(product, f.dims(), v.dims());
    const int n = f.level();
    SampledPath q(f.grid(), layout.out_dims);  // [S_{-1} f, S_{-1} v]_0 = 0
    QuadraticVariation qv{k, q, {std::vector<double>(layout.out_dims, 0.0)}};
    SampledPath f_lower = initial_value_path(f), v_lower = initial_value_path(v);
    for (int j = 0; j < k; ++j) {
        SampledPath f_upper = interpolate_from(f, j + 1), v_upper = interpolate_from(v, j + 1);
        SampledPath next = detail::qv_path(f_lower, v_upper - v_lower, j + 1, layout);
        next += detail::qv_path(f_upper - f_lower, v_upper, j + 1, layout);
        // 1/2 [F, V]_j + R_j with F, V linear on level-j cells.
        const std::size_t cell = std::size_t{1} << (n - j);
        const std::size_t half = cell / 2;
        for (std::size_t i = 0; i < next.size(); ++i) {
            const std::size_t a = i == 0 ? 0 : ((i - 1) / cell) * cell;
            const std::size_t c = std::min(a + half, i);
            auto o = next.row(i);
            auto qi = q.row(i);
            for (std::size_t r = 0; r < layout.out_dims; ++r) o[r] += 0.5 * qi[r];
            for (const auto& term : layout.terms) {
                auto fi = [&](std::size_t x) { return f_lower(x, term.a); };
                auto vi = [&](std::size_t x) { return v_lower(x, term.b); };
                o[term.out] += -0.5 * (fi(i) - fi(a)) * (vi(i) - vi(a)) + (fi(c) - fi(a)) * (vi(c) - vi(a)) +
                               (fi(i) - fi(c)) * (vi(i) - vi(c));
            }
        }
        q = std::move(next);
        auto last = q.row(q.size() - 1);
        qv.endpoint_history.emplace_back(last.begin(), last.end());
        f_lower = std::move(f_upper);
        v_lower = std::move(v_upper);
    }
    qv.values = std::move(q);
    return qv;
}

/// [f,v]^i = sum_{j,l} int f^v_{ijl} d[v^j, v^l] by left-point sums, for an
/// integrand f holding n x d matrices with derivative entry ((i*d + j)*d + l).
[[nodiscard]] inline SampledPath controlled_bracket(const ControlledPath& x, const QuadraticVariation& qv_vv) {
    const SampledPath& v = x.reference();
    const std::size_t d = v.dims();
    if (qv_vv.values.grid() != v.grid() || qv_vv.values.dims() != d * d) {
        throw ShapeError("quadratic variation does not match the reference path");
    }
    const std::size_t n = x.dims() / d;
    if (n * d != x.dims()) throw ShapeError("integrand is not an n x d matrix path");
    const SampledPath& fv = x.derivative();
    SampledPath out(v.grid(), n);
    std::vector<double> running(n, 0.0);
    for (std::size_t r = 0; r + 1 < v.size(); ++r) {
        auto q0 = qv_vv.values.row(r), q1 = qv_vv.values.row(r + 1);
        auto g = fv.row(r);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j)
                for (std::size_t l = 0; l < d; ++l)
                    running[i] += g[(i * d + j) * d + l] * (q1[j * d + l] - q0[j * d + l]);
        std::copy(running.begin(), running.end(), out.row(r + 1).begin());
    }
    return out;
}

/// I(f, dv) - 1/2 [f, v] with the Stratonovich-type integral at the area's level.
[[nodiscard]] inline SampledPath ito_integral(const ControlledPath& x, const LevyArea& levy,
                                              const QuadraticVariation& qv_vv) {
    detail::require_area_matches(x, levy);
    SampledPath out = integral(x.f(), x.reference(), levy.level);
    out -= 0.5 * controlled_bracket(x, qv_vv);
    return out;
}

/// sup over k <= k_max and level-k dyadic pairs s < t of
/// |I^Ito_k(v, dv)_{s,t} - v(s) (v(t) - v(s))| / |t - s|^{2 alpha}  (Frobenius norm).
[[nodiscard]] inline double coarse_holder_constant(const SampledPath& v, int k_max, double alpha) {
    detail::require_k(v, k_max);
    const std::size_t d = v.dims();
    double sup = 0.0;
    for (int k = 0; k <= k_max; ++k) {
        const SampledPath vk = v.restrict_to(k);
        const std::size_t pts = vk.size();
        // prefix[m][j*d+l] = sum_{r<m} v^j(r) (v^l(r+1) - v^l(r))
        std::vector<double> prefix(pts * d * d, 0.0);
        for (std::size_t m = 1; m < pts; ++m)
            for (std::size_t j = 0; j < d; ++j)
                for (std::size_t l = 0; l < d; ++l)
                    prefix[m * d * d + j * d + l] =
                        prefix[(m - 1) * d * d + j * d + l] + vk(m - 1, j) * (vk(m, l) - vk(m - 1, l));
        const double h = std::ldexp(1.0, -k);
        for (std::size_t s = 0; s < pts; ++s)
            for (std::size_t t = s + 1; t < pts; ++t) {
                double frob = 0.0;
                for (std::size_t j = 0; j < d; ++j)
                    for (std::size_t l = 0; l < d; ++l) {
                        const double r = prefix[t * d * d + j * d + l] - prefix[s * d * d + j * d + l] -
                                         vk(s, j) * (vk(t, l) - vk(s, l));
                        frob += r * r;
                    }
                sup = std::max(sup, std::sqrt(frob) / std::pow(static_cast<double>(t - s) * h, 2.0 * alpha));
            }
    }
    return sup;
}

/// sup_t |F(v(t)) - F(v(0)) - I^Ito_k(DF(v), dv)(t) - 1/2 int D^2F(v) d[v, v]|, with the
/// correction integrated by left-point sums against the given quadratic variation.
[[nodiscard]] inline double follmer_check(const SmoothMap& F, const SampledPath& v, int k,
                                          const QuadraticVariation& qv_vv) {
    const std::size_t d = v.dims();
    if (F.in_dim != d || F.out_dim != 1) throw ShapeError("Follmer check needs a scalar function of v");
    if (!F.hessian) throw ValidationError("Follmer check needs the second derivative of F");
    if (qv_vv.values.grid() != v.grid() || qv_vv.values.dims() != d * d) {
        throw ShapeError("quadratic variation does not match the path");
    }
    const SampledPath Fv = apply(F, v);
    const SampledPath ito = ito_riemann_sum(apply_jacobian(F, v), v, k);
    std::vector<double> hess(d * d);
    double correction = 0.0;
    double sup = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) {
            F.hessian(v.row(i - 1), hess);
            auto q0 = qv_vv.values.row(i - 1), q1 = qv_vv.values.row(i);
            for (std::size_t r = 0; r < d * d; ++r) correction += 0.5 * hess[r] * (q1[r] - q0[r]);
        }
        sup = std::max(sup, std::abs(Fv(i, 0) - Fv(0, 0) - ito(i, 0) - correction));
    }
    return sup;
}

/// Follmer check against the quadratic variation at the path's own level.
[[nodiscard]] inline double follmer_check(const SmoothMap& F, const SampledPath& v, int k) {
    return follmer_check(F, v, k, qv_k(v, v, v.level()));
}

}  // namespace schauder
