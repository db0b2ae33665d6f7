#pragma once

// Bilinear Schauder operators on sampled paths.
//
// Level convention: an operator evaluated "at level K" works with the inputs
// truncated to S_{K-1}, i.e. with their linear interpolations on the level-K
// grid, so generations p = 0..K-1 contribute. Every such truncation is linear
// on each cell of the working grid (the grid of the input paths, level N >= K),
// which makes the trapezoid rule on working cells an exact integrator for all
// integrals below.
//
//   I(v, dw) = pi_<(v, w) + S(v, w) + L(v, w)
//   pi_<(v, w) = sum_{p>=0} S_{p-1} v . Delta_p w
//   S(v, w)    = int Delta_0 v dDelta_0 w + 1/2 sum_{p>=1} Delta_p v . Delta_p w
//   L(v, w)    = sum_{p>=1} ( int Delta_p v dS_{p-1} w - int dS_{p-1} v . Delta_p w )

#include "schauder/dyadic_core.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace schauder {

/// How two vector-valued paths are multiplied at each time.
///  - matvec: a is an n x d matrix (row-major, n*d entries) acting on the d-vector b;
///            a scalar a (one entry) scales b.
///  - outer:  out[k*db + l] = a[k] b[l].
enum class Product { matvec, outer };

struct ProductTerm {
    std::size_t out, a, b;
};

struct ProductLayout {
    std::size_t out_dims = 0;
    std::vector<ProductTerm> terms;

    [[nodiscard]] static ProductLayout make(Product kind, std::size_t a_dims, std::size_t b_dims) {
        ProductLayout layout;
        if (kind == Product::outer) {
            layout.out_dims = a_dims * b_dims;
            for (std::size_t k = 0; k < a_dims; ++k)
                for (std::size_t l = 0; l < b_dims; ++l) layout.terms.push_back({k * b_dims + l, k, l});
            return layout;
        }
        if (a_dims == 1) {
            layout.out_dims = b_dims;
            for (std::size_t l = 0; l < b_dims; ++l) layout.terms.push_back({l, 0, l});
            return layout;
        }
        if (a_dims % b_dims != 0) {
            throw ShapeError("cannot multiply a " + std::to_string(a_dims) + "-entry matrix with a " +
                             std::to_string(b_dims) + "-vector");
        }
        layout.out_dims = a_dims / b_dims;
        for (std::size_t k = 0; k < layout.out_dims; ++k)
            for (std::size_t l = 0; l < b_dims; ++l) layout.terms.push_back({k, k * b_dims + l, l});
        return layout;
    }
};

namespace detail {

inline void require_common_grid(const SampledPath& a, const SampledPath& b) {
    if (a.grid() != b.grid()) {
        throw ShapeError("paths live on different grids (levels " + std::to_string(a.level()) +
                         " and " + std::to_string(b.level()) + ")");
    }
}

inline void require_level(const SampledPath& a, int level) {
    if (level < 0 || level > a.level()) {
        throw IndexError("truncation level " + std::to_string(level) + " outside [0, " +
                         std::to_string(a.level()) + "]");
    }
}

/// out += scale * (a . b) pointwise.
inline void accumulate_product(SampledPath& out, const SampledPath& a, const SampledPath& b,
                               const ProductLayout& layout, double scale = 1.0) {
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto o = out.row(i);
        auto ra = a.row(i);
        auto rb = b.row(i);
        for (const auto& term : layout.terms) o[term.out] += scale * ra[term.a] * rb[term.b];
    }
}

enum class Integrand { left, right };

/// out += scale * int_0^. a db  (Integrand::left)  or  scale * int_0^. da . b  (Integrand::right),
/// exact when a and b are linear on every working cell.
inline void accumulate_integral(SampledPath& out, const SampledPath& a, const SampledPath& b,
                                const ProductLayout& layout, Integrand side, double scale = 1.0) {
    std::vector<double> running(layout.out_dims, 0.0);
    for (std::size_t i = 0; i + 1 < out.size(); ++i) {
        auto a0 = a.row(i), a1 = a.row(i + 1);
        auto b0 = b.row(i), b1 = b.row(i + 1);
        for (const auto& term : layout.terms) {
            const double inc = side == Integrand::left
                                   ? 0.5 * (a0[term.a] + a1[term.a]) * (b1[term.b] - b0[term.b])
                                   : (a1[term.a] - a0[term.a]) * 0.5 * (b0[term.b] + b1[term.b]);
            running[term.out] += inc;
        }
        auto o = out.row(i + 1);
        for (std::size_t k = 0; k < layout.out_dims; ++k) o[k] += scale * running[k];
    }
}

/// S_{p-1} of a path on its own grid (p = 0 gives the constant initial value).
inline SampledPath partial(const SampledPath& x, int p) {
    return p == 0 ? initial_value_path(x) : interpolate_from(x, p);
}

}  // namespace detail

/// S_{K-1} x: the linear interpolation of x on the level-K grid, evaluated on x's grid.
[[nodiscard]] inline SampledPath truncate(const SampledPath& x, int level) {
    return interpolate_from(x, level);
}

enum class Component { paraproduct, symmetric, levy_area, young_total, young_remainder };

[[nodiscard]] inline const char* to_string(Component c) noexcept {
    switch (c) {
        case Component::paraproduct: return "paraproduct";
        case Component::symmetric: return "symmetric";
        case Component::levy_area: return "levy_area";
        case Component::young_total: return "young_total";
        case Component::young_remainder: return "young_remainder";
    }
    return "unknown";
}

struct BilinearResult {
    SampledPath value;
    int level = 0;
    Component component = Component::young_total;
};

namespace detail {

inline double tent_primitive(int p, std::size_t m, double t) {
    const auto [t0, t1, t2] = dyadic_times(p, m);
    const double scale = std::ldexp(1.0, p);
    const double total = std::ldexp(1.0, -p - 2);
    if (t <= t0) return 0.0;
    if (t <= t1) return 0.5 * scale * (t - t0) * (t - t0);
    if (t < t2) return total - 0.5 * scale * (t2 - t) * (t2 - t);
    return total;
}

/// int_0^t phi_pm(s) ds for every stored index.
inline double schauder_primitive(int p, std::size_t m, double t) {
    if (p == -1 && m == 0) return t;
    if (p == 0 && m == 0) return 0.5 * t * t;
    return tent_primitive(p, m, t);
}

}  // namespace detail

/// Closed form of int_0^t phi_pm d phi_qn.
[[nodiscard]] inline double phi_pair_integral(int p, std::size_t m, int q, std::size_t n, double t) {
    (void)dyadic_times(p, m);
    (void)dyadic_times(q, n);
    if (q == -1) return 0.0;                        // d phi_{-1,0} = 0
    if (p == -1) return schauder_function(q, n, t);  // int 1 d phi_qn
    if (q == 0 && n == 0) return detail::schauder_primitive(p, m, t);
    if (p == 0 && m == 0) {
        // int s dphi_qn = t phi_qn(t) - int phi_qn ds
        return t * schauder_function(q, n, t) - detail::schauder_primitive(q, n, t);
    }
    // Both are tents.
    if (p == q) {
        if (m != n) return 0.0;
        const double phi = schauder_function(p, m, t);
        return 0.5 * phi * phi;
    }
    if (p > q) {
        // chi_qn is constant on the support of phi_pm.
        return haar_function(q, n, dyadic_times(p, m).t0) * detail::tent_primitive(p, m, t);
    }
    // p < q: integrate by parts.
    return schauder_function(p, m, t) * schauder_function(q, n, t) -
           haar_function(p, m, dyadic_times(q, n).t0) * detail::tent_primitive(q, n, t);
}

/// pi_<(v, w) = sum_{p=0}^{K-1} S_{p-1} v . Delta_p w on the working grid.
[[nodiscard]] inline BilinearResult paraproduct(const SampledPath& v, const SampledPath& w, int level,
                                                Product product = Product::matvec) {
    detail::require_common_grid(v, w);
    detail::require_level(v, level);
    const auto layout = ProductLayout::make(product, v.dims(), w.dims());
    BilinearResult result{SampledPath(v.grid(), layout.out_dims), level, Component::paraproduct};
    SampledPath w_lower = detail::partial(w, 0);
    for (int p = 0; p < level; ++p) {
        SampledPath v_lower = detail::partial(v, p);
        SampledPath w_upper = interpolate_from(w, p + 1);
        detail::accumulate_product(result.value, v_lower, w_upper - w_lower, layout);
        w_lower = std::move(w_upper);
    }
    return result;
}

[[nodiscard]] inline BilinearResult paraproduct(const SampledPath& v, const SampledPath& w) {
    return paraproduct(v, w, v.level());
}

/// S(v, w) = int Delta_0 v dDelta_0 w + 1/2 sum_{p=1}^{K-1} Delta_p v . Delta_p w.
[[nodiscard]] inline BilinearResult symmetric_part(const SampledPath& v, const SampledPath& w,
                                                   int level, Product product = Product::matvec) {
    detail::require_common_grid(v, w);
    detail::require_level(v, level);
    const auto layout = ProductLayout::make(product, v.dims(), w.dims());
    BilinearResult result{SampledPath(v.grid(), layout.out_dims), level, Component::symmetric};
    if (level == 0) return result;
    SampledPath v_lower = interpolate_from(v, 1);
    SampledPath w_lower = interpolate_from(w, 1);
    detail::accumulate_integral(result.value, v_lower - initial_value_path(v),
                                w_lower - initial_value_path(w), layout, detail::Integrand::left);
    for (int p = 1; p < level; ++p) {
        SampledPath v_upper = interpolate_from(v, p + 1);
        SampledPath w_upper = interpolate_from(w, p + 1);
        detail::accumulate_product(result.value, v_upper - v_lower, w_upper - w_lower, layout, 0.5);
        v_lower = std::move(v_upper);
        w_lower = std::move(w_upper);
    }
    return result;
}

[[nodiscard]] inline BilinearResult symmetric_part(const SampledPath& v, const SampledPath& w) {
    return symmetric_part(v, w, v.level());
}

/// L(v, w) = sum_{p=1}^{K-1} ( int Delta_p v dS_{p-1} w - int dS_{p-1} v . Delta_p w ).
[[nodiscard]] inline BilinearResult levy_area_partial(const SampledPath& v, const SampledPath& w,
                                                      int level, Product product = Product::matvec) {
    detail::require_common_grid(v, w);
    detail::require_level(v, level);
    const auto layout = ProductLayout::make(product, v.dims(), w.dims());
    BilinearResult result{SampledPath(v.grid(), layout.out_dims), level, Component::levy_area};
    if (level <= 1) return result;
    SampledPath v_lower = interpolate_from(v, 1);
    SampledPath w_lower = interpolate_from(w, 1);
    for (int p = 1; p < level; ++p) {
        SampledPath v_upper = interpolate_from(v, p + 1);
        SampledPath w_upper = interpolate_from(w, p + 1);
        detail::accumulate_integral(result.value, v_upper - v_lower, w_lower, layout,
                                    detail::Integrand::left);
        detail::accumulate_integral(result.value, v_lower, w_upper - w_lower, layout,
                                    detail::Integrand::right, -1.0);
        v_lower = std::move(v_upper);
        w_lower = std::move(w_upper);
    }
    return result;
}

[[nodiscard]] inline BilinearResult levy_area_partial(const SampledPath& v, const SampledPath& w) {
    return levy_area_partial(v, w, v.level());
}

/// Exact Riemann-Stieltjes integral int_0^. S_{K-1} v dS_{K-1} w.
[[nodiscard]] inline SampledPath integral(const SampledPath& v, const SampledPath& w, int level,
                                          Product product = Product::matvec) {
    detail::require_common_grid(v, w);
    detail::require_level(v, level);
    const auto layout = ProductLayout::make(product, v.dims(), w.dims());
    SampledPath out(v.grid(), layout.out_dims);
    detail::accumulate_integral(out, truncate(v, level), truncate(w, level), layout,
                                detail::Integrand::left);
    return out;
}

[[nodiscard]] inline SampledPath integral(const SampledPath& v, const SampledPath& w) {
    return integral(v, w, v.level());
}

/// I(v, dw) at level K as the sum of its three components.
[[nodiscard]] inline BilinearResult young_integral(const SampledPath& v, const SampledPath& w,
                                                   int level, Product product = Product::matvec) {
    BilinearResult total = paraproduct(v, w, level, product);
    total.value += symmetric_part(v, w, level, product).value;
    total.value += levy_area_partial(v, w, level, product).value;
    total.component = Component::young_total;
    return total;
}

[[nodiscard]] inline BilinearResult young_integral(const SampledPath& v, const SampledPath& w) {
    return young_integral(v, w, v.level());
}

/// I(v, dw) - pi_<(v, w): the part of the integral that is smoother than w.
[[nodiscard]] inline BilinearResult young_remainder(const SampledPath& v, const SampledPath& w,
                                                    int level, Product product = Product::matvec) {
    BilinearResult rem = symmetric_part(v, w, level, product);
    rem.value += levy_area_partial(v, w, level, product).value;
    rem.component = Component::young_remainder;
    return rem;
}

/// Left-point Riemann-Stieltjes sum int_0^. a db on the working grid.
[[nodiscard]] inline SampledPath left_point_integral(const SampledPath& a, const SampledPath& b,
                                                     Product product = Product::matvec) {
    detail::require_common_grid(a, b);
    const auto layout = ProductLayout::make(product, a.dims(), b.dims());
    SampledPath out(a.grid(), layout.out_dims);
    std::vector<double> running(layout.out_dims, 0.0);
    for (std::size_t i = 0; i + 1 < out.size(); ++i) {
        auto ra = a.row(i);
        auto b0 = b.row(i), b1 = b.row(i + 1);
        for (const auto& term : layout.terms) running[term.out] += ra[term.a] * (b1[term.b] - b0[term.b]);
        std::copy(running.begin(), running.end(), out.row(i + 1).begin());
    }
    return out;
}

/// The area path L(v, v) of a d-dimensional path at a fixed level, stored as a
/// d x d matrix path (entry j*d + l is L(v^j, v^l)), with the convergence history
/// filled in by levy_area_sequence.
struct LevyArea {
    int level = 0;
    SampledPath value;
    int k_min = 0;
    std::vector<double> deltas;          // ||L_K - L_{K-1}||_inf for K = k_min..level
    std::vector<double> weighted_norms;  // ||L_K||_{2 alpha}
    bool converged = true;
    bool degenerate = false;
};

/// L(S_{K-1} v, S_{K-1} v) as a d x d matrix path.
[[nodiscard]] inline LevyArea levy_area(const SampledPath& v, int level) {
    LevyArea area;
    area.level = area.k_min = level;
    area.value = levy_area_partial(v, v, level, Product::outer).value;
    area.degenerate = v.dims() < 2;
    return area;
}

}  // namespace schauder
