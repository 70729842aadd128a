#pragma once

// Curvature pipeline: Riemann, Ricci, the irreducible Ricci
// decomposition, both Schouten tensors, both Weyl tensors, the
// Cotton-York tensors and the Weyl divergences.
//
// Conventions (pinned by the commutator test in the suite):
//
//   R_ij^k_l = d_i Gamma^k_jl - d_j Gamma^k_il
//            + Gamma^k_im Gamma^m_jl - Gamma^k_jm Gamma^m_il
//   R_jl     = R_kj^k_l                      (first-third contraction)
//   rho_ij   = R_(ij)/(n-1) + R_[ij]/(n+1)   (projective Schouten)
//   P_ij     = R_(ij)/(n-2) + R_[ij]/n - R g_ij / (2(n-2)(n-1))
//   W        = R - glue_Sigma(rho),  C = R - glue_S(P)
//
// Symmetrizers carry weight 1/2, so T_[ij] = (T_ij - T_ji)/2.
//
// Jet orders are statically staged: metric jets of order 3 give
// connection jets of order 2, curvature jets of order 1, and plain
// values for everything needing one covariant derivative of curvature.

#include <algorithm>
#include <array>
#include <string>
#include <tuple>
#include <vector>

#include "curvlab/geometry.hpp"
#include "curvlab/tensor.hpp"

namespace curvlab {

namespace detail {
template <typename T>
T zero_like(const T& x) {
    return x - x;
}
inline double zero_like(double) { return 0.0; }
} // namespace detail

/// R_ij^k_l from jet-valued connection coefficients; the result carries
/// jets one order below the connection.  Skew in [ij] exactly.
inline Tensor<Jet> riemann(const ConnectionAt& conn) {
    const int n = conn.dim();
    if (conn.order < 1) throw InputError("riemann needs connection jets of order >= 1");
    const int ord = conn.order - 1;
    Tensor<Jet> gam = truncated(conn.gamma, ord);

    // dgam(m, k, i, j) = d_m Gamma^k_ij
    Tensor<Jet> dgam(n, {Slot::Down, Slot::Up, Slot::Down, Slot::Down}, Jet(n, ord));
    for (int mu = 0; mu < n; ++mu)
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    Jet d = conn.gamma(k, i, j).derivative(mu);
                    dgam(mu, k, i, j) = d;
                    if (j != i) dgam(mu, k, j, i) = d;
                }

    Tensor<Jet> r(n, {Slot::Down, Slot::Down, Slot::Up, Slot::Down}, Jet(n, ord));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    Jet v = dgam(i, k, j, l) - dgam(j, k, i, l);
                    for (int mu = 0; mu < n; ++mu)
                        v += gam(k, i, mu) * gam(mu, j, l) - gam(k, j, mu) * gam(mu, i, l);
                    r(i, j, k, l) = v;
                    r(j, i, k, l) = -v;
                }
    return r;
}

/// R_jl = R_kj^k_l.
template <typename T>
Tensor<T> ricci(const Tensor<T>& riem) {
    if (riem.rank() != 4 || riem.variance()[2] != Slot::Up)
        throw InputError("ricci expects a (down,down,up,down) Riemann tensor");
    const int n = riem.dim();
    const T zero = detail::zero_like(riem.flat(0));
    Tensor<T> ric(n, {Slot::Down, Slot::Down}, zero);
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
            T sum = zero;
            for (int k = 0; k < n; ++k) sum = sum + riem(k, j, k, l);
            ric(j, l) = sum;
        }
    return ric;
}

/// Ricci = Phi + phi + (R/n) g with Phi symmetric trace-free and phi
/// skew.  Returns (Phi, phi, scalar R).
template <typename T>
std::tuple<Tensor<T>, Tensor<T>, T> ricci_decompose(const Tensor<T>& ric, const Tensor<T>& g,
                                                    const Tensor<T>& g_inv) {
    const int n = ric.dim();
    const T zero = detail::zero_like(ric.flat(0));
    T scalar = zero;
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) scalar = scalar + g_inv(j, l) * ric(j, l);

    Tensor<T> phi(n, {Slot::Down, Slot::Down}, zero);
    Tensor<T> sym(n, {Slot::Down, Slot::Down}, zero);
    for (int i = 0; i < n; ++i) {
        sym(i, i) = ric(i, i);
        for (int j = i + 1; j < n; ++j) {
            T s = (ric(i, j) + ric(j, i)) * 0.5;
            T a = (ric(i, j) - ric(j, i)) * 0.5;
            sym(i, j) = s;
            sym(j, i) = s;
            phi(i, j) = a;
            phi(j, i) = -a;
        }
    }
    Tensor<T> tracefree(n, {Slot::Down, Slot::Down}, zero);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            T v = sym(i, j) - scalar * (1.0 / n) * g(i, j);
            tracefree(i, j) = v;
            if (j != i) tracefree(j, i) = v;
        }
    return {tracefree, phi, scalar};
}

/// Projective Schouten rho_ij; needs no metric.
template <typename T>
Tensor<T> schouten_projective(const Tensor<T>& ric) {
    const int n = ric.dim();
    if (n < 2) throw InputError("projective Schouten needs n >= 2");
    const double cs = 1.0 / (n - 1.0), ca = 1.0 / (n + 1.0);
    const T zero = detail::zero_like(ric.flat(0));
    Tensor<T> rho(n, {Slot::Down, Slot::Down}, zero);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            rho(i, j) = (ric(i, j) + ric(j, i)) * (0.5 * cs) + (ric(i, j) - ric(j, i)) * (0.5 * ca);
    return rho;
}

/// Conformal Schouten P_ij.
template <typename T>
Tensor<T> schouten_conformal(const Tensor<T>& ric, const Tensor<T>& g, const Tensor<T>& g_inv) {
    const int n = ric.dim();
    if (n < 3) throw InputError("conformal Schouten needs n >= 3");
    const double cs = 1.0 / (n - 2.0), ca = 1.0 / n;
    const double ctr = 1.0 / (2.0 * (n - 2.0) * (n - 1.0));
    const T zero = detail::zero_like(ric.flat(0));
    T scalar = zero;
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) scalar = scalar + g_inv(k, l) * ric(k, l);
    Tensor<T> p(n, {Slot::Down, Slot::Down}, zero);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            p(i, j) = (ric(i, j) + ric(j, i)) * (0.5 * cs) + (ric(i, j) - ric(j, i)) * (0.5 * ca) -
                      scalar * ctr * g(i, j);
    return p;
}

/// Sigma projector with entries of scalar type T.
template <typename T>
Tensor<T> sigma_projector_typed(int n, const T& zero) {
    Tensor<T> s(n, {Slot::Up, Slot::Up, Slot::Down, Slot::Down}, zero);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    T v = zero;
                    if (a == c && b == d) v = v + 1.0;
                    if (b == c && a == d) v = v + 1.0;
                    s(a, b, c, d) = v;
                }
    return s;
}

/// 2 proj_{l[i}^{km} h_{j]m} by direct contraction of the given
/// projector (Sigma or S, slots (up,up,down,down)).  Skew in [ij]
/// exactly.
template <typename T>
Tensor<T> glue_from_projector(const Tensor<T>& proj, const Tensor<T>& h) {
    const int n = h.dim();
    const T zero = detail::zero_like(h.flat(0));
    Tensor<T> out(n, {Slot::Down, Slot::Down, Slot::Up, Slot::Down}, zero);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    T v = zero;
                    for (int m = 0; m < n; ++m)
                        v = v + (proj(k, m, l, i) * h(j, m) - proj(k, m, l, j) * h(i, m));
                    out(i, j, k, l) = v;
                    out(j, i, k, l) = -v;
                }
    return out;
}

template <typename T>
Tensor<T> glue_projective(const Tensor<T>& rho) {
    const T zero = detail::zero_like(rho.flat(0));
    return glue_from_projector(sigma_projector_typed(rho.dim(), zero), rho);
}

template <typename T>
Tensor<T> glue_conformal(const Tensor<T>& p, const Tensor<T>& g, const Tensor<T>& g_inv) {
    return glue_from_projector(s_projector(g, g_inv), p);
}

template <typename T>
Tensor<T> weyl_projective(const Tensor<T>& riem, const Tensor<T>& rho) {
    return riem - glue_projective(rho);
}

template <typename T>
Tensor<T> weyl_conformal(const Tensor<T>& riem, const Tensor<T>& p, const Tensor<T>& g,
                         const Tensor<T>& g_inv) {
    return riem - glue_conformal(p, g, g_inv);
}

/// nabla_m T with the new down slot first; consumes one jet order, so
/// the result holds plain values.
inline Tensor<double> covariant_derivative(const Tensor<Jet>& t, const ConnectionAt& conn) {
    const int n = t.dim();
    if (t.size() == 0) throw InputError("covariant derivative of empty tensor");
    if (t.flat(0).order() < 1) throw InputError("covariant derivative: jet order exhausted");
    std::vector<Slot> var;
    var.push_back(Slot::Down);
    for (Slot s : t.variance()) var.push_back(s);
    Tensor<double> out(n, var);

    const int rank = t.rank();
    for (std::size_t f = 0; f < t.size(); ++f) {
        std::vector<int> idx = t.unravel(f);
        for (int m = 0; m < n; ++m) {
            double v = t.flat(f).partial(m);
            std::vector<int> tmp = idx;
            for (int s = 0; s < rank; ++s) {
                const int orig = idx[static_cast<std::size_t>(s)];
                for (int p = 0; p < n; ++p) {
                    tmp[static_cast<std::size_t>(s)] = p;
                    std::size_t off = 0;
                    for (int r = 0; r < rank; ++r)
                        off = off * static_cast<std::size_t>(n) +
                              static_cast<std::size_t>(tmp[static_cast<std::size_t>(r)]);
                    const double tv = t.flat(off).value();
                    if (t.variance()[static_cast<std::size_t>(s)] == Slot::Up)
                        v += conn.gamma(orig, m, p).value() * tv;
                    else
                        v -= conn.gamma(p, m, orig).value() * tv;
                }
                tmp[static_cast<std::size_t>(s)] = orig;
            }
            std::size_t outoff = static_cast<std::size_t>(m);
            for (int r = 0; r < rank; ++r)
                outoff = outoff * static_cast<std::size_t>(n) +
                         static_cast<std::size_t>(idx[static_cast<std::size_t>(r)]);
            out.flat(outoff) = v;
        }
    }
    return out;
}

/// Cotton-York tensor 2 nabla_[i h_j]l for a jet-valued Schouten field.
inline Tensor<double> cotton_york(const Tensor<Jet>& schouten, const ConnectionAt& conn) {
    const int n = schouten.dim();
    Tensor<double> d = covariant_derivative(schouten, conn);
    Tensor<double> y(n, {Slot::Down, Slot::Down, Slot::Down});
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int l = 0; l < n; ++l) {
                double v = d(i, j, l) - d(j, i, l);
                y(i, j, l) = v;
                y(j, i, l) = -v;
            }
    return y;
}

/// nabla_k T_ij^k_l for a jet-valued rank-4 (down,down,up,down) tensor.
inline Tensor<double> weyl_divergence(const Tensor<Jet>& w, const ConnectionAt& conn) {
    const int n = w.dim();
    Tensor<double> d = covariant_derivative(w, conn);
    Tensor<double> out(n, {Slot::Down, Slot::Down, Slot::Down});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) {
                double v = 0.0;
                for (int k = 0; k < n; ++k) v += d(k, i, j, k, l);
                out(i, j, l) = v;
            }
    return out;
}

/// Every derived tensor at one point, as plain values, plus the
/// divergence/Cotton data the identity checks consume.
struct CurvaturePack {
    int dim = 0;
    std::vector<double> point;
    std::string connection;

    Tensor<double> riemann;             // R_ij^k_l
    Tensor<double> ricci;               // R_jl
    double scalar = 0.0;                // R
    std::vector<double> scalar_gradient;// d_m R
    Tensor<double> ricci_tracefree;     // Phi
    Tensor<double> ricci_skew;          // phi
    Tensor<double> schouten_projective; // rho
    Tensor<double> schouten_conformal;  // P (zero tensor when n == 2)
    Tensor<double> weyl_projective;     // W
    Tensor<double> weyl_conformal;      // C (zero tensor when n == 2)
    Tensor<double> cotton_projective;   // y
    Tensor<double> cotton_conformal;    // Y (zero tensor when n == 2)
    Tensor<double> div_weyl_projective; // nabla_k W_ij^k_l
    Tensor<double> div_weyl_conformal;  // nabla_k C_ij^k_l

    Tensor<double> metric;              // g at the point
    Tensor<double> metric_inverse;

    double riemann_max() const { return max_abs(riemann); }

    /// Normalization for relative tolerances: never below 1, never
    /// below the curvature magnitude at the point.
    double scale_for(const Tensor<double>& checked) const {
        return std::max({1.0, max_abs(checked), riemann_max()});
    }
    double scale() const { return std::max(1.0, riemann_max()); }
};

/// Run the full pipeline at one point.  The connection must carry jets
/// of order >= 2 and the metric evaluation order >= conn.order.
inline CurvaturePack compute_pack(const ConnectionAt& conn, const MetricAt& m) {
    const int n = conn.dim();
    if (conn.order < 2)
        throw InputError("compute_pack needs connection jets of order >= 2");

    CurvaturePack pack;
    pack.dim = n;
    pack.point = conn.point;
    pack.connection = conn.description;

    Tensor<Jet> riem = riemann(conn);
    const int cord = conn.order - 1;
    Tensor<Jet> g = truncated(m.g, cord);
    Tensor<Jet> ginv = truncated(m.g_inv, cord);

    Tensor<Jet> ric = ricci(riem);
    auto [tracefree, skew, scalar] = ricci_decompose(ric, g, ginv);
    Tensor<Jet> rho = schouten_projective(ric);
    Tensor<Jet> w = weyl_projective(riem, rho);

    pack.riemann = values(riem);
    pack.ricci = values(ric);
    pack.scalar = scalar.value();
    pack.scalar_gradient.resize(static_cast<std::size_t>(n));
    for (int mu = 0; mu < n; ++mu)
        pack.scalar_gradient[static_cast<std::size_t>(mu)] = scalar.partial(mu);
    pack.ricci_tracefree = values(tracefree);
    pack.ricci_skew = values(skew);
    pack.schouten_projective = values(rho);
    pack.weyl_projective = values(w);
    pack.cotton_projective = cotton_york(rho, conn);
    pack.div_weyl_projective = weyl_divergence(w, conn);

    if (n >= 3) {
        Tensor<Jet> p = schouten_conformal(ric, g, ginv);
        Tensor<Jet> c = weyl_conformal(riem, p, g, ginv);
        pack.schouten_conformal = values(p);
        pack.weyl_conformal = values(c);
        pack.cotton_conformal = cotton_york(p, conn);
        pack.div_weyl_conformal = weyl_divergence(c, conn);
    } else {
        // The conformal Schouten is undefined in n = 2; the conformal
        // Weyl tensor vanishes there, which the zero tensors encode.
        pack.schouten_conformal = Tensor<double>(n, {Slot::Down, Slot::Down});
        pack.weyl_conformal = Tensor<double>(n, {Slot::Down, Slot::Down, Slot::Up, Slot::Down});
        pack.cotton_conformal = Tensor<double>(n, {Slot::Down, Slot::Down, Slot::Down});
        pack.div_weyl_conformal = Tensor<double>(n, {Slot::Down, Slot::Down, Slot::Down});
    }

    pack.metric = values(g);
    pack.metric_inverse = values(ginv);
    return pack;
}

/// Convenience: pack for the Weyl structure's own connection at a point
/// (Levi-Civita when the 1-form vanishes identically).
inline CurvaturePack compute_pack(const WeylStructure& ws, std::span<const double> point) {
    MetricAt m = metric_at(ws.metric, point, 3);
    ConnectionAt conn = weyl_connection(ws, m);
    return compute_pack(conn, m);
}

} // namespace curvlab
