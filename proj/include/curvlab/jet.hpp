#pragma once

// Truncated multivariate Taylor arithmetic ("jets") up to order 3.
//
// A Jet holds the value and all partial derivatives of a function at a
// base point, through a fixed order.  Coefficients are the raw partials
// d^alpha f (NOT the Taylor coefficients d^alpha f / alpha!); the
// multinomial weights this convention requires appear only inside
// multiplication.  Coefficients are stored densely, one entry per sorted
// multi-index, graded by degree: the order-k table is a prefix of the
// order-(k+1) table, so truncation is a prefix copy.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "curvlab/errors.hpp"

namespace curvlab {

inline constexpr int kMaxJetOrder = 3;
inline constexpr int kMaxJetVars = 8;

using MultiIndex = std::array<std::uint8_t, kMaxJetVars>;

inline int multi_index_degree(const MultiIndex& a) {
    int d = 0;
    for (auto e : a) d += e;
    return d;
}

/// Shared per-(dim, order) lookup tables: the multi-index list, the
/// Leibniz product table, and the index shifts used when extracting
/// derivative jets.
struct JetTable {
    int dim = 0;
    int order = 0;
    std::vector<MultiIndex> midx;          // graded order, degree then lex
    std::array<int, kMaxJetOrder + 2> count_to_order{}; // prefix sizes

    struct MulEntry {
        std::uint16_t a, b, out;
        double weight; // product of per-variable binomials
    };
    std::vector<MulEntry> mul;

    // up[j][i] = index of midx[j] + e_i; defined for deg(midx[j]) < order
    std::vector<std::array<std::uint16_t, kMaxJetVars>> up;

    std::size_t size() const { return midx.size(); }

    int find(const MultiIndex& a) const {
        for (std::size_t i = 0; i < midx.size(); ++i)
            if (midx[i] == a) return static_cast<int>(i);
        return -1;
    }
};

namespace detail {

inline double binom_small(int n, int k) {
    static const double table[4][4] = {
        {1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
    return table[n][k];
}

inline std::unique_ptr<JetTable> build_jet_table(int dim, int order) {
    auto t = std::make_unique<JetTable>();
    t->dim = dim;
    t->order = order;

    // Enumerate sorted multi-indices degree by degree (combinations of
    // variables with repetition, lexicographic within a degree).
    t->count_to_order[0] = 0;
    for (int deg = 0; deg <= order; ++deg) {
        if (deg == 0) {
            t->midx.push_back(MultiIndex{});
        } else {
            std::vector<int> vars(deg, 0);
            while (true) {
                MultiIndex m{};
                for (int v : vars) m[v] += 1;
                t->midx.push_back(m);
                int p = deg - 1;
                while (p >= 0 && vars[p] == dim - 1) --p;
                if (p < 0) break;
                ++vars[p];
                for (int q = p + 1; q < deg; ++q) vars[q] = vars[p];
            }
        }
        t->count_to_order[deg + 1] = static_cast<int>(t->midx.size());
    }

    // Leibniz table with multinomial weights on raw partials:
    // d^a(fg) = sum_{b+c=a} prod_v C(a_v, b_v) d^b f d^c g.
    for (std::size_t ia = 0; ia < t->midx.size(); ++ia) {
        int da = multi_index_degree(t->midx[ia]);
        for (std::size_t ib = 0; ib < t->midx.size(); ++ib) {
            int db = multi_index_degree(t->midx[ib]);
            if (da + db > order) continue;
            MultiIndex out{};
            double w = 1.0;
            for (int v = 0; v < dim; ++v) {
                out[v] = static_cast<std::uint8_t>(t->midx[ia][v] + t->midx[ib][v]);
                w *= binom_small(out[v], t->midx[ia][v]);
            }
            int io = t->find(out);
            t->mul.push_back({static_cast<std::uint16_t>(ia),
                              static_cast<std::uint16_t>(ib),
                              static_cast<std::uint16_t>(io), w});
        }
    }

    if (order > 0) {
        t->up.resize(t->count_to_order[order]);
        for (int j = 0; j < t->count_to_order[order]; ++j) {
            for (int i = 0; i < dim; ++i) {
                MultiIndex m = t->midx[j];
                m[i] += 1;
                t->up[j][i] = static_cast<std::uint16_t>(t->find(m));
            }
        }
    }
    return t;
}

} // namespace detail

inline const JetTable& jet_table(int dim, int order) {
    if (dim < 1 || dim > kMaxJetVars)
        throw InputError("jet dimension out of range: " + std::to_string(dim));
    if (order < 0 || order > kMaxJetOrder)
        throw InputError("jet order out of range: " + std::to_string(order));
    static std::mutex mtx;
    static std::map<std::pair<int, int>, std::unique_ptr<JetTable>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto& slot = cache[{dim, order}];
    if (!slot) slot = detail::build_jet_table(dim, order);
    return *slot;
}

class Jet {
public:
    Jet() = default;

    Jet(int dim, int order)
        : tab_(&jet_table(dim, order)), c_(tab_->size(), 0.0) {}

    static Jet constant(int dim, int order, double v) {
        Jet j(dim, order);
        j.c_[0] = v;
        return j;
    }

    /// Jet of the coordinate function x^var at the given value.
    static Jet variable(int dim, int order, double value, int var) {
        if (var < 0 || var >= dim)
            throw InputError("jet seed: variable index " + std::to_string(var) +
                             " out of range for dimension " + std::to_string(dim));
        Jet j(dim, order);
        j.c_[0] = value;
        if (order >= 1) j.c_[1 + var] = 1.0;
        return j;
    }

    bool empty() const { return tab_ == nullptr; }
    int dim() const { return tab_ ? tab_->dim : 0; }
    int order() const { return tab_ ? tab_->order : 0; }
    std::size_t size() const { return c_.size(); }
    const JetTable& table() const { return *tab_; }

    double value() const { return c_.empty() ? 0.0 : c_[0]; }

    double& operator[](std::size_t i) { return c_[i]; }
    double operator[](std::size_t i) const { return c_[i]; }

    std::span<const double> coeffs() const { return c_; }

    /// Raw partial derivative d^alpha at the base point.
    double partial(const MultiIndex& alpha) const {
        require_table();
        if (multi_index_degree(alpha) > order())
            throw InputError("jet partial: |alpha| exceeds jet order");
        int i = tab_->find(alpha);
        if (i < 0) throw InputError("jet partial: bad multi-index");
        return c_[static_cast<std::size_t>(i)];
    }

    /// First partial as a convenience (alpha = e_var).
    double partial(int var) const {
        MultiIndex m{};
        m[var] = 1;
        return partial(m);
    }

    /// The jet of d_i f, one order lower.
    Jet derivative(int var) const {
        require_table();
        if (order() < 1) throw InputError("jet derivative: order exhausted");
        if (var < 0 || var >= dim()) throw InputError("jet derivative: bad variable");
        Jet out(dim(), order() - 1);
        for (std::size_t j = 0; j < out.c_.size(); ++j)
            out.c_[j] = c_[tab_->up[j][var]];
        return out;
    }

    Jet truncated(int new_order) const {
        require_table();
        if (new_order > order()) throw InputError("jet truncate: order increase");
        if (new_order == order()) return *this;
        Jet out(dim(), new_order);
        for (std::size_t j = 0; j < out.c_.size(); ++j) out.c_[j] = c_[j];
        return out;
    }

    Jet& operator+=(const Jet& o) {
        check_same(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        check_same(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    Jet& operator*=(double s) {
        for (double& x : c_) x *= s;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator-(Jet a) {
        for (double& x : a.c_) x = -x;
        return a;
    }
    friend Jet operator+(Jet a, double s) {
        if (!a.c_.empty()) a.c_[0] += s;
        return a;
    }
    friend Jet operator+(double s, Jet a) { return std::move(a) + s; }
    friend Jet operator-(Jet a, double s) { return std::move(a) + (-s); }
    friend Jet operator-(double s, const Jet& a) { return -a + s; }
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator*(double s, Jet a) { return a *= s; }
    friend Jet operator/(Jet a, double s) { return a *= (1.0 / s); }

    friend Jet operator*(const Jet& a, const Jet& b) {
        a.check_same(b);
        Jet out(a.dim(), a.order());
        for (const auto& e : a.tab_->mul)
            out.c_[e.out] += e.weight * a.c_[e.a] * b.c_[e.b];
        return out;
    }

    friend Jet operator/(const Jet& a, const Jet& b);

private:
    void require_table() const {
        if (!tab_) throw InputError("operation on empty jet");
    }
    void check_same(const Jet& o) const {
        if (tab_ != o.tab_)
            throw InputError("jet arithmetic requires equal dimension and order");
    }

    const JetTable* tab_ = nullptr;
    std::vector<double> c_;
};

/// g(a) for a univariate g with derivatives d[k] = g^(k)(a.value()),
/// k = 0..a.order().  Horner on the zero-value perturbation; exact
/// through the truncation order.
inline Jet compose_univariate(std::span<const double> derivs, const Jet& a) {
    const int ord = a.order();
    Jet pert = a;
    pert[0] = 0.0;
    double fact = 1.0;
    for (int k = 2; k <= ord; ++k) fact *= k;
    Jet r = Jet::constant(a.dim(), ord, derivs[static_cast<std::size_t>(ord)] / fact);
    for (int k = ord - 1; k >= 0; --k) {
        fact = 1.0;
        for (int j = 2; j <= k; ++j) fact *= j;
        r = r * pert + derivs[static_cast<std::size_t>(k)] / fact;
    }
    return r;
}

inline Jet reciprocal(const Jet& a) {
    const double v = a.value();
    if (v == 0.0) throw EvalError("division by a jet with zero value");
    const double iv = 1.0 / v;
    const std::array<double, 4> d = {iv, -iv * iv, 2.0 * iv * iv * iv,
                                     -6.0 * iv * iv * iv * iv};
    return compose_univariate(d, a);
}

inline Jet operator/(const Jet& a, const Jet& b) {
    a.check_same(b);
    return a * reciprocal(b);
}

inline Jet sin(const Jet& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    const std::array<double, 4> d = {s, c, -s, -c};
    return compose_univariate(d, a);
}

inline Jet cos(const Jet& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    const std::array<double, 4> d = {c, -s, -c, s};
    return compose_univariate(d, a);
}

inline Jet tan(const Jet& a) {
    const double c = std::cos(a.value());
    if (c == 0.0) throw EvalError("tan evaluated at a pole");
    const double t = std::tan(a.value());
    const double s = 1.0 + t * t; // sec^2
    const std::array<double, 4> d = {t, s, 2.0 * t * s, 2.0 * s * s + 4.0 * t * t * s};
    return compose_univariate(d, a);
}

inline Jet exp(const Jet& a) {
    const double e = std::exp(a.value());
    const std::array<double, 4> d = {e, e, e, e};
    return compose_univariate(d, a);
}

inline Jet log(const Jet& a) {
    const double v = a.value();
    if (v <= 0.0) throw EvalError("log of a non-positive value");
    const double iv = 1.0 / v;
    const std::array<double, 4> d = {std::log(v), iv, -iv * iv, 2.0 * iv * iv * iv};
    return compose_univariate(d, a);
}

inline Jet sqrt(const Jet& a) {
    const double v = a.value();
    if (v <= 0.0) throw EvalError("sqrt of a non-positive value");
    const double r = std::sqrt(v);
    const std::array<double, 4> d = {r, 0.5 / r, -0.25 / (r * v),
                                     0.375 / (r * v * v)};
    return compose_univariate(d, a);
}

inline Jet sinh(const Jet& a) {
    const double s = std::sinh(a.value()), c = std::cosh(a.value());
    const std::array<double, 4> d = {s, c, s, c};
    return compose_univariate(d, a);
}

inline Jet cosh(const Jet& a) {
    const double s = std::sinh(a.value()), c = std::cosh(a.value());
    const std::array<double, 4> d = {c, s, c, s};
    return compose_univariate(d, a);
}

inline Jet tanh(const Jet& a) {
    const double t = std::tanh(a.value());
    const double s = 1.0 - t * t; // sech^2
    const std::array<double, 4> d = {t, s, -2.0 * t * s, -2.0 * s * s + 4.0 * t * t * s};
    return compose_univariate(d, a);
}

/// Integer exponents use repeated multiplication (valid for any base);
/// fractional exponents need a positive base.
inline Jet pow(const Jet& a, double p) {
    if (p == std::floor(p) && std::abs(p) <= 64.0) {
        long e = static_cast<long>(p);
        if (e == 0) return Jet::constant(a.dim(), a.order(), 1.0);
        bool neg = e < 0;
        unsigned long u = neg ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
        Jet acc = Jet::constant(a.dim(), a.order(), 1.0);
        Jet base = a;
        while (u > 0) {
            if (u & 1u) acc = acc * base;
            u >>= 1;
            if (u > 0) base = base * base;
        }
        return neg ? reciprocal(acc) : acc;
    }
    const double v = a.value();
    if (v <= 0.0) throw EvalError("pow with fractional exponent needs a positive base");
    const double f = std::pow(v, p);
    const std::array<double, 4> d = {f, p * f / v, p * (p - 1.0) * f / (v * v),
                                     p * (p - 1.0) * (p - 2.0) * f / (v * v * v)};
    return compose_univariate(d, a);
}

inline bool is_constant(const Jet& a) {
    for (std::size_t i = 1; i < a.size(); ++i)
        if (a[i] != 0.0) return false;
    return true;
}

inline Jet pow(const Jet& a, const Jet& b) {
    if (is_constant(b)) return pow(a, b.value());
    if (a.value() <= 0.0)
        throw EvalError("pow with varying exponent needs a positive base");
    return exp(b * log(a));
}

} // namespace curvlab
