#pragma once

// Charts, metric fields, general Weyl structures and connections.
//
// Index conventions: Gamma^k_ij is stored as gamma(k, i, j) and is
// symmetric in (i, j) by construction (all connections here are
// torsion-free).  The two connection-change projectors are
//
//   Sigma^{kl}_{ij} = d^k_i d^l_j + d^l_i d^k_j          (projective)
//   S^{kl}_{ij}     = Sigma^{kl}_{ij} - g_ij g^{kl}      (conformal)
//
// and a general Weyl connection of the conformal class is the unique
// torsion-free connection with nabla_i g_kl = -2 f_i g_kl; it is built
// here as Levi-Civita plus the S-change by f.

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "curvlab/errors.hpp"
#include "curvlab/expr.hpp"
#include "curvlab/jet.hpp"
#include "curvlab/tensor.hpp"

namespace curvlab {

struct Chart {
    int dim = 0;
    std::vector<std::string> coord_names;
    std::string validity_hint; // e.g. "r > 2M"; informational only

    Chart() = default;
    Chart(int n, std::vector<std::string> names, std::string hint = {})
        : dim(n), coord_names(std::move(names)), validity_hint(std::move(hint)) {
        if (dim < 2) throw InputError("chart dimension must be at least 2");
        if (static_cast<int>(coord_names.size()) != dim)
            throw InputError("chart needs one name per dimension");
        for (std::size_t i = 0; i < coord_names.size(); ++i)
            for (std::size_t j = i + 1; j < coord_names.size(); ++j)
                if (coord_names[i] == coord_names[j])
                    throw InputError("duplicate coordinate name '" + coord_names[i] + "'");
    }
};

/// Symmetric metric field g_ij given by expressions; only the upper
/// triangle is stored, so g_ij == g_ji holds by construction.
class MetricField {
public:
    MetricField() = default;

    MetricField(Chart chart, const std::vector<std::vector<std::string>>& components,
                std::map<std::string, double> params = {})
        : chart_(std::move(chart)), params_(std::move(params)) {
        const int n = chart_.dim;
        if (static_cast<int>(components.size()) != n)
            throw InputError("metric component grid must be n x n");
        upper_.resize(static_cast<std::size_t>(n * (n + 1) / 2));
        for (int i = 0; i < n; ++i) {
            if (static_cast<int>(components[static_cast<std::size_t>(i)].size()) != n)
                throw InputError("metric component grid must be n x n");
            for (int j = i; j < n; ++j)
                upper_[tri_index(i, j)] =
                    parse_expression(components[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        }
        // A provided lower triangle must match the upper one.
        for (int i = 1; i < n; ++i)
            for (int j = 0; j < i; ++j) {
                const std::string& low = components[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                if (low.empty()) continue;
                ExprPtr parsed = parse_expression(low);
                if (to_string(parsed) != to_string(component(i, j)))
                    throw InputError("metric component (" + std::to_string(i) + "," +
                                     std::to_string(j) + ") does not match its transpose");
            }
    }

    MetricField(Chart chart, std::vector<ExprPtr> upper, std::map<std::string, double> params)
        : chart_(std::move(chart)), upper_(std::move(upper)), params_(std::move(params)) {}

    const Chart& chart() const { return chart_; }
    int dim() const { return chart_.dim; }
    const std::map<std::string, double>& params() const { return params_; }

    const ExprPtr& component(int i, int j) const { return upper_[tri_index(i, j)]; }

    MetricField with_params(std::map<std::string, double> params) const {
        MetricField m = *this;
        for (auto& [k, v] : params) m.params_[k] = v;
        return m;
    }

    /// The conformally rescaled metric exp(2*omega) * g, as a new field.
    MetricField rescaled(const ExprPtr& omega) const {
        MetricField m = *this;
        ExprPtr factor = make_unary(UnaryOp::Exp, make_binary(BinaryOp::Mul, make_number(2.0), omega));
        for (auto& c : m.upper_) c = make_binary(BinaryOp::Mul, factor, c);
        return m;
    }

    EvalEnv env_at(std::span<const double> point, int order) const {
        return EvalEnv::at_point(chart_.coord_names, point, order, params_);
    }

private:
    std::size_t tri_index(int i, int j) const {
        const int n = chart_.dim;
        if (i > j) std::swap(i, j);
        return static_cast<std::size_t>(i * n - i * (i - 1) / 2 + (j - i));
    }

    Chart chart_;
    std::vector<ExprPtr> upper_;
    std::map<std::string, double> params_;
};

/// Conformal class representative plus the 1-form f_i defining a
/// general Weyl connection (all-zero f gives Levi-Civita).
struct WeylStructure {
    MetricField metric;
    std::vector<ExprPtr> one_form;

    WeylStructure() = default;
    WeylStructure(MetricField m, const std::vector<std::string>& f_exprs) : metric(std::move(m)) {
        if (static_cast<int>(f_exprs.size()) != metric.dim())
            throw InputError("Weyl 1-form needs one component per dimension");
        for (const auto& s : f_exprs) one_form.push_back(parse_expression(s));
    }

    bool is_metric_compatible() const { // f identically zero as written?
        for (const auto& e : one_form) {
            const auto* n = std::get_if<NumberLit>(&e->v);
            if (!n || n->value != 0.0) return false;
        }
        return true;
    }
};

enum class ChangeKind { Projective, Conformal };

struct ConnectionChange {
    ChangeKind kind = ChangeKind::Projective;
    std::vector<ExprPtr> one_form;

    ConnectionChange() = default;
    ConnectionChange(ChangeKind k, const std::vector<std::string>& b_exprs) : kind(k) {
        for (const auto& s : b_exprs) one_form.push_back(parse_expression(s));
    }
    ConnectionChange(ChangeKind k, std::vector<ExprPtr> b) : kind(k), one_form(std::move(b)) {}
};

/// Metric, inverse and determinant at one point, jet-valued.
struct MetricAt {
    std::vector<double> point;
    int order = 0;
    Tensor<Jet> g;     // (down, down)
    Tensor<Jet> g_inv; // (up, up)
    Jet det;

    int dim() const { return g.dim(); }
};

/// Connection coefficients at one point, jet-valued.
struct ConnectionAt {
    std::vector<double> point;
    int order = 0;          // jet order carried by gamma
    Tensor<Jet> gamma;      // (up, down, down), symmetric in the down pair
    std::string description;

    int dim() const { return gamma.dim(); }
};

namespace detail {

/// Solve the jet-valued linear system M x = rhs columns by Gaussian
/// elimination with partial pivoting on coefficient values; returns the
/// inverse and the determinant (product of pivots, sign-corrected).
inline void invert_jet_matrix(const Tensor<Jet>& g, Tensor<Jet>& inv, Jet& det) {
    const int n = g.dim();
    const int order = g.flat(0).order();
    std::vector<std::vector<Jet>> a(static_cast<std::size_t>(n));
    std::vector<std::vector<Jet>> b(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        a[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(n));
        b[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = g(i, j);
            b[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                Jet::constant(n, order, i == j ? 1.0 : 0.0);
        }
    }
    det = Jet::constant(n, order, 1.0);
    double sign = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)].value()) >
                std::abs(a[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)].value()))
                piv = r;
        if (a[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)].value() == 0.0)
            throw EvalError("singular metric at evaluation point");
        if (piv != col) {
            std::swap(a[static_cast<std::size_t>(piv)], a[static_cast<std::size_t>(col)]);
            std::swap(b[static_cast<std::size_t>(piv)], b[static_cast<std::size_t>(col)]);
            sign = -sign;
        }
        const Jet& pivot = a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
        det = det * pivot;
        Jet ipiv = reciprocal(pivot);
        for (int j = 0; j < n; ++j) {
            a[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)] =
                a[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)] * ipiv;
            b[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)] =
                b[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)] * ipiv;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            Jet factor = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
            if (is_constant(factor) && factor.value() == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                a[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] -=
                    factor * a[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)];
                b[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] -=
                    factor * b[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)];
            }
        }
    }
    det = det * sign;
    inv = Tensor<Jet>(n, {Slot::Up, Slot::Up}, Jet(n, order));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            inv(i, j) = b[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
}

} // namespace detail

/// Evaluate g, g^{-1} and det g at a point with jets of the given order.
/// Points where |det g| falls below 1e-12 * scale^n are rejected.
inline MetricAt metric_at(const MetricField& metric, std::span<const double> point, int order) {
    const int n = metric.dim();
    EvalEnv env = metric.env_at(point, order);
    MetricAt out;
    out.point.assign(point.begin(), point.end());
    out.order = order;
    out.g = Tensor<Jet>(n, {Slot::Down, Slot::Down}, Jet(n, order));
    double scale = 1.0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Jet v = eval_jet(metric.component(i, j), env);
            out.g(i, j) = v;
            if (j != i) out.g(j, i) = v;
            scale = std::max(scale, std::abs(v.value()));
        }
    detail::invert_jet_matrix(out.g, out.g_inv, out.det);
    double floor = 1e-12;
    for (int i = 0; i < n; ++i) floor *= scale;
    if (std::abs(out.det.value()) <= floor)
        throw EvalError("metric determinant below floor at evaluation point");
    return out;
}

/// Gamma^k_ij = (1/2) g^{km} (d_i g_jm + d_j g_im - d_m g_ij), one jet
/// order below the metric evaluation.
inline ConnectionAt levi_civita(const MetricAt& m) {
    const int n = m.dim();
    if (m.order < 1) throw InputError("levi_civita needs metric jets of order >= 1");
    const int ord = m.order - 1;
    Tensor<Jet> ginv = truncated(m.g_inv, ord);

    // dg(m, i, j) = d_m g_ij as an order-(ord) jet
    Tensor<Jet> dg(n, {Slot::Down, Slot::Down, Slot::Down}, Jet(n, ord));
    for (int mu = 0; mu < n; ++mu)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                Jet d = m.g(i, j).derivative(mu);
                dg(mu, i, j) = d;
                if (j != i) dg(mu, j, i) = d;
            }

    ConnectionAt conn;
    conn.point = m.point;
    conn.order = ord;
    conn.description = "levi-civita";
    conn.gamma = Tensor<Jet>(n, {Slot::Up, Slot::Down, Slot::Down}, Jet(n, ord));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                Jet sum(n, ord);
                for (int mu = 0; mu < n; ++mu)
                    sum += ginv(k, mu) * (dg(i, j, mu) + dg(j, i, mu) - dg(mu, i, j));
                sum *= 0.5;
                conn.gamma(k, i, j) = sum;
                if (j != i) conn.gamma(k, j, i) = sum;
            }
    return conn;
}

inline ConnectionAt levi_civita(const MetricField& metric, std::span<const double> point,
                                int order) {
    return levi_civita(metric_at(metric, point, order + 1));
}

namespace detail {

/// Add the conformal-projector contraction S^{kl}_{ij} b_l to gamma:
/// d^k_i b_j + d^k_j b_i - g_ij b^k.  Dropping the metric term gives the
/// projective contraction Sigma^{kl}_{ij} b_l.
inline void add_one_form_change(Tensor<Jet>& gamma, const std::vector<Jet>& b,
                                const MetricAt* metric_for_conformal) {
    const int n = gamma.dim();
    const int ord = gamma.flat(0).order();
    std::vector<Jet> b_up;
    if (metric_for_conformal) {
        Tensor<Jet> ginv = truncated(metric_for_conformal->g_inv, ord);
        b_up.assign(static_cast<std::size_t>(n), Jet(n, ord));
        for (int k = 0; k < n; ++k) {
            Jet sum(n, ord);
            for (int l = 0; l < n; ++l) sum += ginv(k, l) * b[static_cast<std::size_t>(l)];
            b_up[static_cast<std::size_t>(k)] = sum;
        }
    }
    Tensor<Jet> g;
    if (metric_for_conformal) g = truncated(metric_for_conformal->g, ord);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                Jet add(n, ord);
                if (i == k) add += b[static_cast<std::size_t>(j)];
                if (j == k) add += b[static_cast<std::size_t>(i)];
                if (metric_for_conformal) add -= g(i, j) * b_up[static_cast<std::size_t>(k)];
                Jet v = gamma(k, i, j) + add;
                gamma(k, i, j) = v;
                if (j != i) gamma(k, j, i) = v;
            }
}

inline std::vector<Jet> eval_one_form(const std::vector<ExprPtr>& exprs, const EvalEnv& env) {
    std::vector<Jet> b;
    b.reserve(exprs.size());
    for (const auto& e : exprs) b.push_back(eval_jet(e, env));
    return b;
}

} // namespace detail

/// Connection of the Weyl structure: Levi-Civita of g plus the
/// conformal change by f.  Satisfies nabla_i g_kl = -2 f_i g_kl.
inline ConnectionAt weyl_connection(const WeylStructure& ws, const MetricAt& m) {
    ConnectionAt conn = levi_civita(m);
    if (!ws.is_metric_compatible()) {
        EvalEnv env = ws.metric.env_at(conn.point, conn.order);
        std::vector<Jet> f = detail::eval_one_form(ws.one_form, env);
        detail::add_one_form_change(conn.gamma, f, &m);
        conn.description = "weyl";
    }
    return conn;
}

inline ConnectionAt weyl_connection(const WeylStructure& ws, std::span<const double> point,
                                    int order) {
    return weyl_connection(ws, metric_at(ws.metric, point, order + 1));
}

/// Apply a projective or conformal change to a connection at a point.
/// b is evaluated in the metric's environment (so it may reference
/// params); the conformal change also needs the metric at the point.
inline ConnectionAt apply_change(const ConnectionAt& conn, const ConnectionChange& change,
                                 const MetricField& metric, const MetricAt& m) {
    if (static_cast<int>(change.one_form.size()) != conn.dim())
        throw InputError("connection change 1-form has wrong dimension");
    ConnectionAt out = conn;
    EvalEnv env = metric.env_at(conn.point, conn.order);
    std::vector<Jet> b = detail::eval_one_form(change.one_form, env);
    detail::add_one_form_change(out.gamma, b,
                                change.kind == ChangeKind::Conformal ? &m : nullptr);
    out.description = conn.description +
                      (change.kind == ChangeKind::Conformal ? "+conformal" : "+projective");
    return out;
}

/// Residual of the Weyl compatibility condition at a point:
/// max |d_i g_kl - Gamma^m_ik g_ml - Gamma^m_il g_km + 2 f_i g_kl|.
inline double check_compatibility(const ConnectionAt& conn, const WeylStructure& ws,
                                  const MetricAt& m) {
    const int n = conn.dim();
    EvalEnv env = ws.metric.env_at(conn.point, 0);
    std::vector<double> f(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
        f[static_cast<std::size_t>(i)] = eval_jet(ws.one_form[static_cast<std::size_t>(i)], env).value();

    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
                double r = m.g(k, l).partial(i) + 2.0 * f[static_cast<std::size_t>(i)] * m.g(k, l).value();
                for (int mu = 0; mu < n; ++mu)
                    r -= conn.gamma(mu, i, k).value() * m.g(mu, l).value() +
                         conn.gamma(mu, i, l).value() * m.g(k, mu).value();
                worst = std::max(worst, std::abs(r));
            }
    return worst;
}

/// Sigma^{ab}_{cd} = d^a_c d^b_d + d^b_c d^a_d, as a rank-4 value tensor
/// with slots (up, up, down, down).
inline Tensor<double> sigma_projector(int n) {
    Tensor<double> s(n, {Slot::Up, Slot::Up, Slot::Down, Slot::Down});
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d)
                    s(a, b, c, d) = (a == c && b == d ? 1.0 : 0.0) + (b == c && a == d ? 1.0 : 0.0);
    return s;
}

/// S^{ab}_{cd} = Sigma^{ab}_{cd} - g_cd g^{ab}.
template <typename T>
Tensor<T> s_projector(const Tensor<T>& g, const Tensor<T>& g_inv) {
    const int n = g.dim();
    const T zero = g.flat(0) - g.flat(0);
    Tensor<T> s(n, {Slot::Up, Slot::Up, Slot::Down, Slot::Down}, zero);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    T v = zero;
                    if (a == c && b == d) v = v + 1.0;
                    if (b == c && a == d) v = v + 1.0;
                    s(a, b, c, d) = v - g(c, d) * g_inv(a, b);
                }
    return s;
}

} // namespace curvlab
