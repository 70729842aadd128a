#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "curvlab/catalog.hpp"
#include "curvlab/geometry.hpp"
#include "curvlab/rng.hpp"
#include "oracle_utils.hpp"

using namespace curvlab;

namespace {

MetricField euclidean(int n) {
    std::vector<std::string> names;
    for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
    std::vector<std::vector<std::string>> comps(static_cast<std::size_t>(n),
                                                std::vector<std::string>(static_cast<std::size_t>(n), "0"));
    for (int i = 0; i < n; ++i) comps[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = "1";
    return MetricField(Chart(n, names), comps);
}

std::vector<double> sample_in_box(const MetricSpec& spec, SplitRng& rng) {
    std::vector<double> p;
    for (const auto& b : spec.sample_box) p.push_back(rng.uniform(b[0], b[1]));
    return p;
}

} // namespace

TEST_CASE("metric_at on flat space gives the identity with zero derivatives") {
    MetricField g = euclidean(4);
    MetricAt m = metric_at(g, std::vector<double>{0.3, -0.2, 0.9, 0.0}, 3);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            CHECK(m.g(i, j).value() == (i == j ? 1.0 : 0.0));
            for (std::size_t c = 1; c < m.g(i, j).size(); ++c) CHECK(m.g(i, j)[c] == 0.0);
        }
    CHECK(m.det.value() == 1.0);
}

TEST_CASE("stereographic 2-sphere at the origin") {
    Chart chart(2, {"x1", "x2"});
    MetricField g(chart, {{"4/(1+x1^2+x2^2)^2", "0"}, {"", "4/(1+x1^2+x2^2)^2"}});
    MetricAt m = metric_at(g, std::vector<double>{0.0, 0.0}, 2);
    CHECK(m.g(0, 0).value() == 4.0);
    CHECK(m.g(1, 1).value() == 4.0);
    CHECK(m.g(0, 1).value() == 0.0);
    CHECK(m.det.value() == Catch::Approx(16.0));
}

TEST_CASE("Schwarzschild g_tt at r=4 with M=1") {
    const CatalogEntry& e = catalog_entry("schwarzschild");
    WeylStructure ws = e.spec.build();
    MetricAt m = metric_at(ws.metric, std::vector<double>{0.0, 4.0, 1.2, 0.3}, 1);
    CHECK(m.g(0, 0).value() == Catch::Approx(-0.5));
}

TEST_CASE("singular metrics are rejected") {
    Chart chart(2, {"x", "y"});
    MetricField g(chart, {{"x", "0"}, {"", "1"}}); // degenerates at x = 0
    CHECK_THROWS_AS(metric_at(g, std::vector<double>{0.0, 1.0}, 1), EvalError);
}

TEST_CASE("Levi-Civita on the polar 2-sphere matches the classical closed form") {
    Chart chart(2, {"th", "ph"});
    MetricField g(chart, {{"1", "0"}, {"", "sin(th)^2"}});
    std::vector<double> p = {M_PI / 4, 1.3};
    ConnectionAt conn = levi_civita(g, p, 2);
    CHECK(conn.gamma(0, 1, 1).value() == Catch::Approx(-0.5));        // -sin cos
    CHECK(conn.gamma(1, 0, 1).value() == Catch::Approx(1.0));         // cot
    CHECK(conn.gamma(1, 1, 0).value() == conn.gamma(1, 0, 1).value());

    // Independent finite-difference oracle on the same metric.
    oracle::MetricFn gfn = oracle::metric_value_fn(g);
    Tensor<double> fd_gamma = oracle::fd_christoffel(gfn, p, 1e-4);
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                CHECK(std::abs(conn.gamma(k, i, j).value() - fd_gamma(k, i, j)) < 1e-8);
}

TEST_CASE("Levi-Civita satisfies the compatibility condition with f = 0") {
    SplitRng rng(31);
    for (const char* id : {"sphere4", "schwarzschild", "aniso4"}) {
        const CatalogEntry& e = catalog_entry(id);
        WeylStructure ws = e.spec.build();
        for (int t = 0; t < 5; ++t) {
            std::vector<double> p = sample_in_box(e.spec, rng);
            MetricAt m = metric_at(ws.metric, p, 3);
            ConnectionAt conn = levi_civita(m);
            CHECK(check_compatibility(conn, ws, m) < 1e-12);
        }
    }
}

TEST_CASE("Weyl connection with f = 0 is the Levi-Civita connection") {
    const CatalogEntry& e = catalog_entry("sphere4");
    WeylStructure ws = e.spec.build();
    std::vector<double> p = {0.2, -0.1, 0.4, 0.3};
    MetricAt m = metric_at(ws.metric, p, 3);
    ConnectionAt lc = levi_civita(m);
    ConnectionAt wc = weyl_connection(ws, m);
    for (std::size_t f = 0; f < lc.gamma.size(); ++f)
        for (std::size_t c = 0; c < lc.gamma.flat(f).size(); ++c)
            CHECK(lc.gamma.flat(f)[c] == wc.gamma.flat(f)[c]);
}

TEST_CASE("flat Weyl connection matches the hand contraction of S with f") {
    const CatalogEntry& e = catalog_entry("weyl_nonclosed4");
    WeylStructure ws = e.spec.build();
    std::vector<double> p = {1.0, 1.0, 1.0, 1.0};
    MetricAt m = metric_at(ws.metric, p, 3);
    ConnectionAt conn = weyl_connection(ws, m);

    // Gamma^k_ij = d^k_i f_j + d^k_j f_i - delta_ij f^k with f = (0,1,0,0).
    const double f[4] = {0.0, 1.0, 0.0, 0.0};
    for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double want = (k == i ? f[j] : 0.0) + (k == j ? f[i] : 0.0) - (i == j ? f[k] : 0.0);
                CHECK(conn.gamma(k, i, j).value() == Catch::Approx(want).margin(1e-14));
            }
    CHECK(conn.gamma(1, 0, 0).value() == Catch::Approx(-1.0));
    CHECK(conn.gamma(1, 1, 1).value() == Catch::Approx(1.0));
}

TEST_CASE("Weyl compatibility residual vanishes and detects a wrong f") {
    SplitRng rng(37);
    const CatalogEntry& e = catalog_entry("weyl_nonclosed4");
    WeylStructure ws = e.spec.build();
    for (int t = 0; t < 20; ++t) {
        std::vector<double> p = sample_in_box(e.spec, rng);
        MetricAt m = metric_at(ws.metric, p, 3);
        ConnectionAt conn = weyl_connection(ws, m);
        CHECK(check_compatibility(conn, ws, m) < 1e-12);

        // Levi-Civita against a nonzero f: residual = 2 max |f_i g_kl|.
        ConnectionAt lc = levi_civita(m);
        double expect = 2.0 * std::abs(p[0]); // f = x1 dx2 on the unit metric
        CHECK(check_compatibility(lc, ws, m) == Catch::Approx(expect).margin(1e-12));
    }
}

TEST_CASE("apply_change with b = 0 is the identity") {
    const CatalogEntry& e = catalog_entry("sphere4");
    WeylStructure ws = e.spec.build();
    std::vector<double> p = {0.1, 0.2, -0.3, 0.4};
    MetricAt m = metric_at(ws.metric, p, 3);
    ConnectionAt conn = levi_civita(m);
    for (ChangeKind kind : {ChangeKind::Projective, ChangeKind::Conformal}) {
        ConnectionAt same =
            apply_change(conn, ConnectionChange(kind, {"0", "0", "0", "0"}), ws.metric, m);
        for (std::size_t f = 0; f < conn.gamma.size(); ++f)
            for (std::size_t c = 0; c < conn.gamma.flat(f).size(); ++c)
                CHECK(same.gamma.flat(f)[c] == conn.gamma.flat(f)[c]);
    }
}

TEST_CASE("projective change by a constant b on flat space") {
    MetricField g = euclidean(4);
    std::vector<double> p = {0.0, 0.0, 0.0, 0.0};
    MetricAt m = metric_at(g, p, 3);
    ConnectionAt conn = levi_civita(m);
    const double c = 0.25;
    ConnectionAt changed =
        apply_change(conn, ConnectionChange(ChangeKind::Projective, {"0.25", "0", "0", "0"}),
                     g, m);
    CHECK(changed.gamma(0, 0, 0).value() == 2 * c);
    CHECK(changed.gamma(1, 0, 1).value() == c);
    CHECK(changed.gamma(1, 1, 1).value() == 0.0);
}

TEST_CASE("conformal change by f reproduces the Weyl connection exactly") {
    const CatalogEntry& e = catalog_entry("weyl_nonclosed4");
    WeylStructure ws = e.spec.build();
    std::vector<double> p = {0.4, -0.7, 0.2, 0.9};
    MetricAt m = metric_at(ws.metric, p, 3);
    ConnectionAt viaS =
        apply_change(levi_civita(m), ConnectionChange(ChangeKind::Conformal, {"0", "x1", "0", "0"}),
                     ws.metric, m);
    ConnectionAt direct = weyl_connection(ws, m);
    for (std::size_t f = 0; f < direct.gamma.size(); ++f)
        for (std::size_t c = 0; c < direct.gamma.flat(f).size(); ++c)
            CHECK(viaS.gamma.flat(f)[c] == direct.gamma.flat(f)[c]);
}

TEST_CASE("changes preserve the symmetry of the connection exactly", "[property]") {
    SplitRng rng(41);
    const CatalogEntry& e = catalog_entry("schwarzschild");
    WeylStructure ws = e.spec.build();
    for (int t = 0; t < 10; ++t) {
        std::vector<double> p = sample_in_box(e.spec, rng);
        MetricAt m = metric_at(ws.metric, p, 3);
        ConnectionAt conn = levi_civita(m);
        ConnectionAt changed = apply_change(
            conn, ConnectionChange(ChangeKind::Conformal, {"0.1*r", "0.05*t", "0", "0.02"}),
            ws.metric, m);
        for (int k = 0; k < 4; ++k)
            for (int i = 0; i < 4; ++i)
                for (int j = i + 1; j < 4; ++j)
                    for (std::size_t c = 0; c < changed.gamma(k, i, j).size(); ++c)
                        CHECK(changed.gamma(k, i, j)[c] == changed.gamma(k, j, i)[c]);
    }
}

TEST_CASE("g * g_inv is the identity at every jet coefficient", "[property]") {
    SplitRng rng(43);
    for (const auto& entry : catalog()) {
        WeylStructure ws = entry.spec.build();
        SplitRng erng = rng.split(entry.id);
        for (int t = 0; t < 20; ++t) {
            std::vector<double> p = sample_in_box(entry.spec, erng);
            MetricAt m = [&] {
                for (;;) {
                    try {
                        return metric_at(ws.metric, p, 3);
                    } catch (const EvalError&) {
                        p = sample_in_box(entry.spec, erng);
                    }
                }
            }();
            const int n = entry.spec.dimension;
            double scale = 1.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    scale = std::max({scale, std::abs(m.g(i, j).value()),
                                      std::abs(m.g_inv(i, j).value())});
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    Jet prod(n, 3);
                    for (int k = 0; k < n; ++k) prod += m.g(i, k) * m.g_inv(k, j);
                    for (std::size_t c = 0; c < prod.size(); ++c) {
                        double want = (c == 0 && i == j) ? 1.0 : 0.0;
                        CHECK(std::abs(prod[c] - want) <= 1e-10 * scale);
                    }
                }
        }
    }
}

TEST_CASE("S-projector trace identity S^{kl}_{ij} g_kl = (2-n) g_ij", "[property]") {
    SplitRng rng(47);
    for (const char* id : {"sphere4", "schwarzschild", "desitter_like5", "aniso3"}) {
        const CatalogEntry& e = catalog_entry(id);
        WeylStructure ws = e.spec.build();
        SplitRng erng = rng.split(id);
        const int n = e.spec.dimension;
        for (int t = 0; t < 5; ++t) {
            std::vector<double> p = sample_in_box(e.spec, erng);
            MetricAt m = metric_at(ws.metric, p, 0);
            Tensor<double> g = values(m.g), ginv = values(m.g_inv);
            Tensor<double> s = s_projector(g, ginv);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double tr = 0.0;
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l) tr += s(k, l, i, j) * g(k, l);
                    CHECK(std::abs(tr - (2.0 - n) * g(i, j)) <= 1e-12 * std::max(1.0, std::abs(g(i, j))));
                }
        }
    }
}

TEST_CASE("Sigma projector symmetries") {
    Tensor<double> s = sigma_projector(4);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) {
                    CHECK(s(a, b, c, d) == s(b, a, c, d));
                    CHECK(s(a, b, c, d) == s(a, b, d, c));
                }
}

TEST_CASE("two projective changes compose additively", "[property]") {
    // Flat background with dyadic b: exact equality of coefficients.
    MetricField g = euclidean(4);
    std::vector<double> p = {0.5, -0.25, 0.75, 0.0};
    MetricAt m = metric_at(g, p, 3);
    ConnectionAt conn = levi_civita(m);
    ConnectionChange b1(ChangeKind::Projective, {"0.25", "-0.5", "0.125", "0"});
    ConnectionChange b2(ChangeKind::Projective, {"0.75", "0.25", "-0.375", "1"});
    ConnectionChange b12(ChangeKind::Projective,
                         {"0.25+0.75", "-0.5+0.25", "0.125-0.375", "0+1"});
    ConnectionAt two = apply_change(apply_change(conn, b1, g, m), b2, g, m);
    ConnectionAt one = apply_change(conn, b12, g, m);
    for (std::size_t f = 0; f < two.gamma.size(); ++f)
        for (std::size_t c = 0; c < two.gamma.flat(f).size(); ++c)
            CHECK(two.gamma.flat(f)[c] == one.gamma.flat(f)[c]);

    // Curved background: agreement to roundoff.
    const CatalogEntry& e = catalog_entry("sphere4");
    WeylStructure ws = e.spec.build();
    MetricAt ms = metric_at(ws.metric, p, 3);
    ConnectionAt cs = levi_civita(ms);
    ConnectionAt two_s = apply_change(apply_change(cs, b1, ws.metric, ms), b2, ws.metric, ms);
    ConnectionAt one_s = apply_change(cs, b12, ws.metric, ms);
    for (std::size_t f = 0; f < two_s.gamma.size(); ++f)
        for (std::size_t c = 0; c < two_s.gamma.flat(f).size(); ++c)
            CHECK(std::abs(two_s.gamma.flat(f)[c] - one_s.gamma.flat(f)[c]) <= 1e-14);
}

TEST_CASE("metric grids validate their shape and symmetry") {
    Chart chart(2, {"x", "y"});
    CHECK_THROWS_AS(MetricField(chart, {{"1", "0"}}), InputError);
    CHECK_THROWS_AS(MetricField(chart, {{"1", "x"}, {"y", "1"}}), InputError);
    CHECK_NOTHROW(MetricField(chart, {{"1", "x"}, {"x", "1"}}));
    CHECK_THROWS_AS(Chart(2, {"x", "x"}), InputError);
    CHECK_THROWS_AS(Chart(1, {"x"}), InputError);
}
