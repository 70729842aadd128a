#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "curvlab/catalog.hpp"
#include "curvlab/theorems.hpp"
#include "curvlab/verify.hpp"
#include "curvlab/rng.hpp"

using namespace curvlab;

namespace {

Tensor<double> identity_metric(int n) {
    Tensor<double> g(n, {Slot::Down, Slot::Down});
    for (int i = 0; i < n; ++i) g(i, i) = 1.0;
    return g;
}

Tensor<double> random_sym(int n, SplitRng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor<double> s(n, {Slot::Down, Slot::Down});
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double v = rng.uniform(lo, hi);
            s(i, j) = v;
            s(j, i) = v;
        }
    return s;
}

std::vector<double> sample_in_box(const MetricSpec& spec, SplitRng& rng) {
    std::vector<double> p;
    for (const auto& b : spec.sample_box) p.push_back(rng.uniform(b[0], b[1]));
    return p;
}

} // namespace

TEST_CASE("glue terms: zero Schouten gives zero glue") {
    Tensor<double> rho(4, {Slot::Down, Slot::Down});
    CHECK(max_abs(glue_projective(rho)) == 0.0);
    Tensor<double> g = identity_metric(4);
    CHECK(max_abs(glue_conformal(rho, g, g)) == 0.0);
}

TEST_CASE("pure-trace projective glue matches the scalar term of the expansion") {
    const int n = 4;
    Tensor<double> g = identity_metric(n);
    const double lambda = 0.9;
    Tensor<double> rho(n, {Slot::Down, Slot::Down});
    for (int i = 0; i < n; ++i) rho(i, i) = lambda;
    Tensor<double> glue = glue_projective(rho);
    // 2 lambda d_[i^k g_j]l: component (i=0, j=1, k=0, l=1) = lambda
    CHECK(glue(0, 1, 0, 1) == Catch::Approx(lambda));
    CHECK(glue(1, 0, 0, 1) == Catch::Approx(-lambda));
    CHECK(glue(0, 1, 2, 3) == 0.0);

    // against the expansion route with R = n(n-1) lambda (so that the
    // trace coefficient R/(n(n-1)) equals lambda) and Phi = phi = 0
    Tensor<double> zero(n, {Slot::Down, Slot::Down});
    Tensor<double> expanded = glue_projective_expanded(zero, zero, n * (n - 1.0) * lambda, g);
    for (std::size_t f = 0; f < glue.size(); ++f)
        CHECK(glue.flat(f) == Catch::Approx(expanded.flat(f)).margin(1e-14));
}

TEST_CASE("glue construction routes agree on random algebraic input", "[property]") {
    SplitRng rng(61);
    for (int n : {4, 5, 6}) {
        SplitRng nrng = rng.split(static_cast<std::uint64_t>(n));
        for (int t = 0; t < 60; ++t) {
            Tensor<double> g = random_sym(n, nrng, -0.2, 0.2);
            for (int i = 0; i < n; ++i) g(i, i) += (i == 0 && t % 2 == 0) ? -1.0 : 1.0;
            Tensor<double> ginv = invert_matrix(g);
            Tensor<double> ric(n, {Slot::Down, Slot::Down});
            for (std::size_t f = 0; f < ric.size(); ++f) ric.flat(f) = nrng.uniform(-1.0, 1.0);

            auto [tracefree, skew, scalar] = ricci_decompose(ric, g, ginv);
            Tensor<double> rho = schouten_projective(ric);
            Tensor<double> p = schouten_conformal(ric, g, ginv);

            Tensor<double> direct_p = glue_projective(rho);
            Tensor<double> expand_p = glue_projective_expanded(tracefree, skew, scalar, g);
            CHECK(max_abs(direct_p - expand_p) <= 1e-13 * std::max(1.0, max_abs(direct_p)));

            Tensor<double> direct_c = glue_conformal(p, g, ginv);
            Tensor<double> expand_c = glue_conformal_expanded(tracefree, skew, scalar, g, ginv);
            CHECK(max_abs(direct_c - expand_c) <= 1e-13 * std::max(1.0, max_abs(direct_c)));
        }
    }
}

TEST_CASE("il-trace identity: measured irreducible coefficients") {
    SplitRng rng(67);

    SECTION("pure trace input gives zero difference") {
        const int n = 4;
        Tensor<double> g = identity_metric(n);
        Tensor<double> ric(n, {Slot::Down, Slot::Down});
        for (int i = 0; i < n; ++i) ric(i, i) = 1.3;
        TraceIdentityResult res = trace_identity(ric, g, g);
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                CHECK(std::abs(res.lhs_trace(j, k) - res.rhs_trace(j, k)) < 1e-13);
    }

    SECTION("coefficients are n/(n-1) and (n^2-4)/(n(n+1))") {
        for (int n : {4, 5, 6}) {
            SplitRng nrng = rng.split(static_cast<std::uint64_t>(n));
            for (int t = 0; t < 100; ++t) {
                Tensor<double> g = random_sym(n, nrng, -0.15, 0.15);
                for (int i = 0; i < n; ++i) g(i, i) += 1.0;
                Tensor<double> ginv = invert_matrix(g);
                Tensor<double> ric(n, {Slot::Down, Slot::Down});
                for (std::size_t f = 0; f < ric.size(); ++f) ric.flat(f) = nrng.uniform(-1.0, 1.0);
                TraceIdentityResult res = trace_identity(ric, g, ginv);
                CHECK(std::abs(res.coeff_tracefree - n / (n - 1.0)) <= 1e-12);
                CHECK(std::abs(res.coeff_skew - (n * n - 4.0) / (n * (n + 1.0))) <= 1e-12);
                CHECK(std::abs(res.coeff_scalar) <= 1e-12);
                CHECK(res.leftover <= 1e-12);
            }
        }
    }

    SECTION("n = 4 values are 4/3 and 3/5") {
        CHECK(4.0 / (4 - 1) == Catch::Approx(4.0 / 3.0));
        SplitRng nrng = rng.split("n4");
        Tensor<double> g = identity_metric(4);
        Tensor<double> ric(4, {Slot::Down, Slot::Down});
        for (std::size_t f = 0; f < ric.size(); ++f) ric.flat(f) = nrng.uniform(-1.0, 1.0);
        TraceIdentityResult res = trace_identity(ric, g, g);
        CHECK(res.coeff_tracefree == Catch::Approx(4.0 / 3.0).margin(1e-13));
        CHECK(res.coeff_skew == Catch::Approx(3.0 / 5.0).margin(1e-13));
    }
}

TEST_CASE("M-tensor: antisymmetrizer structure and annihilation") {
    SplitRng rng(71);
    const int n = 4;
    Tensor<double> g = random_sym(n, rng, -0.2, 0.2);
    for (int i = 0; i < n; ++i) g(i, i) += 1.0;
    Tensor<double> ginv = invert_matrix(g);
    Tensor<double> m = nurowski_tensor(g, ginv);

    SECTION("middle term is skew in [cd] after removing the others") {
        // the g^ef term 2 g_a[d g_c]b g^ef changes sign under c <-> d
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    for (int d = 0; d < n; ++d)
                        for (int e = 0; e < n; ++e)
                            for (int f = 0; f < n; ++f) {
                                double term = (g(a, d) * g(c, b) - g(a, c) * g(d, b)) * ginv(e, f);
                                double swapped =
                                    (g(a, c) * g(d, b) - g(a, d) * g(c, b)) * ginv(e, f);
                                CHECK(term == -swapped);
                                (void)m;
                            }
    }

    SECTION("pure trace annihilates, zero input annihilates") {
        Tensor<double> lam(n, {Slot::Down, Slot::Down});
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) lam(i, j) = -1.4 * g(i, j);
        CHECK(max_abs(nurowski_contraction(lam, g, ginv)) <= 1e-13);
        Tensor<double> zero(n, {Slot::Down, Slot::Down});
        CHECK(max_abs(nurowski_contraction(zero, g, ginv)) == 0.0);
    }

    SECTION("generic trace-free symmetric input responds") {
        Tensor<double> sym = random_sym(n, rng);
        auto [tracefree, skew, scalar] = ricci_decompose(sym, g, ginv);
        (void)skew;
        (void)scalar;
        CHECK(max_abs(nurowski_contraction(tracefree, g, ginv)) > 1e-6);
    }
}

TEST_CASE("coincidence_check reports residual and diagnostics") {
    SplitRng rng(73);
    const CatalogEntry& schw = catalog_entry("schwarzschild");
    for (double r : {3.0, 5.0, 10.0}) {
        CurvaturePack pack = compute_pack(schw.spec.build(), std::vector<double>{0.0, r, 1.2, 0.3});
        CoincidenceResult co = coincidence_check(pack);
        CHECK(co.residual <= 1e-8 * co.scale);
        CHECK(co.tracefree_norm <= 1e-9 * co.scale);
    }

    const CatalogEntry& aniso = catalog_entry("aniso4");
    WeylStructure ws = aniso.spec.build();
    int separated = 0;
    for (int t = 0; t < 10; ++t) {
        std::vector<double> p = sample_in_box(aniso.spec, rng);
        CoincidenceResult co = coincidence_check(compute_pack(ws, p));
        if (co.residual >= 1e3 * 1e-8 * co.scale && co.tracefree_norm > 1e-5 * co.scale)
            ++separated;
    }
    CHECK(separated == 10);
}

TEST_CASE("transformation-law calibration resolves to the changed connection, +1",
          "[regression]") {
    TransformConvention conv = resolve_transformation_convention();
    CHECK(conv.use_changed_connection);
    CHECK(conv.sign == 1.0);
    CHECK(conv.describe() == "nabla=changed,sign=+1");
}

TEST_CASE("M-contraction responds to a single off-diagonal symmetric pair") {
    const int n = 4;
    Tensor<double> g = identity_metric(n);
    Tensor<double> ric(n, {Slot::Down, Slot::Down});
    ric(0, 1) = 1.0;
    ric(1, 0) = 1.0;
    CHECK(max_abs(nurowski_contraction(ric, g, g)) > 0.5);
}

TEST_CASE("Schouten transformation law with b = 0 has zero residual") {
    const CatalogEntry& e = catalog_entry("sphere4");
    WeylStructure ws = e.spec.build();
    TransformConvention conv = resolve_transformation_convention();
    for (ChangeKind kind : {ChangeKind::Projective, ChangeKind::Conformal}) {
        ConnectionChange change(kind, {"0", "0", "0", "0"});
        CHECK(schouten_transformation_residual(ws, change, std::vector<double>{0.2, 0.1, -0.3, 0.4},
                                               conv) == 0.0);
    }
}

TEST_CASE("Schouten transformation law: flat case with constant b") {
    // With nabla'b = -2 b_i b_j on the changed connection, the residual
    // vanishes only for the resolved reading; rho - rho_check must equal
    // -b_i b_j directly.
    const CatalogEntry& e = catalog_entry("euclidean4");
    WeylStructure ws = e.spec.build();
    std::vector<double> p = {0.3, -0.4, 0.2, 0.6};
    TransformConvention conv = resolve_transformation_convention();

    ConnectionChange change(ChangeKind::Projective, {"0.2", "-0.1", "0.05", "0.15"});
    CHECK(schouten_transformation_residual(ws, change, p, conv) < 1e-14);

    // direct check of rho - rho_changed = -b b
    MetricAt m = metric_at(ws.metric, p, 3);
    ConnectionAt base = weyl_connection(ws, m);
    ConnectionAt changed = apply_change(base, change, ws.metric, m);
    Tensor<double> rho0 = values(schouten_projective(ricci(riemann(base))));
    Tensor<double> rho1 = values(schouten_projective(ricci(riemann(changed))));
    const double b[4] = {0.2, -0.1, 0.05, 0.15};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(rho0(i, j) - rho1(i, j) == Catch::Approx(-b[i] * b[j]).margin(1e-13));

    // the rejected readings have residuals far above roundoff
    TransformConvention wrong{false, 1.0};
    CHECK(schouten_transformation_residual(ws, change, p, wrong) > 1e-3);
}

TEST_CASE("Schouten transformation law on curved entries", "[property]") {
    SplitRng rng(79);
    TransformConvention conv = resolve_transformation_convention();
    for (const char* id : {"sphere4", "schwarzschild", "weyl_nonclosed4"}) {
        const CatalogEntry& e = catalog_entry(id);
        WeylStructure ws = e.spec.build();
        SplitRng erng = rng.split(id);
        for (ChangeKind kind : {ChangeKind::Projective, ChangeKind::Conformal}) {
            std::vector<ExprPtr> b;
            for (int i = 0; i < e.spec.dimension; ++i) {
                ExprPtr expr = make_binary(
                    BinaryOp::Mul, make_number(erng.uniform(-0.1, 0.1)),
                    make_symbol(ws.metric.chart().coord_names[static_cast<std::size_t>(
                        (i + 1) % e.spec.dimension)]));
                b.push_back(expr);
            }
            std::vector<double> p = sample_in_box(e.spec, erng);
            MetricAt m = metric_at(ws.metric, p, 3);
            CurvaturePack pack = compute_pack(weyl_connection(ws, m), m);
            double scale = std::max({1.0, max_abs(pack.schouten_projective), pack.riemann_max()});
            double r = schouten_transformation_residual(ws, ConnectionChange(kind, b), p, conv);
            CHECK(r <= 1e-9 * scale);
        }
    }
}

TEST_CASE("invariance suite: zero change leaves the pack identical") {
    const CatalogEntry& e = catalog_entry("sphere4");
    WeylStructure ws = e.spec.build();
    std::vector<double> p = {0.3, 0.1, -0.2, 0.4};
    MetricAt m = metric_at(ws.metric, p, 3);
    ConnectionAt conn = weyl_connection(ws, m);
    CurvaturePack base = compute_pack(conn, m);
    ConnectionAt same =
        apply_change(conn, ConnectionChange(ChangeKind::Projective, {"0", "0", "0", "0"}),
                     ws.metric, m);
    CurvaturePack changed = compute_pack(same, m);
    for (std::size_t f = 0; f < base.weyl_projective.size(); ++f) {
        CHECK(base.weyl_projective.flat(f) == changed.weyl_projective.flat(f));
        CHECK(base.weyl_conformal.flat(f) == changed.weyl_conformal.flat(f));
    }
}

TEST_CASE("projective changes keep W at zero on flat space") {
    SuiteOptions opt;
    opt.samples = 5;
    SuiteEntry e = SuiteEntry::from_catalog(catalog_entry("euclidean4"));
    auto recs = run_invariance(e, opt, SplitRng(123).split("inv"));
    for (const auto& r : recs) {
        INFO(r.check_id);
        CHECK(r.passed);
    }
}

TEST_CASE("einstein equivalence battery holds over random trials") {
    SuiteOptions opt;
    auto recs = run_nurowski(opt, SplitRng(42));
    REQUIRE(recs.size() == 2);
    for (const auto& r : recs) {
        INFO(r.check_id << " worst=" << r.worst_residual());
        CHECK(r.passed);
    }
    // every single normalized trace-free input produced a response
    for (double resp : recs[1].residuals) CHECK(resp > 1e-8);
}

TEST_CASE("lowdim suite verdicts by classification") {
    SuiteOptions opt;
    opt.samples = 6;
    SplitRng rng(55);
    {
        SuiteEntry e = SuiteEntry::from_catalog(catalog_entry("sphere2"));
        auto samples = detail::sample_packs(e, opt.samples, rng.split("s2"));
        auto recs = run_lowdim(e, opt, samples);
        REQUIRE(recs.size() == 1);
        CHECK(recs[0].passed);
    }
    {
        SuiteEntry e = SuiteEntry::from_catalog(catalog_entry("sphere3"));
        auto samples = detail::sample_packs(e, opt.samples, rng.split("s3"));
        auto recs = run_lowdim(e, opt, samples);
        REQUIRE(recs.size() == 2);
        CHECK(recs[0].passed); // conformal vanishes
        CHECK(recs[1].passed); // W ~ 0: agree
        CHECK(recs[1].note.find("agree") != std::string::npos);
    }
    {
        SuiteEntry e = SuiteEntry::from_catalog(catalog_entry("aniso3"));
        auto samples = detail::sample_packs(e, opt.samples, rng.split("a3"));
        auto recs = run_lowdim(e, opt, samples);
        REQUIRE(recs.size() == 2);
        CHECK(recs[0].passed);
        CHECK(recs[1].passed); // disagreement expected and found
        CHECK(recs[1].note.find("disagree") != std::string::npos);
    }
    SuiteEntry e4 = SuiteEntry::from_catalog(catalog_entry("sphere4"));
    CHECK_THROWS_AS(run_lowdim(e4, opt, {}), InputError);
}

TEST_CASE("report JSON is deterministic and records verdicts") {
    SuiteOptions opt;
    opt.samples = 3;
    std::vector<SuiteEntry> entries = {SuiteEntry::from_catalog(catalog_entry("sphere4")),
                                       SuiteEntry::from_catalog(catalog_entry("aniso4"))};
    VerificationReport a = run_suite("coincidence", entries, opt);
    VerificationReport b = run_suite("coincidence", entries, opt);
    CHECK(a.to_json().dump(2) == b.to_json().dump(2));
    CHECK_FALSE(a.all_passed()); // aniso4 must fail the literal check
    bool saw_fail = false;
    for (const auto& c : a.checks)
        if (c.metric_id == "aniso4" && c.check_id == "coincidence") saw_fail = !c.passed;
    CHECK(saw_fail);
}
