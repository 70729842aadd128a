#pragma once

// Built-in catalog of charts chosen to witness every branch of the
// coincidence theorem: flat, Einstein of both signs and signatures, a
// genuinely non-Einstein pair, and a Weyl connection with non-closed f
// (which is the Levi-Civita connection of no metric in its class).
// Sample boxes are the documented safe regions used by the suites.

#include <string>
#include <vector>

#include "curvlab/errors.hpp"
#include "curvlab/metric_spec.hpp"

namespace curvlab {

namespace detail {

inline std::vector<std::vector<std::string>> diagonal_grid(const std::vector<std::string>& diag) {
    const std::size_t n = diag.size();
    std::vector<std::vector<std::string>> g(n, std::vector<std::string>(n, "0"));
    for (std::size_t i = 0; i < n; ++i) g[i][i] = diag[i];
    return g;
}

inline std::string stereographic_factor(int n) {
    std::string r2 = "x1^2";
    for (int i = 2; i <= n; ++i) r2 += "+x" + std::to_string(i) + "^2";
    return "4/(1+" + r2 + ")^2";
}

inline std::vector<std::string> coords(int n) {
    std::vector<std::string> c;
    for (int i = 1; i <= n; ++i) c.push_back("x" + std::to_string(i));
    return c;
}

inline std::vector<std::array<double, 2>> box(int n, double lo, double hi) {
    return std::vector<std::array<double, 2>>(static_cast<std::size_t>(n), {lo, hi});
}

inline std::vector<CatalogEntry> build_catalog() {
    std::vector<CatalogEntry> cat;

    {
        MetricSpec s;
        s.label = "flat Euclidean 4-space";
        s.dimension = 4;
        s.coordinates = coords(4);
        s.metric = diagonal_grid({"1", "1", "1", "1"});
        s.sample_box = box(4, -1.0, 1.0);
        cat.push_back({"euclidean4", s, Classification::Flat});
    }

    for (int n : {2, 3, 4}) {
        MetricSpec s;
        s.label = "unit " + std::to_string(n) + "-sphere, stereographic chart";
        s.dimension = n;
        s.coordinates = coords(n);
        s.metric = diagonal_grid(
            std::vector<std::string>(static_cast<std::size_t>(n), stereographic_factor(n)));
        s.sample_box = box(n, -1.0, 1.0);
        cat.push_back({"sphere" + std::to_string(n), s, Classification::Einstein});
    }

    {
        MetricSpec s;
        s.label = "hyperbolic 4-space, Poincare ball chart";
        s.dimension = 4;
        s.coordinates = coords(4);
        s.metric = diagonal_grid(
            std::vector<std::string>(4, "4/(1-x1^2-x2^2-x3^2-x4^2)^2"));
        s.sample_box = box(4, -0.25, 0.25); // keeps |x| <= 0.5
        cat.push_back({"hyperbolic4", s, Classification::Einstein});
    }

    {
        MetricSpec s;
        s.label = "Schwarzschild exterior (Lorentzian, Ricci-flat)";
        s.dimension = 4;
        s.coordinates = {"t", "r", "th", "ph"};
        s.metric = diagonal_grid({"-(1-2*M/r)", "1/(1-2*M/r)", "r^2", "r^2*sin(th)^2"});
        s.params = {{"M", 1.0}};
        s.sample_box = {{-1.0, 1.0}, {3.0, 10.0}, {0.5, 2.6}, {0.0, 6.2831853}};
        cat.push_back({"schwarzschild", s, Classification::Einstein});
    }

    {
        MetricSpec s;
        s.label = "de Sitter-like 5-space, flat slicing (Lorentzian Einstein)";
        s.dimension = 5;
        s.coordinates = {"t", "x1", "x2", "x3", "x4"};
        s.metric = diagonal_grid({"-1", "exp(2*t)", "exp(2*t)", "exp(2*t)", "exp(2*t)"});
        s.sample_box = {{0.0, 0.5}, {-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
        cat.push_back({"desitter_like5", s, Classification::Einstein});
    }

    {
        MetricSpec s;
        s.label = "anisotropic cross-coupled 3-metric (non-Einstein)";
        s.dimension = 3;
        s.coordinates = coords(3);
        s.metric = diagonal_grid({"1+x2^2", "1+2*x3^2", "1+3*x1^2"});
        s.sample_box = box(3, 0.2, 1.2);
        cat.push_back({"aniso3", s, Classification::NonEinstein});
    }

    {
        MetricSpec s;
        s.label = "anisotropic cross-coupled 4-metric (non-Einstein)";
        s.dimension = 4;
        s.coordinates = coords(4);
        s.metric = diagonal_grid({"1+x2^2", "1+2*x3^2", "1+3*x1^2", "1"});
        s.sample_box = box(4, 0.2, 1.2);
        cat.push_back({"aniso4", s, Classification::NonEinstein});
    }

    {
        MetricSpec s;
        s.label = "matter-era FLRW slab a(t) = t^(2/3) (non-Einstein)";
        s.dimension = 4;
        s.coordinates = {"t", "x1", "x2", "x3"};
        s.metric = diagonal_grid({"-1", "t^(4/3)", "t^(4/3)", "t^(4/3)"});
        s.sample_box = {{1.0, 2.0}, {-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
        cat.push_back({"flrw4", s, Classification::NonEinstein});
    }

    {
        MetricSpec s;
        s.label = "flat metric with non-closed Weyl 1-form f = x1 dx2";
        s.dimension = 4;
        s.coordinates = coords(4);
        s.metric = diagonal_grid({"1", "1", "1", "1"});
        s.weyl_one_form = {"0", "x1", "0", "0"};
        s.sample_box = box(4, -1.0, 1.0);
        cat.push_back({"weyl_nonclosed4", s, Classification::WeylNonclosed});
    }

    return cat;
}

} // namespace detail

inline const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> cat = detail::build_catalog();
    return cat;
}

inline const CatalogEntry& catalog_entry(const std::string& id) {
    for (const auto& e : catalog())
        if (e.id == id) return e;
    throw InputError("unknown catalog entry '" + id + "'");
}

} // namespace curvlab
