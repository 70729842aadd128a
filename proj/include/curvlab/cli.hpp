#pragma once

// Command-line front end.  Exit codes: 0 success / all checks passed,
// 1 verification failure, 2 usage or input error.  Nothing else.
//
//   compute [--catalog ID | --spec FILE] [--params k=v ...]
//           --point v1,v2,... [--json PATH]
//   verify  SUITE [--catalog ID|all | --spec FILE] [--samples N]
//           [--seed S] [--tol X] [--json PATH]
//   catalog list | show ID
//
// CURVLAB_SEED provides the default seed; --seed wins.

#include <charconv>
#include <functional>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "curvlab/catalog.hpp"
#include "curvlab/curvature.hpp"
#include "curvlab/metric_spec.hpp"
#include "curvlab/report.hpp"
#include "curvlab/verify.hpp"

namespace curvlab::cli {

namespace detail {

inline std::vector<double> parse_point(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string tok = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        if (tok.empty()) throw InputError("bad --point: empty component");
        double v = 0.0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
            throw InputError("bad --point component '" + tok + "'");
        out.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline std::map<std::string, double> parse_params(const std::vector<std::string>& kvs) {
    std::map<std::string, double> out;
    for (const auto& kv : kvs) {
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw InputError("bad --params entry '" + kv + "' (want name=value)");
        std::string key = kv.substr(0, eq);
        std::string val = kv.substr(eq + 1);
        double v = 0.0;
        auto res = std::from_chars(val.data(), val.data() + val.size(), v);
        if (res.ec != std::errc() || res.ptr != val.data() + val.size())
            throw InputError("bad --params value in '" + kv + "'");
        out[key] = v;
    }
    return out;
}

inline nlohmann::json tensor_to_json(const Tensor<double>& t) {
    // Row-major nested arrays; index order matches the written symbol.
    std::function<nlohmann::json(std::size_t, std::size_t)> build =
        [&](std::size_t level, std::size_t base) -> nlohmann::json {
        nlohmann::json arr = nlohmann::json::array();
        std::size_t stride = 1;
        for (std::size_t r = level + 1; r < static_cast<std::size_t>(t.rank()); ++r)
            stride *= static_cast<std::size_t>(t.dim());
        for (int i = 0; i < t.dim(); ++i) {
            if (level + 1 == static_cast<std::size_t>(t.rank()))
                arr.push_back(t.flat(base + static_cast<std::size_t>(i)));
            else
                arr.push_back(build(level + 1, base + static_cast<std::size_t>(i) * stride));
        }
        return arr;
    };
    nlohmann::json j;
    std::string var;
    for (Slot s : t.variance()) var += (s == Slot::Up ? 'u' : 'd');
    j["variance"] = var;
    if (t.rank() == 0)
        j["components"] = t.flat(0);
    else
        j["components"] = build(0, 0);
    return j;
}

inline MetricSpec resolve_spec(const std::string& catalog_id, const std::string& spec_path,
                               std::string* id_out) {
    if (!catalog_id.empty() && !spec_path.empty())
        throw InputError("give either --catalog or --spec, not both");
    if (!catalog_id.empty()) {
        const CatalogEntry& e = catalog_entry(catalog_id);
        if (id_out) *id_out = e.id;
        return e.spec;
    }
    if (!spec_path.empty()) {
        MetricSpec s = load_metric_spec(spec_path);
        if (id_out) *id_out = s.label.empty() ? spec_path : s.label;
        return s;
    }
    throw InputError("one of --catalog or --spec is required");
}

inline std::uint64_t default_seed() {
    if (const char* env = std::getenv("CURVLAB_SEED")) {
        std::uint64_t v = 0;
        auto res = std::from_chars(env, env + std::string(env).size(), v);
        if (res.ec == std::errc()) return v;
    }
    return 42;
}

inline void write_json(const nlohmann::json& j, const std::string& path, std::ostream& out) {
    std::string text = j.dump(2);
    text.push_back('\n');
    if (path.empty()) {
        out << text;
    } else {
        std::ofstream f(path);
        if (!f) throw InputError("cannot write '" + path + "'");
        f << text;
    }
}

} // namespace detail

inline int cmd_compute(const std::string& catalog_id, const std::string& spec_path,
                       const std::vector<std::string>& params, const std::string& point_text,
                       const std::string& json_path, std::ostream& out) {
    std::string id;
    MetricSpec spec = detail::resolve_spec(catalog_id, spec_path, &id);
    for (const auto& [k, v] : detail::parse_params(params)) spec.params[k] = v;
    WeylStructure ws = spec.build();
    std::vector<double> point = detail::parse_point(point_text);
    if (static_cast<int>(point.size()) != spec.dimension)
        throw InputError("--point has " + std::to_string(point.size()) + " components, chart needs " +
                         std::to_string(spec.dimension));

    MetricAt m = metric_at(ws.metric, point, 3);
    ConnectionAt conn = weyl_connection(ws, m);
    CurvaturePack pack = compute_pack(conn, m);
    CoincidenceResult co = coincidence_check(pack);

    nlohmann::json j;
    j["tool_version"] = kToolVersion;
    j["metric_id"] = id;
    j["label"] = spec.label;
    j["dimension"] = spec.dimension;
    j["coordinates"] = spec.coordinates;
    j["point"] = point;
    j["params"] = spec.params;
    j["connection"] = pack.connection;

    nlohmann::json tensors;
    tensors["metric"] = detail::tensor_to_json(pack.metric);
    tensors["metric_inverse"] = detail::tensor_to_json(pack.metric_inverse);
    tensors["riemann"] = detail::tensor_to_json(pack.riemann);
    tensors["ricci"] = detail::tensor_to_json(pack.ricci);
    tensors["ricci_tracefree"] = detail::tensor_to_json(pack.ricci_tracefree);
    tensors["ricci_skew"] = detail::tensor_to_json(pack.ricci_skew);
    tensors["schouten_projective"] = detail::tensor_to_json(pack.schouten_projective);
    tensors["schouten_conformal"] = detail::tensor_to_json(pack.schouten_conformal);
    tensors["weyl_projective"] = detail::tensor_to_json(pack.weyl_projective);
    tensors["weyl_conformal"] = detail::tensor_to_json(pack.weyl_conformal);
    tensors["cotton_projective"] = detail::tensor_to_json(pack.cotton_projective);
    tensors["cotton_conformal"] = detail::tensor_to_json(pack.cotton_conformal);
    tensors["div_weyl_projective"] = detail::tensor_to_json(pack.div_weyl_projective);
    tensors["div_weyl_conformal"] = detail::tensor_to_json(pack.div_weyl_conformal);
    j["tensors"] = tensors;
    j["scalar_curvature"] = pack.scalar;
    j["scalar_gradient"] = pack.scalar_gradient;

    nlohmann::json diag;
    diag["compatibility_residual"] = check_compatibility(conn, ws, m);
    diag["coincidence_residual"] = co.residual;
    diag["coincidence_scale"] = co.scale;
    diag["ricci_tracefree_norm"] = co.tracefree_norm;
    diag["ricci_skew_norm"] = co.skew_norm;
    j["diagnostics"] = diag;

    detail::write_json(j, json_path, out);
    return 0;
}

inline int cmd_verify(const std::string& suite, const std::string& catalog_id,
                      const std::string& spec_path, int samples, std::uint64_t seed,
                      double tol_scale, const std::string& json_path, std::ostream& out) {
    SuiteOptions opt;
    opt.seed = seed;
    opt.samples = samples;
    opt.tol_scale = tol_scale;
    if (samples < 1) throw InputError("--samples must be >= 1");
    if (tol_scale <= 0.0) throw InputError("--tol must be positive");

    std::vector<SuiteEntry> entries;
    if (!spec_path.empty()) {
        if (!catalog_id.empty()) throw InputError("give either --catalog or --spec, not both");
        std::string id;
        MetricSpec spec = detail::resolve_spec("", spec_path, &id);
        entries.push_back(SuiteEntry::from_spec(spec, id));
    } else if (catalog_id.empty() || catalog_id == "all") {
        for (const auto& e : catalog()) entries.push_back(SuiteEntry::from_catalog(e));
    } else {
        entries.push_back(SuiteEntry::from_catalog(catalog_entry(catalog_id)));
    }

    VerificationReport rep = run_suite(suite, entries, opt);
    rep.print_table(out);
    if (!json_path.empty()) detail::write_json(rep.to_json(), json_path, out);
    return rep.all_passed() ? 0 : 1;
}

inline int cmd_catalog(const std::string& action, const std::string& id, std::ostream& out) {
    if (action == "list") {
        for (const auto& e : catalog())
            out << e.id << "  [" << classification_name(e.tag) << "]  " << e.spec.label << "\n";
        return 0;
    }
    if (action == "show") {
        if (id.empty()) throw InputError("catalog show needs an entry id");
        const CatalogEntry& e = catalog_entry(id);
        detail::write_json(nlohmann::json(e.spec), "", out);
        return 0;
    }
    throw InputError("unknown catalog action '" + action + "' (want list or show)");
}

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"coordinate-chart curvature engine: projective/conformal Weyl "
                 "tensors, their coincidence, and identity verification"};
    app.name("curvlab");

    std::string catalog_id, spec_path, point_text, json_path;
    std::vector<std::string> params;
    std::string suite, cat_action, cat_id;
    int samples = 10;
    std::uint64_t seed = detail::default_seed();
    double tol_scale = 1.0;

    CLI::App* compute = app.add_subcommand("compute", "evaluate every curvature tensor at a point");
    compute->add_option("--catalog", catalog_id, "built-in catalog entry id");
    compute->add_option("--spec", spec_path, "metric spec JSON file");
    compute->add_option("--params", params, "parameter overrides, name=value");
    compute->add_option("--point", point_text, "evaluation point, comma separated")->required();
    compute->add_option("--json", json_path, "write the JSON document here instead of stdout");

    CLI::App* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("suite", suite,
                       "coincidence | invariance | bianchi | traces | lowdim | nurowski | "
                       "schouten-law | all")
        ->required();
    verify->add_option("--catalog", catalog_id, "catalog entry id or 'all' (default)");
    verify->add_option("--spec", spec_path, "metric spec JSON file");
    verify->add_option("--samples", samples, "sample points / random changes per entry");
    verify->add_option("--seed", seed, "PRNG seed (default: CURVLAB_SEED or 42)");
    verify->add_option("--tol", tol_scale, "multiply every tolerance by this factor");
    verify->add_option("--json", json_path, "write the full JSON report here");

    CLI::App* cat = app.add_subcommand("catalog", "list or show built-in entries");
    cat->add_option("action", cat_action, "list | show")->required();
    cat->add_option("id", cat_id, "entry id (for show)");

    app.require_subcommand(1);

    std::vector<const char*> argv;
    argv.push_back("curvlab");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (compute->parsed())
            return cmd_compute(catalog_id, spec_path, params, point_text, json_path, out);
        if (verify->parsed())
            return cmd_verify(suite, catalog_id, spec_path, samples, seed, tol_scale, json_path,
                              out);
        return cmd_catalog(cat_action, cat_id, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const EvalError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace curvlab::cli
