#pragma once

// Verification report data model.  JSON serialization is byte-stable
// for a fixed (command line, seed): records are sorted, object keys are
// alphabetical, and timings stay out of the JSON (they appear only in
// the human-readable table).

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace curvlab {

inline constexpr const char* kToolVersion = "0.1.0";

struct CheckRecord {
    std::string check_id;   // e.g. "coincidence.forward"
    std::string metric_id;  // catalog id or spec label
    std::string connection; // connection description
    std::vector<std::vector<double>> points;
    std::vector<double> residuals; // one per point / trial
    double tolerance = 0.0;
    bool passed = false;
    bool informational = false; // reported but never fails the run
    std::map<std::string, double> diagnostics;
    std::string note;
    double wall_ms = 0.0; // stdout only

    double worst_residual() const {
        double w = 0.0;
        for (double r : residuals) w = std::max(w, r);
        return w;
    }
};

struct VerificationReport {
    std::string suite;
    std::uint64_t seed = 0;
    int samples = 0;
    std::string resolved_convention;
    std::vector<CheckRecord> checks;

    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.informational && !c.passed) return false;
        return true;
    }

    void sort_records() {
        std::stable_sort(checks.begin(), checks.end(),
                         [](const CheckRecord& a, const CheckRecord& b) {
                             if (a.check_id != b.check_id) return a.check_id < b.check_id;
                             return a.metric_id < b.metric_id;
                         });
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["tool_version"] = kToolVersion;
        j["suite"] = suite;
        j["seed"] = seed;
        j["samples"] = samples;
        j["resolved_convention"] = resolved_convention;
        j["verdict"] = all_passed() ? "pass" : "fail";
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : checks) {
            nlohmann::json rec;
            rec["check_id"] = c.check_id;
            rec["metric_id"] = c.metric_id;
            rec["connection"] = c.connection;
            rec["points"] = c.points;
            rec["residuals"] = c.residuals;
            rec["tolerance"] = c.tolerance;
            rec["verdict"] = c.informational ? "info" : (c.passed ? "pass" : "fail");
            rec["diagnostics"] = c.diagnostics;
            rec["note"] = c.note;
            arr.push_back(rec);
        }
        j["checks"] = arr;
        return j;
    }

    void print_table(std::ostream& os) const {
        os << "suite: " << suite << "   seed: " << seed << "   samples: " << samples << "\n";
        if (!resolved_convention.empty())
            os << "resolved convention: " << resolved_convention << "\n";
        os << std::left << std::setw(28) << "check" << std::setw(18) << "metric"
           << std::setw(13) << "residual" << std::setw(13) << "tolerance" << std::setw(7)
           << "status" << std::right << std::setw(9) << "ms" << "\n";
        os << std::string(88, '-') << "\n";
        for (const auto& c : checks) {
            os << std::left << std::setw(28) << clip(c.check_id, 27) << std::setw(18)
               << clip(c.metric_id, 17) << std::setw(13) << format_sci(c.worst_residual())
               << std::setw(13) << format_sci(c.tolerance) << std::setw(7)
               << (c.informational ? "info" : (c.passed ? "pass" : "FAIL")) << std::right
               << std::setw(9) << std::fixed << std::setprecision(1) << c.wall_ms << "\n";
            if (!c.note.empty()) os << "    " << c.note << "\n";
        }
        os << std::string(88, '-') << "\n";
        os << "overall: " << (all_passed() ? "PASS" : "FAIL") << "\n";
        os.unsetf(std::ios::floatfield);
    }

private:
    static std::string format_sci(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3e", v);
        return buf;
    }
    static std::string clip(const std::string& s, std::size_t w) {
        if (s.size() <= w) return s;
        return s.substr(0, w - 2) + "..";
    }
};

} // namespace curvlab
