#include "bispec/report.hpp"

#include <cmath>
#include <sstream>

#include "bispec/common.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bispec {

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

namespace {

int g_threads = 1;

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

const char* relation_name(Relation r) {
    switch (r) {
        case Relation::LessEq: return "<=";
        case Relation::GreaterEq: return ">=";
        case Relation::Finite: return "finite";
    }
    return "?";
}

nlohmann::json number_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

}  // namespace

void set_num_threads(int n) {
    g_threads = n > 0 ? n : 1;
#ifdef _OPENMP
    omp_set_num_threads(g_threads);
#endif
}

int num_threads() { return g_threads; }

bool Criterion::ok() const {
    if (!std::isfinite(value)) return false;
    switch (relation) {
        case Relation::LessEq: return value <= limit;
        case Relation::GreaterEq: return value >= limit;
        case Relation::Finite: return true;
    }
    return false;
}

double relative_change(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    if (scale == 0.0) return 0.0;
    return std::abs(a - b) / scale;
}

void VerificationReport::param(std::string key, double value) {
    params.emplace_back(std::move(key), fmt_double(value));
}

void VerificationReport::require_stable(std::string name, double a, double b, double rel_tol) {
    require(std::move(name), relative_change(a, b), Relation::LessEq, rel_tol);
}

bool VerificationReport::pass() const {
    for (const auto& c : criteria) {
        if (!c.ok()) return false;
    }
    return true;
}

double VerificationReport::value(const std::string& key) const {
    for (const auto& [k, v] : values) {
        if (k == key) return v;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

nlohmann::json VerificationReport::to_json() const {
    nlohmann::json j;
    j["check"] = check_name;
    j["anchor"] = anchor;
    nlohmann::json p = nlohmann::json::object();
    for (const auto& [k, v] : params) p[k] = v;
    j["params"] = p;
    j["measured_constant"] = number_or_null(measured_constant);
    j["refined_constant"] = number_or_null(refined_constant);
    nlohmann::json crit = nlohmann::json::array();
    for (const auto& c : criteria) {
        crit.push_back({{"name", c.name},
                        {"value", number_or_null(c.value)},
                        {"relation", relation_name(c.relation)},
                        {"limit", c.limit},
                        {"ok", c.ok()}});
    }
    j["criteria"] = crit;
    nlohmann::json vals = nlohmann::json::object();
    for (const auto& [k, v] : values) vals[k] = number_or_null(v);
    j["values"] = vals;
    j["notes"] = notes;
    j["informational"] = informational;
    j["pass"] = pass();
    return j;
}

std::string VerificationReport::csv_header() {
    return "check,anchor,params,measured_constant,refined_constant,pass,informational";
}

std::string VerificationReport::csv_row() const {
    std::string ps;
    for (const auto& [k, v] : params) {
        if (!ps.empty()) ps += ";";
        ps += k + "=" + v;
    }
    std::ostringstream os;
    os << csv_escape(check_name) << ',' << csv_escape(anchor) << ',' << csv_escape(ps) << ','
       << fmt_double(measured_constant) << ',' << fmt_double(refined_constant) << ','
       << (pass() ? "true" : "false") << ',' << (informational ? "true" : "false");
    return os.str();
}

}  // namespace bispec
