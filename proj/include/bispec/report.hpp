#pragma once

#include <chrono>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace bispec {

/// 12 significant digits; "inf" and "nan" as the stream prints them.
std::string fmt_double(double v);

enum class Relation { LessEq, GreaterEq, Finite };

/// One tolerance-bearing assertion inside a report.
struct Criterion {
    std::string name;
    double value = 0.0;
    Relation relation = Relation::Finite;
    double limit = 0.0;

    bool ok() const;
};

/// Outcome of a verification harness. The pass flag is a pure function of the
/// recorded criteria; informational reports never fail a suite.
struct VerificationReport {
    std::string check_name;
    std::string anchor;  // tag of the statement under test, e.g. "dkernel-integral"
    std::vector<std::pair<std::string, std::string>> params;
    double measured_constant = std::numeric_limits<double>::quiet_NaN();
    double refined_constant = std::numeric_limits<double>::quiet_NaN();
    std::vector<Criterion> criteria;
    std::vector<std::pair<std::string, double>> values;
    std::vector<std::string> notes;
    bool informational = false;
    double runtime_s = 0.0;

    void param(std::string key, std::string value) { params.emplace_back(std::move(key), std::move(value)); }
    void param(std::string key, double value);
    void record(std::string key, double value) { values.emplace_back(std::move(key), value); }
    void require(std::string name, double value, Relation rel, double limit = 0.0) {
        criteria.push_back({std::move(name), value, rel, limit});
    }
    /// |a - b| <= rel_tol * max(|a|, |b|), recorded as a LessEq criterion.
    void require_stable(std::string name, double a, double b, double rel_tol);
    void note(std::string text) { notes.push_back(std::move(text)); }

    bool pass() const;
    /// Value of a recorded measurement; NaN if absent.
    double value(const std::string& key) const;

    nlohmann::json to_json() const;
    static std::string csv_header();
    std::string csv_row() const;
};

/// Relative change |a - b| / max(|a|, |b|); zero when both vanish.
double relative_change(double a, double b);

/// Stopwatch that stores elapsed seconds into a report on scope exit.
class ReportTimer {
public:
    explicit ReportTimer(VerificationReport& r) : report_(r), start_(std::chrono::steady_clock::now()) {}
    ~ReportTimer() {
        report_.runtime_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
    ReportTimer(const ReportTimer&) = delete;
    ReportTimer& operator=(const ReportTimer&) = delete;

private:
    VerificationReport& report_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace bispec
