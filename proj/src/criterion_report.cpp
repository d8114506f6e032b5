#include "ergolab/criterion_report.hpp"

#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ergolab/io.hpp"

namespace ergolab {

const char* const kGridCaveat =
    "Grid-based liminf/limsup summaries are Monte Carlo diagnostics over a "
    "finite (x,t) grid beyond the burn-in, not proofs of the limit statements.";

std::string to_string(ConditionId id) {
    switch (id) {
        case ConditionId::EC: return "EC";
        case ConditionId::TV_EC: return "TV-EC";
        case ConditionId::C1: return "C1";
        case ConditionId::C2: return "C2";
        case ConditionId::C4: return "C4";
    }
    throw std::logic_error("unknown ConditionId");
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::supported: return "supported";
        case Verdict::not_supported: return "not-supported";
        case Verdict::inconclusive: return "inconclusive";
    }
    throw std::logic_error("unknown Verdict");
}

void CriterionReport::validate() const {
    if (caveat.empty())
        throw std::logic_error("CriterionReport: caveat field is mandatory");
    if (points.empty())
        throw std::logic_error("CriterionReport: no grid points");
    double lo = points.front().estimate, hi = points.front().estimate;
    for (const auto& p : points) {
        lo = std::min(lo, p.estimate);
        hi = std::max(hi, p.estimate);
    }
    const double slack = 1e-12;
    if (summary_value < lo - slack || summary_value > hi + slack)
        throw std::logic_error("CriterionReport: summary outside per-point range");
}

nlohmann::json CriterionReport::to_json() const {
    validate();
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points)
        pts.push_back({{"x", p.x},
                       {"t", p.t},
                       {"estimate", p.estimate},
                       {"ci_low", p.ci_low},
                       {"ci_high", p.ci_high}});
    return nlohmann::json{{"schema_version", 1},
                          {"kind", "criterion_report"},
                          {"condition", to_string(condition)},
                          {"probe_z", probe_z},
                          {"radius", radius},
                          {"x_grid", x_grid},
                          {"t_grid", t_grid},
                          {"points", pts},
                          {"summary", {{"value", summary_value},
                                       {"ci_low", summary_ci_low},
                                       {"ci_high", summary_ci_high}}},
                          {"verdict", to_string(verdict)},
                          {"caveat", caveat},
                          {"exact", exact}};
}

std::string CriterionReport::to_csv() const {
    validate();
    std::ostringstream out;
    out << "x,t,estimate,ci_low,ci_high\n";
    for (const auto& p : points)
        out << format_double(p.x) << ',' << format_double(p.t) << ','
            << format_double(p.estimate) << ',' << format_double(p.ci_low) << ','
            << format_double(p.ci_high) << '\n';
    return out.str();
}

Verdict verdict_for_lower_bound(double estimate, double ci_low) {
    if (ci_low > 0.0) return Verdict::supported;
    if (estimate == 0.0) return Verdict::not_supported;
    return Verdict::inconclusive;
}

Verdict verdict_for_defect(double ci_low, double ci_high, double tolerance) {
    if (ci_high < tolerance) return Verdict::supported;
    if (ci_low > tolerance) return Verdict::not_supported;
    return Verdict::inconclusive;
}

}  // namespace ergolab
