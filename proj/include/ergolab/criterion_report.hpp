#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ergolab {

enum class ConditionId { EC, TV_EC, C1, C2, C4 };
enum class Verdict { supported, not_supported, inconclusive };

std::string to_string(ConditionId id);
std::string to_string(Verdict v);

struct GridPointEstimate {
    double x;
    double t;
    double estimate;
    double ci_low;
    double ci_high;
};

// One stability-condition diagnostic: per-grid-cell estimates plus the
// grid summary standing in for the inf/liminf/limsup of the condition.
// The caveat is mandatory: grid summaries are diagnostics, never proofs.
struct CriterionReport {
    ConditionId condition = ConditionId::C4;
    double probe_z = 0.0;
    double radius = 0.0;  // 0 when the condition has no ball radius
    std::vector<double> x_grid;
    std::vector<double> t_grid;
    std::vector<GridPointEstimate> points;
    double summary_value = 0.0;
    double summary_ci_low = 0.0;
    double summary_ci_high = 0.0;
    Verdict verdict = Verdict::inconclusive;
    std::string caveat;
    bool exact = false;  // true for oracle reports (degenerate CIs)

    // throws if the caveat is missing or the summary lies outside the
    // per-point range it claims to summarize
    void validate() const;

    nlohmann::json to_json() const;
    std::string to_csv() const;  // columns: x,t,estimate,ci_low,ci_high
};

// Verdict for conditions of the form "limit quantity > 0".
Verdict verdict_for_lower_bound(double estimate, double ci_low);

// Verdict for defect-style conditions that should vanish; `tolerance` is
// the diagnostic threshold under which the defect counts as supported.
Verdict verdict_for_defect(double ci_low, double ci_high, double tolerance);

extern const char* const kGridCaveat;

}  // namespace ergolab
