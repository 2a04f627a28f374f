#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "smms/warped_closed.hpp"
#include "smms/weighted.hpp"

namespace smms {

enum class FamilyId {
    Example12,
    WeightedSphere,
    WeightedEuclidean,
    WeightedHyperbolic,
    Counterexample31,
    Counterexample32,
    Thm41Positive,
    Thm41Zero,
    Thm41Negative,
    Example43,
    Thm14_3b,
};

/// Stable string ids ("example-1-2", "weighted-sphere", ...).
std::string family_key(FamilyId id);
/// Throws ParamConstraintViolation for an unknown key.
FamilyId family_from_key(const std::string& key);
const std::vector<FamilyId>& all_families();

/// Unset entries take family defaults (see resolve_params).
struct FamilyParams {
    std::optional<int> n;
    std::optional<double> m;
    std::optional<double> lambda;
    std::optional<double> mu;
    std::optional<double> A, B, C;
    std::optional<double> c1, c2, c3, c4;
    /// Accept the incomplete sub-cases of the weighted sphere (A = |B|, A = 0).
    bool allow_incomplete = false;
};

/// Defaults filled in, forced values installed, constraints checked.
/// Throws ParamConstraintViolation naming the violated clause.
FamilyParams resolve_params(FamilyId id, const FamilyParams& p);

struct GoldenComponent {
    std::string name;    // e.g. "W_f^m(t,x1,t,x1)"
    std::string tensor;  // weighted_weyl | weyl | scalar | ricci | weighted_schouten | delta_f_weyl
    std::vector<int> index;
    Point point;
    double value = 0.0;
    std::string source;  // closed-form expression the value comes from
};

struct FamilyExpected {
    std::optional<double> lambda;
    std::optional<double> kappa;
    std::optional<double> mu_forced;
    std::optional<double> beta_forced;
    bool weighted_einstein = true;
    bool weighted_harmonic = true;
    bool einstein = true;  // underlying metric Einstein
    std::vector<std::string> markers;
    std::vector<GoldenComponent> goldens;
};

struct FamilyInstance {
    FamilyId id;
    FamilyParams params;  // resolved
    std::variant<WarpedSMMS, SMMSChart> object;
    Interval window;      // sampling window in t (warped) or x1 (charts)

    bool is_warped() const { return std::holds_alternative<WarpedSMMS>(object); }
    const WarpedSMMS& warped() const { return std::get<WarpedSMMS>(object); }
    SMMSChart chart() const;

    /// k >= 1 evenly spaced values across the window.
    std::vector<double> sample_ts(int k) const;
    /// Chart points at sample_ts(k) with small deterministic transverse offsets.
    std::vector<Point> sample_points(int k) const;
    /// Chart point with first coordinate t and the offsets of sample `i`.
    Point point_at(double t, int i = 0) const;
};

FamilyInstance build_family(FamilyId id, const FamilyParams& p = {});
FamilyExpected family_expected(FamilyId id, const FamilyParams& p = {});

/// Computes the golden's tensor component on the instance's chart.
double evaluate_golden(const FamilyInstance& inst, const GoldenComponent& golden, const FDConfig& cfg = {});

/// v = e^{-f/m} as a function of t with exact derivatives when f has them.
RealFunction density_v(const WarpedSMMS& w);

}  // namespace smms
