#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smms/catalog.hpp"
#include "smms/warped_closed.hpp"
#include "smms/weighted.hpp"

namespace smms {

// ---- integrator ----

using OdeState = std::vector<double>;
using OdeRhs = std::function<void(const OdeState& y, OdeState& dydt, double t)>;

struct OdeOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    double initial_step = 1e-3;
    double min_step = 1e-13;
    /// Terminal event: integration stops at the first strict sign change of
    /// event(t, y) after it has left zero.
    std::function<double(double, const OdeState&)> event;
    double event_tol = 1e-13;
    /// Extra output times (ascending), filled from the dense output.
    std::vector<double> output_times;
};

struct OdeTrajectory {
    std::vector<double> t;        // accepted step times, t[0] = t0, last = final_time
    std::vector<OdeState> y;
    std::vector<OdeState> output;  // at output_times not beyond final_time
    std::optional<double> event_time;
    double final_time = 0.0;
    OdeState final_state;
};

/// Adaptive Dormand-Prince 5(4) with dense output. Throws StepSizeUnderflow
/// and NonFiniteState.
OdeTrajectory integrate_ode(const OdeRhs& rhs, const OdeState& y0, double t0, double t1,
                            const OdeOptions& opts = {});

// ---- generalized Obata equation ----

/// u'' + (2 lambda u - kappa) = 0, u(0) = xi, u'(0) = 0.
struct ObataProblem {
    double lambda = 0.0;
    double kappa = 0.0;
    double xi = 0.0;

    double rhs_value(double u) const { return 2 * lambda * u - kappa; }
    /// Throws InvalidProblem when 2 lambda xi - kappa = 0.
    void validate() const;
};

struct ObataOptions {
    double t_max = 10.0;  // integration length when no closing time exists
    double tol = 1e-12;
    int grid = 201;       // rows of the uniform sample table
};

class ObataSolution {
public:
    ObataSolution(ObataProblem prob, int n, std::vector<double> t, std::vector<double> u, std::vector<double> du,
                  std::optional<double> T, double t_end);

    const ObataProblem& problem() const noexcept { return prob_; }
    int n() const noexcept { return n_; }
    /// Closing time (first zero of u' after 0); empty means +infinity.
    const std::optional<double>& T() const noexcept { return T_; }
    /// Right end of the integrated range (T when finite).
    double t_end() const noexcept { return t_end_; }

    /// Quintic Hermite interpolation through the accepted steps.
    double u(double t) const;
    double du(double t) const;
    /// Warp -u'(t) / (2 lambda xi - kappa), positive near t = 0.
    double warp(double t) const;

    /// (t, u, u', warp) at `rows` evenly spaced times in [0, t_end].
    std::vector<std::array<double, 4>> table(int rows) const;

    /// g = dt^2 + warp(t)^2 g_{S^{n-1}} on (0, t_end).
    ChartMetric chart() const;

private:
    std::size_t segment(double t) const;

    ObataProblem prob_;
    int n_;
    std::vector<double> t_, u_, du_;
    std::optional<double> T_;
    double t_end_;
};

ObataSolution solve_obata_ivp(const ObataProblem& prob, int n, const ObataOptions& opts = {});

/// sup over samples of |Hes_v + (2 lambda v - kappa) g| in an orthonormal frame,
/// v = e^{-f/m}. Throws PreconditionFailed unless the chart is weighted Einstein
/// with weighted harmonic Weyl tensor to `precondition_tol`.
double obata_residual(const SMMSChart& s, double lambda, double kappa, const std::vector<Point>& samples,
                      const FDConfig& cfg = {}, double precondition_tol = 1e-4);

// ---- branch classification ----

struct BranchVerdict {
    Branch branch = Branch::Indeterminate;
    double lambda = 0.0;
    double ode_residual = 0.0;
    BranchDefects defects;
    /// sup |rho - 2(n-1) lambda g| from the closed forms (Einstein evidence).
    double ricci_deviation = 0.0;
    std::optional<double> A, B;  // fitted non-Einstein example constants
    double fit_residual = 0.0;
    std::string reason;
};

/// Needs at least 3 samples. Indeterminate is returned (not thrown) with both
/// defects filled in.
BranchVerdict classify_branch(const WarpedSMMS& w, const std::vector<double>& ts, double tol = 1e-8);

// ---- completeness obstruction ----

enum class Endpoint { Left, Right };

struct BlowupResult {
    bool diverges = false;
    double rate_exponent = 0.0;  // k in rho(dt, dt) ~ c d^{-k}
    double coefficient = 0.0;    // c
    double max_abs = 0.0;
};

/// Geometric sequence of k interior times approaching the given endpoint.
std::vector<double> approach_samples(const WarpedSMMS& w, Endpoint side, int k = 12);

/// Throws DomainError when the endpoint is infinite or a sample lies outside.
BlowupResult blowup_probe(const WarpedSMMS& w, Endpoint side, const std::vector<double>& ts, double tol = 1e-4);

/// Zero of phi at or just beyond a finite endpoint (a pole of the warped
/// product), located by bisection; empty when phi stays positive there.
std::optional<double> pole_location(const WarpedSMMS& w, Endpoint side);

/// Critical points of v = e^{-f/m} on the closure of the interval, ascending:
/// strict sign changes of v' at interior scan points (dead band relative to
/// sup|v'|), plus poles where v' vanishes too.
std::vector<double> critical_points(const WarpedSMMS& w, int scan = 2001, double dead_band = 1e-9);

// ---- global matching ----

enum class GlobalCase { Sphere, Euclidean, Hyperbolic, WarpedRicciFlat, Incomplete, Unmatched };

std::string to_string(GlobalCase c);

struct GlobalVerdict {
    GlobalCase kind = GlobalCase::Unmatched;
    std::string reason;
    FamilyParams fitted;
    double fit_residual = 0.0;
    int critical_points = 0;
    bool quasi_einstein = false;

    /// "sphere", "incomplete: ricci-blowup", ...
    std::string label() const;
};

struct MatchOptions {
    double residual_tol = 1e-4;
    double fit_tol = 1e-6;
    double blowup_tol = 1e-4;
};

GlobalVerdict match_global(const WarpedSMMS& w, const ConditionReport& report, const MatchOptions& opts = {});
/// Charts without warped structure are reported as Unmatched.
GlobalVerdict match_global(const SMMSChart& s, const ConditionReport& report, const MatchOptions& opts = {});

}  // namespace smms
