#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "smms/catalog.hpp"
#include "smms/classify.hpp"
#include "smms/errors.hpp"

namespace smms::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr double kGoldenRelTol = 1e-4;
constexpr double kOracleRelTol = 1e-5;
constexpr double kBranchTol = 1e-8;

struct RunConfig {
    std::string family;
    FamilyParams params;
    int samples = 17;
    double tol = 1e-6;
    std::string output = "json";
    std::string out_path;
    double rel_step = 1e-2;
    double outer_step = 1e-2;

    // obata
    double lambda = 0.0;
    double kappa = 0.0;
    double xi = 0.0;
    int n = 3;
    double t_max = 10.0;
    int rows = 201;
    std::string csv_path;
};

std::string num(double x) {
    if (!std::isfinite(x)) return "null";
    return fmt::format("{:.17g}", x == 0.0 ? 0.0 : x);
}

// Pretty printer with fixed 17-significant-digit floats; nlohmann's own dump
// uses shortest round-trip formatting.
void write_json(std::ostream& os, const json& j, int depth = 0) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
    switch (j.type()) {
        case json::value_t::number_float: os << num(j.get<double>()); return;
        case json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            bool first = true;
            for (const auto& [key, value] : j.items()) {
                if (!first) os << ",\n";
                first = false;
                os << pad << json(key).dump() << ": ";
                write_json(os, value, depth + 1);
            }
            os << "\n" << close_pad << "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            os << "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) os << ",\n";
                os << pad;
                write_json(os, j[i], depth + 1);
            }
            os << "\n" << close_pad << "]";
            return;
        }
        default: os << j.dump(); return;
    }
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json params_json(const FamilyParams& p) {
    json j = json::object();
    if (p.n) j["n"] = *p.n;
    auto put = [&j](const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
    };
    put("m", p.m);
    put("lambda", p.lambda);
    put("mu", p.mu);
    put("A", p.A);
    put("B", p.B);
    put("C", p.C);
    put("c1", p.c1);
    put("c2", p.c2);
    put("c3", p.c3);
    put("c4", p.c4);
    if (p.allow_incomplete) j["allow_incomplete"] = true;
    return j;
}

FDConfig fd_config(const RunConfig& cfg) {
    FDConfig fd;
    fd.rel_step = cfg.rel_step;
    fd.outer_rel_step = cfg.outer_step;
    fd.validate();
    return fd;
}

void validate(const RunConfig& cfg) {
    if (cfg.samples < 3) throw CLI::ValidationError("--samples", "must be at least 3");
    if (!(cfg.tol > 0)) throw CLI::ValidationError("--tol", "must be positive");
}

// Writes `text` to --out when given, else to out.
void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
    if (cfg.out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(cfg.out_path, std::ios::binary);
    if (!f) throw Error(fmt::format("cannot open '{}' for writing", cfg.out_path));
    f << text;
}

std::string render(const json& j) {
    std::ostringstream os;
    write_json(os, j);
    os << "\n";
    return os.str();
}

std::string render_text(const json& j, const std::string& prefix = "") {
    std::ostringstream os;
    for (const auto& [key, value] : j.items()) {
        const std::string name = prefix.empty() ? key : prefix + "." + key;
        if (value.is_object()) {
            os << render_text(value, name);
        } else if (value.is_array()) {
            for (std::size_t i = 0; i < value.size(); ++i) {
                if (value[i].is_object())
                    os << render_text(value[i], fmt::format("{}[{}]", name, i));
                else
                    os << fmt::format("{}[{}]: {}\n", name, i, value[i].is_number_float() ? num(value[i].get<double>()) : value[i].dump());
            }
        } else {
            os << name << ": " << (value.is_number_float() ? num(value.get<double>()) : value.dump()) << "\n";
        }
    }
    return os.str();
}

struct FamilyRun {
    json report;
    bool pass = false;
    std::string csv;
};

FamilyRun run_family(const RunConfig& cfg, bool classify_mode) {
    const FamilyId id = family_from_key(cfg.family);
    const FamilyInstance inst = build_family(id, cfg.params);
    const FamilyExpected expected = family_expected(id, cfg.params);
    const SMMSChart chart = inst.chart();
    const FDConfig fd = fd_config(cfg);
    ConditionOptions co;
    co.tol = cfg.tol;
    const ConditionReport rep = condition_report(chart, inst.sample_points(cfg.samples), fd, co);

    std::optional<double> obata;
    try {
        obata = obata_residual(chart, rep.lambda_fit, rep.kappa, rep.sample_points, fd);
    } catch (const PreconditionFailed&) {
    }

    FamilyRun r;
    json& j = r.report;
    j["family"] = cfg.family;
    j["params"] = params_json(inst.params);
    j["lambda_fit"] = rep.lambda_fit;
    j["kappa"] = rep.kappa;
    j["kappa_spread"] = rep.kappa_spread;
    j["residuals"] = {{"einstein", rep.einstein_residual},
                      {"harmonic", rep.harmonic_residual},
                      {"cotton", rep.cotton_residual},
                      {"obata", opt(obata)}};

    std::optional<BranchVerdict> bv;
    std::optional<GlobalVerdict> gv;
    if (inst.is_warped()) {
        bv = classify_branch(inst.warped(), inst.sample_ts(cfg.samples), kBranchTol);
        gv = match_global(inst.warped(), rep);
        j["branch"] = to_string(bv->branch);
    } else {
        gv = match_global(chart, rep);
        j["branch"] = to_string(rep.branch);
    }
    j["global_case"] = gv->label();

    bool goldens_ok = true;
    json checks = json::array();
    for (const GoldenComponent& g : expected.goldens) {
        const double actual = evaluate_golden(inst, g, fd);
        const bool ok = std::abs(actual - g.value) <= kGoldenRelTol * std::abs(g.value);
        goldens_ok = goldens_ok && ok;
        checks.push_back({{"name", g.name}, {"expected", g.value}, {"actual", actual}, {"pass", ok}});
    }
    j["golden_checks"] = checks;

    if (classify_mode) {
        json ev;
        if (bv) {
            ev["ode_residual"] = bv->ode_residual;
            ev["einstein_defect"] = bv->defects.einstein_defect;
            ev["branch2_defect"] = bv->defects.branch2_defect;
            ev["fprime_sq_defect"] = bv->defects.fprime_sq_defect;
            ev["ricci_deviation"] = bv->ricci_deviation;
            if (bv->A) ev["fitted"] = {{"A", *bv->A}, {"B", *bv->B}, {"fit_residual", bv->fit_residual}};
            if (!bv->reason.empty()) ev["reason"] = bv->reason;
            ev["critical_points"] = critical_points(inst.warped()).size();
            json blow = json::object();
            for (Endpoint side : {Endpoint::Left, Endpoint::Right}) {
                const WarpedSMMS& w = inst.warped();
                const double e = side == Endpoint::Left ? w.interval.lo : w.interval.hi;
                if (!std::isfinite(e)) continue;
                const BlowupResult b = blowup_probe(w, side, approach_samples(w, side));
                blow[side == Endpoint::Left ? "left" : "right"] = {{"endpoint", e},
                                                                   {"diverges", b.diverges},
                                                                   {"rate_exponent", b.rate_exponent},
                                                                   {"coefficient", b.coefficient}};
            }
            ev["blowup"] = blow;
        }
        ev["global_fit"] = {{"params", params_json(gv->fitted)}, {"fit_residual", gv->fit_residual}};
        ev["quasi_einstein"] = gv->quasi_einstein;
        j["evidence"] = ev;
        r.pass = bv ? bv->branch != Branch::Indeterminate : rep.branch != Branch::Indeterminate;
    } else {
        r.pass = rep.einstein_residual <= cfg.tol && rep.harmonic_residual <= cfg.tol &&
                 rep.cotton_residual <= cfg.tol && goldens_ok;
    }
    j["pass"] = r.pass;

    std::ostringstream csv;
    csv << "t,einstein,harmonic,cotton,kappa,J,Y,f";
    if (inst.is_warped()) csv << ",phi,v";
    csv << "\n";
    const std::optional<RealFunction> v =
        inst.is_warped() ? std::optional<RealFunction>(density_v(inst.warped())) : std::nullopt;
    for (const SampleDiagnostics& d : rep.per_sample) {
        csv << num(d.point[0]) << ',' << num(d.einstein) << ',' << num(d.harmonic) << ',' << num(d.cotton) << ','
            << num(d.kappa) << ',' << num(d.J) << ',' << num(d.Y) << ',' << num(d.f);
        if (v) csv << ',' << num(inst.warped().phi(d.point[0])) << ',' << num((*v)(d.point[0]));
        csv << "\n";
    }
    r.csv = csv.str();
    return r;
}

int cmd_family(const RunConfig& cfg, bool classify_mode, std::ostream& out) {
    validate(cfg);
    const FamilyRun r = run_family(cfg, classify_mode);
    if (cfg.output == "csv")
        emit(cfg, r.csv, out);
    else if (cfg.output == "text")
        emit(cfg, render_text(r.report), out);
    else
        emit(cfg, render(r.report), out);
    return static_cast<int>(r.pass ? ExitCode::Pass : ExitCode::Fail);
}

double obata_closed_form(const ObataProblem& p, double t) {
    if (p.lambda == 0.0) return p.xi + 0.5 * p.kappa * t * t;
    const double c = p.kappa / (2 * p.lambda);
    const double s = std::sqrt(std::abs(2 * p.lambda));
    return c + (p.xi - c) * (p.lambda > 0 ? std::cos(s * t) : std::cosh(s * t));
}

int cmd_obata(const RunConfig& cfg, std::ostream& out) {
    if (cfg.rows < 2) throw CLI::ValidationError("--rows", "must be at least 2");
    const ObataProblem prob{cfg.lambda, cfg.kappa, cfg.xi};
    ObataOptions oo;
    oo.t_max = cfg.t_max;
    const ObataSolution sol = solve_obata_ivp(prob, cfg.n, oo);
    const auto rows = sol.table(cfg.rows);
    double err = 0.0;
    for (const auto& row : rows) {
        const double exact = obata_closed_form(prob, row[0]);
        err = std::max(err, std::abs(row[1] - exact) / std::max(1.0, std::abs(exact)));
    }
    if (!cfg.csv_path.empty()) {
        std::ofstream f(cfg.csv_path, std::ios::binary);
        if (!f) throw Error(fmt::format("cannot open '{}' for writing", cfg.csv_path));
        f << "t,u,uprime,warp\n";
        for (const auto& row : rows) f << num(row[0]) << ',' << num(row[1]) << ',' << num(row[2]) << ',' << num(row[3]) << "\n";
    }
    json j;
    j["lambda"] = cfg.lambda;
    j["kappa"] = cfg.kappa;
    j["xi"] = cfg.xi;
    j["n"] = cfg.n;
    j["T"] = sol.T() ? json(*sol.T()) : json("inf");
    j["t_end"] = sol.t_end();
    j["closed_form_error"] = err;
    j["rows"] = rows.size();
    if (cfg.output == "csv") {
        std::ostringstream os;
        os << "t,u,uprime,warp\n";
        for (const auto& row : rows) os << num(row[0]) << ',' << num(row[1]) << ',' << num(row[2]) << ',' << num(row[3]) << "\n";
        emit(cfg, os.str(), out);
    } else {
        emit(cfg, cfg.output == "text" ? render_text(j) : render(j), out);
    }
    return static_cast<int>(ExitCode::Pass);
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out) {
    validate(cfg);
    const FamilyId id = family_from_key(cfg.family);
    const FamilyInstance inst = build_family(id, cfg.params);
    const FDConfig fd = fd_config(cfg);
    json rows = json::array();
    double worst = 0.0;
    auto add = [&](double t, const std::string& q, double closed, double oracle) {
        const double rel = std::abs(oracle - closed) / std::max(1.0, std::abs(closed));
        worst = std::max(worst, rel);
        rows.push_back({{"t", t}, {"quantity", q}, {"closed", closed}, {"oracle", oracle}, {"rel_error", rel}});
    };
    if (inst.is_warped()) {
        const SMMSChart s = inst.chart();
        const auto ts = inst.sample_ts(cfg.samples);
        const auto pts = inst.sample_points(cfg.samples);
        for (std::size_t k = 0; k < ts.size(); ++k) {
            const WarpedCurvature c = warped_curvature_closed(inst.warped(), ts[k]);
            const WeightedPoint w = evaluate_weighted(s, pts[k], fd);
            const Matrix frame = orthonormal_frame(w.g, {});
            const Matrix ric = frame_components(w.curvature.ricci, frame).to_matrix();
            const Matrix hess = frame_components(w.f.hess, frame).to_matrix();
            const Matrix P = frame_components(w.P, frame).to_matrix();
            add(ts[k], "ricci_tt", c.ricci_tt, ric(0, 0));
            add(ts[k], "ricci_fiber", c.ricci_fiber_coeff, ric(1, 1));
            add(ts[k], "hess_tt", c.hess_tt, hess(0, 0));
            add(ts[k], "hess_fiber", c.hess_fiber_coeff, hess(1, 1));
            add(ts[k], "tau", c.tau, w.curvature.scalar);
            add(ts[k], "J", c.J_closed, w.scalars.J_fm);
            add(ts[k], "P_tt", c.P_tt, P(0, 0));
            add(ts[k], "P_fiber", c.P_fiber, P(1, 1));
            add(ts[k], "Y", c.Y, w.scalars.Y_fm);
        }
    } else {
        for (const GoldenComponent& g : family_expected(id, cfg.params).goldens)
            add(g.point[0], g.name, g.value, evaluate_golden(inst, g, fd));
    }
    const bool pass = worst <= kOracleRelTol;
    if (cfg.output == "csv") {
        std::ostringstream os;
        os << "t,quantity,closed,oracle,rel_error\n";
        for (const auto& r : rows)
            os << num(r["t"].get<double>()) << ',' << r["quantity"].get<std::string>() << ','
               << num(r["closed"].get<double>()) << ',' << num(r["oracle"].get<double>()) << ','
               << num(r["rel_error"].get<double>()) << "\n";
        emit(cfg, os.str(), out);
    } else {
        json j;
        j["family"] = cfg.family;
        j["params"] = params_json(inst.params);
        j["max_rel_error"] = worst;
        j["pass"] = pass;
        j["rows"] = rows;
        emit(cfg, cfg.output == "text" ? render_text(j) : render(j), out);
    }
    return static_cast<int>(pass ? ExitCode::Pass : ExitCode::Fail);
}

int cmd_list(const RunConfig& cfg, std::ostream& out) {
    json arr = json::array();
    std::ostringstream text;
    for (FamilyId id : all_families()) {
        const FamilyInstance inst = build_family(id);
        arr.push_back({{"id", family_key(id)}, {"defaults", params_json(inst.params)}});
        text << family_key(id) << "\n";
    }
    emit(cfg, cfg.output == "json" ? render(arr) : text.str(), out);
    return static_cast<int>(ExitCode::Pass);
}

void add_family_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--family", cfg.family, "family id (see `smms list`)")->required();
    sub->add_option("--n", cfg.params.n, "dimension");
    sub->add_option("--m", cfg.params.m, "weight parameter m");
    sub->add_option("--lambda", cfg.params.lambda, "weighted Einstein constant");
    sub->add_option("--mu", cfg.params.mu, "auxiliary curvature parameter");
    sub->add_option("--A", cfg.params.A);
    sub->add_option("--B", cfg.params.B);
    sub->add_option("--C", cfg.params.C);
    sub->add_option("--c1", cfg.params.c1);
    sub->add_option("--c2", cfg.params.c2);
    sub->add_option("--c3", cfg.params.c3);
    sub->add_option("--c4", cfg.params.c4);
    sub->add_flag("--allow-incomplete", cfg.params.allow_incomplete, "accept incomplete sphere sub-cases");
    sub->add_option("--samples", cfg.samples, "sample count")->capture_default_str();
    sub->add_option("--tol", cfg.tol, "residual tolerance (env SMMS_TOL sets the default)")->capture_default_str();
    sub->add_option("--rel-step", cfg.rel_step, "finite-difference relative step")->capture_default_str();
    sub->add_option("--outer-step", cfg.outer_step, "relative step for third derivatives")->capture_default_str();
}

void add_output_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--output", cfg.output, "json, csv or text")
        ->check(CLI::IsMember({"json", "csv", "text"}))
        ->capture_default_str();
    sub->add_option("--out", cfg.out_path, "write the report to this file");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    if (const char* env = std::getenv("SMMS_TOL")) {
        try {
            std::size_t pos = 0;
            cfg.tol = std::stod(env, &pos);
            if (pos != std::string(env).size() || !(cfg.tol > 0)) throw std::invalid_argument(env);
        } catch (const std::exception&) {
            err << "SMMS_TOL must be a positive number (got '" << env << "')\n";
            return static_cast<int>(ExitCode::Usage);
        }
    }

    CLI::App app{"Verification driver for weighted Einstein smooth metric measure spaces", "smms"};
    app.require_subcommand(1);
    CLI::App* verify = app.add_subcommand("verify", "check residuals and golden components of a family");
    CLI::App* classify = app.add_subcommand("classify", "branch verdict and global matching for a family");
    CLI::App* oracle = app.add_subcommand("oracle-compare", "closed forms against the finite-difference oracle");
    CLI::App* obata = app.add_subcommand("obata", "integrate the generalized Obata initial value problem");
    CLI::App* list = app.add_subcommand("list", "list family ids");
    for (CLI::App* sub : {verify, classify, oracle}) {
        add_family_options(sub, cfg);
        add_output_options(sub, cfg);
    }
    obata->add_option("--lambda", cfg.lambda)->required();
    obata->add_option("--kappa", cfg.kappa)->required();
    obata->add_option("--xi", cfg.xi, "initial value u(0)")->required();
    obata->add_option("--n", cfg.n)->capture_default_str();
    obata->add_option("--t-max", cfg.t_max, "integration length when u' never returns to zero")->capture_default_str();
    obata->add_option("--rows", cfg.rows, "rows of the sampled trajectory")->capture_default_str();
    obata->add_option("--emit-csv", cfg.csv_path, "write t,u,uprime,warp to this file");
    add_output_options(obata, cfg);
    add_output_options(list, cfg);

    std::vector<const char*> argv{"smms"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "smms: " << e.what() << "\n" << "run 'smms --help' for usage\n";
        return static_cast<int>(ExitCode::Usage);
    }

    try {
        if (verify->parsed()) return cmd_family(cfg, false, out);
        if (classify->parsed()) return cmd_family(cfg, true, out);
        if (oracle->parsed()) return cmd_oracle(cfg, out);
        if (obata->parsed()) return cmd_obata(cfg, out);
        if (list->parsed()) return cmd_list(cfg, out);
    } catch (const CLI::ValidationError& e) {
        err << "smms: " << e.what() << "\n";
    } catch (const Error& e) {
        err << "smms: " << e.what() << "\n";
    }
    return static_cast<int>(ExitCode::Usage);
}

}  // namespace smms::cli
