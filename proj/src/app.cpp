#include "sdd/app.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sdd/error.hpp"
#include "sdd/scenario.hpp"
#include "sdd/sdd_solver.hpp"
#include "sdd/time_transform.hpp"
#include "sdd/transformed_solver.hpp"
#include "sdd/verifier.hpp"

namespace sdd {

namespace {

namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

class io_error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

std::string csv_number(double x) {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out.precision(17);
    out << x;
    return out.str();
}

void write_file(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw io_error("cannot write " + file.string());
    out << text;
    if (!out) throw io_error("failed writing " + file.string());
}

std::string csv(const std::vector<std::string>& columns, const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + csv_number(row[c]);
        out += '\n';
    }
    return out;
}

std::vector<std::string> indexed(const std::string& stem, int m) {
    std::vector<std::string> out;
    for (int c = 0; c < m; ++c) out.push_back(stem + std::to_string(c));
    return out;
}

// t, y0..y(m-1), eta, dy0..dy(m-1), deta on [t0, T].
std::string sdd_csv(const sdd_solution& sol) {
    const int m = sol.model.dim();
    std::vector<std::string> cols{"t"};
    for (auto v : {indexed("y", m), std::vector<std::string>{"eta"}, indexed("dy", m), std::vector<std::string>{"deta"}}) {
        cols.insert(cols.end(), v.begin(), v.end());
    }
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < sol.eta.node_count(); ++i) {
        const double t = sol.eta.nodes()[i];
        std::vector<double> row{t};
        const vec y = sol.y.eval(t);
        const vec dy = sol.y.eval_derivative(t);
        row.insert(row.end(), y.data(), y.data() + m);
        row.push_back(sol.eta.node_value(i, 0));
        row.insert(row.end(), dy.data(), dy.data() + m);
        row.push_back(sol.eta.node_derivative(i, 0, side::right));
        rows.push_back(std::move(row));
    }
    return csv(cols, rows);
}

// s, z0..z(m-1), chi, alpha, dz0..dz(m-1), dchi, dalpha on [s0, s0 + S].
std::string transformed_csv(const transformed_solution& ts) {
    const int m = ts.model.dim();
    std::vector<std::string> cols{"s"};
    for (auto v : {indexed("z", m), std::vector<std::string>{"chi", "alpha"}, indexed("dz", m),
                   std::vector<std::string>{"dchi", "dalpha"}}) {
        cols.insert(cols.end(), v.begin(), v.end());
    }
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < ts.chi.node_count(); ++i) {
        const double s = ts.chi.nodes()[i];
        std::vector<double> row{s};
        const vec z = ts.z.eval(s);
        const vec dz = ts.z.eval_derivative(s);
        row.insert(row.end(), z.data(), z.data() + m);
        row.push_back(ts.chi.node_value(i, 0));
        row.push_back(ts.alpha(s));
        row.insert(row.end(), dz.data(), dz.data() + m);
        row.push_back(ts.chi.node_derivative(i, 0, side::right));
        row.push_back(ts.alpha.derivative(s));
        rows.push_back(std::move(row));
    }
    return csv(cols, rows);
}

std::string checks_csv(const verification_report& report) {
    std::string out = "name,value,relation,threshold,pass\n";
    for (const auto& c : report.checks()) {
        out += c.name + "," + csv_number(c.value) + "," + (c.rel == relation::at_most ? "<=" : ">=") + "," +
               csv_number(c.threshold) + "," + (c.pass ? "1" : "0") + "\n";
    }
    return out;
}

nlohmann::json self_description(const scenario& sc, const std::string& command) {
    return {{"command", command},
            {"scenario", sc.name},
            {"scenario_sha256", sc.hash},
            {"steps", {{"dt", sc.dt}, {"ds", sc.ds}}},
            {"horizons", {{"T", sc.T}, {"S", sc.S}}},
            {"tolerances",
             {{"equivalence", equivalence_tolerance},
              {"bounds", bound_tolerance},
              {"delay_invariant", 1e-9},
              {"certificate", 1e-6},
              {"inversion", inversion_tolerance},
              {"rate_fit_min_r_squared", rate_fit_min_r_squared}}}};
}

void write_report(const fs::path& dir, const scenario& sc, const std::string& command,
                  const verification_report& report) {
    nlohmann::json doc = self_description(sc, command);
    doc["report"] = report.to_json();
    write_file(dir / "report.json", doc.dump(2) + "\n");
}

// Mesh checks that only need the SDD solution.
void sdd_checks(verification_report& report, const scenario& sc, const sdd_solution& sol) {
    if (sc.wants("delay_invariant")) {
        report.check("delay_invariant", "0 <= eta(t) <= 2 eta_bar on [t0, T]", sol.eta_excursion, relation::at_most,
                     1e-9);
    }
    if (sc.wants("certificate") && sol.sigma) {
        double slowest = std::numeric_limits<double>::infinity();
        const trajectory& sigma = sol.sigma->underlying();
        for (std::size_t i = 0; i < sigma.node_count(); ++i) {
            slowest = std::min({slowest, sigma.node_derivative(i, 0, side::left),
                                sigma.node_derivative(i, 0, side::right)});
        }
        report.check("sigma_slope", "sigma'(t) >= 1 - 2 mu eta_bar when 2 mu eta_bar < 1",
                     slowest - sigma_slope_bound(sc.model), relation::at_least, -1e-6);
    }
    if (sc.wants("manifold")) {
        report.note("manifold_residual", "|g'(t0) - f(g(t0), g(t0 - eta0))|", manifold_residual(sc.model, sc.init));
    }
}

void bounds_checks(verification_report& report, const scenario& sc, const time_map& map) {
    std::optional<double> floor;
    if (sc.h1 && delay_floor_certificate(sc.model, *sc.h1) && sc.init.eta0 >= *sc.h1) floor = sc.h1;
    if (sc.wants("bounds")) {
        const alpha_bounds_report b = alpha_bounds_check(map, floor);
        report.check("alpha_upper_bound", "alpha(s) <= alpha(s0) + h + (s - s0)", b.upper.worst_margin,
                     relation::at_least, -bound_tolerance);
        if (b.lower.evaluated) {
            report.check("alpha_lower_bound", "alpha(s) >= alpha(s0) - h1 + (h1 / h)(s - s0) when |G| <= mu (eta_bar - h1)",
                         b.lower.worst_margin, relation::at_least, -bound_tolerance);
        }
    }
    if (sc.wants("time_equivalence")) {
        const time_equivalence te = time_equivalence_constants(map, floor);
        report.note("fitted_A1", "A1 t + B1 <= s - s0 <= A2 t + B2 (least-squares slope)", te.fitted.A1);
        report.note("fitted_B1", "A1 t + B1 <= s - s0 <= A2 t + B2 (lower intercept)", te.fitted.B1);
        report.note("fitted_B2", "A1 t + B1 <= s - s0 <= A2 t + B2 (upper intercept)", te.fitted.B2);
        report.require("fitted_envelope_dual", "t lies between the inverted affine bounds", te.dual_holds);
        if (te.theoretical) {
            report.check("theoretical_envelope", "s - s0 between t - t0 - h and (h / h1)(t - t0 + h1)",
                         te.worst_theoretical_margin, relation::at_least, -bound_tolerance);
        }
    }
}

struct run_context {
    std::string command;
    fs::path config;
    fs::path out = ".";
    std::optional<double> dt;
    std::optional<double> ds;
};

scenario prepare(const run_context& ctx) {
    scenario sc = load_scenario(ctx.config);
    override_steps(sc, ctx.dt, ctx.ds);
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec) throw io_error("cannot create output directory " + ctx.out.string() + ": " + ec.message());
    return sc;
}

void require_certificate(const scenario& sc) {
    if (!monotonicity_certificate(sc.model)) {
        std::ostringstream msg;
        msg << "transformation needs the monotonicity certificate 2 mu eta_bar < 1, but 2 mu eta_bar = "
            << 2 * sc.model.mu() * sc.model.eta_bar();
        throw error(errc::certificate_required, msg.str());
    }
}

int finish(const verification_report& report) {
    for (const auto& c : report.checks()) {
        if (!c.pass) std::cerr << "FAIL " << c.name << ": " << c.claim << " (value " << c.value << ")\n";
    }
    return report.all_pass() ? exit_pass : exit_check_failed;
}

int cmd_solve(const run_context& ctx) {
    const scenario sc = prepare(ctx);
    const auto start = clock_type::now();
    const sdd_solution sol = integrate_sdd(sc.model, sc.init, sc.T, sc.dt);
    verification_report report(sc.name);
    sdd_checks(report, sc, sol);
    report.set_runtime(std::chrono::duration<double>(clock_type::now() - start).count());
    write_file(ctx.out / "solve.csv", sdd_csv(sol));
    write_report(ctx.out, sc, "solve", report);
    return finish(report);
}

int cmd_transform(const run_context& ctx) {
    const scenario sc = prepare(ctx);
    require_certificate(sc);
    const auto start = clock_type::now();
    const omega_spec om = sc.omega();
    const transformed_solution ts = integrate_transformed(sc.model, sc.init, om, sc.S, sc.ds);
    verification_report report(sc.name);
    report.note("compatibility_residual", "omega'(s0) [1 + mu (eta0 - eta_bar) - G(g(t0))] - omega'(s0 - h)",
                ts.compatibility);
    report.note("min_denominator", "inf of 1 + mu (chi - eta_bar) - G(z)", ts.min_denominator);
    report.check("alpha_recursion", "alpha(s) = chi(s) + alpha(s - h)", ts.alpha_residual, relation::at_most, 1e-12);
    report.check("chi_invariant", "0 <= chi(s) <= 2 eta_bar", ts.chi_excursion, relation::at_most, 1e-9);
    bounds_checks(report, sc, ts.alpha);
    report.set_runtime(std::chrono::duration<double>(clock_type::now() - start).count());
    write_file(ctx.out / "transform.csv", transformed_csv(ts));
    write_report(ctx.out, sc, "transform", report);
    return finish(report);
}

int cmd_verify(const run_context& ctx) {
    const scenario sc = prepare(ctx);
    require_certificate(sc);
    const auto start = clock_type::now();
    const double h = sc.model.h();
    const double t0 = sc.init.t0;
    // alpha(s0 + S) <= t0 + h + S, so this horizon covers the transformed solve.
    const double t_end = std::max(sc.T, t0 + sc.S + h);
    const sdd_solution sol = integrate_sdd(sc.model, sc.init, t_end, sc.dt, {.require_sigma = true});
    const omega_spec om = sc.omega();
    transformed_solution ts = integrate_transformed(sc.model, sc.init, om, sc.S, sc.ds);
    if (sc.alpha_fault != 0) ts = corrupt_alpha(ts, sc.alpha_fault);

    verification_report report(sc.name);
    if (sc.wants("equivalence")) report.merge(verify_equivalence(sol, ts));
    sdd_checks(report, sc, sol);
    bounds_checks(report, sc, ts.alpha);
    if (sc.wants("restart")) {
        const double s_mid = sc.s0 + std::round(sc.S / 2 / sc.ds) * sc.ds;
        const restart_report rr = process_restart_check(sc.model, sc.init, om, s_mid, sc.S, sc.ds);
        report.check("restart", "U(s, r) U(r, s0) = U(s, s0)", rr.distance, relation::at_most, 1e-8);
    }
    if (sc.wants("boundedness")) report.merge(boundedness_transfer_check(sol, ts, t0 + h));
    if (sc.wants("assumptions")) report.merge(alpha_regularity_report(ts.alpha, sc.S));
    if (sc.wants("stability")) {
        const bool explicit_request = !sc.checks.empty();
        try {
            report.merge(stability_transfer_check(sol, ts));
        } catch (const error& e) {
            if (e.code() != errc::not_decaying) throw;
            if (explicit_request) {
                report.require("decaying", "the zero solution attracts the trajectory", false);
            } else {
                report.note("stability_skipped", "the trajectory does not decay", 0.0);
            }
        }
    }
    report.set_runtime(std::chrono::duration<double>(clock_type::now() - start).count());
    write_file(ctx.out / "verify.csv", checks_csv(report));
    write_report(ctx.out, sc, "verify", report);
    return finish(report);
}

int cmd_experiment(const run_context& ctx) {
    const scenario sc = prepare(ctx);
    const auto start = clock_type::now();
    verification_report report(sc.name);
    if (sc.wants("dependence")) {
        const verification_report dep = continuous_dependence_experiment(sc.model, sc.init, sc.deltas, sc.T, sc.dt);
        write_file(ctx.out / "dependence.csv", csv(dep.columns(), dep.rows()));
        report.merge(dep);
    }
    if (sc.wants("alpha_convergence")) {
        require_certificate(sc);
        const verification_report conv =
            alpha_convergence_experiment(sc.model, sc.init, sc.s0, sc.d0, sc.deltas, sc.S, sc.ds);
        write_file(ctx.out / "alpha_convergence.csv", csv(conv.columns(), conv.rows()));
        report.merge(conv);
    }
    report.set_runtime(std::chrono::duration<double>(clock_type::now() - start).count());
    write_report(ctx.out, sc, "experiment", report);
    return finish(report);
}

int exit_for(errc code) {
    switch (code) {
        case errc::invalid_params:
        case errc::invalid_h1:
        case errc::certificate_required:
        case errc::step_too_large:
        case errc::step_mismatch:
        case errc::horizon_too_long:
        case errc::eta_zero:
        case errc::non_monotone:
        case errc::solution_too_short:
        case errc::horizon_mismatch:
        case errc::out_of_domain:
            return exit_precondition;
        default:
            return exit_check_failed;
    }
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Solve delay systems with state-dependent delay and verify their time transformation"};
    app.require_subcommand(1);
    run_context ctx;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"solve", "integrate the delay system and write solve.csv"},
        {"transform", "build omega and alpha, solve the transformed system, write transform.csv"},
        {"verify", "solve both systems and write the verification report"},
        {"experiment", "run the continuous-dependence and alpha-convergence sweeps"}};
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("config", ctx.config, "scenario document (JSON)")->required();
        sub->add_option("--out", ctx.out, "output directory");
        sub->add_option("--dt", ctx.dt, "override the t-step");
        sub->add_option("--ds", ctx.ds, "override the s-step");
        sub->callback([&ctx, n = name] { ctx.command = n; });
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_pass : exit_io;
    }

    try {
        if (ctx.command == "solve") return cmd_solve(ctx);
        if (ctx.command == "transform") return cmd_transform(ctx);
        if (ctx.command == "verify") return cmd_verify(ctx);
        return cmd_experiment(ctx);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_io;
    } catch (const io_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return exit_io;
    } catch (const error& e) {
        std::cerr << to_string(e.code()) << ": " << e.what() << "\n";
        return exit_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace sdd
