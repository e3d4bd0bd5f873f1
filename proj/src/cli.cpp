#include "hitctl/cli.hpp"

#include "hitctl/certificate.hpp"
#include "hitctl/errors.hpp"
#include "hitctl/model_io.hpp"
#include "hitctl/policy.hpp"
#include "hitctl/report.hpp"
#include "hitctl/simulator.hpp"
#include "hitctl/solver.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>

namespace hitctl::cli {

namespace {

class UsageError : public Error {
public:
    using Error::Error;
};

struct Options {
    std::string model_path;
    std::string out_path;
    std::string weight;
    double tol = 1e-9;
    std::size_t max_iter = 100000;
    std::string horizon_range = "1..10";
    std::optional<std::size_t> horizon;
    std::vector<std::string> policies{"optimal"};
    std::size_t runs = 10000;
    std::size_t recovery_runs = 200;
    std::uint64_t seed = 0;
    std::size_t max_steps = kDefaultMaxSteps;
    std::string initial_state;
    std::size_t excursions = 1000;
    std::size_t threads = 1;
};

std::size_t parse_count(const std::string& text, const std::string& what) {
    std::size_t value = 0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, value);
    if (res.ec != std::errc() || res.ptr != end) throw UsageError("invalid " + what + " '" + text + "'");
    return value;
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& text) {
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
        const std::size_t n = parse_count(text, "horizon");
        return {n, n};
    }
    const std::size_t lo = parse_count(text.substr(0, dots), "horizon range");
    const std::size_t hi = parse_count(text.substr(dots + 2), "horizon range");
    if (lo > hi) throw UsageError("empty horizon range '" + text + "'");
    return {lo, hi};
}

WeightCertificate certificate_for(const ModelFile& file, const std::string& choice) {
    const MarkovControlModel& model = file.model;
    if (choice == "unit" || (choice.empty() && !file.weight)) return make_weight_certificate(model);
    if (choice.empty() || choice == "file") {
        if (!file.weight) throw UsageError("--weight file: the model file has no weight block");
        return make_weight_certificate(model, *file.weight);
    }
    std::vector<double> w;
    std::stringstream ss(choice);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0.0;
        const auto* end = item.data() + item.size();
        const auto res = std::from_chars(item.data(), end, v);
        if (res.ec != std::errc() || res.ptr != end) throw UsageError("invalid weight entry '" + item + "'");
        w.push_back(v);
    }
    try {
        return make_weight_certificate(model, w);
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("--weight: ") + e.what());
    }
}

StateIndex resolve_state(const MarkovControlModel& model, const std::string& name) {
    const auto s = model.find_state(name);
    if (!s) throw UsageError("unknown state '" + name + "'");
    return *s;
}

std::string action_label(const MarkovControlModel& model, std::size_t position, std::size_t action) {
    return model.actions(model.state_at(position))[action].label;
}

ValueIterationResult solve_optimal(const MarkovControlModel& model, const WeightCertificate& cert,
                                   const Options& opt) {
    return value_iteration(model, {opt.tol, opt.max_iter, false}, cert);
}

void base_config(RunReport& report, const Options& opt) {
    report.config.emplace_back("model", opt.model_path);
}

std::string describe_weight(const WeightCertificate& cert) {
    std::string out;
    for (std::size_t i = 0; i < cert.weight.size(); ++i) out += (i ? "," : "") + format_number(cert.weight[i]);
    return out;
}

void add_solution_table(RunReport& report, const MarkovControlModel& model, const ValueIterationResult& result,
                        const WeightCertificate& cert) {
    Table t{"solution", {"state", "action", "value", "gap_bound"}, {}};
    for (std::size_t i = 0; i < model.nontarget_count(); ++i)
        t.add_row({model.state_name(model.state_at(i)), action_label(model, i, result.greedy[i]),
                   format_number(result.value[i]), format_number(result.sup_gap_bound * cert.weight[i])});
    report.tables.push_back(std::move(t));
}

int cmd_solve(const Options& opt, RunReport& report) {
    const ModelFile file = load_model_file(opt.model_path);
    const WeightCertificate cert = certificate_for(file, opt.weight);
    report.certificate = cert;
    base_config(report, opt);
    report.config.emplace_back("tol", format_number(opt.tol));
    report.config.emplace_back("max_iter", std::to_string(opt.max_iter));
    report.config.emplace_back("weight", describe_weight(cert));
    try {
        const auto result = solve_optimal(file.model, cert, opt);
        report.notes.emplace_back("iterations", std::to_string(result.iterations));
        report.notes.emplace_back("sup_gap_bound", format_number(result.sup_gap_bound));
        add_solution_table(report, file.model, result, cert);
        return kExitOk;
    } catch (const NotConverged& e) {
        report.notes.emplace_back("status", "not converged");
        report.notes.emplace_back("iterations", std::to_string(e.result().iterations));
        report.notes.emplace_back("sup_gap_bound", format_number(e.result().sup_gap_bound));
        add_solution_table(report, file.model, e.result(), cert);
        return kExitNotConverged;
    }
}

int cmd_rolling(const Options& opt, RunReport& report) {
    const ModelFile file = load_model_file(opt.model_path);
    const MarkovControlModel& model = file.model;
    const WeightCertificate cert = certificate_for(file, opt.weight);
    const auto [lo, hi] = opt.horizon ? std::pair{*opt.horizon, *opt.horizon} : parse_range(opt.horizon_range);
    report.certificate = cert;
    base_config(report, opt);
    report.config.emplace_back("horizons", std::to_string(lo) + ".." + std::to_string(hi));
    report.config.emplace_back("tol", format_number(opt.tol));
    report.config.emplace_back("weight", describe_weight(cert));

    const auto optimal = solve_optimal(model, cert, opt);
    const ValueFunction v_star =
        evaluate_policy(model, optimal.greedy).value;

    Table t{"rolling",
            {"horizon", "state", "selector", "optimal_action", "vi_value", "achieved_value", "gap", "bound",
             "suboptimality"},
            {}};
    for (std::size_t n = lo; n <= hi; ++n) {
        const auto rh = rolling_horizon(model, n, cert);
        for (std::size_t i = 0; i < model.nontarget_count(); ++i) {
            t.add_row({std::to_string(n), model.state_name(model.state_at(i)),
                       action_label(model, i, rh.stationary_selector[i]), action_label(model, i, optimal.greedy[i]),
                       format_number(rh.vi_value[i]), format_number(rh.achieved_value[i]),
                       format_number(rh.achieved_value[i] - rh.vi_value[i]),
                       format_number(rh.bound * rh.weight[i]), format_number(rh.achieved_value[i] - v_star[i])});
        }
    }
    report.tables.push_back(std::move(t));
    return kExitOk;
}

struct NamedPolicy {
    std::string name;
    StationaryPolicy policy;
};

std::vector<NamedPolicy> resolve_policies(const ModelFile& file, const WeightCertificate& cert,
                                          const Options& opt) {
    const MarkovControlModel& model = file.model;
    std::vector<NamedPolicy> out;
    for (const auto& source : opt.policies) {
        if (source == "optimal") {
            out.push_back({source, solve_optimal(model, cert, opt).greedy});
        } else if (source.starts_with("rolling:")) {
            const auto [lo, hi] = parse_range(source.substr(8));
            for (std::size_t n = lo; n <= hi; ++n)
                out.push_back({"rolling:" + std::to_string(n), rolling_horizon(model, n, cert).stationary_selector});
        } else if (source.starts_with("file:")) {
            out.push_back({source, load_policy(model, source.substr(5))});
        } else {
            throw UsageError("unknown policy source '" + source + "' (optimal | rolling:N | rolling:A..B | file:PATH)");
        }
    }
    return out;
}

int cmd_simulate(const Options& opt, RunReport& report) {
    const ModelFile file = load_model_file(opt.model_path);
    const MarkovControlModel& model = file.model;
    const WeightCertificate cert = certificate_for(file, opt.weight);
    const StateIndex start =
        opt.initial_state.empty() ? model.nontarget_states().front() : resolve_state(model, opt.initial_state);
    const SimulationConfig config{opt.runs, opt.max_steps, opt.seed, start, opt.threads};
    report.certificate = cert;
    base_config(report, opt);
    report.config.emplace_back("runs", std::to_string(opt.runs));
    report.config.emplace_back("seed", std::to_string(opt.seed));
    report.config.emplace_back("max_steps", std::to_string(opt.max_steps));
    report.config.emplace_back("initial_state", model.state_name(start));

    Table t{"simulation",
            {"policy", "runs", "censored", "cost_mean", "cost_std", "cost_stderr", "hitting_time_mean",
             "hitting_time_std", "exact_value"},
            {}};
    for (const auto& [name, policy] : resolve_policies(file, cert, opt)) {
        const MonteCarloSummary s = monte_carlo(model, policy, config);
        std::optional<double> exact;
        if (const auto pos = model.position(start))
            exact = evaluate_policy(model, policy).value[*pos];
        else
            exact = 0.0;
        t.add_row({name, std::to_string(s.runs), std::to_string(s.censored_count), format_number(s.cost_mean),
                   format_number(s.cost_stddev), format_number(s.cost_stderr), format_number(s.hitting_time_mean),
                   format_number(s.hitting_time_stddev), format_number(exact)});
    }
    report.tables.push_back(std::move(t));
    return kExitOk;
}

int cmd_recovery(const Options& opt, RunReport& report) {
    const ModelFile file = load_model_file(opt.model_path);
    const MarkovControlModel& model = file.model;
    if (!model.has_target_dynamics())
        throw MissingTargetDynamics("the model file has no in_target_dynamics block");
    const WeightCertificate cert = certificate_for(file, opt.weight);
    const StateIndex start =
        opt.initial_state.empty() ? model.target_states().front() : resolve_state(model, opt.initial_state);
    const SimulationConfig config{opt.recovery_runs, opt.max_steps, opt.seed, start, opt.threads};
    report.certificate = cert;
    base_config(report, opt);
    report.config.emplace_back("runs", std::to_string(opt.recovery_runs));
    report.config.emplace_back("excursions", std::to_string(opt.excursions));
    report.config.emplace_back("seed", std::to_string(opt.seed));
    report.config.emplace_back("max_steps", std::to_string(opt.max_steps));
    report.config.emplace_back("initial_state", model.state_name(start));

    const auto optimal = solve_optimal(model, cert, opt);
    const ValueFunction v_star = evaluate_policy(model, optimal.greedy).value;
    const RecoveryBounds bounds = recovery_bounds(model, v_star);
    if (const auto cond = exit_conditioned_bounds(model, v_star)) {
        report.notes.emplace_back("exit_conditioned_lower", format_number(cond->beta_lower));
        report.notes.emplace_back("exit_conditioned_upper", format_number(cond->beta_upper));
    }
    const RecoveryEstimate est =
        estimate_recovery_cost(model, concatenate_recovery(model, optimal.greedy), config, opt.excursions);

    Table t{"recovery",
            {"beta_lower", "beta_upper", "estimate", "half_width", "runs", "excursions_per_run", "shortfall"},
            {}};
    t.add_row({format_number(bounds.beta_lower), format_number(bounds.beta_upper), format_number(est.estimate),
               format_number(est.half_width), std::to_string(est.runs), std::to_string(est.excursions_per_run),
               std::to_string(est.shortfall)});
    report.tables.push_back(std::move(t));
    return kExitOk;
}

int cmd_validate(const Options& opt, std::ostream& out) {
    try {
        const ModelFile file = load_model_file(opt.model_path);
        out << "valid: " << file.model.state_count() << " states, " << file.model.target_states().size()
            << " target\n";
        return kExitOk;
    } catch (const ValidationError& e) {
        for (const auto& v : e.violations()) out << "violation: " << v << '\n';
        return kExitValidation;
    }
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Discounted-cost control up to the first hitting time of a target set", "hitctl"};
    app.require_subcommand(1);
    Options opt;

    auto add_model = [&](CLI::App* sub) { sub->add_option("--model", opt.model_path, "Model file")->required(); };
    auto add_solver = [&](CLI::App* sub) {
        sub->add_option("--tol", opt.tol, "Certified gap tolerance for value iteration");
        sub->add_option("--max-iter", opt.max_iter, "Iteration cap for value iteration");
        sub->add_option("--weight", opt.weight, "Weight: unit | file | comma-separated values");
    };
    auto add_out = [&](CLI::App* sub) { sub->add_option("--out", opt.out_path, "CSV output path"); };
    auto add_sim = [&](CLI::App* sub) {
        sub->add_option("--seed", opt.seed, "Master seed");
        sub->add_option("--max-steps", opt.max_steps, "Step cap per trajectory or excursion");
        sub->add_option("--initial-state", opt.initial_state, "Initial state name");
        sub->add_option("--threads", opt.threads, "Worker threads (0 = hardware)");
    };

    auto* solve = app.add_subcommand("solve", "Value iteration with certified error bound");
    add_model(solve);
    add_solver(solve);
    add_out(solve);

    auto* rolling = app.add_subcommand("rolling", "Rolling-horizon policies and their certificates");
    add_model(rolling);
    add_solver(rolling);
    add_out(rolling);
    rolling->add_option("--horizon-range", opt.horizon_range, "Horizons A..B");
    rolling->add_option("--horizon", opt.horizon, "Single horizon N");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo cost and hitting-time statistics");
    add_model(simulate);
    add_solver(simulate);
    add_out(simulate);
    add_sim(simulate);
    simulate->add_option("--runs", opt.runs, "Number of trajectories")->check(CLI::PositiveNumber);
    simulate->add_option("--policy", opt.policies, "optimal | rolling:N | rolling:A..B | file:PATH (repeatable)");

    auto* recovery = app.add_subcommand("recovery", "Average cost of recovery and its bounds");
    add_model(recovery);
    add_solver(recovery);
    add_out(recovery);
    add_sim(recovery);
    recovery->add_option("--runs", opt.recovery_runs, "Number of runs")->check(CLI::PositiveNumber);
    recovery->add_option("--excursions", opt.excursions, "Excursion count n per run")->check(CLI::PositiveNumber);

    auto* validate = app.add_subcommand("validate", "Check a model file");
    add_model(validate);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitFailure;
    }

    const auto start = std::chrono::steady_clock::now();
    RunReport report;
    int status = kExitOk;
    try {
        if (validate->parsed()) return cmd_validate(opt, out);
        if (solve->parsed()) {
            report.command = "solve";
            status = cmd_solve(opt, report);
        } else if (rolling->parsed()) {
            report.command = "rolling";
            status = cmd_rolling(opt, report);
        } else if (simulate->parsed()) {
            report.command = "simulate";
            status = cmd_simulate(opt, report);
        } else {
            report.command = "recovery";
            status = cmd_recovery(opt, report);
        }
        report.wall_clock_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        render(out, report);
        if (!opt.out_path.empty() && !report.tables.empty()) {
            std::ofstream csv(opt.out_path, std::ios::binary);
            if (!csv) throw IoError("cannot write '" + opt.out_path + "'");
            csv << to_csv(report.tables.front());
            if (!csv) throw IoError("error while writing '" + opt.out_path + "'");
        }
        return status;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NotConverged& e) {
        err << "error: " << e.what() << '\n';
        return kExitNotConverged;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

} // namespace hitctl::cli
