// Command-line front end: `hjbench run <config>` solves one instance and
// prints a JSON report; `hjbench sweep <config>` expands list-valued keys
// into a run per combination and prints a CSV table. Flags override config
// file keys. Exit codes: 0 success, 1 usage or config-file problem, 2 when
// the run failed (or every run of a sweep failed).

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hj/bench.hpp"

namespace {

struct Overrides {
    std::optional<std::string> problem, dim, mode, h, epsilon, levels, eta_const, gamma, beta,
        repetitions, budget_secs, jobs, out;
};

void add_flags(CLI::App* cmd, std::string& config_path, Overrides& o) {
    // --h is the mesh-step override, so help gets no short flag.
    cmd->set_help_flag("--help", "print this help and exit");
    cmd->add_option("config", config_path, "key = value config file")->required();
    cmd->add_option("--problem", o.problem, "paper_benchmark | bump | two_channel");
    cmd->add_option("--dim", o.dim, "space dimension (>= 2)");
    cmd->add_option("--mode", o.mode, "classic | two_level | multi_level | auto");
    cmd->add_option("--h", o.h, "finest mesh step (accepts fractions like 1/50)");
    cmd->add_option("--epsilon", o.epsilon, "accuracy target in (0, 1)");
    cmd->add_option("--levels", o.levels, "level count for multi_level (0 = automatic)");
    cmd->add_option("--eta-const", o.eta_const, "selection threshold scale");
    cmd->add_option("--gamma", o.gamma, "accuracy exponent in (0, 1]");
    cmd->add_option("--beta", o.beta, "corridor width exponent in (0, 1]");
    cmd->add_option("--repetitions", o.repetitions, "timed repetitions per run");
    cmd->add_option("--budget-secs", o.budget_secs, "wall-clock budget per run (0 = none)");
    cmd->add_option("--jobs", o.jobs, "parallel runs in a sweep");
    cmd->add_option("--out", o.out, "write the report to this file instead of stdout");
}

void merge(hj::KeyValues& kv, const Overrides& o) {
    const auto put = [&](const char* key, const std::optional<std::string>& v) {
        if (v) hj::set_key(kv, key, *v);
    };
    put("problem", o.problem);
    put("dim", o.dim);
    put("mode", o.mode);
    put("h", o.h);
    put("epsilon", o.epsilon);
    put("levels", o.levels);
    put("eta_const", o.eta_const);
    put("gamma", o.gamma);
    put("beta", o.beta);
    put("repetitions", o.repetitions);
    put("budget_secs", o.budget_secs);
    put("jobs", o.jobs);
    put("out", o.out);
}

std::string take_scalar(const hj::KeyValues& kv, const std::string& key) {
    for (const auto& [k, v] : kv) {
        if (k == key) return v;
    }
    return {};
}

int with_output(const std::string& path, const std::function<void(std::ostream&)>& write) {
    if (path.empty()) {
        write(std::cout);
        return 0;
    }
    std::ofstream out(path);
    if (!out) {
        std::cerr << "hjbench: cannot write " << path << '\n';
        return 1;
    }
    write(out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"minimum-time eikonal solver benchmark"};
    app.set_help_flag("--help", "print this help and exit");
    app.require_subcommand(1);

    std::string run_config, sweep_config;
    Overrides run_over, sweep_over;
    CLI::App* cmd_run = app.add_subcommand("run", "solve one instance, report as JSON");
    CLI::App* cmd_sweep = app.add_subcommand("sweep", "run a config grid, report as CSV");
    add_flags(cmd_run, run_config, run_over);
    add_flags(cmd_sweep, sweep_config, sweep_over);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_name() == "CallForHelp" ? 0 : 1;
    }

    try {
        if (app.got_subcommand(cmd_run)) {
            hj::KeyValues kv = hj::parse_config_file(run_config);
            merge(kv, run_over);
            const std::string out_path = take_scalar(kv, "out");
            const std::vector<hj::RunConfig> configs = hj::expand_configs(kv);
            if (configs.size() != 1) {
                std::cerr << "hjbench run: config expands to " << configs.size()
                          << " runs; use sweep for lists\n";
                return 1;
            }
            const std::string why = hj::validate(configs.front());
            if (!why.empty()) {
                std::cerr << "hjbench run: " << why << '\n';
                return 1;
            }
            const hj::RunReport rep = hj::run(configs.front());
            const int rc =
                with_output(out_path, [&](std::ostream& os) { os << hj::report_json(rep) << '\n'; });
            if (rc != 0) return rc;
            return rep.failed() ? 2 : 0;
        }

        hj::KeyValues kv = hj::parse_config_file(sweep_config);
        merge(kv, sweep_over);
        const std::string out_path = take_scalar(kv, "out");
        int jobs = 1;
        const std::string jobs_text = take_scalar(kv, "jobs");
        if (!jobs_text.empty()) jobs = static_cast<int>(hj::parse_number(jobs_text));
        const std::vector<hj::RunConfig> configs = hj::expand_configs(kv);
        if (configs.empty()) {
            std::cerr << "hjbench sweep: empty config\n";
            return 1;
        }
        std::vector<hj::RunReport> reports;
        const int rc = with_output(
            out_path, [&](std::ostream& os) { reports = hj::sweep(configs, os, jobs); });
        if (rc != 0) return rc;
        const bool all_failed =
            std::all_of(reports.begin(), reports.end(),
                        [](const hj::RunReport& r) { return r.failed(); });
        return all_failed ? 2 : 0;
    } catch (const std::exception& e) {
        std::cerr << "hjbench: " << e.what() << '\n';
        return 1;
    }
}
