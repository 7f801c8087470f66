#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hj/multilevel.hpp"

namespace hj {

// One benchmark invocation. Exactly one of finest_h / epsilon must be
// positive; the other is derived through the schedule. mode is one of
// classic, two_level, multi_level, auto (multi_level with the level count
// chosen from the accuracy target).
struct RunConfig {
    std::string problem = "paper_benchmark";  // paper_benchmark | bump | two_channel
    int dim = 2;
    std::string mode = "classic";
    double finest_h = 0.0;
    double epsilon = 0.0;
    int levels = 0;
    double eta_const = kEtaConstDefault;
    double gamma = 1.0;
    double beta = 0.5;
    int repetitions = 1;
    double budget_secs = 0.0;  // 0 = no budget
};

struct LevelReport {
    int level = 0;
    double step = 0.0;
    double eta = 0.0;
    Index grid_nodes = 0;
    Index accepted_src = 0;
    Index accepted_dst = 0;
    Index active_nodes = 0;
    int retries = 0;
    double wall_ms = 0.0;
};

// Everything except wall-clock fields is reproducible bit for bit between
// repeated runs of the same config.
struct RunReport {
    RunConfig config;          // echoed, with finest_h resolved
    std::string status;        // ok | budget_exceeded | error:<reason>
    int levels_used = 0;
    double v_star = 0.0;       // NaN unless status == ok
    double tau_star = 0.0;     // NaN unless status == ok
    double err = 0.0;          // |tau_star - analytic|; NaN without an oracle
    Index visited_nodes = 0;   // sum of level grid sizes (memory proxy)
    double wall_ms = 0.0;      // median over repetitions
    std::vector<LevelReport> levels;
    std::vector<std::string> warnings;

    bool failed() const { return status.rfind("error", 0) == 0; }
};

// Empty string when the config is valid, else the reason.
std::string validate(const RunConfig& config);

// Executes the configured solve (repetitions times, median wall time).
// Solver failures and budget expiry are captured in status, not thrown.
RunReport run(const RunConfig& config);

// Runs every config (in order; jobs > 1 runs them on a thread pool) and
// writes one CSV row per config after the fixed header. Failed rows carry
// their status and do not stop the sweep. Returns the reports in input
// order.
std::vector<RunReport> sweep(const std::vector<RunConfig>& configs, std::ostream& csv,
                             int jobs = 1);

std::string csv_header();
std::string csv_row(const RunReport& report);
std::string report_json(const RunReport& report);

// Number parsing accepts plain literals and fractions like "1/50".
double parse_number(const std::string& text);

// Plain key = value lines with '#' comments. Values may be comma-separated
// lists; expand_configs takes the cross product over list-valued keys, in
// file order. Unknown keys are rejected.
using KeyValues = std::vector<std::pair<std::string, std::string>>;
KeyValues parse_config_file(const std::string& path);
void set_key(KeyValues& kv, const std::string& key, const std::string& value);
std::vector<RunConfig> expand_configs(const KeyValues& kv);

}  // namespace hj
