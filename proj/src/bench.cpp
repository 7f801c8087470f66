#include "hj/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace hj {

namespace {

const char* const kCsvHeader =
    "dim,mode,h,levels,eta_const,gamma,beta,visited_nodes,wall_ms,v_star,tau_star,err,status";

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string fmt(double v, const char* spec = "%.12g") {
    if (std::isnan(v)) return {};
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

double strict_stod(const std::string& text) {
    size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters in number");
    return v;
}

long strict_stol(const std::string& text) {
    size_t used = 0;
    const long v = std::stol(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters in integer");
    return v;
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    try {
        if (key == "problem") {
            cfg.problem = value;
        } else if (key == "mode") {
            cfg.mode = value;
        } else if (key == "dim") {
            cfg.dim = static_cast<int>(strict_stol(value));
        } else if (key == "h") {
            cfg.finest_h = parse_number(value);
        } else if (key == "epsilon") {
            cfg.epsilon = parse_number(value);
        } else if (key == "levels") {
            cfg.levels = static_cast<int>(strict_stol(value));
        } else if (key == "eta_const") {
            cfg.eta_const = parse_number(value);
        } else if (key == "gamma") {
            cfg.gamma = parse_number(value);
        } else if (key == "beta") {
            cfg.beta = parse_number(value);
        } else if (key == "repetitions") {
            cfg.repetitions = static_cast<int>(strict_stol(value));
        } else if (key == "budget_secs") {
            cfg.budget_secs = parse_number(value);
        } else {
            throw std::invalid_argument("unknown config key '" + key + "'");
        }
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("bad value for '" + key + "': " + value);
    } catch (const std::out_of_range&) {
        throw std::invalid_argument("bad value for '" + key + "': " + value);
    }
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    if (out.empty()) out.push_back("");
    return out;
}

ProblemSpec make_problem(const RunConfig& cfg) {
    if (cfg.problem == "paper_benchmark") return paper_benchmark(cfg.dim);
    if (cfg.problem == "bump") return bump_problem(cfg.dim);
    if (cfg.problem == "two_channel") return two_channel_problem(cfg.dim);
    throw std::invalid_argument("unknown problem '" + cfg.problem + "'");
}

ScheduleRequest make_request(const RunConfig& cfg) {
    ScheduleRequest req;
    if (cfg.mode == "classic") {
        req.mode = ScheduleMode::classic;
    } else if (cfg.mode == "two_level") {
        req.mode = ScheduleMode::two_level;
    } else if (cfg.mode == "multi_level" || cfg.mode == "auto") {
        req.mode = ScheduleMode::multi_level;
        req.levels = cfg.mode == "auto" ? 0 : cfg.levels;
    } else {
        throw std::invalid_argument("unknown mode '" + cfg.mode + "'");
    }
    if (cfg.finest_h > 0.0) req.finest_h = cfg.finest_h;
    if (cfg.epsilon > 0.0) req.epsilon = cfg.epsilon;
    req.gamma = cfg.gamma;
    req.beta = cfg.beta;
    req.eta_const = cfg.eta_const;
    return req;
}

}  // namespace

double parse_number(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) throw std::invalid_argument("empty number");
    const auto slash = t.find('/');
    if (slash == std::string::npos) return strict_stod(t);
    const double num = strict_stod(trim(t.substr(0, slash)));
    const double den = strict_stod(trim(t.substr(slash + 1)));
    if (den == 0.0) throw std::invalid_argument("division by zero in fraction");
    return num / den;
}

KeyValues parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": empty key");
        }
        set_key(kv, key, value);
    }
    return kv;
}

void set_key(KeyValues& kv, const std::string& key, const std::string& value) {
    for (auto& [k, v] : kv) {
        if (k == key) {
            v = value;
            return;
        }
    }
    kv.emplace_back(key, value);
}

std::vector<RunConfig> expand_configs(const KeyValues& kv) {
    std::vector<RunConfig> configs(1);
    for (const auto& [key, value] : kv) {
        if (key == "out" || key == "jobs") continue;  // consumed by the CLI
        const std::vector<std::string> items = split_list(value);
        std::vector<RunConfig> next;
        next.reserve(configs.size() * items.size());
        for (const RunConfig& base : configs) {
            for (const std::string& item : items) {
                RunConfig cfg = base;
                apply_key(cfg, key, item);
                next.push_back(std::move(cfg));
            }
        }
        configs = std::move(next);
    }
    return configs;
}

std::string validate(const RunConfig& config) {
    if (config.problem != "paper_benchmark" && config.problem != "bump" &&
        config.problem != "two_channel") {
        return "unknown problem '" + config.problem + "'";
    }
    if (config.dim < 2 || config.dim > 16) return "dim must lie in [2, 16]";
    if (config.mode != "classic" && config.mode != "two_level" &&
        config.mode != "multi_level" && config.mode != "auto") {
        return "unknown mode '" + config.mode + "'";
    }
    if ((config.finest_h > 0.0) == (config.epsilon > 0.0)) {
        return "set exactly one of h and epsilon";
    }
    if (config.epsilon > 0.0 && config.epsilon >= 1.0) return "epsilon must lie in (0, 1)";
    if (config.levels < 0) return "levels must be >= 0";
    if (config.levels > 0 && config.mode != "multi_level") {
        return "levels applies only to multi_level mode";
    }
    if (!(config.eta_const > 0.0)) return "eta_const must be positive";
    if (!(config.gamma > 0.0) || config.gamma > 1.0) return "gamma must lie in (0, 1]";
    if (!(config.beta > 0.0) || config.beta > 1.0) return "beta must lie in (0, 1]";
    if (config.repetitions < 1) return "repetitions must be >= 1";
    if (config.budget_secs < 0.0) return "budget_secs must be >= 0";
    return {};
}

RunReport run(const RunConfig& config) {
    RunReport rep;
    rep.config = config;
    rep.v_star = rep.tau_star = rep.err = std::numeric_limits<double>::quiet_NaN();

    const std::string why = validate(config);
    if (!why.empty()) {
        rep.status = "error:" + why;
        return rep;
    }

    try {
        const ProblemSpec problem = make_problem(config);
        const LevelSchedule schedule =
            schedule_params(make_request(config), config.dim, problem.domain.max_extent());
        rep.config.finest_h = schedule.finest();
        rep.config.epsilon = schedule.epsilon;
        rep.config.levels = schedule.level_count();
        rep.levels_used = schedule.level_count();

        MlfmOptions options;
        if (config.budget_secs > 0.0) {
            options.deadline = std::chrono::steady_clock::now() +
                               std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                   std::chrono::duration<double>(config.budget_secs));
        }

        std::vector<double> walls;
        MlfmResult result;
        for (int r = 0; r < config.repetitions; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            MlfmResult attempt = run_multilevel(problem, schedule, options);
            walls.push_back(
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count());
            if (r == 0) result = std::move(attempt);
            if (result.budget_exceeded) break;
        }
        std::sort(walls.begin(), walls.end());
        const size_t mid = walls.size() / 2;
        rep.wall_ms = walls.size() % 2 == 1 ? walls[mid] : 0.5 * (walls[mid - 1] + walls[mid]);

        rep.status = result.budget_exceeded ? "budget_exceeded" : "ok";
        rep.visited_nodes = result.visited_total;
        rep.warnings = result.warnings;
        for (const MlfmLevel& l : result.levels) {
            rep.levels.push_back({l.level, l.step, l.eta, l.grid_nodes, l.accepted_src,
                                  l.accepted_dst, l.active_nodes, l.retries, l.wall_ms});
        }
        if (!result.budget_exceeded) {
            rep.v_star = result.v_star;
            rep.tau_star = result.tau_star;
            if (config.problem == "paper_benchmark") {
                rep.err = std::abs(rep.tau_star - benchmark_oracle(config.dim).tau_star);
            }
        }
    } catch (const std::exception& e) {
        rep.status = std::string("error:") + e.what();
        rep.v_star = rep.tau_star = rep.err = std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

std::vector<RunReport> sweep(const std::vector<RunConfig>& configs, std::ostream& csv, int jobs) {
    std::vector<RunReport> reports(configs.size());
    const int workers =
        std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
    if (workers <= 1) {
        for (size_t i = 0; i < configs.size(); ++i) reports[i] = run(configs[i]);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < configs.size(); i = next.fetch_add(1)) {
                    reports[i] = run(configs[i]);
                }
            });
        }
        for (std::thread& t : pool) t.join();
    }

    csv << csv_header() << '\n';
    for (const RunReport& rep : reports) csv << csv_row(rep) << '\n';
    return reports;
}

std::string csv_header() { return kCsvHeader; }

std::string csv_row(const RunReport& report) {
    std::ostringstream out;
    out << report.config.dim << ',' << report.config.mode << ','
        << fmt(report.config.finest_h, "%.10g") << ',' << report.levels_used << ','
        << fmt(report.config.eta_const, "%.10g") << ',' << fmt(report.config.gamma, "%.10g")
        << ',' << fmt(report.config.beta, "%.10g") << ',' << report.visited_nodes << ','
        << fmt(report.wall_ms, "%.3f") << ',' << fmt(report.v_star) << ','
        << fmt(report.tau_star) << ',' << fmt(report.err) << ',' << report.status;
    return out.str();
}

std::string report_json(const RunReport& report) {
    nlohmann::json j;
    j["config"] = {{"problem", report.config.problem},
                   {"dim", report.config.dim},
                   {"mode", report.config.mode},
                   {"h", report.config.finest_h},
                   {"epsilon", report.config.epsilon},
                   {"levels", report.config.levels},
                   {"eta_const", report.config.eta_const},
                   {"gamma", report.config.gamma},
                   {"beta", report.config.beta},
                   {"repetitions", report.config.repetitions},
                   {"budget_secs", report.config.budget_secs}};
    j["status"] = report.status;
    j["levels_used"] = report.levels_used;
    const auto num_or_null = [](double v) {
        return std::isnan(v) ? nlohmann::json() : nlohmann::json(v);
    };
    j["v_star"] = num_or_null(report.v_star);
    j["tau_star"] = num_or_null(report.tau_star);
    j["err"] = num_or_null(report.err);
    j["visited_nodes"] = report.visited_nodes;
    j["wall_ms"] = report.wall_ms;
    j["levels"] = nlohmann::json::array();
    for (const LevelReport& l : report.levels) {
        j["levels"].push_back({{"level", l.level},
                               {"step", l.step},
                               {"eta", l.eta},
                               {"grid_nodes", l.grid_nodes},
                               {"accepted_src", l.accepted_src},
                               {"accepted_dst", l.accepted_dst},
                               {"active_nodes", l.active_nodes},
                               {"retries", l.retries},
                               {"wall_ms", l.wall_ms}});
    }
    j["warnings"] = report.warnings;
    return j.dump(2);
}

}  // namespace hj
