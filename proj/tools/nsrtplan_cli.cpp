#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nsrtplan.h"

// Command-line front end over the nsrtplan C API: collect datasets, train
// model bundles, evaluate planners and sweep learning curves.

namespace {

int report(npl_status st) {
    std::fprintf(stderr, "error: %s\n", npl_last_error());
    return st == NPL_ERR_INVALID_ARGUMENT ? 2 : 1;
}

// key = value lines, '#' comments. Entries override command-line flags; keys
// that the active subcommand does not use are ignored.
std::map<std::string, std::string> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) out[key] = val;
    }
    return out;
}

using Setters = std::map<std::string, std::function<void(const std::string&)>>;

void apply_config(const std::map<std::string, std::string>& cfg, const Setters& setters) {
    for (const auto& [key, val] : cfg) {
        const auto it = setters.find(key);
        if (it == setters.end()) continue;
        try {
            it->second(val);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--config", "bad value for " + key + ": " + val);
        }
    }
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& s) {
    std::vector<std::uint64_t> out;
    for (const std::string& tok : split_list(s)) out.push_back(std::stoull(tok));
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (const std::string& tok : split_list(s)) out.push_back(std::stoi(tok));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("nsrtplan ") + npl_version() +
                 " - learn relational operator models from interaction data and plan with them"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path,
                   "key = value file applied after flag parsing (entries win over flags)");

    std::string env_name = "pickplace1d";
    std::uint64_t seed = 0;

    // collect
    auto* collect = app.add_subcommand("collect", "roll the behavior prior, write a dataset");
    std::string c_out = "dataset.txt";
    int c_episodes = 500;
    collect->add_option("--env", env_name, "environment name")->capture_default_str();
    collect->add_option("--episodes", c_episodes, "training episodes")->capture_default_str();
    collect->add_option("--seed", seed, "master seed")->capture_default_str();
    collect->add_option("--out", c_out, "dataset path")->capture_default_str();

    // train
    auto* train = app.add_subcommand("train", "learn a model bundle from a dataset");
    std::string t_data = "dataset.txt", t_out = "bundle.txt";
    int t_scale = 0;
    bool t_quiet = false;
    train->add_option("--env", env_name, "environment name")->capture_default_str();
    train->add_option("--data", t_data, "dataset path")->capture_default_str();
    train->add_option("--out", t_out, "bundle path")->capture_default_str();
    train->add_option("--seed", seed, "master seed")->capture_default_str();
    train->add_option("--epoch-scale", t_scale,
                      "divide reference epoch counts (0 = library default)");
    train->add_flag("--quiet", t_quiet, "suppress stage timings");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "run a planner over generated test tasks");
    std::string e_bundle = "bundle.txt", e_method = "ours", e_split = "easy";
    int e_tasks = 100;
    double e_timeout = 3.0;
    evaluate->add_option("--env", env_name, "environment name")->capture_default_str();
    evaluate->add_option("--bundle", e_bundle, "bundle path (unused by b5)")
        ->capture_default_str();
    evaluate->add_option("--method", e_method, "ours|b1|b2|b3|b5|b6|b7")->capture_default_str();
    evaluate->add_option("--split", e_split, "easy|hard")->capture_default_str();
    evaluate->add_option("--tasks", e_tasks, "test tasks")->capture_default_str();
    evaluate->add_option("--seed", seed, "master seed")->capture_default_str();
    evaluate->add_option("--timeout", e_timeout, "seconds per task")->capture_default_str();

    // curve
    auto* curve = app.add_subcommand("curve", "sweep episodes x seeds x methods, write CSV");
    std::string u_out = "curve.csv", u_seeds = "0,1,2,3,4,5,6,7", u_grid = "50,100,200,500";
    std::string u_methods = "ours";
    int u_tasks = 100, u_scale = 0, u_workers = 1;
    double u_timeout = 3.0;
    curve->add_option("--env", env_name, "environment name")->capture_default_str();
    curve->add_option("--out", u_out, "CSV path")->capture_default_str();
    curve->add_option("--seeds", u_seeds, "comma-separated seeds")->capture_default_str();
    curve->add_option("--grid", u_grid, "comma-separated episode counts")->capture_default_str();
    curve->add_option("--methods", u_methods, "comma-separated methods")->capture_default_str();
    curve->add_option("--tasks", u_tasks, "test tasks per cell")->capture_default_str();
    curve->add_option("--timeout", u_timeout, "seconds per task")->capture_default_str();
    curve->add_option("--epoch-scale", u_scale, "divide reference epoch counts");
    curve->add_option("--workers", u_workers, "bundles trained concurrently")
        ->capture_default_str();

    // constants
    auto* constants = app.add_subcommand("constants", "print the environment's pinned constants");
    constants->add_option("--env", env_name, "environment name")->capture_default_str();

    auto* envs = app.add_subcommand("envs", "list environment names");

    CLI11_PARSE(app, argc, argv);

    std::map<std::string, std::string> cfg;
    try {
        if (!config_path.empty()) cfg = load_config(config_path);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    }

    auto set_str = [](std::string& dst) {
        return [&dst](const std::string& v) { dst = v; };
    };
    auto set_int = [](int& dst) {
        return [&dst](const std::string& v) { dst = std::stoi(v); };
    };
    auto set_u64 = [](std::uint64_t& dst) {
        return [&dst](const std::string& v) { dst = std::stoull(v); };
    };
    auto set_dbl = [](double& dst) {
        return [&dst](const std::string& v) { dst = std::stod(v); };
    };

    if (envs->parsed()) {
        char* names = nullptr;
        if (const npl_status st = npl_env_names(&names); st != NPL_OK) return report(st);
        std::printf("%s\n", names);
        npl_string_free(names);
        return 0;
    }

    try {
        Setters common{{"env", set_str(env_name)}, {"seed", set_u64(seed)}};
        if (collect->parsed()) {
            apply_config(cfg, [&] {
                Setters s = common;
                s["episodes"] = set_int(c_episodes);
                s["out"] = set_str(c_out);
                return s;
            }());
        } else if (train->parsed()) {
            apply_config(cfg, [&] {
                Setters s = common;
                s["data"] = set_str(t_data);
                s["out"] = set_str(t_out);
                s["epoch_scale"] = set_int(t_scale);
                return s;
            }());
        } else if (evaluate->parsed()) {
            apply_config(cfg, [&] {
                Setters s = common;
                s["bundle"] = set_str(e_bundle);
                s["method"] = set_str(e_method);
                s["split"] = set_str(e_split);
                s["tasks"] = set_int(e_tasks);
                s["timeout"] = set_dbl(e_timeout);
                return s;
            }());
        } else if (curve->parsed()) {
            apply_config(cfg, [&] {
                Setters s = common;
                s["out"] = set_str(u_out);
                s["seeds"] = set_str(u_seeds);
                s["grid"] = set_str(u_grid);
                s["methods"] = set_str(u_methods);
                s["tasks"] = set_int(u_tasks);
                s["timeout"] = set_dbl(u_timeout);
                s["epoch_scale"] = set_int(u_scale);
                s["workers"] = set_int(u_workers);
                return s;
            }());
        } else if (constants->parsed()) {
            apply_config(cfg, common);
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    }

    npl_env* env = nullptr;
    if (const npl_status st = npl_env_open(env_name.c_str(), &env); st != NPL_OK) {
        return report(st);
    }
    struct EnvGuard {
        npl_env* e;
        ~EnvGuard() { npl_env_close(e); }
    } guard{env};

    if (constants->parsed()) {
        char* text = nullptr;
        if (const npl_status st = npl_env_constants(env, &text); st != NPL_OK) return report(st);
        std::fputs(text, stdout);
        npl_string_free(text);
        return 0;
    }

    if (collect->parsed()) {
        if (const npl_status st = npl_collect(env, c_episodes, seed, c_out.c_str());
            st != NPL_OK) {
            return report(st);
        }
        std::printf("wrote %s\n", c_out.c_str());
        return 0;
    }

    if (train->parsed()) {
        npl_train_options opts{};
        opts.seed = seed;
        opts.epoch_scale = t_scale;
        opts.verbose = t_quiet ? 0 : 1;
        if (const npl_status st = npl_train(env, t_data.c_str(), t_out.c_str(), &opts);
            st != NPL_OK) {
            return report(st);
        }
        std::printf("wrote %s\n", t_out.c_str());
        return 0;
    }

    if (evaluate->parsed()) {
        npl_model* model = nullptr;
        if (e_method != "b5") {
            if (const npl_status st = npl_model_open(env, e_bundle.c_str(), &model);
                st != NPL_OK) {
                return report(st);
            }
        }
        npl_eval_result res{};
        const npl_status st = npl_evaluate(env, model, e_method.c_str(), e_split.c_str(),
                                           e_tasks, seed, e_timeout, &res);
        npl_model_close(model);
        if (st != NPL_OK) return report(st);
        std::printf("env=%s method=%s split=%s tasks=%d seed=%llu\n", env_name.c_str(),
                    e_method.c_str(), e_split.c_str(), e_tasks,
                    static_cast<unsigned long long>(seed));
        std::printf("solve_rate=%g mean_wall_s=%g mean_plan_len=%g\n", res.solve_rate,
                    res.mean_wall_s, res.mean_plan_len);
        return 0;
    }

    if (curve->parsed()) {
        std::vector<std::uint64_t> seeds;
        std::vector<int> grid;
        try {
            seeds = parse_u64_list(u_seeds);
            grid = parse_int_list(u_grid);
        } catch (const std::exception&) {
            std::fprintf(stderr, "error: bad --seeds or --grid list\n");
            return 2;
        }
        npl_curve_options opts{};
        opts.seeds = seeds.data();
        opts.n_seeds = seeds.size();
        opts.episode_grid = grid.data();
        opts.n_grid = grid.size();
        opts.methods = u_methods.c_str();
        opts.test_tasks = u_tasks;
        opts.timeout_s = u_timeout;
        opts.epoch_scale = u_scale;
        opts.workers = u_workers;
        if (const npl_status st = npl_curve(env, &opts, u_out.c_str()); st != NPL_OK) {
            return report(st);
        }
        std::printf("wrote %s\n", u_out.c_str());
        return 0;
    }

    return 0;
}
