#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "nsrtplan.h"
#include "nsrtplan/harness.hpp"

using namespace nsrtplan;

struct npl_env {
    std::unique_ptr<Env> env;
};

struct npl_model {
    ModelBundle bundle;
};

namespace {

thread_local std::string g_last_error = "no error";

npl_status fail(npl_status code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

npl_status fail_invalid(const std::string& msg) { return fail(NPL_ERR_INVALID_ARGUMENT, msg); }

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

extern "C" {

const char* npl_version(void) { return "0.1.0"; }

const char* npl_last_error(void) { return g_last_error.c_str(); }

void npl_string_free(char* s) { std::free(s); }

npl_status npl_env_names(char** out_names) {
    if (out_names == nullptr) return fail_invalid("out_names is null");
    std::string joined;
    for (const std::string& n : env_names()) {
        if (!joined.empty()) joined += ',';
        joined += n;
    }
    *out_names = dup_string(joined);
    if (*out_names == nullptr) return fail(NPL_ERR_RUNTIME, "allocation failed");
    return NPL_OK;
}

npl_status npl_env_open(const char* name, npl_env** out_env) {
    if (name == nullptr || out_env == nullptr) return fail_invalid("null argument");
    try {
        auto env = make_env(name);
        *out_env = new npl_env{std::move(env)};
        return NPL_OK;
    } catch (const std::exception& e) {
        return fail_invalid(e.what());
    }
}

void npl_env_close(npl_env* env) { delete env; }

npl_status npl_env_constants(const npl_env* env, char** out_text) {
    if (env == nullptr || out_text == nullptr) return fail_invalid("null argument");
    *out_text = dup_string(format_env_constants(*env->env));
    if (*out_text == nullptr) return fail(NPL_ERR_RUNTIME, "allocation failed");
    return NPL_OK;
}

npl_status npl_collect(const npl_env* env, int n_episodes, uint64_t seed,
                       const char* dataset_path) {
    if (env == nullptr || dataset_path == nullptr) return fail_invalid("null argument");
    if (n_episodes < 1) return fail_invalid("n_episodes must be at least 1");
    std::string text;
    try {
        text = serialize_dataset(collect_data(*env->env, n_episodes, seed));
    } catch (const std::exception& e) {
        return fail(NPL_ERR_RUNTIME, e.what());
    }
    try {
        write_file(dataset_path, text);
    } catch (const std::exception& e) {
        return fail(NPL_ERR_IO, e.what());
    }
    return NPL_OK;
}

npl_status npl_train(const npl_env* env, const char* dataset_path, const char* bundle_path,
                     const npl_train_options* options) {
    if (env == nullptr || dataset_path == nullptr || bundle_path == nullptr) {
        return fail_invalid("null argument");
    }
    std::string text;
    try {
        text = read_file(dataset_path);
    } catch (const std::exception& e) {
        return fail(NPL_ERR_IO, e.what());
    }
    std::string out_text;
    try {
        const Dataset data = parse_dataset(text, *env->env);
        TrainConfig cfg;
        uint64_t seed = 0;
        std::ostream* log = nullptr;
        if (options != nullptr) {
            seed = options->seed;
            if (options->epoch_scale > 0) cfg.epoch_scale = options->epoch_scale;
            if (options->verbose != 0) log = &std::cerr;
        }
        out_text = serialize_bundle(train_pipeline(data, *env->env, cfg, seed, log));
    } catch (const std::exception& e) {
        return fail(NPL_ERR_RUNTIME, e.what());
    }
    try {
        write_file(bundle_path, out_text);
    } catch (const std::exception& e) {
        return fail(NPL_ERR_IO, e.what());
    }
    return NPL_OK;
}

npl_status npl_model_open(const npl_env* env, const char* bundle_path, npl_model** out_model) {
    if (env == nullptr || bundle_path == nullptr || out_model == nullptr) {
        return fail_invalid("null argument");
    }
    std::string text;
    try {
        text = read_file(bundle_path);
    } catch (const std::exception& e) {
        return fail(NPL_ERR_IO, e.what());
    }
    try {
        *out_model = new npl_model{parse_bundle(text, *env->env)};
        return NPL_OK;
    } catch (const std::exception& e) {
        return fail(NPL_ERR_RUNTIME, e.what());
    }
}

void npl_model_close(npl_model* model) { delete model; }

npl_status npl_model_describe(const npl_model* model, char** out_text) {
    if (model == nullptr || out_text == nullptr) return fail_invalid("null argument");
    std::ostringstream out;
    for (const Nsrt& op : model->bundle.model.nsrts) out << op.str() << '\n';
    if (model->bundle.model.has_failure_net) {
        out << "failure predictor: graph net, hidden " << model->bundle.model.failure_net.hidden()
            << ", " << model->bundle.model.failure_net.rounds() << " message rounds\n";
    }
    *out_text = dup_string(out.str());
    if (*out_text == nullptr) return fail(NPL_ERR_RUNTIME, "allocation failed");
    return NPL_OK;
}

npl_status npl_evaluate(const npl_env* env, const npl_model* model, const char* method,
                        const char* split, int n_tasks, uint64_t seed, double timeout_s,
                        npl_eval_result* out_result) {
    if (env == nullptr || method == nullptr || split == nullptr || out_result == nullptr) {
        return fail_invalid("null argument");
    }
    if (n_tasks < 1) return fail_invalid("n_tasks must be at least 1");
    try {
        const Method m = parse_method(method);
        const TaskSplit sp = parse_split(split);
        if (sp == TaskSplit::train) return fail_invalid("evaluation split must be easy or hard");
        PlannerConfig cfg;
        if (timeout_s > 0) cfg.timeout_s = timeout_s;
        const ResultRow row = evaluate(*env->env, model ? &model->bundle : nullptr, m, sp,
                                       n_tasks, seed, cfg);
        out_result->solve_rate = row.solve_rate;
        out_result->mean_wall_s = row.mean_wall_s;
        out_result->mean_plan_len = row.mean_plan_len;
        return NPL_OK;
    } catch (const std::invalid_argument& e) {
        return fail_invalid(e.what());
    } catch (const std::exception& e) {
        return fail(NPL_ERR_RUNTIME, e.what());
    }
}

npl_status npl_curve(const npl_env* env, const npl_curve_options* options, const char* csv_path) {
    if (env == nullptr || csv_path == nullptr) return fail_invalid("null argument");
    ExperimentConfig cfg;
    cfg.env_name = env->env->name();
    try {
        if (options != nullptr) {
            if (options->seeds != nullptr) {
                cfg.seeds.assign(options->seeds, options->seeds + options->n_seeds);
            }
            if (options->episode_grid != nullptr) {
                cfg.episode_grid.assign(options->episode_grid,
                                        options->episode_grid + options->n_grid);
            }
            if (options->methods != nullptr) {
                cfg.methods.clear();
                std::istringstream in(options->methods);
                std::string tok;
                while (std::getline(in, tok, ',')) {
                    if (!tok.empty()) cfg.methods.push_back(parse_method(tok));
                }
            }
            if (options->test_tasks > 0) cfg.test_tasks = options->test_tasks;
            if (options->timeout_s > 0) cfg.planner.timeout_s = options->timeout_s;
            if (options->epoch_scale > 0) cfg.train.epoch_scale = options->epoch_scale;
            if (options->workers > 0) cfg.workers = options->workers;
        }
        if (cfg.seeds.empty() || cfg.episode_grid.empty() || cfg.methods.empty()) {
            return fail_invalid("curve needs at least one seed, grid point and method");
        }
    } catch (const std::exception& e) {
        return fail_invalid(e.what());
    }
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) return fail(NPL_ERR_IO, std::string("cannot open for writing: ") + csv_path);
    try {
        learning_curve(cfg, *env->env, &csv);
        return NPL_OK;
    } catch (const std::exception& e) {
        return fail(NPL_ERR_RUNTIME, e.what());
    }
}

}  // extern "C"
