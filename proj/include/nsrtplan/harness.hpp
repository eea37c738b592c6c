#ifndef NSRTPLAN_HARNESS_HPP
#define NSRTPLAN_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nsrtplan/env.hpp"
#include "nsrtplan/learn.hpp"
#include "nsrtplan/plan.hpp"

namespace nsrtplan {

// Experiment orchestration: offline data collection under the behavior prior,
// the train/evaluate protocol, seeded learning-curve sweeps and the text
// serialization of datasets and trained models.

// Offline experience from prior rollouts on training tasks. Failure steps are
// kept apart: they feed the failure predictor and never enter operator
// learning.
struct Dataset {
    std::string env_name;
    std::vector<Transition> transitions;
    std::vector<Transition> failures;

    std::size_t size() const { return transitions.size() + failures.size(); }
    // Transitions followed by failures; the layout learn_model expects.
    std::vector<Transition> merged() const;
};

struct ModelBundle {
    std::string env_name;
    std::string dataset_fingerprint;
    std::string config_fingerprint;
    LearnedModel model;
};

struct ResultRow {
    std::string env_name;
    Method method = Method::ours;
    std::uint64_t seed = 0;
    int train_episodes = 0;
    TaskSplit split = TaskSplit::test_easy;
    double solve_rate = 0.0;   // percent of test tasks solved
    double mean_wall_s = 0.0;  // planner wall seconds, mean over solved tasks
    double mean_plan_len = 0.0;
};

struct ExperimentConfig {
    std::string env_name = "pickplace1d";
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7};
    std::vector<int> episode_grid = {50, 100, 200, 500};
    int test_tasks = 100;
    std::vector<Method> methods = {Method::ours};
    PlannerConfig planner;
    TrainConfig train;
    int workers = 1;  // bundles trained concurrently during a sweep
};

// Rolls the prior on freshly generated training tasks. Episodes end on solve,
// on a failure step, or after the task horizon; every step is logged.
Dataset collect_data(const Env& env, int n_episodes, std::uint64_t seed);

// Partitioning, symbolic generalization, neural heads, failure predictor.
// Stage wall times go to *log (one line) when given.
ModelBundle train_pipeline(const Dataset& data, const Env& env, const TrainConfig& cfg,
                           std::uint64_t seed, std::ostream* log = nullptr);

// Generates n_tasks tasks of the split, runs the method on each and executes
// returned plans open-loop on the real environment. Task generation depends
// only on (seed, split, index), so methods compete on identical tasks.
// bundle may be null only for the pure-prior method.
ResultRow evaluate(const Env& env, const ModelBundle* bundle, Method method, TaskSplit split,
                   int n_tasks, std::uint64_t seed, const PlannerConfig& cfg);

// Sweeps episode grid x seeds x methods x both test splits. Rows stream to
// *csv (with header, flushed per row) in grid-major order as jobs finish.
std::vector<ResultRow> learning_curve(const ExperimentConfig& cfg, const Env& env,
                                      std::ostream* csv);

extern const char* kCsvHeader;  // env,method,seed,train_episodes,split,...
std::string csv_row(const ResultRow& row);

// Versioned whitespace-separated text codecs. Doubles are written with 17
// significant digits, so serialize -> parse -> serialize is byte-identical.
std::string serialize_dataset(const Dataset& d);
Dataset parse_dataset(const std::string& text, const Env& env);
std::string serialize_bundle(const ModelBundle& b);
ModelBundle parse_bundle(const std::string& text, const Env& env);

std::string fingerprint(const std::string& text);  // short stable hex digest
std::string format_train_config(const TrainConfig& cfg, std::uint64_t seed);

void write_file(const std::string& path, const std::string& text);
std::string read_file(const std::string& path);

}  // namespace nsrtplan

#endif
