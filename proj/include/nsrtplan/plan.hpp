#ifndef NSRTPLAN_PLAN_HPP
#define NSRTPLAN_PLAN_HPP

#include <optional>
#include <string>
#include <vector>

#include "nsrtplan/env.hpp"
#include "nsrtplan/learn.hpp"
#include "nsrtplan/nsrt.hpp"

namespace nsrtplan {

// Bilevel planner: outer A* over ground operators with an additive
// delete-relaxation heuristic, inner sampling-based refinement with the
// neural heads, and failure propagation through synthetic per-type
// NotCausesFailure predicates. Also hosts the baseline planners.

struct PlannerConfig {
    double timeout_s = 3.0;
    int n_trials = 1;        // imagined rollouts per candidate symbolic plan
    int sampler_tries = 10;  // Gaussian draws gated by the classifier
    int prior_tries = 30;    // prior draws gated by the classifier (B6/B7)
    int shooting_iters = 1000;
    double clip_std = 1.0;
    // A refinement step redraws its action when the failure predictor flags
    // it; only a step whose every draw is flagged reports a predicted
    // failure. This keeps one noisy prediction from vetoing a good plan.
    int failure_redraws = 3;
    double failure_threshold = 0.8;
};

enum class Method { ours, b1, b2, b3, b5, b6, b7 };

Method parse_method(const std::string& name);
const char* method_name(Method m);

struct PlanResult {
    bool found = false;
    std::vector<std::vector<double>> actions;
    std::vector<std::string> symbolic_steps;  // ground operator names, when symbolic
    int expansions = 0;
    int augmentations = 0;
    int plans_tried = 0;   // candidate symbolic plans handed to refinement
    int flagged = 0;       // refinements ended by a predicted failure
    int deviated = 0;      // refinements ended by an imagined-abstract mismatch
    int resets = 0;        // augmentation wipes after an exhausted search
    double wall_s = 0.0;
};

// Full bilevel planning. With use_prior_sampler, refinement draws actions
// from the environment prior gated by the learned classifier instead of the
// learned Gaussian samplers (baseline B6).
PlanResult plan_bilevel(const Env& env, const LearnedModel& model, const Task& task,
                        const PlannerConfig& cfg, Rng& rng, bool use_prior_sampler = false);

// First goal-reaching symbolic plan, no refinement. Returns the ground
// operator names; used by B1, tests and diagnostics.
std::optional<std::vector<std::string>> first_symbolic_plan(const Env& env,
                                                            const LearnedModel& model,
                                                            const Task& task, double timeout_s);

// Additive heuristic over an explicit delete-relaxed instance: operators are
// (precondition, add) atom-id lists with unit cost. Returns the sum of goal
// atom costs; infinity encodes unreachable.
double h_add_value(const std::vector<std::vector<int>>& pre,
                   const std::vector<std::vector<int>>& add, const std::vector<int>& state,
                   const std::vector<int>& goal);

struct EpisodeResult {
    bool solved = false;
    int plan_len = 0;        // actions in the produced plan (0 when none)
    double plan_wall_s = 0;  // planning time, excludes execution
    int executed = 0;        // environment steps actually taken
};

// Plans with the requested method and executes in the environment under the
// episode protocol (stop on solve, failure, plan end, or horizon). B1 samples
// actions on the real states while executing; B5 runs the prior directly.
EpisodeResult run_episode(const Env& env, const LearnedModel* model, const Task& task,
                          Method method, const PlannerConfig& cfg, Rng& rng);

}  // namespace nsrtplan

#endif
