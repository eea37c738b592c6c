#ifndef NSRTPLAN_ENV_HPP
#define NSRTPLAN_ENV_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "nsrtplan/relcore.hpp"
#include "nsrtplan/rng.hpp"

namespace nsrtplan {

// Deterministic object-oriented environments. Each environment owns its type
// and predicate tables, exposes a transition function over continuous states,
// a behavior prior for data collection, and task generators for the train /
// test-easy / test-hard distributions.

struct StepResult {
    State next;
    bool failure = false;
    std::vector<Object> failure_objects;  // e.g. the two objects in collision
};

struct Task {
    State init;
    std::vector<GroundAtom> goal;  // conjunction of ground atoms
    int horizon = 0;
};

enum class TaskSplit { train, test_easy, test_hard };

const char* split_name(TaskSplit s);
TaskSplit parse_split(const std::string& s);

class Env {
public:
    virtual ~Env() = default;

    const std::string& name() const { return name_; }
    int action_dim() const { return action_dim_; }
    const std::vector<ObjType>& types() const { return types_; }
    const std::vector<Predicate>& predicates() const { return predicates_; }
    std::vector<const Predicate*> predicate_ptrs() const;
    const std::map<std::string, double>& constants() const { return constants_; }

    const ObjType* type(const std::string& name) const;
    const Predicate* predicate(const std::string& name) const;

    // Applies one action. Throws on malformed actions (wrong length or
    // non-finite entries). On failure, `next` is the pre-action state and
    // `failure_objects` names the objects involved.
    virtual StepResult step(const State& s, const std::vector<double>& action) const = 0;

    // Behavior prior pi0(. | s): the scripted exploration policy used to
    // collect training data. Depends only on the current state.
    virtual std::vector<double> sample_prior(const State& s, Rng& rng) const = 0;

    // Generated goals are never already satisfied in the initial state.
    virtual Task generate_task(TaskSplit split, Rng& rng) const = 0;

    AbstractState abstract(const State& s) const { return abstract_state(s, predicate_ptrs()); }

protected:
    std::string name_;
    int action_dim_ = 0;
    std::vector<ObjType> types_;        // fixed at construction; addresses stable
    std::vector<Predicate> predicates_;
    std::map<std::string, double> constants_;

    void check_action(const std::vector<double>& a) const;
};

std::unique_ptr<Env> make_env(const std::string& name);
std::vector<std::string> env_names();

bool goal_holds(const State& s, const std::vector<GroundAtom>& goal);

// Versioned text dump of the environment's pinned dynamics constants.
std::string format_env_constants(const Env& env);

}  // namespace nsrtplan

#endif
