#ifndef NSRTPLAN_NSRT_HPP
#define NSRTPLAN_NSRT_HPP

#include <optional>
#include <string>
#include <vector>

#include "nsrtplan/nn.hpp"
#include "nsrtplan/relcore.hpp"

namespace nsrtplan {

// Operators with a symbolic face (typed parameters, lifted preconditions and
// effects) and a neural body (transition model over the parameters' attribute
// vectors, action sampler, applicability classifier).

struct Transition {
    State s;
    std::vector<double> action;
    State next;
    bool failure = false;
    std::vector<Object> failure_objects;
};

struct Nsrt {
    std::string name;
    std::vector<Variable> params;           // order fixed by the learner
    std::vector<LiftedAtom> preconditions;  // sorted canonically
    std::vector<LiftedAtom> add_effects;    // sorted canonically
    std::vector<LiftedAtom> del_effects;    // sorted canonically

    int action_dim = 0;

    // Transition head: [context, action] -> next values of the changed
    // attribute slots only (indices into the context vector).
    Mlp transition;
    Standardizer trans_in, trans_out;
    std::vector<int> changed_slots;

    // Sampler head: context -> diagonal Gaussian over the action, in the
    // standardized action space.
    Mlp sampler;
    Standardizer samp_in, samp_act;

    // Applicability head: [context, action] -> logit.
    Mlp classifier;
    Standardizer clas_in;

    int context_dim() const;
    std::string str() const;  // operator printout for diagnostics
};

// An NSRT bound to concrete objects. Keeps a pointer, so the owning Nsrt
// container must stay put while groundings are alive.
struct GroundNsrt {
    const Nsrt* op = nullptr;
    std::vector<Object> binding;  // one object per parameter, in order

    Substitution sigma() const;
    std::string str() const;

    bool operator==(const GroundNsrt& o) const { return op == o.op && binding == o.binding; }
    bool operator<(const GroundNsrt& o) const;
};

// All type-correct bindings with pairwise-distinct objects, in deterministic
// order (object creation order per slot, odometer over slots).
std::vector<GroundNsrt> ground(const Nsrt& op, const State& s);

std::vector<GroundAtom> ground_preconditions(const GroundNsrt& g);
std::vector<GroundAtom> ground_add_effects(const GroundNsrt& g);
std::vector<GroundAtom> ground_del_effects(const GroundNsrt& g);

bool applicable(const GroundNsrt& g, const AbstractState& abs);

// Symbolic successor: (abs \ del) u add. Valid only when applicable.
AbstractState abstract_step(const GroundNsrt& g, const AbstractState& abs);

// True when g is applicable in Abstract(s) and its ground effects equal the
// observed abstract delta of the transition exactly.
bool covers(const GroundNsrt& g, const AbstractState& abs_s, const AbstractState& abs_next);

// Concatenated attribute vectors of the bound objects, in parameter order.
std::vector<double> context_vector(const GroundNsrt& g, const State& s);

// Applies the transition head: copies the context and overwrites the changed
// slots with the network's predictions.
std::vector<double> predict_next_context(const Nsrt& op, const std::vector<double>& context,
                                         const std::vector<double>& action);

double applicability_prob(const Nsrt& op, const std::vector<double>& context,
                          const std::vector<double>& action);

// Draws up to max_tries actions from the sampler head and returns the first
// one the classifier accepts (probability > 0.5), or nullopt. clip_std > 0
// truncates each coordinate's deviation from the mean.
std::optional<std::vector<double>> sample_action(const Nsrt& op,
                                                 const std::vector<double>& context, Rng& rng,
                                                 int max_tries = 10, double clip_std = 1.0);

// One Gaussian draw with no classifier gate (fallback paths in baselines).
std::vector<double> sample_action_raw(const Nsrt& op, const std::vector<double>& context,
                                      Rng& rng, double clip_std = 1.0);

}  // namespace nsrtplan

#endif
