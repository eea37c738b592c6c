#ifndef NSRTPLAN_LEARN_HPP
#define NSRTPLAN_LEARN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nsrtplan/env.hpp"
#include "nsrtplan/nn.hpp"
#include "nsrtplan/nsrt.hpp"

namespace nsrtplan {

// Operator learning pipeline: effect-based partitioning of transition data,
// symbolic generalization (parameters, precondition intersection, lifted
// effects), training of the per-operator neural heads, and the graph-network
// failure predictor.

struct TrainConfig {
    // Reference epoch counts; the actual number of full-batch steps is the
    // count divided by epoch_scale (floor, at least 1).
    int sampler_epochs = 35000;
    int transition_epochs = 10000;
    int classifier_epochs = 50000;
    int epoch_scale = 10;

    int gnn_epochs = 4000;  // not scaled; the failure dataset is small already
    int gnn_batch = 128;
    int gnn_hidden = 16;
    int gnn_rounds = 3;

    double lr = 1e-3;
    int hidden = 32;                  // two hidden layers of this width
    double change_tolerance = 1e-9;   // attribute-change threshold for sparsity
};

// One equivalence class of transitions whose effect deltas unify.
struct Partition {
    EffectPair effects;                    // representative (first member) effects
    std::vector<int> members;              // indices into the dataset, insertion order
    std::vector<ObjectMap> rep_to_member;  // aligned with members; [0] is identity
};

EffectPair effect_delta(const AbstractState& abs_s, const AbstractState& abs_next);

std::vector<AbstractState> abstract_states(const std::vector<Transition>& data, const Env& env,
                                           bool next_state);

// Single pass over the dataset; each transition joins the first existing
// partition whose key effects unify with its own, else founds a new one.
// Failure transitions are skipped.
std::vector<Partition> partition_transitions(const std::vector<Transition>& data,
                                             const std::vector<AbstractState>& abs_s,
                                             const std::vector<AbstractState>& abs_next);

// Objects mentioned in the effect pair, ordered by first appearance in the
// canonical atom order (adds before deletes). Defines the parameter order.
std::vector<Object> effect_objects(const EffectPair& eff);

// Atoms of abs whose arguments all lie in keep.
std::vector<GroundAtom> project_atoms(const AbstractState& abs, const std::vector<Object>& keep);

// Global fresh-variable source: ?x, ?y, ?z, ?x2, ?y2, ...
class VariableNamer {
public:
    Variable fresh(const ObjType* t);

private:
    int count_ = 0;
};

// Symbolic face of one partition. Effects are the representative's, lifted;
// preconditions are the intersection over members of their projected abstract
// states, pulled back through each member's object map.
Nsrt learn_symbolic(const Partition& p, const std::vector<AbstractState>& abs_s,
                    VariableNamer& namer, const std::string& name, int action_dim);

// Parameter-aligned object tuple for each member.
std::vector<std::vector<Object>> member_bindings(const Partition& p);

// Trains transition, sampler and classifier heads in place. Classifier
// negatives come from other partitions (random binding over that transition's
// objects) and from re-mapped bindings within the partition, subsampled to a
// 1:1 ratio against positives. Paramless operators keep empty heads.
void train_nsrt_heads(Nsrt& op, const Partition& p, const std::vector<Transition>& data,
                      const std::vector<Partition>& all_partitions, const TrainConfig& cfg,
                      Rng& rng);

// Fixed featurization of (state, abstract state, action) as a directed graph:
// one node per object carrying its padded attributes, type one-hot, true
// unary atoms and the broadcast action; one edge pair per true binary atom
// (forward and reversed, distinguished by a flag).
class GraphEncoder {
public:
    explicit GraphEncoder(const Env& env);

    int node_dim() const { return node_dim_; }
    int edge_dim() const { return edge_dim_; }

    // fail_objects == nullptr leaves labels empty (inference); otherwise every
    // node is labeled by membership in *fail_objects.
    Graph encode(const State& s, const AbstractState& abs, const std::vector<double>& action,
                 const std::vector<Object>* fail_objects) const;

private:
    std::vector<const ObjType*> types_;
    std::vector<const Predicate*> unary_, binary_;
    int max_attr_dim_ = 0, action_dim_ = 0, node_dim_ = 0, edge_dim_ = 0;
};

struct LearnedModel {
    std::vector<Nsrt> nsrts;
    GraphNet failure_net;
    bool has_failure_net = false;
};

// Wall-clock seconds spent in each stage of learn_model.
struct StageTimes {
    double abstraction_s = 0, partition_s = 0, symbolic_s = 0, heads_s = 0, failure_s = 0;
};

// Full pipeline: abstraction, partitioning, symbolic learning, neural heads,
// failure predictor (trained on all failure transitions plus an equal-sized
// subsample of non-failures, when any failures exist).
LearnedModel learn_model(const std::vector<Transition>& data, const Env& env,
                         const TrainConfig& cfg, std::uint64_t seed,
                         StageTimes* times = nullptr);

}  // namespace nsrtplan

#endif
