#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <set>

#include "doctest.h"
#include "nsrtplan/learn.hpp"

using namespace nsrtplan;

namespace {

const ObjType obj{"obj", 1};
const Predicate On{"On", {&obj, &obj}, nullptr};
const Predicate Holding{"Holding", {&obj}, nullptr};
const Predicate IsWet{"IsWet", {&obj}, nullptr};
const Predicate IsDry{"IsDry", {&obj}, nullptr};

Object O(const char* name) { return Object{name, &obj}; }

GroundAtom on(const char* x, const char* y) { return GroundAtom{&On, {O(x), O(y)}}; }
GroundAtom holding(const char* x) { return GroundAtom{&Holding, {O(x)}}; }

}  // namespace

TEST_CASE("four pick-and-place transitions learn two generalized operators") {
    // Two picks from a surface and two put-downs with varying extra context;
    // lifting must merge each pair and intersect away the irrelevant atoms.
    std::vector<AbstractState> abs_s = {
        AbstractState{{on("a", "b")}},
        AbstractState{{on("c", "d")}},
        AbstractState{{holding("e"), GroundAtom{&IsWet, {O("e")}}}},
        AbstractState{{holding("f"), GroundAtom{&IsDry, {O("f")}}}},
    };
    std::vector<AbstractState> abs_next = {
        AbstractState{{holding("a")}},
        AbstractState{{holding("c")}},
        AbstractState{{GroundAtom{&IsWet, {O("e")}}}},
        AbstractState{{GroundAtom{&IsDry, {O("f")}}}},
    };
    const std::vector<Transition> data(4);

    const auto parts = partition_transitions(data, abs_s, abs_next);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].members == std::vector<int>{0, 1});
    CHECK(parts[1].members == std::vector<int>{2, 3});
    CHECK(parts[0].rep_to_member[1].at(O("a")) == O("c"));
    CHECK(parts[0].rep_to_member[1].at(O("b")) == O("d"));

    VariableNamer namer;
    const Nsrt pick = learn_symbolic(parts[0], abs_s, namer, "Op0", 2);
    const Nsrt put = learn_symbolic(parts[1], abs_s, namer, "Op1", 2);

    REQUIRE(pick.params.size() == 2);
    CHECK(pick.params[0].name == "?x");
    CHECK(pick.params[1].name == "?y");
    REQUIRE(pick.preconditions.size() == 1);
    CHECK(pick.preconditions[0].str() == "On(?x,?y)");
    REQUIRE(pick.add_effects.size() == 1);
    CHECK(pick.add_effects[0].str() == "Holding(?x)");
    REQUIRE(pick.del_effects.size() == 1);
    CHECK(pick.del_effects[0].str() == "On(?x,?y)");

    // The namer is shared across operators, so the second starts at ?z.
    REQUIRE(put.params.size() == 1);
    CHECK(put.params[0].name == "?z");
    REQUIRE(put.preconditions.size() == 1);
    CHECK(put.preconditions[0].str() == "Holding(?z)");  // wet/dry intersected away
    CHECK(put.add_effects.empty());
    REQUIRE(put.del_effects.size() == 1);
    CHECK(put.del_effects[0].str() == "Holding(?z)");

    const auto bindings = member_bindings(parts[0]);
    REQUIRE(bindings.size() == 2);
    CHECK(bindings[0] == std::vector<Object>{O("a"), O("b")});
    CHECK(bindings[1] == std::vector<Object>{O("c"), O("d")});
}

TEST_CASE("effect deltas, projections, and the shared variable namer") {
    const AbstractState before{{on("a", "b"), holding("c")}};
    const AbstractState after{{on("a", "b"), on("c", "a")}};
    const EffectPair eff = effect_delta(before, after);
    CHECK(eff.add == AbstractState{{on("c", "a")}});
    CHECK(eff.del == AbstractState{{holding("c")}});
    CHECK(effect_objects(eff) == std::vector<Object>{O("c"), O("a")});

    const auto proj = project_atoms(before, {O("a"), O("b")});
    CHECK(proj == std::vector<GroundAtom>{on("a", "b")});
    CHECK(project_atoms(before, {}).empty());

    VariableNamer namer;
    std::vector<std::string> names;
    for (int i = 0; i < 8; ++i) names.push_back(namer.fresh(&obj).name);
    CHECK(names == std::vector<std::string>{"?x", "?y", "?z", "?x2", "?y2", "?z2", "?x3", "?y3"});
}

TEST_CASE("partitioning is an equivalence grouping up to object renaming") {
    // Three structurally different effect templates plus no-ops, instantiated
    // with fresh object names; failures are interleaved and must be skipped.
    Rng rng(11);
    std::vector<Transition> data;
    std::vector<AbstractState> abs_s, abs_next;
    int fresh = 0;
    auto next_obj = [&] { return O(("g" + std::to_string(fresh++)).c_str()); };

    for (int i = 0; i < 1000; ++i) {
        Transition t;
        const Object p = next_obj(), q = next_obj(), ctx = next_obj();
        std::vector<GroundAtom> before{GroundAtom{&IsWet, {ctx}}};
        std::vector<GroundAtom> after = before;
        switch (rng.index(5)) {
            case 0:
                after.push_back(holding(p.name.c_str()));
                break;
            case 1:
                before.push_back(on(p.name.c_str(), q.name.c_str()));
                after.push_back(holding(p.name.c_str()));
                break;
            case 2:
                before.push_back(holding(p.name.c_str()));
                break;
            case 3:
                break;  // no-op delta
            default:
                t.failure = true;
                break;
        }
        data.push_back(t);
        abs_s.push_back(AbstractState{before});
        abs_next.push_back(AbstractState{after});
    }

    const auto parts = partition_transitions(data, abs_s, abs_next);
    REQUIRE(parts.size() == 4);

    std::set<int> seen;
    for (const Partition& p : parts) {
        REQUIRE(p.members.size() == p.rep_to_member.size());
        for (std::size_t j = 0; j < p.members.size(); ++j) {
            const int i = p.members[j];
            CHECK_FALSE(data[i].failure);
            CHECK(seen.insert(i).second);
            // The stored map rewrites the representative's effects into the
            // member's observed delta.
            const EffectPair eff = effect_delta(abs_s[i], abs_next[i]);
            const auto& m = p.rep_to_member[j];
            CHECK(AbstractState{rename_objects(p.effects.add.atoms(), m)} == eff.add);
            CHECK(AbstractState{rename_objects(p.effects.del.atoms(), m)} == eff.del);
        }
    }
    int n_failures = 0;
    for (const Transition& t : data) n_failures += t.failure ? 1 : 0;
    CHECK(static_cast<int>(seen.size()) + n_failures == 1000);

    for (std::size_t i = 0; i < parts.size(); ++i) {
        for (std::size_t j = i + 1; j < parts.size(); ++j) {
            CHECK_FALSE(unify_effects(parts[i].effects, parts[j].effects).has_value());
        }
    }
}

TEST_CASE("every collected transition is covered by exactly one grounding") {
    auto env = make_env("pickplace1d");
    Rng rng(7);
    std::vector<Transition> data;
    for (int ep = 0; ep < 12; ++ep) {
        const Task task = env->generate_task(TaskSplit::train, rng);
        State s = task.init;
        for (int t = 0; t < task.horizon; ++t) {
            const auto action = env->sample_prior(s, rng);
            const StepResult r = env->step(s, action);
            data.push_back(Transition{s, action, r.next, r.failure, r.failure_objects});
            if (r.failure) break;
            s = r.next;
        }
    }

    const auto abs_s = abstract_states(data, *env, false);
    const auto abs_next = abstract_states(data, *env, true);
    const auto parts = partition_transitions(data, abs_s, abs_next);
    REQUIRE(parts.size() >= 2);

    VariableNamer namer;
    std::vector<Nsrt> ops;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        ops.push_back(learn_symbolic(parts[k], abs_s, namer, "Op" + std::to_string(k),
                                     env->action_dim()));
    }

    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].failure) continue;
        int covering = 0;
        for (const Nsrt& op : ops) {
            for (const GroundNsrt& g : ground(op, data[i].s)) {
                if (!covers(g, abs_s[i], abs_next[i])) continue;
                ++covering;
                // Consistency: the symbolic successor of a covering grounding
                // is the observed next abstraction.
                CHECK(abstract_step(g, abs_s[i]) == abs_next[i]);
            }
        }
        CHECK(covering == 1);
    }
}

TEST_CASE("the full pipeline trains heads only where they make sense") {
    auto env = make_env("blocks");
    Rng rng(3);
    std::vector<Transition> data;
    for (int ep = 0; ep < 6; ++ep) {
        const Task task = env->generate_task(TaskSplit::train, rng);
        State s = task.init;
        for (int t = 0; t < task.horizon; ++t) {
            const auto action = env->sample_prior(s, rng);
            const StepResult r = env->step(s, action);
            data.push_back(Transition{s, action, r.next, r.failure, r.failure_objects});
            if (r.failure) break;
            s = r.next;
        }
    }

    TrainConfig cfg;
    cfg.epoch_scale = 1000;  // keep the smoke test quick
    cfg.gnn_epochs = 5;
    StageTimes times;
    const LearnedModel model = learn_model(data, *env, cfg, 99, &times);

    REQUIRE_FALSE(model.nsrts.empty());
    std::set<std::string> names;
    int n_failures = 0;
    for (const Transition& t : data) n_failures += t.failure ? 1 : 0;
    CHECK(model.has_failure_net == (n_failures >= 20));
    for (const Nsrt& op : model.nsrts) {
        CHECK(names.insert(op.name).second);
        if (op.params.empty()) {
            CHECK(op.sampler.dims().empty());
            CHECK(op.classifier.dims().empty());
        } else {
            CHECK_FALSE(op.sampler.dims().empty());
            CHECK_FALSE(op.classifier.dims().empty());
            CHECK(op.sampler.in_dim() == op.context_dim());
            CHECK(op.classifier.in_dim() == op.context_dim() + env->action_dim());
        }
    }
    CHECK(times.abstraction_s >= 0.0);
    CHECK(times.heads_s > 0.0);

    // Same data, same seed: the learned operators are bit-identical.
    const LearnedModel again = learn_model(data, *env, cfg, 99);
    REQUIRE(again.nsrts.size() == model.nsrts.size());
    for (std::size_t k = 0; k < model.nsrts.size(); ++k) {
        CHECK(model.nsrts[k].str() == again.nsrts[k].str());
        CHECK(model.nsrts[k].sampler.theta() == again.nsrts[k].sampler.theta());
        CHECK(model.nsrts[k].transition.theta() == again.nsrts[k].transition.theta());
    }
}
