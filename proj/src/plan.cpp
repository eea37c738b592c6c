#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <memory>
#include <queue>
#include <set>
#include <stdexcept>

#include "nsrtplan/plan.hpp"

namespace nsrtplan {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kInf = std::numeric_limits<double>::infinity();

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<int> merge_sorted(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

struct GroundOp {
    GroundNsrt g;
    std::vector<int> pre, add, del;  // interned atom ids, each sorted
};

// Per-task planning state: atom interning, ground operator table with the
// synthetic NotCausesFailure bookkeeping, and the persisted precondition
// augmentations produced by failure propagation.
struct PlanningContext {
    const Env* env = nullptr;
    const LearnedModel* model = nullptr;

    std::vector<Predicate> ncf_preds;  // one per type; addresses stable
    std::map<const ObjType*, const Predicate*> ncf_of_type;
    std::map<const ObjType*, bool> achievable;  // some operator has a param of this type

    std::map<GroundAtom, int> atom_ids;
    std::vector<char> synthetic;

    std::vector<GroundOp> gops;
    std::vector<std::vector<int>> extra_pre;  // augmentations, sorted per op

    int intern(const GroundAtom& a, bool synth) {
        auto it = atom_ids.find(a);
        if (it != atom_ids.end()) return it->second;
        const int id = static_cast<int>(atom_ids.size());
        atom_ids.emplace(a, id);
        synthetic.push_back(synth ? 1 : 0);
        return id;
    }

    std::vector<int> intern_atoms(const std::vector<GroundAtom>& list, bool synth) {
        std::vector<int> out;
        out.reserve(list.size());
        for (const GroundAtom& a : list) out.push_back(intern(a, synth));
        std::sort(out.begin(), out.end());
        return out;
    }

    std::vector<int> intern_abstract(const AbstractState& abs) {
        return intern_atoms(abs.atoms(), false);
    }

    std::vector<int> strip_synthetic(const std::vector<int>& ids) const {
        std::vector<int> out;
        out.reserve(ids.size());
        for (int id : ids) {
            if (!synthetic[id]) out.push_back(id);
        }
        return out;
    }
};

PlanningContext build_context(const Env& env, const LearnedModel& model, const Task& task) {
    PlanningContext ctx;
    ctx.env = &env;
    ctx.model = &model;

    ctx.ncf_preds.reserve(env.types().size());
    for (const ObjType& t : env.types()) {
        ctx.ncf_preds.push_back(Predicate{"NotCausesFailure", {&t}, nullptr});
        ctx.ncf_of_type[&t] = &ctx.ncf_preds.back();
        ctx.achievable[&t] = false;
    }
    for (const Nsrt& op : model.nsrts) {
        for (const Variable& v : op.params) ctx.achievable[v.type] = true;
    }

    for (const Nsrt& op : model.nsrts) {
        for (GroundNsrt& gn : ground(op, task.init)) {
            GroundOp go;
            go.pre = ctx.intern_atoms(ground_preconditions(gn), false);
            go.add = ctx.intern_atoms(ground_add_effects(gn), false);
            go.del = ctx.intern_atoms(ground_del_effects(gn), false);
            std::vector<int> ncf;
            for (const Object& obj : gn.binding) {
                ncf.push_back(ctx.intern(GroundAtom{ctx.ncf_of_type.at(obj.type), {obj}}, true));
            }
            std::sort(ncf.begin(), ncf.end());
            go.add = merge_sorted(go.add, ncf);
            go.g = std::move(gn);
            ctx.gops.push_back(std::move(go));
        }
    }
    ctx.extra_pre.assign(ctx.gops.size(), {});
    return ctx;
}

bool subset_of(const std::vector<int>& sub, const std::vector<int>& super) {
    return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

// Resumable A* in the interned abstract space. Yields goal nodes in
// nondecreasing f order; ties broken by lower h, then push order.
class AStar {
public:
    AStar(PlanningContext& ctx, std::vector<int> s0, std::vector<int> goal, int horizon)
        : ctx_(ctx), goal_(std::move(goal)), horizon_(horizon) {
        relaxed_pre_.reserve(ctx_.gops.size());
        for (std::size_t i = 0; i < ctx_.gops.size(); ++i) {
            relaxed_pre_.push_back(merge_sorted(ctx_.gops[i].pre, ctx_.extra_pre[i]));
        }
        const double h0 = heuristic(s0);
        nodes_.push_back(Node{std::move(s0), -1, -1, 0});
        if (h0 < kInf) open_.push(QEntry{h0, h0, seq_++, 0});
    }

    // Returns a node index whose state satisfies the goal, or nullopt when
    // the open list empties or the deadline passes.
    std::optional<int> next_goal_node(Clock::time_point deadline, int* expansions) {
        while (!open_.empty()) {
            if (Clock::now() >= deadline) return std::nullopt;
            const QEntry top = open_.top();
            open_.pop();
            // Copy out of the arena: push_back below may reallocate nodes_.
            const std::vector<int> state = nodes_[top.node].state;
            const int g = nodes_[top.node].g + 1;
            if (closed_.count(state)) continue;
            closed_.insert(state);
            ++*expansions;
            if (subset_of(goal_, state)) return top.node;
            if (g > horizon_) continue;
            for (std::size_t gi = 0; gi < ctx_.gops.size(); ++gi) {
                const GroundOp& gop = ctx_.gops[gi];
                if (gop.add.empty() && gop.del.empty()) continue;
                if (!subset_of(relaxed_pre_[gi], state)) continue;
                std::vector<int> succ;
                std::set_difference(state.begin(), state.end(), gop.del.begin(),
                                    gop.del.end(), std::back_inserter(succ));
                succ = merge_sorted(succ, gop.add);
                if (succ == state || closed_.count(succ)) continue;
                const double h = heuristic(succ);
                if (h == kInf) continue;
                nodes_.push_back(Node{std::move(succ), top.node, static_cast<int>(gi), g});
                open_.push(QEntry{g + h, h, seq_++, static_cast<int>(nodes_.size()) - 1});
            }
        }
        return std::nullopt;
    }

    std::vector<int> plan_ops(int node) const {
        std::vector<int> ops;
        for (int at = node; nodes_[at].parent >= 0; at = nodes_[at].parent) {
            ops.push_back(nodes_[at].via);
        }
        std::reverse(ops.begin(), ops.end());
        return ops;
    }

    std::vector<const std::vector<int>*> plan_states(int node) const {
        std::vector<const std::vector<int>*> states;
        for (int at = node; at >= 0; at = nodes_[at].parent) states.push_back(&nodes_[at].state);
        std::reverse(states.begin(), states.end());
        return states;
    }

private:
    struct Node {
        std::vector<int> state;
        int parent;
        int via;  // ground op index used to reach this node
        int g;
    };
    struct QEntry {
        double f, h;
        long seq;
        int node;
        bool operator>(const QEntry& o) const {
            if (f != o.f) return f > o.f;
            if (h != o.h) return h > o.h;
            return seq > o.seq;
        }
    };

    double heuristic(const std::vector<int>& state) const {
        return h_add_value(relaxed_pre_, adds_view(), state, goal_);
    }

    const std::vector<std::vector<int>>& adds_view() const {
        if (adds_.empty() && !ctx_.gops.empty()) {
            adds_.reserve(ctx_.gops.size());
            for (const GroundOp& g : ctx_.gops) adds_.push_back(g.add);
        }
        return adds_;
    }

    PlanningContext& ctx_;
    std::vector<int> goal_;
    int horizon_;
    std::vector<std::vector<int>> relaxed_pre_;
    mutable std::vector<std::vector<int>> adds_;
    std::vector<Node> nodes_;
    std::priority_queue<QEntry, std::vector<QEntry>, std::greater<QEntry>> open_;
    std::set<std::vector<int>> closed_;
    long seq_ = 0;
};

void write_context(State& s, const GroundNsrt& g, const std::vector<double>& v) {
    std::size_t at = 0;
    for (const Object& obj : g.binding) {
        auto dst = s.attrs_mut(obj);
        for (double& x : dst) x = v[at++];
    }
}

// Draws an action for one refinement step. Returns nullopt only for the
// learned-sampler flavor (classifier rejected every draw).
std::optional<std::vector<double>> draw_refinement_action(const PlanningContext& ctx,
                                                          const GroundOp& gop, const State& im,
                                                          const std::vector<double>& v,
                                                          const PlannerConfig& cfg, Rng& rng,
                                                          bool use_prior) {
    if (!use_prior) return sample_action(*gop.g.op, v, rng, cfg.sampler_tries, cfg.clip_std);
    for (int t = 0; t < cfg.prior_tries; ++t) {
        std::vector<double> a = ctx.env->sample_prior(im, rng);
        if (applicability_prob(*gop.g.op, v, a) > 0.5) return a;
    }
    return ctx.env->sample_prior(im, rng);  // give up and take a raw prior draw
}

std::vector<Object> predicted_failure_objects(const PlanningContext& ctx,
                                              const GraphEncoder& enc, const State& im,
                                              const std::vector<double>& action,
                                              double threshold) {
    std::vector<Object> out;
    if (!ctx.model->has_failure_net) return out;
    const Graph g = enc.encode(im, ctx.env->abstract(im), action, nullptr);
    const std::vector<double> logits = ctx.model->failure_net.forward(g);
    for (int i = 0; i < g.n_nodes; ++i) {
        if (1.0 / (1.0 + std::exp(-logits[i])) > threshold) out.push_back(im.objects()[i]);
    }
    return out;
}

enum class RefineStatus { success, deviated, sampler_failed, predicted_failure, out_of_time };

struct RefineOutcome {
    RefineStatus status = RefineStatus::deviated;
    std::vector<std::vector<double>> actions;
    int fail_step = -1;
    std::vector<Object> fail_objects;
};

RefineOutcome refine(PlanningContext& ctx, const std::vector<int>& plan,
                     const std::vector<const std::vector<int>*>& expected, const Task& task,
                     const PlannerConfig& cfg, Rng& rng, const GraphEncoder& enc,
                     bool use_prior, Clock::time_point deadline) {
    RefineOutcome out;
    State im = task.init;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        if (Clock::now() >= deadline) {
            out.status = RefineStatus::out_of_time;
            return out;
        }
        const GroundOp& gop = ctx.gops[plan[i]];
        const std::vector<double> v = context_vector(gop.g, im);
        std::optional<std::vector<double>> action;
        std::vector<Object> failing;
        for (int attempt = 0; attempt < std::max(1, cfg.failure_redraws); ++attempt) {
            action = draw_refinement_action(ctx, gop, im, v, cfg, rng, use_prior);
            if (!action) {
                if (std::getenv("NPL_DEBUG_REFINE")) {
                    std::fprintf(stderr, "[sampler_failed] %s ctx:", gop.g.str().c_str());
                    for (double x : v) std::fprintf(stderr, " %.3f", x);
                    std::fprintf(stderr, "\n");
                }
                out.status = RefineStatus::sampler_failed;
                out.fail_step = static_cast<int>(i);
                return out;
            }
            failing = predicted_failure_objects(ctx, enc, im, *action, cfg.failure_threshold);
            if (failing.empty()) break;
        }
        if (!failing.empty()) {
            out.status = RefineStatus::predicted_failure;
            out.fail_step = static_cast<int>(i);
            out.fail_objects = std::move(failing);
            return out;
        }
        write_context(im, gop.g, predict_next_context(*gop.g.op, v, *action));
        out.actions.push_back(std::move(*action));
        const std::vector<int> im_ids = ctx.intern_abstract(ctx.env->abstract(im));
        if (im_ids != ctx.strip_synthetic(*expected[i + 1])) {
            out.status = RefineStatus::deviated;
            out.fail_step = static_cast<int>(i);
            return out;
        }
    }
    out.status = RefineStatus::success;
    return out;
}

std::vector<std::string> op_names(const PlanningContext& ctx, const std::vector<int>& plan) {
    std::vector<std::string> names;
    names.reserve(plan.size());
    for (int gi : plan) names.push_back(ctx.gops[gi].g.str());
    return names;
}

// Advances an imagined state with a ground op's neural transition head after
// drawing an action; shared by the shooting and hill-climbing baselines.
void imagine_step(const PlanningContext& ctx, const GroundOp& gop, State& im,
                  const std::vector<double>& action) {
    const std::vector<double> v = context_vector(gop.g, im);
    write_context(im, gop.g, predict_next_context(*gop.g.op, v, action));
    (void)ctx;
}

}  // namespace

Method parse_method(const std::string& name) {
    if (name == "ours") return Method::ours;
    if (name == "b1") return Method::b1;
    if (name == "b2") return Method::b2;
    if (name == "b3") return Method::b3;
    if (name == "b5") return Method::b5;
    if (name == "b6") return Method::b6;
    if (name == "b7") return Method::b7;
    throw std::invalid_argument("unknown method: " + name);
}

const char* method_name(Method m) {
    switch (m) {
        case Method::ours: return "ours";
        case Method::b1: return "b1";
        case Method::b2: return "b2";
        case Method::b3: return "b3";
        case Method::b5: return "b5";
        case Method::b6: return "b6";
        case Method::b7: return "b7";
    }
    return "?";
}

double h_add_value(const std::vector<std::vector<int>>& pre,
                   const std::vector<std::vector<int>>& add, const std::vector<int>& state,
                   const std::vector<int>& goal) {
    int n_atoms = 0;
    auto bump = [&n_atoms](const std::vector<int>& ids) {
        for (int id : ids) n_atoms = std::max(n_atoms, id + 1);
    };
    for (const auto& ids : pre) bump(ids);
    for (const auto& ids : add) bump(ids);
    bump(state);
    bump(goal);

    std::vector<double> cost(n_atoms, kInf);
    for (int id : state) cost[id] = 0.0;

    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < pre.size(); ++i) {
            double c = 1.0;
            for (int id : pre[i]) {
                c += cost[id];
                if (c == kInf) break;
            }
            if (c == kInf) continue;
            for (int id : add[i]) {
                if (c < cost[id]) {
                    cost[id] = c;
                    changed = true;
                }
            }
        }
    }

    double total = 0.0;
    for (int id : goal) {
        if (cost[id] == kInf) return kInf;
        total += cost[id];
    }
    return total;
}

PlanResult plan_bilevel(const Env& env, const LearnedModel& model, const Task& task,
                        const PlannerConfig& cfg, Rng& rng, bool use_prior_sampler) {
    const auto t0 = Clock::now();
    const auto deadline = t0 + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(cfg.timeout_s));
    PlanResult res;
    PlanningContext ctx = build_context(env, model, task);
    const GraphEncoder enc(env);

    const std::vector<int> s0 = ctx.intern_abstract(env.abstract(task.init));
    std::vector<int> goal;
    for (const GroundAtom& a : task.goal) goal.push_back(ctx.intern(a, false));
    std::sort(goal.begin(), goal.end());

    auto search = std::make_unique<AStar>(ctx, s0, goal, task.horizon);
    while (Clock::now() < deadline) {
        const auto node = search->next_goal_node(deadline, &res.expansions);
        if (!node) {
            // Augmented preconditions can over-constrain a solvable task when
            // a predicted failure was spurious. Drop them and search again;
            // genuine failures will re-flag and rebuild their augmentations.
            const bool augmented = std::any_of(ctx.extra_pre.begin(), ctx.extra_pre.end(),
                                               [](const std::vector<int>& v) { return !v.empty(); });
            if (!augmented || Clock::now() >= deadline) break;
            ctx.extra_pre.assign(ctx.gops.size(), {});
            search = std::make_unique<AStar>(ctx, s0, goal, task.horizon);
            ++res.resets;
            continue;
        }
        const std::vector<int> plan = search->plan_ops(*node);
        const auto expected = search->plan_states(*node);
        ++res.plans_tried;

        bool restart = false;
        for (int trial = 0; trial < cfg.n_trials && !restart; ++trial) {
            RefineOutcome out =
                refine(ctx, plan, expected, task, cfg, rng, enc, use_prior_sampler, deadline);
            if (out.status == RefineStatus::predicted_failure) ++res.flagged;
            if (out.status == RefineStatus::deviated) ++res.deviated;
            if (out.status == RefineStatus::success) {
                res.found = true;
                res.actions = std::move(out.actions);
                res.symbolic_steps = op_names(ctx, plan);
                res.wall_s = seconds_since(t0);
                return res;
            }
            if (out.status == RefineStatus::out_of_time) {
                res.wall_s = seconds_since(t0);
                return res;
            }
            if (out.status == RefineStatus::predicted_failure) {
                // Augment only with objects foreign to the failing operator:
                // its own parameters receive NotCausesFailure from the very
                // action being gated, so requiring them first forces no-op
                // detours (and, for the sole producer, unreachability).
                const auto& binding = ctx.gops[plan[out.fail_step]].g.binding;
                std::vector<int> ncf;
                for (const Object& obj : out.fail_objects) {
                    if (!ctx.achievable.at(obj.type)) continue;
                    if (std::find(binding.begin(), binding.end(), obj) != binding.end()) continue;
                    ncf.push_back(
                        ctx.intern(GroundAtom{ctx.ncf_of_type.at(obj.type), {obj}}, true));
                }
                if (ncf.empty()) continue;  // nothing augmentable; try the next plan
                std::sort(ncf.begin(), ncf.end());
                auto& extra = ctx.extra_pre[plan[out.fail_step]];
                const std::vector<int> merged = merge_sorted(extra, ncf);
                if (merged != extra) {
                    extra = merged;
                    ++res.augmentations;
                }
                restart = true;  // replan from the initial state with augmentations
            }
        }
        if (restart) search = std::make_unique<AStar>(ctx, s0, goal, task.horizon);
    }
    res.wall_s = seconds_since(t0);
    return res;
}

std::optional<std::vector<std::string>> first_symbolic_plan(const Env& env,
                                                            const LearnedModel& model,
                                                            const Task& task, double timeout_s) {
    PlanningContext ctx = build_context(env, model, task);
    const std::vector<int> s0 = ctx.intern_abstract(env.abstract(task.init));
    std::vector<int> goal;
    for (const GroundAtom& a : task.goal) goal.push_back(ctx.intern(a, false));
    std::sort(goal.begin(), goal.end());

    const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                             std::chrono::duration<double>(timeout_s));
    AStar search(ctx, s0, goal, task.horizon);
    int expansions = 0;
    const auto node = search.next_goal_node(deadline, &expansions);
    if (!node) return std::nullopt;
    return op_names(ctx, search.plan_ops(*node));
}

namespace {

PlanResult plan_shooting(const Env& env, const LearnedModel& model, const Task& task,
                         const PlannerConfig& cfg, Rng& rng, bool use_prior) {
    const auto t0 = Clock::now();
    const auto deadline = t0 + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(cfg.timeout_s));
    PlanResult res;
    PlanningContext ctx = build_context(env, model, task);
    if (ctx.gops.empty()) {
        res.wall_s = seconds_since(t0);
        return res;
    }

    for (int iter = 0; iter < cfg.shooting_iters && Clock::now() < deadline; ++iter) {
        State im = task.init;
        std::vector<std::vector<double>> actions;
        std::vector<std::string> steps;
        bool aborted = false;
        for (int t = 0; t < task.horizon; ++t) {
            const GroundOp& gop = ctx.gops[rng.index(ctx.gops.size())];
            const std::vector<double> v = context_vector(gop.g, im);
            std::vector<double> a;
            if (use_prior) {
                auto drawn = draw_refinement_action(ctx, gop, im, v, cfg, rng, true);
                a = std::move(*drawn);  // prior flavor always returns an action
            } else {
                auto drawn = sample_action(*gop.g.op, v, rng, cfg.sampler_tries, cfg.clip_std);
                if (!drawn) {
                    aborted = true;
                    break;
                }
                a = std::move(*drawn);
            }
            write_context(im, gop.g, predict_next_context(*gop.g.op, v, a));
            actions.push_back(std::move(a));
            steps.push_back(gop.g.str());
        }
        if (!aborted && goal_holds(im, task.goal)) {
            res.found = true;
            res.actions = std::move(actions);
            res.symbolic_steps = std::move(steps);
            break;
        }
    }
    res.wall_s = seconds_since(t0);
    return res;
}

PlanResult plan_hillclimb(const Env& env, const LearnedModel& model, const Task& task,
                          const PlannerConfig& cfg, Rng& rng) {
    const auto t0 = Clock::now();
    const auto deadline = t0 + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(cfg.timeout_s));
    PlanResult res;
    PlanningContext ctx = build_context(env, model, task);
    if (ctx.gops.empty()) {
        res.wall_s = seconds_since(t0);
        return res;
    }

    auto draw_step = [&](std::pair<int, std::vector<double>>& step) {
        const int gi = rng.index(ctx.gops.size());
        const GroundOp& gop = ctx.gops[gi];
        // Sampler input is the initial-state context; actions are re-imagined
        // during scoring, so this is only a proposal distribution.
        const std::vector<double> v = context_vector(gop.g, task.init);
        auto a = sample_action(*gop.g.op, v, rng, cfg.sampler_tries, cfg.clip_std);
        step = {gi, a ? std::move(*a) : sample_action_raw(*gop.g.op, v, rng, cfg.clip_std)};
    };

    auto score = [&](const std::vector<std::pair<int, std::vector<double>>>& plan) {
        State im = task.init;
        for (const auto& [gi, a] : plan) imagine_step(ctx, ctx.gops[gi], im, a);
        int satisfied = 0;
        for (const GroundAtom& atom : task.goal) {
            std::span<const Object> args(atom.args.data(), atom.args.size());
            if (atom.pred->eval && atom.pred->eval(im, args)) ++satisfied;
        }
        return satisfied;
    };

    std::vector<std::pair<int, std::vector<double>>> plan(task.horizon);
    for (auto& step : plan) draw_step(step);
    int best = score(plan);
    const int want = static_cast<int>(task.goal.size());

    while (best < want && Clock::now() < deadline) {
        auto cand = plan;
        draw_step(cand[rng.index(cand.size())]);
        const int s = score(cand);
        if (s > best) {  // strict improvement only
            best = s;
            plan = std::move(cand);
        }
    }
    if (best >= want) {
        res.found = true;
        for (auto& [gi, a] : plan) {
            res.symbolic_steps.push_back(ctx.gops[gi].g.str());
            res.actions.push_back(std::move(a));
        }
    }
    res.wall_s = seconds_since(t0);
    return res;
}

// Executes an action sequence open-loop under the episode protocol.
void execute_plan(const Env& env, const Task& task, const std::vector<std::vector<double>>& plan,
                  EpisodeResult& er) {
    State s = task.init;
    for (const auto& a : plan) {
        if (er.executed >= task.horizon) break;
        StepResult r = env.step(s, a);
        ++er.executed;
        if (r.failure) return;
        s = std::move(r.next);
        if (goal_holds(s, task.goal)) {
            er.solved = true;
            return;
        }
    }
    er.solved = goal_holds(s, task.goal);
}

EpisodeResult run_b1(const Env& env, const LearnedModel& model, const Task& task,
                     const PlannerConfig& cfg, Rng& rng) {
    EpisodeResult er;
    const auto t0 = Clock::now();
    const auto deadline = t0 + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(cfg.timeout_s));
    PlanningContext ctx = build_context(env, model, task);
    const std::vector<int> s0 = ctx.intern_abstract(env.abstract(task.init));
    std::vector<int> goal;
    for (const GroundAtom& a : task.goal) goal.push_back(ctx.intern(a, false));
    std::sort(goal.begin(), goal.end());

    AStar search(ctx, s0, goal, task.horizon);
    int expansions = 0;
    const auto node = search.next_goal_node(deadline, &expansions);
    er.plan_wall_s = seconds_since(t0);
    if (!node) return er;
    const std::vector<int> plan = search.plan_ops(*node);
    er.plan_len = static_cast<int>(plan.size());

    // Execute immediately, sampling each action on the real current state.
    State s = task.init;
    for (int gi : plan) {
        if (er.executed >= task.horizon) break;
        const GroundOp& gop = ctx.gops[gi];
        const std::vector<double> v = context_vector(gop.g, s);
        auto a = sample_action(*gop.g.op, v, rng, cfg.sampler_tries, cfg.clip_std);
        const std::vector<double> act =
            a ? std::move(*a) : sample_action_raw(*gop.g.op, v, rng, cfg.clip_std);
        StepResult r = env.step(s, act);
        ++er.executed;
        if (r.failure) return er;
        s = std::move(r.next);
        if (goal_holds(s, task.goal)) {
            er.solved = true;
            return er;
        }
    }
    er.solved = goal_holds(s, task.goal);
    return er;
}

EpisodeResult run_b5(const Env& env, const Task& task, Rng& rng) {
    EpisodeResult er;
    State s = task.init;
    for (int t = 0; t < task.horizon; ++t) {
        const std::vector<double> a = env.sample_prior(s, rng);
        StepResult r = env.step(s, a);
        ++er.executed;
        if (r.failure) return er;
        s = std::move(r.next);
        if (goal_holds(s, task.goal)) {
            er.solved = true;
            er.plan_len = er.executed;
            return er;
        }
    }
    return er;
}

}  // namespace

EpisodeResult run_episode(const Env& env, const LearnedModel* model, const Task& task,
                          Method method, const PlannerConfig& cfg, Rng& rng) {
    if (method == Method::b5) return run_b5(env, task, rng);
    if (model == nullptr) throw std::invalid_argument("method requires a learned model");
    if (method == Method::b1) return run_b1(env, *model, task, cfg, rng);

    PlanResult pr;
    switch (method) {
        case Method::ours: pr = plan_bilevel(env, *model, task, cfg, rng, false); break;
        case Method::b6: pr = plan_bilevel(env, *model, task, cfg, rng, true); break;
        case Method::b2: pr = plan_shooting(env, *model, task, cfg, rng, false); break;
        case Method::b7: pr = plan_shooting(env, *model, task, cfg, rng, true); break;
        case Method::b3: pr = plan_hillclimb(env, *model, task, cfg, rng); break;
        default: throw std::logic_error("unhandled method");
    }
    EpisodeResult er;
    er.plan_wall_s = pr.wall_s;
    er.plan_len = static_cast<int>(pr.actions.size());
    if (pr.found) execute_plan(env, task, pr.actions, er);
    return er;
}

}  // namespace nsrtplan
