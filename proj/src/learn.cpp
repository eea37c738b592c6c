#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "nsrtplan/learn.hpp"

namespace nsrtplan {

EffectPair effect_delta(const AbstractState& abs_s, const AbstractState& abs_next) {
    return EffectPair{abs_next.set_minus(abs_s), abs_s.set_minus(abs_next)};
}

std::vector<AbstractState> abstract_states(const std::vector<Transition>& data, const Env& env,
                                           bool next_state) {
    std::vector<AbstractState> out;
    out.reserve(data.size());
    for (const Transition& t : data) out.push_back(env.abstract(next_state ? t.next : t.s));
    return out;
}

std::vector<Object> effect_objects(const EffectPair& eff) {
    std::vector<GroundAtom> atoms = eff.add.atoms();
    atoms.insert(atoms.end(), eff.del.atoms().begin(), eff.del.atoms().end());
    return atom_objects(atoms);
}

std::vector<Partition> partition_transitions(const std::vector<Transition>& data,
                                             const std::vector<AbstractState>& abs_s,
                                             const std::vector<AbstractState>& abs_next) {
    std::vector<Partition> parts;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].failure) continue;
        EffectPair eff = effect_delta(abs_s[i], abs_next[i]);
        bool placed = false;
        for (Partition& p : parts) {
            if (auto m = unify_effects(p.effects, eff)) {
                p.members.push_back(static_cast<int>(i));
                p.rep_to_member.push_back(*m);
                placed = true;
                break;
            }
        }
        if (!placed) {
            Partition np;
            np.effects = eff;
            np.members = {static_cast<int>(i)};
            ObjectMap ident;
            for (const Object& o : effect_objects(eff)) ident[o] = o;
            np.rep_to_member = {ident};
            parts.push_back(std::move(np));
        }
    }
    return parts;
}

std::vector<GroundAtom> project_atoms(const AbstractState& abs, const std::vector<Object>& keep) {
    std::vector<GroundAtom> out;
    for (const GroundAtom& a : abs.atoms()) {
        const bool ok = std::all_of(a.args.begin(), a.args.end(), [&](const Object& o) {
            return std::find(keep.begin(), keep.end(), o) != keep.end();
        });
        if (ok) out.push_back(a);
    }
    return out;
}

Variable VariableNamer::fresh(const ObjType* t) {
    static const char letters[3] = {'x', 'y', 'z'};
    const int cycle = count_ / 3 + 1;
    std::string name = "?";
    name += letters[count_ % 3];
    if (cycle > 1) name += std::to_string(cycle);
    ++count_;
    return Variable{name, t};
}

Nsrt learn_symbolic(const Partition& p, const std::vector<AbstractState>& abs_s,
                    VariableNamer& namer, const std::string& name, int action_dim) {
    if (p.members.empty()) throw std::invalid_argument("empty partition");
    Nsrt op;
    op.name = name;
    op.action_dim = action_dim;

    const std::vector<Object> rep_objs = effect_objects(p.effects);
    std::map<Object, Variable> var_of;
    for (const Object& o : rep_objs) {
        Variable v = namer.fresh(o.type);
        op.params.push_back(v);
        var_of[o] = v;
    }

    op.add_effects = lift_atoms(p.effects.add.atoms(), var_of);
    op.del_effects = lift_atoms(p.effects.del.atoms(), var_of);
    std::sort(op.add_effects.begin(), op.add_effects.end());
    std::sort(op.del_effects.begin(), op.del_effects.end());

    std::vector<LiftedAtom> pre;
    for (std::size_t j = 0; j < p.members.size(); ++j) {
        const ObjectMap& m = p.rep_to_member[j];
        std::vector<Object> keep;
        std::map<Object, Variable> inv;
        for (const Object& o : rep_objs) {
            const Object& mo = m.at(o);
            keep.push_back(mo);
            inv[mo] = var_of[o];
        }
        std::vector<LiftedAtom> lifted =
            lift_atoms(project_atoms(abs_s[p.members[j]], keep), inv);
        std::sort(lifted.begin(), lifted.end());
        if (j == 0) {
            pre = std::move(lifted);
        } else {
            std::vector<LiftedAtom> kept;
            std::set_intersection(pre.begin(), pre.end(), lifted.begin(), lifted.end(),
                                  std::back_inserter(kept));
            pre = std::move(kept);
        }
    }
    op.preconditions = std::move(pre);
    return op;
}

std::vector<std::vector<Object>> member_bindings(const Partition& p) {
    const std::vector<Object> rep_objs = effect_objects(p.effects);
    std::vector<std::vector<Object>> out;
    out.reserve(p.members.size());
    for (const ObjectMap& m : p.rep_to_member) {
        std::vector<Object> b;
        b.reserve(rep_objs.size());
        for (const Object& o : rep_objs) b.push_back(m.at(o));
        out.push_back(std::move(b));
    }
    return out;
}

namespace {

std::optional<std::vector<Object>> random_binding(const std::vector<Variable>& params,
                                                  const State& s, Rng& rng) {
    std::vector<Object> out;
    for (const Variable& v : params) {
        std::vector<Object> pool = s.objects_of_type(v.type);
        std::erase_if(pool, [&](const Object& o) {
            return std::find(out.begin(), out.end(), o) != out.end();
        });
        if (pool.empty()) return std::nullopt;
        out.push_back(pool[rng.index(pool.size())]);
    }
    return out;
}

void fit_mlp(Mlp& net, const std::vector<double>& X, int n, int epochs, double lr,
             const std::function<double(const std::vector<double>&, std::vector<double>&)>& loss,
             const char* what) {
    Adam opt(lr);
    Mlp::Tape tape;
    std::vector<double> dLdY;
    for (int e = 0; e < epochs; ++e) {
        net.zero_grad();
        net.forward(X.data(), n, tape);
        const double value = loss(tape.acts.back(), dLdY);
        if (!std::isfinite(value)) {
            throw std::runtime_error(std::string("training diverged (") + what + ")");
        }
        net.backward(tape, dLdY);
        opt.step(net.params());
    }
}

int scaled(int epochs, int scale) { return std::max(1, epochs / std::max(1, scale)); }

}  // namespace

void train_nsrt_heads(Nsrt& op, const Partition& p, const std::vector<Transition>& data,
                      const std::vector<Partition>& all_partitions, const TrainConfig& cfg,
                      Rng& rng) {
    if (op.params.empty()) return;  // the no-effect class has nothing to model

    const auto bindings = member_bindings(p);
    const int n = static_cast<int>(p.members.size());
    const int cd = op.context_dim();
    const int ad = op.action_dim;

    std::vector<std::vector<double>> ctx(n), nxt(n);
    for (int j = 0; j < n; ++j) {
        const Transition& tr = data[p.members[j]];
        GroundNsrt g{&op, bindings[j]};
        ctx[j] = context_vector(g, tr.s);
        nxt[j] = context_vector(g, tr.next);
    }

    for (int slot = 0; slot < cd; ++slot) {
        for (int j = 0; j < n; ++j) {
            if (std::abs(nxt[j][slot] - ctx[j][slot]) > cfg.change_tolerance) {
                op.changed_slots.push_back(slot);
                break;
            }
        }
    }

    if (!op.changed_slots.empty()) {
        const int k = static_cast<int>(op.changed_slots.size());
        std::vector<double> X, T;
        X.reserve(static_cast<std::size_t>(n) * (cd + ad));
        T.reserve(static_cast<std::size_t>(n) * k);
        for (int j = 0; j < n; ++j) {
            X.insert(X.end(), ctx[j].begin(), ctx[j].end());
            const auto& a = data[p.members[j]].action;
            X.insert(X.end(), a.begin(), a.end());
            for (int slot : op.changed_slots) T.push_back(nxt[j][slot]);
        }
        op.trans_in = Standardizer::fit(X, n, cd + ad);
        op.trans_in.apply(X);
        op.trans_out = Standardizer::fit(T, n, k);
        op.trans_out.apply(T);
        op.transition = Mlp({cd + ad, cfg.hidden, cfg.hidden, k}, rng);
        fit_mlp(op.transition, X, n, scaled(cfg.transition_epochs, cfg.epoch_scale), cfg.lr,
                [&](const std::vector<double>& Y, std::vector<double>& dLdY) {
                    return mse_loss(Y, T, n, k, dLdY);
                },
                op.name.c_str());
    }

    {
        std::vector<double> X, A;
        for (int j = 0; j < n; ++j) {
            X.insert(X.end(), ctx[j].begin(), ctx[j].end());
            const auto& a = data[p.members[j]].action;
            A.insert(A.end(), a.begin(), a.end());
        }
        op.samp_in = Standardizer::fit(X, n, cd);
        op.samp_in.apply(X);
        op.samp_act = Standardizer::fit(A, n, ad);
        op.samp_act.apply(A);
        op.sampler = Mlp({cd, cfg.hidden, cfg.hidden, 2 * ad}, rng);
        fit_mlp(op.sampler, X, n, scaled(cfg.sampler_epochs, cfg.epoch_scale), cfg.lr,
                [&](const std::vector<double>& Y, std::vector<double>& dLdY) {
                    return gaussian_nll_loss(Y, A, n, ad, dLdY);
                },
                op.name.c_str());
    }

    {
        std::vector<std::vector<double>> neg;
        for (const Partition& q : all_partitions) {
            if (&q == &p) continue;
            for (int ti : q.members) {
                const Transition& tr = data[ti];
                if (auto b = random_binding(op.params, tr.s, rng)) {
                    GroundNsrt g{&op, *b};
                    std::vector<double> row = context_vector(g, tr.s);
                    row.insert(row.end(), tr.action.begin(), tr.action.end());
                    neg.push_back(std::move(row));
                }
            }
        }
        for (int j = 0; j < n; ++j) {
            const Transition& tr = data[p.members[j]];
            for (int attempt = 0; attempt < 10; ++attempt) {
                auto b = random_binding(op.params, tr.s, rng);
                if (b && *b != bindings[j]) {
                    GroundNsrt g{&op, *b};
                    std::vector<double> row = context_vector(g, tr.s);
                    row.insert(row.end(), tr.action.begin(), tr.action.end());
                    neg.push_back(std::move(row));
                    break;
                }
            }
        }
        rng.shuffle(neg);
        if (static_cast<int>(neg.size()) > n) neg.resize(n);

        const int total = n + static_cast<int>(neg.size());
        std::vector<double> X, T;
        X.reserve(static_cast<std::size_t>(total) * (cd + ad));
        for (int j = 0; j < n; ++j) {
            X.insert(X.end(), ctx[j].begin(), ctx[j].end());
            const auto& a = data[p.members[j]].action;
            X.insert(X.end(), a.begin(), a.end());
            T.push_back(1.0);
        }
        for (const auto& row : neg) {
            X.insert(X.end(), row.begin(), row.end());
            T.push_back(0.0);
        }
        op.clas_in = Standardizer::fit(X, total, cd + ad);
        op.clas_in.apply(X);
        op.classifier = Mlp({cd + ad, cfg.hidden, cfg.hidden, 1}, rng);
        fit_mlp(op.classifier, X, total, scaled(cfg.classifier_epochs, cfg.epoch_scale), cfg.lr,
                [&](const std::vector<double>& Y, std::vector<double>& dLdY) {
                    return bce_logit_loss(Y, T, total, dLdY);
                },
                op.name.c_str());
    }
}

GraphEncoder::GraphEncoder(const Env& env) : action_dim_(env.action_dim()) {
    for (const ObjType& t : env.types()) {
        types_.push_back(&t);
        max_attr_dim_ = std::max(max_attr_dim_, t.dim);
    }
    for (const Predicate& pr : env.predicates()) {
        if (pr.arity() == 1) {
            unary_.push_back(&pr);
        } else if (pr.arity() == 2) {
            binary_.push_back(&pr);
        } else {
            throw std::runtime_error("graph encoder supports predicates of arity <= 2");
        }
    }
    node_dim_ = max_attr_dim_ + static_cast<int>(types_.size()) +
                static_cast<int>(unary_.size()) + action_dim_;
    edge_dim_ = static_cast<int>(binary_.size()) + 1;
}

Graph GraphEncoder::encode(const State& s, const AbstractState& abs,
                           const std::vector<double>& action,
                           const std::vector<Object>* fail_objects) const {
    Graph g;
    g.n_nodes = static_cast<int>(s.objects().size());
    g.node_dim = node_dim_;
    g.edge_dim = edge_dim_;
    g.nodes.reserve(static_cast<std::size_t>(g.n_nodes) * node_dim_);
    for (const Object& obj : s.objects()) {
        const auto at = s.attrs(obj);
        for (int d = 0; d < max_attr_dim_; ++d) {
            g.nodes.push_back(d < static_cast<int>(at.size()) ? at[d] : 0.0);
        }
        for (const ObjType* t : types_) g.nodes.push_back(t == obj.type ? 1.0 : 0.0);
        for (const Predicate* pr : unary_) {
            g.nodes.push_back(abs.contains(GroundAtom{pr, {obj}}) ? 1.0 : 0.0);
        }
        g.nodes.insert(g.nodes.end(), action.begin(), action.end());
    }
    for (const GroundAtom& a : abs.atoms()) {
        const auto it = std::find(binary_.begin(), binary_.end(), a.pred);
        if (it == binary_.end()) continue;
        const int pidx = static_cast<int>(it - binary_.begin());
        const int i = s.index_of(a.args[0]);
        const int j = s.index_of(a.args[1]);
        for (int flag = 0; flag < 2; ++flag) {
            g.src.push_back(flag ? j : i);
            g.dst.push_back(flag ? i : j);
            for (int b = 0; b < static_cast<int>(binary_.size()); ++b) {
                g.edges.push_back(b == pidx ? 1.0 : 0.0);
            }
            g.edges.push_back(static_cast<double>(flag));
        }
    }
    if (fail_objects != nullptr) {
        g.labels.assign(g.n_nodes, 0.0);
        for (const Object& o : *fail_objects) g.labels[s.index_of(o)] = 1.0;
    }
    return g;
}

LearnedModel learn_model(const std::vector<Transition>& data, const Env& env,
                         const TrainConfig& cfg, std::uint64_t seed, StageTimes* times) {
    using SteadyClock = std::chrono::steady_clock;
    auto mark = SteadyClock::now();
    auto lap = [&mark]() {
        const auto now = SteadyClock::now();
        const double s = std::chrono::duration<double>(now - mark).count();
        mark = now;
        return s;
    };
    StageTimes local;
    if (times == nullptr) times = &local;

    LearnedModel model;
    if (data.empty()) return model;

    const auto abs_s = abstract_states(data, env, false);
    const auto abs_next = abstract_states(data, env, true);
    times->abstraction_s = lap();
    const auto parts = partition_transitions(data, abs_s, abs_next);
    times->partition_s = lap();

    VariableNamer namer;
    model.nsrts.reserve(parts.size());
    for (std::size_t k = 0; k < parts.size(); ++k) {
        model.nsrts.push_back(learn_symbolic(parts[k], abs_s, namer,
                                             "Op" + std::to_string(k), env.action_dim()));
    }
    times->symbolic_s = lap();
    for (std::size_t k = 0; k < parts.size(); ++k) {
        Rng head_rng(derive_seed(seed, "heads:" + model.nsrts[k].name));
        train_nsrt_heads(model.nsrts[k], parts[k], data, parts, cfg, head_rng);
    }
    times->heads_s = lap();

    std::vector<int> fails, rest;
    for (std::size_t i = 0; i < data.size(); ++i) {
        (data[i].failure ? fails : rest).push_back(static_cast<int>(i));
    }
    // Below ~20 examples the predictor is noise; planning is better served
    // by no predictions than by unreliable ones.
    if (fails.size() >= 20) {
        Rng gr(derive_seed(seed, "failure_net"));
        gr.shuffle(rest);
        if (rest.size() > fails.size()) rest.resize(fails.size());

        const GraphEncoder enc(env);
        std::vector<Graph> graphs;
        static const std::vector<Object> no_objects;
        for (int i : fails) {
            graphs.push_back(enc.encode(data[i].s, abs_s[i], data[i].action,
                                        &data[i].failure_objects));
        }
        for (int i : rest) graphs.push_back(enc.encode(data[i].s, abs_s[i], data[i].action,
                                                       &no_objects));

        model.failure_net = GraphNet(enc.node_dim(), enc.edge_dim(), cfg.gnn_hidden,
                                     cfg.gnn_rounds, gr);
        Adam opt(cfg.lr);
        std::vector<int> order(graphs.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        for (int epoch = 0; epoch < cfg.gnn_epochs; ++epoch) {
            gr.shuffle(order);
            for (std::size_t at = 0; at < order.size(); at += cfg.gnn_batch) {
                std::vector<const Graph*> batch;
                for (std::size_t j = at; j < order.size() && j < at + cfg.gnn_batch; ++j) {
                    batch.push_back(&graphs[order[j]]);
                }
                const double loss = gnn_train_step(model.failure_net, batch, opt);
                if (!std::isfinite(loss)) {
                    throw std::runtime_error("training diverged (failure predictor)");
                }
            }
        }
        model.has_failure_net = true;
    }
    times->failure_s = lap();
    return model;
}

}  // namespace nsrtplan
