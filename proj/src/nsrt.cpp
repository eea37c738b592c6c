#include <algorithm>
#include <cmath>
#include <sstream>

#include "nsrtplan/nsrt.hpp"

namespace nsrtplan {

int Nsrt::context_dim() const {
    int d = 0;
    for (const Variable& v : params) d += v.type->dim;
    return d;
}

std::string Nsrt::str() const {
    std::ostringstream os;
    os << name << "(";
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) os << ", ";
        os << params[i].name << ":" << params[i].type->name;
    }
    os << ")\n  pre: {";
    for (std::size_t i = 0; i < preconditions.size(); ++i) {
        if (i) os << ", ";
        os << preconditions[i].str();
    }
    os << "}\n  add: {";
    for (std::size_t i = 0; i < add_effects.size(); ++i) {
        if (i) os << ", ";
        os << add_effects[i].str();
    }
    os << "}\n  del: {";
    for (std::size_t i = 0; i < del_effects.size(); ++i) {
        if (i) os << ", ";
        os << del_effects[i].str();
    }
    os << "}";
    return os.str();
}

Substitution GroundNsrt::sigma() const {
    Substitution s;
    for (std::size_t i = 0; i < binding.size(); ++i) s[op->params[i]] = binding[i];
    return s;
}

std::string GroundNsrt::str() const {
    std::ostringstream os;
    os << op->name << "(";
    for (std::size_t i = 0; i < binding.size(); ++i) {
        if (i) os << ", ";
        os << binding[i].name;
    }
    os << ")";
    return os.str();
}

bool GroundNsrt::operator<(const GroundNsrt& o) const {
    if (op != o.op) return op->name < o.op->name;
    return binding < o.binding;
}

std::vector<GroundNsrt> ground(const Nsrt& op, const State& s) {
    std::vector<std::vector<Object>> pools;
    pools.reserve(op.params.size());
    for (const Variable& v : op.params) pools.push_back(s.objects_of_type(v.type));

    std::vector<GroundNsrt> out;
    std::vector<Object> binding;
    auto rec = [&](auto&& self, std::size_t slot) -> void {
        if (slot == pools.size()) {
            out.push_back(GroundNsrt{&op, binding});
            return;
        }
        for (const Object& obj : pools[slot]) {
            if (std::find(binding.begin(), binding.end(), obj) != binding.end()) continue;
            binding.push_back(obj);
            self(self, slot + 1);
            binding.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

std::vector<GroundAtom> ground_preconditions(const GroundNsrt& g) {
    return substitute(g.op->preconditions, g.sigma());
}

std::vector<GroundAtom> ground_add_effects(const GroundNsrt& g) {
    return substitute(g.op->add_effects, g.sigma());
}

std::vector<GroundAtom> ground_del_effects(const GroundNsrt& g) {
    return substitute(g.op->del_effects, g.sigma());
}

bool applicable(const GroundNsrt& g, const AbstractState& abs) {
    for (const GroundAtom& a : ground_preconditions(g)) {
        if (!abs.contains(a)) return false;
    }
    return true;
}

AbstractState abstract_step(const GroundNsrt& g, const AbstractState& abs) {
    AbstractState del{ground_del_effects(g)};
    AbstractState add{ground_add_effects(g)};
    return abs.set_minus(del).set_union(add);
}

bool covers(const GroundNsrt& g, const AbstractState& abs_s, const AbstractState& abs_next) {
    if (!applicable(g, abs_s)) return false;
    AbstractState obs_add = abs_next.set_minus(abs_s);
    AbstractState obs_del = abs_s.set_minus(abs_next);
    return AbstractState{ground_add_effects(g)} == obs_add &&
           AbstractState{ground_del_effects(g)} == obs_del;
}

std::vector<double> context_vector(const GroundNsrt& g, const State& s) {
    std::vector<double> ctx;
    ctx.reserve(g.op->context_dim());
    for (const Object& obj : g.binding) {
        const auto at = s.attrs(obj);
        ctx.insert(ctx.end(), at.begin(), at.end());
    }
    return ctx;
}

std::vector<double> predict_next_context(const Nsrt& op, const std::vector<double>& context,
                                         const std::vector<double>& action) {
    std::vector<double> next = context;
    if (op.changed_slots.empty()) return next;
    std::vector<double> in = context;
    in.insert(in.end(), action.begin(), action.end());
    op.trans_in.apply_row(in.data());
    std::vector<double> out = op.transition.forward_one(in);
    op.trans_out.invert_row(out.data());
    for (std::size_t j = 0; j < op.changed_slots.size(); ++j) next[op.changed_slots[j]] = out[j];
    return next;
}

double applicability_prob(const Nsrt& op, const std::vector<double>& context,
                          const std::vector<double>& action) {
    if (op.classifier.dims().empty()) return 1.0;  // untrained head: accept
    std::vector<double> in = context;
    in.insert(in.end(), action.begin(), action.end());
    op.clas_in.apply_row(in.data());
    const double logit = op.classifier.forward_one(in)[0];
    return 1.0 / (1.0 + std::exp(-logit));
}

std::optional<std::vector<double>> sample_action(const Nsrt& op,
                                                 const std::vector<double>& context, Rng& rng,
                                                 int max_tries, double clip_std) {
    if (op.sampler.dims().empty()) return std::nullopt;
    std::vector<double> in = context;
    op.samp_in.apply_row(in.data());
    const std::vector<double> head = op.sampler.forward_one(in);
    for (int t = 0; t < max_tries; ++t) {
        std::vector<double> a = gaussian_sample(head, op.action_dim, rng, clip_std);
        op.samp_act.invert_row(a.data());
        if (applicability_prob(op, context, a) > 0.5) return a;
    }
    return std::nullopt;
}

std::vector<double> sample_action_raw(const Nsrt& op, const std::vector<double>& context,
                                      Rng& rng, double clip_std) {
    if (op.sampler.dims().empty()) return std::vector<double>(op.action_dim, 0.0);
    std::vector<double> in = context;
    op.samp_in.apply_row(in.data());
    const std::vector<double> head = op.sampler.forward_one(in);
    std::vector<double> a = gaussian_sample(head, op.action_dim, rng, clip_std);
    op.samp_act.invert_row(a.data());
    return a;
}

}  // namespace nsrtplan
