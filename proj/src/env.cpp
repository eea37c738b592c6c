#include "nsrtplan/env.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nsrtplan {

std::unique_ptr<Env> make_pickplace1d_env();
std::unique_ptr<Env> make_kitchen_env();
std::unique_ptr<Env> make_blocks_env();
std::unique_ptr<Env> make_painting_env();

const char* split_name(TaskSplit s) {
    switch (s) {
        case TaskSplit::train: return "train";
        case TaskSplit::test_easy: return "easy";
        case TaskSplit::test_hard: return "hard";
    }
    return "?";
}

TaskSplit parse_split(const std::string& s) {
    if (s == "train") return TaskSplit::train;
    if (s == "easy" || s == "test_easy") return TaskSplit::test_easy;
    if (s == "hard" || s == "test_hard") return TaskSplit::test_hard;
    throw std::invalid_argument("unknown split: " + s);
}

std::vector<const Predicate*> Env::predicate_ptrs() const {
    std::vector<const Predicate*> out;
    out.reserve(predicates_.size());
    for (const Predicate& p : predicates_) out.push_back(&p);
    return out;
}

const ObjType* Env::type(const std::string& name) const {
    for (const ObjType& t : types_) {
        if (t.name == name) return &t;
    }
    throw std::invalid_argument("unknown type: " + name);
}

const Predicate* Env::predicate(const std::string& name) const {
    for (const Predicate& p : predicates_) {
        if (p.name == name) return &p;
    }
    throw std::invalid_argument("unknown predicate: " + name);
}

void Env::check_action(const std::vector<double>& a) const {
    if (static_cast<int>(a.size()) != action_dim_) {
        throw std::invalid_argument("action has wrong dimension for " + name_);
    }
    for (double v : a) {
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite action entry");
    }
}

std::unique_ptr<Env> make_env(const std::string& name) {
    if (name == "pickplace1d") return make_pickplace1d_env();
    if (name == "kitchen") return make_kitchen_env();
    if (name == "blocks") return make_blocks_env();
    if (name == "painting") return make_painting_env();
    throw std::invalid_argument("unknown environment: " + name);
}

std::vector<std::string> env_names() {
    return {"pickplace1d", "kitchen", "blocks", "painting"};
}

bool goal_holds(const State& s, const std::vector<GroundAtom>& goal) {
    for (const GroundAtom& g : goal) {
        if (!g.pred->eval(s, g.args)) return false;
    }
    return true;
}

std::string format_env_constants(const Env& env) {
    std::ostringstream out;
    out << "nsrtplan_envconfig 1\n";
    out << "env " << env.name() << "\n";
    out << "action_dim " << env.action_dim() << "\n";
    for (const ObjType& t : env.types()) {
        out << "type " << t.name << " " << t.dim << "\n";
    }
    char buf[64];
    for (const auto& [k, v] : env.constants()) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << "const " << k << " " << buf << "\n";
    }
    return out.str();
}

}  // namespace nsrtplan
