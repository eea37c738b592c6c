#include "nsrtplan/relcore.hpp"

#include <algorithm>
#include <sstream>

namespace nsrtplan {

std::string GroundAtom::str() const {
    std::ostringstream out;
    out << pred->name << '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out << ',';
        out << args[i].name;
    }
    out << ')';
    return out.str();
}

bool GroundAtom::operator==(const GroundAtom& a) const {
    if (pred->name != a.pred->name || args.size() != a.args.size()) return false;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] != a.args[i]) return false;
    }
    return true;
}

bool GroundAtom::operator<(const GroundAtom& a) const {
    if (pred->name != a.pred->name) return pred->name < a.pred->name;
    return args < a.args;
}

std::string LiftedAtom::str() const {
    std::ostringstream out;
    out << pred->name << '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out << ',';
        out << args[i].name;
    }
    out << ')';
    return out.str();
}

bool LiftedAtom::operator==(const LiftedAtom& a) const {
    return pred->name == a.pred->name && args == a.args;
}

bool LiftedAtom::operator<(const LiftedAtom& a) const {
    if (pred->name != a.pred->name) return pred->name < a.pred->name;
    return args < a.args;
}

void State::add_object(const Object& obj, std::vector<double> attrs) {
    if (index_.count(obj.name)) {
        throw std::invalid_argument("duplicate object name: " + obj.name);
    }
    if (static_cast<int>(attrs.size()) != obj.type->dim) {
        throw std::invalid_argument("attribute vector length mismatch for " + obj.name);
    }
    index_[obj.name] = static_cast<int>(objects_.size());
    objects_.push_back(obj);
    attrs_.push_back(std::move(attrs));
}

bool State::has_object(const std::string& name) const { return index_.count(name) > 0; }

int State::index_of(const Object& obj) const {
    auto it = index_.find(obj.name);
    if (it == index_.end()) throw std::invalid_argument("unknown object: " + obj.name);
    return it->second;
}

std::span<const double> State::attrs(const Object& obj) const {
    return attrs_[index_of(obj)];
}

std::span<double> State::attrs_mut(const Object& obj) {
    return attrs_[index_of(obj)];
}

std::vector<Object> State::objects_of_type(const ObjType* t) const {
    std::vector<Object> out;
    for (const Object& o : objects_) {
        if (o.type == t) out.push_back(o);
    }
    return out;
}

bool State::operator==(const State& other) const {
    return objects_ == other.objects_ && attrs_ == other.attrs_;
}

AbstractState::AbstractState(std::vector<GroundAtom> atoms) : atoms_(std::move(atoms)) {
    std::sort(atoms_.begin(), atoms_.end());
    atoms_.erase(std::unique(atoms_.begin(), atoms_.end()), atoms_.end());
}

void AbstractState::insert(const GroundAtom& a) {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), a);
    if (it != atoms_.end() && *it == a) return;
    atoms_.insert(it, a);
}

bool AbstractState::contains(const GroundAtom& a) const {
    return std::binary_search(atoms_.begin(), atoms_.end(), a);
}

bool AbstractState::contains_all(const AbstractState& other) const {
    return std::includes(atoms_.begin(), atoms_.end(), other.atoms_.begin(), other.atoms_.end());
}

AbstractState AbstractState::set_minus(const AbstractState& other) const {
    std::vector<GroundAtom> out;
    std::set_difference(atoms_.begin(), atoms_.end(), other.atoms_.begin(), other.atoms_.end(),
                        std::back_inserter(out));
    return AbstractState(std::move(out));
}

AbstractState AbstractState::set_union(const AbstractState& other) const {
    std::vector<GroundAtom> out;
    std::set_union(atoms_.begin(), atoms_.end(), other.atoms_.begin(), other.atoms_.end(),
                   std::back_inserter(out));
    return AbstractState(std::move(out));
}

std::string AbstractState::str() const {
    std::ostringstream out;
    out << '{';
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (i) out << ", ";
        out << atoms_[i].str();
    }
    out << '}';
    return out.str();
}

namespace {

// Enumerates type-correct argument tuples (distinct objects) recursively.
void enumerate_tuples(const State& s, const Predicate* pred, std::size_t pos,
                      std::vector<Object>& tuple, AbstractState& out) {
    if (pos == pred->arg_types.size()) {
        if (pred->eval(s, tuple)) out.insert(GroundAtom{pred, tuple});
        return;
    }
    for (const Object& o : s.objects()) {
        if (o.type != pred->arg_types[pos]) continue;
        if (std::find(tuple.begin(), tuple.end(), o) != tuple.end()) continue;
        tuple.push_back(o);
        enumerate_tuples(s, pred, pos + 1, tuple, out);
        tuple.pop_back();
    }
}

}  // namespace

AbstractState abstract_state(const State& s, const std::vector<const Predicate*>& preds) {
    AbstractState out;
    std::vector<Object> tuple;
    for (const Predicate* p : preds) {
        if (!p->eval) continue;
        tuple.clear();
        enumerate_tuples(s, p, 0, tuple, out);
    }
    return out;
}

std::vector<GroundAtom> substitute(const std::vector<LiftedAtom>& atoms, const Substitution& sigma) {
    std::vector<GroundAtom> out;
    out.reserve(atoms.size());
    for (const LiftedAtom& a : atoms) {
        GroundAtom g;
        g.pred = a.pred;
        for (const Variable& v : a.args) {
            auto it = sigma.find(v);
            if (it == sigma.end()) throw std::invalid_argument("unbound variable: " + v.name);
            g.args.push_back(it->second);
        }
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<GroundAtom> rename_objects(const std::vector<GroundAtom>& atoms, const ObjectMap& m) {
    std::vector<GroundAtom> out;
    out.reserve(atoms.size());
    for (const GroundAtom& a : atoms) {
        GroundAtom g;
        g.pred = a.pred;
        for (const Object& o : a.args) {
            auto it = m.find(o);
            g.args.push_back(it == m.end() ? o : it->second);
        }
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<LiftedAtom> lift_atoms(const std::vector<GroundAtom>& atoms,
                                   const std::map<Object, Variable>& inv) {
    std::vector<LiftedAtom> out;
    out.reserve(atoms.size());
    for (const GroundAtom& a : atoms) {
        LiftedAtom l;
        l.pred = a.pred;
        for (const Object& o : a.args) {
            auto it = inv.find(o);
            if (it == inv.end()) throw std::invalid_argument("object not in lifting map: " + o.name);
            l.args.push_back(it->second);
        }
        out.push_back(std::move(l));
    }
    return out;
}

std::string EffectPair::str() const {
    return "(+" + add.str() + ", -" + del.str() + ")";
}

std::vector<Object> atom_objects(const std::vector<GroundAtom>& atoms) {
    std::vector<Object> out;
    for (const GroundAtom& a : atoms) {
        for (const Object& o : a.args) {
            if (std::find(out.begin(), out.end(), o) == out.end()) out.push_back(o);
        }
    }
    return out;
}

ObjectMap invert(const ObjectMap& m) {
    ObjectMap out;
    for (const auto& [k, v] : m) out[v] = k;
    return out;
}

namespace {

// Backtracking matcher between two canonical atom lists. Extends the partial
// bijection in place; atoms of `a` are processed in canonical order, candidate
// partners in `b` likewise, so the first complete match is the
// lexicographically smallest.
bool match_atom_lists(const std::vector<GroundAtom>& a, const std::vector<GroundAtom>& b,
                      std::size_t pos, std::vector<bool>& used, ObjectMap& fwd, ObjectMap& bwd,
                      const std::function<bool(std::size_t)>& next_stage) {
    if (pos == a.size()) return next_stage(0);
    const GroundAtom& atom = a[pos];
    for (std::size_t j = 0; j < b.size(); ++j) {
        if (used[j]) continue;
        const GroundAtom& cand = b[j];
        if (atom.pred->name != cand.pred->name || atom.args.size() != cand.args.size()) continue;
        // Try extending the bijection with this atom pairing.
        std::vector<std::pair<Object, Object>> added;
        bool ok = true;
        for (std::size_t k = 0; k < atom.args.size(); ++k) {
            const Object& x = atom.args[k];
            const Object& y = cand.args[k];
            if (x.type != y.type) { ok = false; break; }
            auto fit = fwd.find(x);
            auto bit = bwd.find(y);
            if (fit != fwd.end()) {
                if (fit->second != y) { ok = false; break; }
            } else if (bit != bwd.end()) {
                ok = false;  // y already taken by another x
                break;
            } else {
                fwd[x] = y;
                bwd[y] = x;
                added.emplace_back(x, y);
            }
        }
        if (ok) {
            used[j] = true;
            if (match_atom_lists(a, b, pos + 1, used, fwd, bwd, next_stage)) return true;
            used[j] = false;
        }
        for (const auto& [x, y] : added) {
            fwd.erase(x);
            bwd.erase(y);
        }
    }
    return false;
}

std::optional<ObjectMap> unify_directed(const EffectPair& a, const EffectPair& b) {
    if (a.add.size() != b.add.size() || a.del.size() != b.del.size()) return std::nullopt;
    ObjectMap fwd, bwd;
    std::vector<bool> used_add(b.add.size(), false), used_del(b.del.size(), false);
    auto match_del = [&](std::size_t) {
        return match_atom_lists(a.del.atoms(), b.del.atoms(), 0, used_del, fwd, bwd,
                                [](std::size_t) { return true; });
    };
    if (match_atom_lists(a.add.atoms(), b.add.atoms(), 0, used_add, fwd, bwd, match_del)) {
        return fwd;
    }
    return std::nullopt;
}

}  // namespace

std::optional<ObjectMap> unify_effects(const EffectPair& a, const EffectPair& b) {
    // Search from the side with the smaller canonical rendering; this makes
    // unify(a,b) and unify(b,a) yield mutually inverse maps even when several
    // unifiers exist.
    if (a.str() <= b.str()) {
        return unify_directed(a, b);
    }
    auto rev = unify_directed(b, a);
    if (!rev) return std::nullopt;
    return invert(*rev);
}

}  // namespace nsrtplan
