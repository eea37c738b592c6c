#ifndef NSRTPLAN_RELCORE_HPP
#define NSRTPLAN_RELCORE_HPP

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsrtplan {

// Typed relational state layer: object types with fixed-width attribute
// vectors, predicates with programmatic evaluators, ground/lifted atoms,
// and the abstraction map from continuous states to atom sets.

struct ObjType {
    std::string name;
    int dim = 0;  // number of real-valued attributes per object of this type
};

struct Object {
    std::string name;
    const ObjType* type = nullptr;

    bool operator==(const Object& o) const { return name == o.name; }
    bool operator!=(const Object& o) const { return name != o.name; }
    bool operator<(const Object& o) const { return name < o.name; }
};

struct Variable {
    std::string name;  // conventionally "?x", "?y", ...
    const ObjType* type = nullptr;

    bool operator==(const Variable& v) const { return name == v.name; }
    bool operator<(const Variable& v) const { return name < v.name; }
};

class State;

struct Predicate {
    std::string name;
    std::vector<const ObjType*> arg_types;
    // Evaluator may inspect the whole state (e.g. "in free space" quantifies
    // over other objects). Null evaluator marks a synthetic planning predicate.
    std::function<bool(const State&, std::span<const Object>)> eval;

    int arity() const { return static_cast<int>(arg_types.size()); }
};

struct GroundAtom {
    const Predicate* pred = nullptr;
    std::vector<Object> args;

    std::string str() const;  // canonical text: Pred(obj1,obj2)
    bool operator==(const GroundAtom& a) const;
    bool operator<(const GroundAtom& a) const;  // by (pred name, arg names)
};

struct LiftedAtom {
    const Predicate* pred = nullptr;
    std::vector<Variable> args;

    std::string str() const;  // canonical text: Pred(?x,?y)
    bool operator==(const LiftedAtom& a) const;
    bool operator<(const LiftedAtom& a) const;
};

// Continuous state: each object owns a vector of attributes of length
// type->dim. Object order is the deterministic creation order of the task.
class State {
public:
    State() = default;

    void add_object(const Object& obj, std::vector<double> attrs);
    bool has_object(const std::string& name) const;
    int index_of(const Object& obj) const;

    const std::vector<Object>& objects() const { return objects_; }
    std::span<const double> attrs(const Object& obj) const;
    std::span<double> attrs_mut(const Object& obj);
    std::vector<Object> objects_of_type(const ObjType* t) const;

    bool operator==(const State& other) const;

private:
    std::vector<Object> objects_;
    std::vector<std::vector<double>> attrs_;
    std::map<std::string, int> index_;
};

// A set of ground atoms with canonical (sorted) storage.
class AbstractState {
public:
    AbstractState() = default;
    explicit AbstractState(std::vector<GroundAtom> atoms);

    void insert(const GroundAtom& a);
    bool contains(const GroundAtom& a) const;
    bool contains_all(const AbstractState& other) const;
    const std::vector<GroundAtom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }

    AbstractState set_minus(const AbstractState& other) const;
    AbstractState set_union(const AbstractState& other) const;

    std::string str() const;  // "{A(...), B(...)}" in canonical order
    bool operator==(const AbstractState& o) const { return atoms_ == o.atoms_; }
    bool operator<(const AbstractState& o) const { return atoms_ < o.atoms_; }

private:
    std::vector<GroundAtom> atoms_;
};

// Abstraction: all true ground atoms over type-correct object tuples.
// Tuples never repeat an object (relational atoms are over distinct objects).
AbstractState abstract_state(const State& s, const std::vector<const Predicate*>& preds);

// Variable-to-object substitution (bijective within one NSRT grounding).
using Substitution = std::map<Variable, Object>;
// Object-to-object mapping produced by unification.
using ObjectMap = std::map<Object, Object>;

// Applies sigma to lifted atoms. Throws if a variable is unbound.
std::vector<GroundAtom> substitute(const std::vector<LiftedAtom>& atoms, const Substitution& sigma);

// Rewrites ground atoms through an object->object map (identity for objects
// not in the map).
std::vector<GroundAtom> rename_objects(const std::vector<GroundAtom>& atoms, const ObjectMap& m);

// Inverse of substitute: lifts ground atoms through an object->variable map.
// Throws if an atom mentions an unmapped object.
std::vector<LiftedAtom> lift_atoms(const std::vector<GroundAtom>& atoms,
                                   const std::map<Object, Variable>& inv);

// Effect pair (add set, delete set) as used for partitioning and NSRT keys.
struct EffectPair {
    AbstractState add;
    AbstractState del;

    bool operator==(const EffectPair& o) const { return add == o.add && del == o.del; }
    std::string str() const;
};

// Searches for a type-consistent object bijection sigma with
// sigma[a.add] == b.add and sigma[a.del] == b.del. Deterministic: atoms are
// processed in canonical order and the lexicographically first unifier is
// returned. Satisfies unify(a,b) == inverse(unify(b,a)) and unify(x,x) == id.
std::optional<ObjectMap> unify_effects(const EffectPair& a, const EffectPair& b);

ObjectMap invert(const ObjectMap& m);

std::vector<Object> atom_objects(const std::vector<GroundAtom>& atoms);  // dedup, first-appearance order

}  // namespace nsrtplan

#endif
