#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

#include "nsrtplan/env.hpp"

namespace nsrtplan {

namespace {

// Drink-serving domain. The robot picks a cup (if it is light enough and not
// yet served), pours water/wine/coffee into the held cup, and delivers it to
// a customer by ID. Action layout: [x, y, z, customer_id, liquid].
// Cup attributes: 6D pose (xyz + unused orientation), mass, liquid code,
// served flag, held flag. Liquid codes: 0 empty, 1 water, 2 wine, 3 coffee.
//
// Picking a too-heavy cup changes nothing; that trap is invisible at the
// predicate level, which is what makes this domain not downward refinable.
class KitchenEnv : public Env {
public:
    KitchenEnv() {
        name_ = "kitchen";
        action_dim_ = 5;
        types_ = {
            ObjType{"cup", 10},     // x y z rx ry rz mass liquid served held
            ObjType{"customer", 2},  // id, current drink
            ObjType{"robot", 1},     // gripper joint
        };
        cup_t_ = &types_[0];
        customer_t_ = &types_[1];
        robot_t_ = &types_[2];
        constants_ = {
            {"pick_tolerance", 0.1},
            {"heavy_threshold", 0.8},
            {"id_tolerance", 0.25},
            {"liquid_tolerance", 0.25},
            {"min_cup_spacing", 0.25},
        };

        auto cup_flag = [](int idx, bool flag_true) {
            return [idx, flag_true](const State& s, std::span<const Object> a) {
                return (s.attrs(a[0])[idx] > 0.5) == flag_true;
            };
        };
        predicates_.push_back(Predicate{"Holding", {cup_t_}, cup_flag(9, true)});
        predicates_.push_back(Predicate{"CupUnserved", {cup_t_}, cup_flag(8, false)});
        predicates_.push_back(Predicate{
            "GripperOpen", {robot_t_}, [](const State& s, std::span<const Object> a) {
                return s.attrs(a[0])[0] > 0.5;
            }});
        const char* liquids[] = {nullptr, "Water", "Wine", "Coffee"};
        for (int code = 1; code <= 3; ++code) {
            predicates_.push_back(Predicate{
                std::string("CupHas") + liquids[code], {cup_t_},
                [code](const State& s, std::span<const Object> a) {
                    return std::abs(s.attrs(a[0])[7] - code) < 0.25;
                }});
            predicates_.push_back(Predicate{
                std::string("CustomerHas") + liquids[code], {customer_t_},
                [code](const State& s, std::span<const Object> a) {
                    return std::abs(s.attrs(a[0])[1] - code) < 0.25;
                }});
        }
    }

    StepResult step(const State& s, const std::vector<double>& action) const override {
        check_action(action);
        StepResult res{s, false, {}};
        const double tol = constants_.at("pick_tolerance");

        std::optional<Object> held;
        for (const Object& c : s.objects_of_type(cup_t_)) {
            if (s.attrs(c)[9] > 0.5) held = c;
        }
        const Object robot = s.objects_of_type(robot_t_).at(0);

        // Pick: gripper pose near an unserved, unheld cup.
        std::optional<Object> near_cup;
        double best = tol + 1.0;
        for (const Object& c : s.objects_of_type(cup_t_)) {
            const auto at = s.attrs(c);
            if (at[8] > 0.5 || at[9] > 0.5) continue;
            const double d = std::hypot(action[0] - at[0], action[1] - at[1], action[2] - at[2]);
            if (d <= tol && d < best) {
                best = d;
                near_cup = c;
            }
        }
        if (near_cup) {
            // A too-heavy cup (or a busy gripper) makes the pick a no-op.
            if (!held && s.attrs(*near_cup)[6] <= constants_.at("heavy_threshold")) {
                res.next.attrs_mut(*near_cup)[9] = 1.0;
                res.next.attrs_mut(robot)[0] = 0.0;
            }
            return res;
        }

        // Serve: action customer ID matches a customer while a cup is held.
        const double id_tol = constants_.at("id_tolerance");
        for (const Object& cust : s.objects_of_type(customer_t_)) {
            if (std::abs(action[3] - s.attrs(cust)[0]) <= id_tol) {
                if (held) {
                    auto cup = res.next.attrs_mut(*held);
                    res.next.attrs_mut(cust)[1] = cup[7];
                    cup[8] = 1.0;
                    cup[9] = 0.0;
                    res.next.attrs_mut(robot)[0] = 1.0;
                }
                return res;
            }
        }

        // Pour: liquid component near one of the liquid codes.
        const double lq_tol = constants_.at("liquid_tolerance");
        for (int code = 1; code <= 3; ++code) {
            if (std::abs(action[4] - code) <= lq_tol) {
                if (held) res.next.attrs_mut(*held)[7] = code;
                return res;
            }
        }
        return res;
    }

    std::vector<double> sample_prior(const State& s, Rng& rng) const override {
        std::optional<Object> held;
        for (const Object& c : s.objects_of_type(cup_t_)) {
            if (s.attrs(c)[9] > 0.5) held = c;
        }
        if (!held) {
            // Attempt a pick; heavy cups included, those attempts come back
            // as no-ops and teach the applicability classifier about mass.
            std::vector<Object> candidates;
            for (const Object& c : s.objects_of_type(cup_t_)) {
                if (s.attrs(c)[8] <= 0.5) candidates.push_back(c);
            }
            if (candidates.empty()) return {2.0, 2.0, 2.0, -10.0, -10.0};
            const auto at = s.attrs(rng.choice(candidates));
            const double r = constants_.at("pick_tolerance") * 0.3;
            return {at[0] + rng.uniform(-r, r), at[1] + rng.uniform(-r, r),
                    at[2] + rng.uniform(-r, r), -10.0, -10.0};
        }
        if (rng.flip()) {
            // Pour a random liquid.
            const double code = 1 + rng.index(3);
            return {2.0, 2.0, 2.0, -10.0, code + rng.uniform(-0.1, 0.1)};
        }
        // Serve a random customer that has no drink yet (any if all served).
        std::vector<Object> custs;
        for (const Object& c : s.objects_of_type(customer_t_)) {
            if (s.attrs(c)[1] < 0.5) custs.push_back(c);
        }
        if (custs.empty()) custs = s.objects_of_type(customer_t_);
        const double id = s.attrs(rng.choice(custs))[0];
        return {2.0, 2.0, 2.0, id + rng.uniform(-0.1, 0.1), -10.0};
    }

    Task generate_task(TaskSplit split, Rng& rng) const override {
        int n_cups, n_customers, horizon;
        switch (split) {
            case TaskSplit::train:
                n_cups = rng.flip() ? 2 : 3;
                n_customers = 1;
                horizon = 10;
                break;
            case TaskSplit::test_easy:
                n_cups = 2;
                n_customers = 1;
                horizon = 3;
                break;
            case TaskSplit::test_hard:
                n_cups = 3;
                n_customers = 2;
                horizon = 6;
                break;
            default:
                throw std::invalid_argument("bad split");
        }

        Task task;
        task.horizon = horizon;
        const double spacing = constants_.at("min_cup_spacing");

        std::vector<std::array<double, 3>> poses;
        int guard = 0;
        while (static_cast<int>(poses.size()) < n_cups) {
            if (++guard > 100000) throw std::runtime_error("kitchen task generation stuck");
            std::array<double, 3> p{rng.uniform(), rng.uniform(), rng.uniform()};
            bool ok = true;
            for (const auto& q : poses) {
                if (std::hypot(p[0] - q[0], p[1] - q[1], p[2] - q[2]) < spacing) {
                    ok = false;
                    break;
                }
            }
            if (ok) poses.push_back(p);
        }

        // Guarantee one liftable cup per customer; remaining cups may be
        // arbitrarily heavy.
        std::vector<int> order(n_cups);
        for (int i = 0; i < n_cups; ++i) order[i] = i;
        rng.shuffle(order);
        std::vector<double> masses(n_cups);
        const double heavy = constants_.at("heavy_threshold");
        for (int i = 0; i < n_cups; ++i) {
            masses[order[i]] = i < n_customers ? rng.uniform(0.05, heavy - 0.05)
                                               : rng.uniform(0.05, 1.0);
        }

        for (int i = 0; i < n_cups; ++i) {
            task.init.add_object(
                Object{"cup" + std::to_string(i), cup_t_},
                {poses[i][0], poses[i][1], poses[i][2], 0.0, 0.0, 0.0, masses[i], 0.0, 0.0, 0.0});
        }
        for (int i = 0; i < n_customers; ++i) {
            task.init.add_object(Object{"cust" + std::to_string(i), customer_t_},
                                 {static_cast<double>(i), 0.0});
        }
        task.init.add_object(Object{"robby", robot_t_}, {1.0});

        const char* wants[] = {"CustomerHasWater", "CustomerHasWine", "CustomerHasCoffee"};
        for (int i = 0; i < n_customers; ++i) {
            task.goal.push_back(GroundAtom{predicate(wants[rng.index(3)]),
                                           {Object{"cust" + std::to_string(i), customer_t_}}});
        }
        std::sort(task.goal.begin(), task.goal.end());
        return task;
    }

private:
    const ObjType* cup_t_;
    const ObjType* customer_t_;
    const ObjType* robot_t_;
};

}  // namespace

std::unique_ptr<Env> make_kitchen_env() { return std::make_unique<KitchenEnv>(); }

}  // namespace nsrtplan
