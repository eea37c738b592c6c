#include <algorithm>
#include <cmath>
#include <optional>

#include "nsrtplan/env.hpp"

namespace nsrtplan {

namespace {

// One-dimensional pick-and-place along a unit axis. Every action is a
// complete pick-and-place: component 0 is where the gripper tries to pick,
// component 1 is where it releases. Blocks must end up on goal targets;
// obstructors straddle target regions and collide with nearby placements
// until they are moved off-axis.
class PickPlace1dEnv : public Env {
public:
    PickPlace1dEnv() {
        name_ = "pickplace1d";
        action_dim_ = 2;
        types_ = {
            ObjType{"block", 1},       // pose
            ObjType{"target", 2},      // start, end
            ObjType{"obstructor", 3},  // start, end, off_axis
        };
        block_t_ = &types_[0];
        target_t_ = &types_[1];
        obstructor_t_ = &types_[2];
        constants_ = {
            {"pick_tolerance", 0.05},
            {"collision_tolerance", 0.08},
            {"target_width", 0.04},
            {"block_obstructor_margin", 0.07},
            {"block_block_margin", 0.03},
            {"prior_pick_noise", 0.01},
            {"prior_weight_place", 0.65},
            {"prior_weight_relocate", 0.15},
            {"prior_weight_remove", 0.20},
        };

        predicates_.push_back(Predicate{
            "On",
            {block_t_, target_t_},
            [](const State& s, std::span<const Object> a) {
                const double pose = s.attrs(a[0])[0];
                const auto t = s.attrs(a[1]);
                return t[0] <= pose && pose <= t[1];
            }});
        predicates_.push_back(Predicate{
            "InFreeSpace",
            {block_t_},
            [this](const State& s, std::span<const Object> a) {
                const double pose = s.attrs(a[0])[0];
                for (const Object& o : s.objects_of_type(target_t_)) {
                    const auto t = s.attrs(o);
                    if (t[0] <= pose && pose <= t[1]) return false;
                }
                return true;
            }});
        predicates_.push_back(Predicate{
            "IsRemoved",
            {obstructor_t_},
            [](const State& s, std::span<const Object> a) {
                return s.attrs(a[0])[2] > 0.5;
            }});
    }

    StepResult step(const State& s, const std::vector<double>& action) const override {
        check_action(action);
        const double pick = action[0], place = action[1];
        const double tol = constants_.at("pick_tolerance");

        // Nearest pickable object within tolerance; ties go to creation order.
        std::optional<Object> picked;
        double best = tol + 1.0;
        for (const Object& o : s.objects()) {
            double d;
            if (o.type == block_t_) {
                d = std::abs(pick - s.attrs(o)[0]);
            } else if (o.type == obstructor_t_) {
                const auto at = s.attrs(o);
                if (at[2] > 0.5) continue;  // already off-axis
                d = span_distance(pick, at[0], at[1]);
            } else {
                continue;
            }
            if (d <= tol && d < best) {
                best = d;
                picked = o;
            }
        }

        StepResult res{s, false, {}};
        if (!picked) return res;

        if (picked->type == block_t_) {
            const double ctol = constants_.at("collision_tolerance");
            for (const Object& o : s.objects_of_type(obstructor_t_)) {
                const auto at = s.attrs(o);
                if (at[2] > 0.5) continue;
                if (span_distance(place, at[0], at[1]) <= ctol) {
                    res.failure = true;
                    res.failure_objects = {*picked, o};
                    return res;
                }
            }
            res.next.attrs_mut(*picked)[0] = place;
        } else {
            // Moving an obstructor always carries it off-axis; its span is
            // re-rooted at the release point.
            auto at = res.next.attrs_mut(*picked);
            const double width = at[1] - at[0];
            at[0] = place;
            at[1] = place + width;
            at[2] = 1.0;
        }
        return res;
    }

    std::vector<double> sample_prior(const State& s, Rng& rng) const override {
        const double noise = constants_.at("prior_pick_noise");
        std::vector<Object> free_blocks, placed_blocks, active_obs;
        for (const Object& o : s.objects_of_type(block_t_)) {
            (on_some_target(s, o) ? placed_blocks : free_blocks).push_back(o);
        }
        for (const Object& o : s.objects_of_type(obstructor_t_)) {
            if (s.attrs(o)[2] <= 0.5) active_obs.push_back(o);
        }

        double w_place = free_blocks.empty() ? 0.0 : constants_.at("prior_weight_place");
        double w_reloc = placed_blocks.empty() ? 0.0 : constants_.at("prior_weight_relocate");
        double w_rem = active_obs.empty() ? 0.0 : constants_.at("prior_weight_remove");
        const double total = w_place + w_reloc + w_rem;
        if (total == 0.0) return {rng.uniform(), rng.uniform()};

        const double u = rng.uniform() * total;
        if (u < w_rem) {
            const Object& o = rng.choice(active_obs);
            const auto at = s.attrs(o);
            return {rng.uniform(at[0], at[1]), rng.uniform()};
        }
        const Object& b = (u < w_rem + w_place) ? rng.choice(free_blocks) : rng.choice(placed_blocks);
        const double pick = s.attrs(b)[0] + rng.uniform(-noise, noise);
        const auto targets = s.objects_of_type(target_t_);
        const auto t = s.attrs(targets[rng.index(targets.size())]);
        return {pick, rng.uniform(t[0], t[1])};
    }

    Task generate_task(TaskSplit split, Rng& rng) const override {
        int n_blocks, n_targets, n_obstructors, horizon;
        switch (split) {
            case TaskSplit::train:
                if (rng.flip()) {
                    n_blocks = 2;
                    n_targets = 5;
                } else {
                    n_blocks = 5;
                    n_targets = 10;
                }
                n_obstructors = rng.flip() ? 1 : 0;
                horizon = 10;
                break;
            case TaskSplit::test_easy:
                n_blocks = 2;
                n_targets = 5;
                n_obstructors = rng.flip() ? 1 : 0;
                horizon = 25;
                break;
            case TaskSplit::test_hard:
                n_blocks = 4;
                n_targets = 12;
                n_obstructors = 2;
                horizon = 25;
                break;
            default:
                throw std::invalid_argument("bad split");
        }

        const double width = constants_.at("target_width");
        const double obs_margin = constants_.at("block_obstructor_margin");
        const double blk_margin = constants_.at("block_block_margin");
        Task task;
        task.horizon = horizon;

        // Targets sit centered in equal slots of the unit axis.
        std::vector<std::pair<double, double>> spans;
        const double slot = 1.0 / n_targets;
        for (int i = 0; i < n_targets; ++i) {
            const double start = i * slot + 0.5 * (slot - width);
            spans.emplace_back(start, start + width);
        }

        // Obstructors cover distinct target spans.
        std::vector<int> tids(n_targets);
        for (int i = 0; i < n_targets; ++i) tids[i] = i;
        rng.shuffle(tids);
        std::vector<std::pair<double, double>> obs_spans;
        for (int i = 0; i < n_obstructors; ++i) obs_spans.push_back(spans[tids[i]]);

        // Blocks start in free space, separated from everything pickable.
        std::vector<double> poses;
        int guard = 0;
        while (static_cast<int>(poses.size()) < n_blocks) {
            if (++guard > 100000) throw std::runtime_error("pickplace1d task generation stuck");
            const double p = rng.uniform();
            bool ok = true;
            for (const auto& [s0, s1] : spans) {
                if (span_distance(p, s0, s1) < 1e-9) { ok = false; break; }
            }
            if (ok) {
                for (const auto& [s0, s1] : obs_spans) {
                    if (span_distance(p, s0, s1) < obs_margin) { ok = false; break; }
                }
            }
            if (ok) {
                for (double q : poses) {
                    if (std::abs(p - q) < blk_margin) { ok = false; break; }
                }
            }
            if (ok) poses.push_back(p);
        }

        for (int i = 0; i < n_blocks; ++i) {
            task.init.add_object(Object{"b" + std::to_string(i), block_t_}, {poses[i]});
        }
        for (int i = 0; i < n_targets; ++i) {
            task.init.add_object(Object{"t" + std::to_string(i), target_t_},
                                 {spans[i].first, spans[i].second});
        }
        for (int i = 0; i < n_obstructors; ++i) {
            task.init.add_object(Object{"o" + std::to_string(i), obstructor_t_},
                                 {obs_spans[i].first, obs_spans[i].second, 0.0});
        }

        // Goal: each block on a distinct target.
        std::vector<int> goal_ids(tids);
        rng.shuffle(goal_ids);
        const Predicate* on = predicate("On");
        for (int i = 0; i < n_blocks; ++i) {
            task.goal.push_back(GroundAtom{
                on,
                {Object{"b" + std::to_string(i), block_t_},
                 Object{"t" + std::to_string(goal_ids[i]), target_t_}}});
        }
        std::sort(task.goal.begin(), task.goal.end());
        return task;
    }

private:
    static double span_distance(double x, double lo, double hi) {
        if (x < lo) return lo - x;
        if (x > hi) return x - hi;
        return 0.0;
    }

    bool on_some_target(const State& s, const Object& b) const {
        const double pose = s.attrs(b)[0];
        for (const Object& t : s.objects_of_type(target_t_)) {
            const auto at = s.attrs(t);
            if (at[0] <= pose && pose <= at[1]) return true;
        }
        return false;
    }

    const ObjType* block_t_;
    const ObjType* target_t_;
    const ObjType* obstructor_t_;
};

}  // namespace

std::unique_ptr<Env> make_pickplace1d_env() { return std::make_unique<PickPlace1dEnv>(); }

}  // namespace nsrtplan
