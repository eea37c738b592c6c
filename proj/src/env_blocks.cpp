#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

#include "nsrtplan/env.hpp"

namespace nsrtplan {

namespace {

// Table-top blocks world with a continuous gripper. Action layout:
// [x, y, z, gripper]. Block attributes: xyz pose (center), held flag, and a
// flag for whether another block rests on top. Blocks stack in columns of
// side `block_size`; a held block is carried at z = holding_z.
class BlocksEnv : public Env {
public:
    BlocksEnv() {
        name_ = "blocks";
        action_dim_ = 4;
        types_ = {
            ObjType{"block", 5},  // x y z held above
            ObjType{"robot", 1},  // gripper joint
        };
        block_t_ = &types_[0];
        robot_t_ = &types_[1];
        constants_ = {
            {"block_size", 0.1},
            {"pick_tolerance", 0.05},
            {"holding_z", 1.0},
            {"table_spacing", 0.2},
            {"collision_radius", 0.02},
            {"gripper_open_threshold", 0.5},
        };

        predicates_.push_back(Predicate{
            "On", {block_t_, block_t_}, [this](const State& s, std::span<const Object> a) {
                const auto b1 = s.attrs(a[0]);
                const auto b2 = s.attrs(a[1]);
                if (b1[3] > 0.5 || b2[3] > 0.5) return false;
                const double size = constants_.at("block_size");
                return std::hypot(b1[0] - b2[0], b1[1] - b2[1]) < 0.5 * size &&
                       std::abs(b1[2] - (b2[2] + size)) < 0.5 * size;
            }});
        predicates_.push_back(Predicate{
            "OnTable", {block_t_}, [this](const State& s, std::span<const Object> a) {
                const auto b = s.attrs(a[0]);
                const double size = constants_.at("block_size");
                return b[3] <= 0.5 && std::abs(b[2] - 0.5 * size) < 0.5 * size;
            }});
        predicates_.push_back(Predicate{
            "Holding", {block_t_}, [](const State& s, std::span<const Object> a) {
                return s.attrs(a[0])[3] > 0.5;
            }});
        predicates_.push_back(Predicate{
            "Clear", {block_t_}, [](const State& s, std::span<const Object> a) {
                const auto b = s.attrs(a[0]);
                return b[3] <= 0.5 && b[4] <= 0.5;
            }});
        predicates_.push_back(Predicate{
            "GripperOpen", {robot_t_}, [this](const State& s, std::span<const Object> a) {
                return s.attrs(a[0])[0] > constants_.at("gripper_open_threshold");
            }});
    }

    StepResult step(const State& s, const std::vector<double>& action) const override {
        check_action(action);
        StepResult res{s, false, {}};
        const double tol = constants_.at("pick_tolerance");
        const double size = constants_.at("block_size");
        const Object robot = s.objects_of_type(robot_t_).at(0);

        std::optional<Object> held;
        for (const Object& b : s.objects_of_type(block_t_)) {
            if (s.attrs(b)[3] > 0.5) held = b;
        }

        if (!held) {
            // Pick: end effector near a clear block with an open-enough gripper.
            if (action[3] <= constants_.at("gripper_open_threshold")) return res;
            std::optional<Object> target;
            double best = tol + 1.0;
            for (const Object& b : s.objects_of_type(block_t_)) {
                const auto at = s.attrs(b);
                if (at[4] > 0.5) continue;  // buried
                const double d = std::hypot(action[0] - at[0], action[1] - at[1], action[2] - at[2]);
                if (d <= tol && d < best) {
                    best = d;
                    target = b;
                }
            }
            if (!target) return res;
            auto at = res.next.attrs_mut(*target);
            // Uncover whatever it was resting on.
            for (const Object& below : s.objects_of_type(block_t_)) {
                if (below == *target) continue;
                const auto bat = s.attrs(below);
                if (std::hypot(at[0] - bat[0], at[1] - bat[1]) < 0.5 * size &&
                    std::abs(at[2] - (bat[2] + size)) < 0.5 * size) {
                    res.next.attrs_mut(below)[4] = 0.0;
                }
            }
            at[2] = constants_.at("holding_z");
            at[3] = 1.0;
            res.next.attrs_mut(robot)[0] = 0.0;
            return res;
        }

        // Stack: drop position near the deposit point above a clear block.
        std::optional<Object> base;
        double best = tol + 1.0;
        for (const Object& b : s.objects_of_type(block_t_)) {
            if (b == *held) continue;
            const auto at = s.attrs(b);
            if (at[3] > 0.5 || at[4] > 0.5) continue;
            const double d =
                std::hypot(action[0] - at[0], action[1] - at[1], action[2] - (at[2] + size));
            if (d <= tol && d < best) {
                best = d;
                base = b;
            }
        }
        if (base) {
            const auto bat = s.attrs(*base);
            auto at = res.next.attrs_mut(*held);
            at[0] = bat[0];
            at[1] = bat[1];
            at[2] = bat[2] + size;
            at[3] = 0.0;
            res.next.attrs_mut(*base)[4] = 1.0;
            res.next.attrs_mut(robot)[0] = 1.0;
            return res;
        }

        // Place on table: drop position near table height.
        if (std::abs(action[2] - 0.5 * size) <= tol) {
            for (const Object& b : s.objects_of_type(block_t_)) {
                if (b == *held) continue;
                const auto at = s.attrs(b);
                if (at[3] > 0.5) continue;
                if (std::hypot(action[0] - at[0], action[1] - at[1]) <
                    constants_.at("collision_radius")) {
                    res.failure = true;
                    res.failure_objects = {*held, b};
                    return res;
                }
            }
            auto at = res.next.attrs_mut(*held);
            at[0] = action[0];
            at[1] = action[1];
            at[2] = 0.5 * size;
            at[3] = 0.0;
            res.next.attrs_mut(robot)[0] = 1.0;
        }
        return res;
    }

    std::vector<double> sample_prior(const State& s, Rng& rng) const override {
        const double size = constants_.at("block_size");
        std::optional<Object> held;
        std::vector<Object> clear;
        for (const Object& b : s.objects_of_type(block_t_)) {
            const auto at = s.attrs(b);
            if (at[3] > 0.5) held = b;
            else if (at[4] <= 0.5) clear.push_back(b);
        }
        const double jitter = 0.01;
        if (!held) {
            if (clear.empty()) return {rng.uniform(), rng.uniform(), rng.uniform(), 1.0};
            const auto at = s.attrs(rng.choice(clear));
            return {at[0] + rng.uniform(-jitter, jitter), at[1] + rng.uniform(-jitter, jitter),
                    at[2] + rng.uniform(-jitter, jitter), rng.uniform(0.6, 1.0)};
        }
        if (!clear.empty() && rng.flip()) {
            const auto at = s.attrs(rng.choice(clear));
            return {at[0] + rng.uniform(-jitter, jitter), at[1] + rng.uniform(-jitter, jitter),
                    at[2] + size + rng.uniform(-jitter, jitter), rng.uniform(0.0, 0.4)};
        }
        return {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9),
                0.5 * size + rng.uniform(-jitter, jitter), rng.uniform(0.0, 0.4)};
    }

    Task generate_task(TaskSplit split, Rng& rng) const override {
        int n_blocks, horizon;
        switch (split) {
            case TaskSplit::train:
                n_blocks = rng.flip() ? 3 : 4;
                horizon = 20;
                break;
            case TaskSplit::test_easy:
                n_blocks = 3;
                horizon = 25;
                break;
            case TaskSplit::test_hard:
                n_blocks = rng.flip() ? 5 : 6;
                horizon = 35;
                break;
            default:
                throw std::invalid_argument("bad split");
        }

        Task task;
        task.horizon = horizon;
        const double size = constants_.at("block_size");

        // Random towers for the initial configuration.
        const auto piles = random_piles(n_blocks, rng);
        std::vector<std::array<double, 2>> bases = pile_bases(piles.size(), rng);
        std::vector<std::array<double, 5>> attrs(n_blocks);
        for (std::size_t p = 0; p < piles.size(); ++p) {
            for (std::size_t lvl = 0; lvl < piles[p].size(); ++lvl) {
                const int b = piles[p][lvl];
                attrs[b] = {bases[p][0], bases[p][1], (lvl + 0.5) * size, 0.0,
                            lvl + 1 < piles[p].size() ? 1.0 : 0.0};
            }
        }
        for (int i = 0; i < n_blocks; ++i) {
            task.init.add_object(Object{"blk" + std::to_string(i), block_t_},
                                 {attrs[i][0], attrs[i][1], attrs[i][2], attrs[i][3], attrs[i][4]});
        }
        task.init.add_object(Object{"robby", robot_t_}, {1.0});

        // Random goal towers, rejected while already satisfied.
        const Predicate* on = predicate("On");
        int guard = 0;
        while (true) {
            if (++guard > 10000) throw std::runtime_error("blocks goal generation stuck");
            const auto goal_piles = random_piles(n_blocks, rng);
            std::vector<GroundAtom> goal;
            for (const auto& pile : goal_piles) {
                for (std::size_t lvl = 1; lvl < pile.size(); ++lvl) {
                    goal.push_back(GroundAtom{on,
                                              {Object{"blk" + std::to_string(pile[lvl]), block_t_},
                                               Object{"blk" + std::to_string(pile[lvl - 1]), block_t_}}});
                }
            }
            if (goal.empty()) continue;
            std::sort(goal.begin(), goal.end());
            if (!goal_holds(task.init, goal)) {
                task.goal = std::move(goal);
                break;
            }
        }
        return task;
    }

private:
    // Shuffled blocks split into random contiguous piles; bottom first.
    static std::vector<std::vector<int>> random_piles(int n, Rng& rng) {
        std::vector<int> order(n);
        for (int i = 0; i < n; ++i) order[i] = i;
        rng.shuffle(order);
        std::vector<std::vector<int>> piles;
        std::size_t at = 0;
        while (at < order.size()) {
            const std::size_t len = 1 + rng.below(order.size() - at);
            piles.emplace_back(order.begin() + at, order.begin() + at + len);
            at += len;
        }
        return piles;
    }

    std::vector<std::array<double, 2>> pile_bases(std::size_t n, Rng& rng) const {
        const double spacing = constants_.at("table_spacing");
        std::vector<std::array<double, 2>> bases;
        int guard = 0;
        while (bases.size() < n) {
            if (++guard > 100000) throw std::runtime_error("blocks layout stuck");
            std::array<double, 2> p{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
            bool ok = true;
            for (const auto& q : bases) {
                if (std::hypot(p[0] - q[0], p[1] - q[1]) < spacing) {
                    ok = false;
                    break;
                }
            }
            if (ok) bases.push_back(p);
        }
        return bases;
    }

    const ObjType* block_t_;
    const ObjType* robot_t_;
};

}  // namespace

std::unique_ptr<Env> make_blocks_env() { return std::make_unique<BlocksEnv>(); }

}  // namespace nsrtplan
