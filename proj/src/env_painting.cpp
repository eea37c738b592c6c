#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

#include "nsrtplan/env.hpp"

namespace nsrtplan {

namespace {

// Widgets are washed, dried, painted and shelved/boxed. Action layout:
// [x, y, z, rotation, gripper, water, heat, paint_color].
// The workspace is split along x into a table region, the box, and the shelf.
// Box placements demand a top grasp, shelf placements a side grasp (grasp
// orientation is fixed at pick time through the robot's rotation joint).
// The box lid covers part of the box opening depending on how far it is open;
// releasing a widget over the covered part is a collision. No predicate
// mentions the lid, so symbolic plans cannot see that hazard.
class PaintingEnv : public Env {
public:
    PaintingEnv() {
        name_ = "painting";
        action_dim_ = 8;
        types_ = {
            ObjType{"widget", 7},  // x y z color wet dirty held
            ObjType{"box", 1},     // color
            ObjType{"shelf", 1},   // color
            ObjType{"lid", 1},     // open degree
            ObjType{"robot", 2},   // rotation, gripper
        };
        widget_t_ = &types_[0];
        box_t_ = &types_[1];
        shelf_t_ = &types_[2];
        lid_t_ = &types_[3];
        robot_t_ = &types_[4];
        constants_ = {
            {"table_lo", 0.0},    {"table_hi", 0.5},
            {"box_lo", 0.6},      {"box_hi", 0.8},
            {"shelf_lo", 0.9},    {"shelf_hi", 1.1},
            {"pick_tolerance", 0.05},
            {"paint_match_tolerance", 0.05},
            {"color_tolerance", 0.025},
            {"wash_threshold", 0.5},
            {"dry_threshold", 0.5},
            {"gripper_pick_max", 0.25},
            {"gripper_place_min", 0.75},
            {"lid_x", 0.7},
            {"lid_y", 0.5},
            {"widget_spacing", 0.12},
        };

        auto in_region = [this](const char* lo, const char* hi) {
            return [this, lo, hi](const State& s, std::span<const Object> a) {
                const auto w = s.attrs(a[0]);
                return w[6] <= 0.5 && constants_.at(lo) <= w[0] && w[0] <= constants_.at(hi);
            };
        };
        predicates_.push_back(Predicate{"OnTable", {widget_t_}, in_region("table_lo", "table_hi")});
        predicates_.push_back(Predicate{"InBox", {widget_t_}, in_region("box_lo", "box_hi")});
        predicates_.push_back(Predicate{"InShelf", {widget_t_}, in_region("shelf_lo", "shelf_hi")});
        predicates_.push_back(Predicate{
            "Holding", {widget_t_}, [](const State& s, std::span<const Object> a) {
                return s.attrs(a[0])[6] > 0.5;
            }});
        auto holding_rot = [this](bool top) {
            return [this, top](const State& s, std::span<const Object> a) {
                if (s.attrs(a[0])[6] <= 0.5) return false;
                const Object robot = s.objects_of_type(robot_t_).at(0);
                return (s.attrs(robot)[0] >= 0.5) == top;
            };
        };
        predicates_.push_back(Predicate{"HoldingTop", {widget_t_}, holding_rot(true)});
        predicates_.push_back(Predicate{"HoldingSide", {widget_t_}, holding_rot(false)});
        predicates_.push_back(Predicate{
            "IsDirty", {widget_t_}, [](const State& s, std::span<const Object> a) {
                return s.attrs(a[0])[5] > 0.5;
            }});
        predicates_.push_back(Predicate{
            "IsClean", {widget_t_}, [](const State& s, std::span<const Object> a) {
                return s.attrs(a[0])[5] <= 0.5;
            }});
        predicates_.push_back(Predicate{
            "IsWet", {widget_t_}, [](const State& s, std::span<const Object> a) {
                return s.attrs(a[0])[4] > 0.5;
            }});
        predicates_.push_back(Predicate{
            "IsDry", {widget_t_}, [](const State& s, std::span<const Object> a) {
                return s.attrs(a[0])[4] <= 0.5;
            }});
        predicates_.push_back(Predicate{
            "IsBlank", {widget_t_}, [](const State& s, std::span<const Object> a) {
                return s.attrs(a[0])[3] <= 0.05;
            }});
        auto color_match = [this](const ObjType* receptacle) {
            return [this, receptacle](const State& s, std::span<const Object> a) {
                const auto rc = s.objects_of_type(receptacle);
                return std::abs(s.attrs(a[0])[3] - s.attrs(rc.at(0))[0]) <=
                       constants_.at("color_tolerance");
            };
        };
        predicates_.push_back(Predicate{"IsBoxColor", {widget_t_}, color_match(box_t_)});
        predicates_.push_back(Predicate{"IsShelfColor", {widget_t_}, color_match(shelf_t_)});
        predicates_.push_back(Predicate{
            "GripperOpen", {robot_t_}, [](const State& s, std::span<const Object> a) {
                return s.attrs(a[0])[1] > 0.5;
            }});
    }

    StepResult step(const State& s, const std::vector<double>& action) const override {
        check_action(action);
        StepResult res{s, false, {}};
        const Object robot = s.objects_of_type(robot_t_).at(0);
        const Object lid = s.objects_of_type(lid_t_).at(0);

        std::optional<Object> held;
        for (const Object& w : s.objects_of_type(widget_t_)) {
            if (s.attrs(w)[6] > 0.5) held = w;
        }

        if (action[5] >= constants_.at("wash_threshold")) {
            if (held) {
                auto at = res.next.attrs_mut(*held);
                at[5] = 0.0;
                at[4] = 1.0;
            }
            return res;
        }
        if (action[6] >= constants_.at("dry_threshold")) {
            if (held) res.next.attrs_mut(*held)[4] = 0.0;
            return res;
        }
        const double paint = action[7];
        const double match_tol = constants_.at("paint_match_tolerance");
        for (const ObjType* rt : {box_t_, shelf_t_}) {
            const double color = s.attrs(s.objects_of_type(rt).at(0))[0];
            if (std::abs(paint - color) <= match_tol) {
                if (held) {
                    auto at = res.next.attrs_mut(*held);
                    // Painting needs a washed and dried surface.
                    if (at[4] <= 0.5 && at[5] <= 0.5) at[3] = color;
                }
                return res;
            }
        }

        if (!held && action[4] <= constants_.at("gripper_pick_max")) {
            // Pick the nearest widget, or the lid (which just opens it).
            const double tol = constants_.at("pick_tolerance");
            std::optional<Object> target;
            bool lid_target = false;
            double best = tol + 1.0;
            for (const Object& w : s.objects_of_type(widget_t_)) {
                const auto at = s.attrs(w);
                const double d = std::hypot(action[0] - at[0], action[1] - at[1], action[2] - at[2]);
                if (d <= tol && d < best) {
                    best = d;
                    target = w;
                }
            }
            const double dl = std::hypot(action[0] - constants_.at("lid_x"),
                                         action[1] - constants_.at("lid_y"), action[2]);
            if (dl <= tol && dl < best) {
                target.reset();
                lid_target = true;
            }
            if (lid_target) {
                res.next.attrs_mut(lid)[0] = 1.0;
            } else if (target) {
                res.next.attrs_mut(*target)[6] = 1.0;
                auto rat = res.next.attrs_mut(robot);
                rat[0] = action[3] >= 0.5 ? 1.0 : 0.0;
                rat[1] = 0.0;
            }
            return res;
        }

        if (held && action[4] >= constants_.at("gripper_place_min")) {
            const double x = action[0];
            const double rot = s.attrs(robot)[0];
            const bool in = [&](const char* lo, const char* hi) {
                return constants_.at(lo) <= x && x <= constants_.at(hi);
            }("box_lo", "box_hi");
            if (in) {
                if (rot < 0.5) return res;  // box demands a top grasp
                const double open = s.attrs(lid)[0];
                const double covered_hi =
                    constants_.at("box_lo") +
                    (1.0 - open) * (constants_.at("box_hi") - constants_.at("box_lo"));
                if (x <= covered_hi) {
                    res.failure = true;
                    res.failure_objects = {*held, lid};
                    return res;
                }
                release(res.next, *held, robot, x, action[1]);
                return res;
            }
            if (constants_.at("shelf_lo") <= x && x <= constants_.at("shelf_hi")) {
                if (rot >= 0.5) return res;  // shelf demands a side grasp
                release(res.next, *held, robot, x, action[1]);
                return res;
            }
            if (constants_.at("table_lo") <= x && x <= constants_.at("table_hi")) {
                release(res.next, *held, robot, x, action[1]);
            }
        }
        return res;
    }

    std::vector<double> sample_prior(const State& s, Rng& rng) const override {
        std::optional<Object> held;
        for (const Object& w : s.objects_of_type(widget_t_)) {
            if (s.attrs(w)[6] > 0.5) held = w;
        }
        const double j = 0.01;
        if (!held) {
            if (rng.flip(0.1)) {
                return {constants_.at("lid_x") + rng.uniform(-j, j),
                        constants_.at("lid_y") + rng.uniform(-j, j),
                        rng.uniform(-j, j),
                        rng.uniform(),
                        rng.uniform(0.0, 0.2),
                        0.0, 0.0, -1.0};
            }
            const auto widgets = s.objects_of_type(widget_t_);
            const auto at = s.attrs(widgets[rng.index(widgets.size())]);
            const double rot = rng.flip() ? rng.uniform(0.55, 1.0) : rng.uniform(0.0, 0.45);
            return {at[0] + rng.uniform(-j, j), at[1] + rng.uniform(-j, j),
                    at[2] + rng.uniform(-j, j), rot, rng.uniform(0.0, 0.2), 0.0, 0.0, -1.0};
        }
        switch (rng.index(7)) {
            case 0:  // wash
                return {-1, -1, -1, 0, 0.5, rng.uniform(0.6, 1.0), 0.0, -1.0};
            case 1:  // dry
                return {-1, -1, -1, 0, 0.5, 0.0, rng.uniform(0.6, 1.0), -1.0};
            case 2: {  // paint toward the box color
                const double c = s.attrs(s.objects_of_type(box_t_).at(0))[0];
                return {-1, -1, -1, 0, 0.5, 0.0, 0.0, c + rng.uniform(-0.03, 0.03)};
            }
            case 3: {  // paint toward the shelf color
                const double c = s.attrs(s.objects_of_type(shelf_t_).at(0))[0];
                return {-1, -1, -1, 0, 0.5, 0.0, 0.0, c + rng.uniform(-0.03, 0.03)};
            }
            case 4:  // place into the box
                return {rng.uniform(constants_.at("box_lo"), constants_.at("box_hi")),
                        rng.uniform(), rng.uniform(-j, j), 0, rng.uniform(0.8, 1.0), 0, 0, -1.0};
            case 5:  // place onto the shelf
                return {rng.uniform(constants_.at("shelf_lo"), constants_.at("shelf_hi")),
                        rng.uniform(), rng.uniform(-j, j), 0, rng.uniform(0.8, 1.0), 0, 0, -1.0};
            default:  // place back on the table
                return {rng.uniform(0.05, 0.45), rng.uniform(0.05, 0.95), rng.uniform(-j, j), 0,
                        rng.uniform(0.8, 1.0), 0, 0, -1.0};
        }
    }

    Task generate_task(TaskSplit split, Rng& rng) const override {
        int n_widgets, horizon;
        switch (split) {
            case TaskSplit::train:
                n_widgets = rng.flip() ? 2 : 3;
                horizon = 18;
                break;
            case TaskSplit::test_easy:
                n_widgets = 1;
                horizon = 6;
                break;
            case TaskSplit::test_hard:
                n_widgets = 10;
                horizon = 60;
                break;
            default:
                throw std::invalid_argument("bad split");
        }

        Task task;
        task.horizon = horizon;
        const double spacing = constants_.at("widget_spacing");

        std::vector<std::array<double, 2>> spots;
        int guard = 0;
        while (static_cast<int>(spots.size()) < n_widgets) {
            if (++guard > 200000) throw std::runtime_error("painting task generation stuck");
            std::array<double, 2> p{rng.uniform(0.05, 0.45), rng.uniform(0.05, 0.95)};
            bool ok = true;
            for (const auto& q : spots) {
                if (std::hypot(p[0] - q[0], p[1] - q[1]) < spacing) {
                    ok = false;
                    break;
                }
            }
            if (ok) spots.push_back(p);
        }

        for (int i = 0; i < n_widgets; ++i) {
            double wet = 0.0, dirty = 0.0;
            switch (rng.index(3)) {
                case 0: dirty = 1.0; break;
                case 1: wet = 1.0; break;
                default: break;
            }
            task.init.add_object(Object{"w" + std::to_string(i), widget_t_},
                                 {spots[i][0], spots[i][1], 0.0, 0.0, wet, dirty, 0.0});
        }
        task.init.add_object(Object{"box", box_t_}, {rng.uniform(0.7, 0.8)});
        task.init.add_object(Object{"shelf", shelf_t_}, {rng.uniform(0.2, 0.3)});
        task.init.add_object(Object{"lid", lid_t_}, {rng.uniform(0.55, 0.95)});
        task.init.add_object(Object{"robby", robot_t_}, {0.0, 1.0});

        for (int i = 0; i < n_widgets; ++i) {
            const Object w{"w" + std::to_string(i), widget_t_};
            if (rng.flip()) {
                task.goal.push_back(GroundAtom{predicate("IsBoxColor"), {w}});
                task.goal.push_back(GroundAtom{predicate("InBox"), {w}});
            } else {
                task.goal.push_back(GroundAtom{predicate("IsShelfColor"), {w}});
                task.goal.push_back(GroundAtom{predicate("InShelf"), {w}});
            }
        }
        std::sort(task.goal.begin(), task.goal.end());
        return task;
    }

private:
    static void release(State& next, const Object& held, const Object& robot, double x, double y) {
        auto at = next.attrs_mut(held);
        at[0] = x;
        at[1] = y;
        at[2] = 0.0;
        at[6] = 0.0;
        next.attrs_mut(robot)[1] = 1.0;
    }

    const ObjType* widget_t_;
    const ObjType* box_t_;
    const ObjType* shelf_t_;
    const ObjType* lid_t_;
    const ObjType* robot_t_;
};

}  // namespace

std::unique_ptr<Env> make_painting_env() { return std::make_unique<PaintingEnv>(); }

}  // namespace nsrtplan
