#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "nsrtplan/env.hpp"

using namespace nsrtplan;

namespace {

bool has_atom(const AbstractState& abs, const std::string& text) {
    for (const GroundAtom& a : abs.atoms()) {
        if (a.str() == text) return true;
    }
    return false;
}

bool same_state(const State& a, const State& b) {
    if (a.objects() != b.objects()) return false;
    for (const Object& o : a.objects()) {
        const auto x = a.attrs(o), y = b.attrs(o);
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] != y[i]) return false;  // bitwise
        }
    }
    return true;
}

}  // namespace

TEST_CASE("every environment steps deterministically bit-for-bit") {
    for (const std::string& name : env_names()) {
        CAPTURE(name);
        auto env = make_env(name);
        Rng rng(3);
        const Task task = env->generate_task(TaskSplit::train, rng);
        State s = task.init;
        for (int t = 0; t < 6; ++t) {
            const auto a = env->sample_prior(s, rng);
            const StepResult r1 = env->step(s, a);
            const StepResult r2 = env->step(s, a);
            CHECK(same_state(r1.next, r2.next));
            CHECK(r1.failure == r2.failure);
            if (r1.failure) break;
            s = r1.next;
        }
    }
}

TEST_CASE("task generation is reproducible per seed and rejects bad actions") {
    for (const std::string& name : env_names()) {
        CAPTURE(name);
        auto env = make_env(name);
        Rng a(42), b(42);
        const Task t1 = env->generate_task(TaskSplit::test_hard, a);
        const Task t2 = env->generate_task(TaskSplit::test_hard, b);
        CHECK(same_state(t1.init, t2.init));
        CHECK(t1.goal == t2.goal);
        CHECK(t1.horizon == t2.horizon);
        CHECK_FALSE(goal_holds(t1.init, t1.goal));
        CHECK_THROWS(env->step(t1.init, std::vector<double>(env->action_dim() + 1, 0.0)));
    }
}

TEST_CASE("constants dump is versioned and lists pinned values") {
    auto env = make_env("blocks");
    const std::string text = format_env_constants(*env);
    CHECK(text.find("blocks") != std::string::npos);
    CHECK(text.find("pick_tolerance") != std::string::npos);
    CHECK(text.rfind("nsrtplan_envconfig 1", 0) == 0);
}

TEST_CASE("pickplace1d moves blocks, removes obstructors, reports collisions") {
    auto env = make_env("pickplace1d");
    const ObjType* block = env->type("block");
    const ObjType* target = env->type("target");
    const ObjType* obstructor = env->type("obstructor");

    State s;
    s.add_object(Object{"b0", block}, {0.30});
    s.add_object(Object{"t0", target}, {0.50, 0.54});
    s.add_object(Object{"t1", target}, {0.70, 0.74});
    s.add_object(Object{"o0", obstructor}, {0.69, 0.75, 0.0});

    const AbstractState abs = env->abstract(s);
    CHECK(has_atom(abs, "InFreeSpace(b0)"));
    CHECK_FALSE(has_atom(abs, "IsRemoved(o0)"));

    SUBCASE("placing on a free target works") {
        const StepResult r = env->step(s, {0.30, 0.52});
        CHECK_FALSE(r.failure);
        CHECK(has_atom(env->abstract(r.next), "On(b0,t0)"));
    }
    SUBCASE("placing onto a covered target collides with the obstructor") {
        const StepResult r = env->step(s, {0.30, 0.72});
        REQUIRE(r.failure);
        REQUIRE(r.failure_objects.size() == 2);
        CHECK(r.failure_objects[0].name == "b0");
        CHECK(r.failure_objects[1].name == "o0");
    }
    SUBCASE("moving the obstructor carries it off-axis") {
        const StepResult r = env->step(s, {0.71, 0.10});
        CHECK_FALSE(r.failure);
        CHECK(has_atom(env->abstract(r.next), "IsRemoved(o0)"));
        // And the formerly covered target is now a legal destination.
        const StepResult r2 = env->step(r.next, {0.30, 0.72});
        CHECK_FALSE(r2.failure);
        CHECK(has_atom(env->abstract(r2.next), "On(b0,t1)"));
    }
    SUBCASE("picks farther than the tolerance do nothing") {
        const StepResult r = env->step(s, {0.40, 0.52});
        CHECK(same_state(r.next, s));
    }
}

TEST_CASE("pickplace1d tasks put every block on a distinct goal target") {
    auto env = make_env("pickplace1d");
    Rng rng(5);
    const Task task = env->generate_task(TaskSplit::test_hard, rng);
    CHECK(task.goal.size() == 4);
    std::vector<std::string> targets;
    for (const GroundAtom& g : task.goal) {
        CHECK(g.pred->name == "On");
        targets.push_back(g.args[1].name);
    }
    std::sort(targets.begin(), targets.end());
    CHECK(std::adjacent_find(targets.begin(), targets.end()) == targets.end());
}

TEST_CASE("kitchen serves drinks and ignores too-heavy cups") {
    auto env = make_env("kitchen");
    const ObjType* cup = env->type("cup");
    const ObjType* customer = env->type("customer");
    const ObjType* robot = env->type("robot");

    State s;
    // x y z rx ry rz mass liquid served held
    s.add_object(Object{"cup0", cup}, {0.2, 0.2, 0.0, 0, 0, 0, 0.3, 0.0, 0.0, 0.0});
    s.add_object(Object{"cup1", cup}, {0.8, 0.8, 0.0, 0, 0, 0, 0.95, 0.0, 0.0, 0.0});
    s.add_object(Object{"cust0", customer}, {3.0, 0.0});
    s.add_object(Object{"robby", robot}, {1.0});

    SUBCASE("light cup: pick, pour, serve") {
        StepResult r = env->step(s, {0.2, 0.2, 0.0, -9.0, -9.0});
        CHECK(has_atom(env->abstract(r.next), "Holding(cup0)"));
        r = env->step(r.next, {-5.0, -5.0, -5.0, -9.0, 2.0});  // pour wine
        CHECK(has_atom(env->abstract(r.next), "CupHasWine(cup0)"));
        r = env->step(r.next, {-5.0, -5.0, -5.0, 3.0, -9.0});  // serve customer 3
        const AbstractState abs = env->abstract(r.next);
        CHECK(has_atom(abs, "CustomerHasWine(cust0)"));
        CHECK_FALSE(has_atom(abs, "CupUnserved(cup0)"));
        CHECK_FALSE(has_atom(abs, "Holding(cup0)"));
    }
    SUBCASE("heavy cup: the same pick is a silent no-op") {
        const StepResult r = env->step(s, {0.8, 0.8, 0.0, -9.0, -9.0});
        CHECK_FALSE(r.failure);
        CHECK(same_state(r.next, s));
    }
    SUBCASE("kitchen produces no failure transitions at all") {
        Rng rng(9);
        for (int ep = 0; ep < 20; ++ep) {
            const Task task = env->generate_task(TaskSplit::train, rng);
            State st = task.init;
            for (int t = 0; t < task.horizon; ++t) {
                const StepResult r = env->step(st, env->sample_prior(st, rng));
                REQUIRE_FALSE(r.failure);
                st = r.next;
            }
        }
    }
}

TEST_CASE("blocks stacks, unstacks, and collides on crowded table spots") {
    auto env = make_env("blocks");
    const ObjType* block = env->type("block");
    const ObjType* robot = env->type("robot");
    const double size = 0.1;

    State s;
    // x y z held above
    s.add_object(Object{"blk0", block}, {0.3, 0.3, 0.5 * size, 0.0, 0.0});
    s.add_object(Object{"blk1", block}, {0.6, 0.6, 0.5 * size, 0.0, 1.0});
    s.add_object(Object{"blk2", block}, {0.6, 0.6, 1.5 * size, 0.0, 0.0});
    s.add_object(Object{"robby", robot}, {1.0});

    const AbstractState abs = env->abstract(s);
    CHECK(has_atom(abs, "On(blk2,blk1)"));
    CHECK(has_atom(abs, "OnTable(blk0)"));
    CHECK(has_atom(abs, "Clear(blk0)"));
    CHECK_FALSE(has_atom(abs, "Clear(blk1)"));

    SUBCASE("unstack then stack elsewhere") {
        StepResult r = env->step(s, {0.6, 0.6, 1.5 * size, 1.0});
        AbstractState a1 = env->abstract(r.next);
        CHECK(has_atom(a1, "Holding(blk2)"));
        CHECK(has_atom(a1, "Clear(blk1)"));
        r = env->step(r.next, {0.3, 0.3, 1.5 * size, 0.2});
        AbstractState a2 = env->abstract(r.next);
        CHECK(has_atom(a2, "On(blk2,blk0)"));
        CHECK(has_atom(a2, "GripperOpen(robby)"));
    }
    SUBCASE("buried blocks cannot be picked") {
        const StepResult r = env->step(s, {0.6, 0.6, 0.5 * size, 1.0});
        CHECK(same_state(r.next, s));
    }
    SUBCASE("table placement onto an occupied spot fails") {
        StepResult r = env->step(s, {0.3, 0.3, 0.5 * size, 1.0});  // pick blk0
        REQUIRE(has_atom(env->abstract(r.next), "Holding(blk0)"));
        r = env->step(r.next, {0.6, 0.6, 0.5 * size, 0.2});
        REQUIRE(r.failure);
        CHECK(r.failure_objects[0].name == "blk0");
        CHECK(r.failure_objects[1].name == "blk1");
    }
}

TEST_CASE("painting runs wash/dry/paint and hides the lid hazard") {
    auto env = make_env("painting");
    const ObjType* widget = env->type("widget");
    const ObjType* box = env->type("box");
    const ObjType* shelf = env->type("shelf");
    const ObjType* lid = env->type("lid");
    const ObjType* robot = env->type("robot");

    State s;
    // x y z color wet dirty held
    s.add_object(Object{"w0", widget}, {0.2, 0.5, 0.0, 0.0, 0.0, 1.0, 0.0});
    s.add_object(Object{"box", box}, {0.75});
    s.add_object(Object{"shelf", shelf}, {0.25});
    s.add_object(Object{"lid", lid}, {0.6});
    s.add_object(Object{"robby", robot}, {0.0, 1.0});

    auto pick = [&](double rot) {
        return env->step(s, {0.2, 0.5, 0.0, rot, 0.1, 0.0, 0.0, -9.0});
    };

    SUBCASE("full pipeline into the box, dodging the lid") {
        StepResult r = pick(1.0);  // top grasp
        AbstractState a = env->abstract(r.next);
        CHECK(has_atom(a, "Holding(w0)"));
        CHECK(has_atom(a, "HoldingTop(w0)"));
        r = env->step(r.next, {0, 0, 0, 0, 0, 1.0, 0.0, -9.0});  // wash
        CHECK(has_atom(env->abstract(r.next), "IsWet(w0)"));
        CHECK(has_atom(env->abstract(r.next), "IsClean(w0)"));
        r = env->step(r.next, {0, 0, 0, 0, 0, 0.0, 1.0, -9.0});  // dry
        CHECK(has_atom(env->abstract(r.next), "IsDry(w0)"));
        r = env->step(r.next, {0, 0, 0, 0, 0, 0.0, 0.0, 0.75});  // paint box color
        CHECK(has_atom(env->abstract(r.next), "IsBoxColor(w0)"));

        // Lid open 0.6 covers box x in [0.6, 0.68].
        const StepResult hit = env->step(r.next, {0.65, 0.5, 0.0, 0, 1.0, 0, 0, -9.0});
        REQUIRE(hit.failure);
        CHECK(hit.failure_objects[0].name == "w0");
        CHECK(hit.failure_objects[1].name == "lid");

        const StepResult ok = env->step(r.next, {0.75, 0.5, 0.0, 0, 1.0, 0, 0, -9.0});
        CHECK_FALSE(ok.failure);
        CHECK(has_atom(env->abstract(ok.next), "InBox(w0)"));
    }
    SUBCASE("shelf placements demand a side grasp") {
        StepResult r = pick(1.0);  // wrong: top grasp
        StepResult miss = env->step(r.next, {0.95, 0.5, 0.0, 0, 1.0, 0, 0, -9.0});
        CHECK(has_atom(env->abstract(miss.next), "Holding(w0)"));  // nothing released

        r = pick(0.0);  // side grasp
        CHECK(has_atom(env->abstract(r.next), "HoldingSide(w0)"));
        StepResult put = env->step(r.next, {0.95, 0.5, 0.0, 0, 1.0, 0, 0, -9.0});
        CHECK(has_atom(env->abstract(put.next), "InShelf(w0)"));
    }
    SUBCASE("painting a dirty widget does nothing") {
        StepResult r = pick(1.0);
        r = env->step(r.next, {0, 0, 0, 0, 0, 0, 0, 0.75});
        CHECK_FALSE(has_atom(env->abstract(r.next), "IsBoxColor(w0)"));
    }
    SUBCASE("grabbing the lid swings it fully open") {
        const StepResult r = env->step(s, {0.7, 0.5, 0.0, 0, 0.1, 0, 0, -9.0});
        CHECK(r.next.attrs(Object{"lid", lid})[0] == doctest::Approx(1.0));
        // A fully open lid uncovers the whole box opening.
        const StepResult p = env->step(r.next, {0.2, 0.5, 0.0, 1.0, 0.1, 0, 0, -9.0});
        const StepResult put = env->step(p.next, {0.62, 0.5, 0.0, 0, 1.0, 0, 0, -9.0});
        CHECK_FALSE(put.failure);
    }
}

TEST_CASE("painting goals pair a color with the matching receptacle") {
    auto env = make_env("painting");
    Rng rng(17);
    const Task task = env->generate_task(TaskSplit::test_hard, rng);
    CHECK(task.horizon == 60);
    int n_box = 0, n_shelf = 0;
    for (const GroundAtom& g : task.goal) {
        if (g.pred->name == "InBox" || g.pred->name == "IsBoxColor") ++n_box;
        if (g.pred->name == "InShelf" || g.pred->name == "IsShelfColor") ++n_shelf;
    }
    CHECK(n_box % 2 == 0);
    CHECK(n_shelf % 2 == 0);
    CHECK(n_box + n_shelf == 20);
    CHECK(task.goal.size() == 20);
}
