#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "nsrtplan/nsrt.hpp"

using namespace nsrtplan;

namespace {

const ObjType thing{"thing", 2};
const ObjType spot{"spot", 1};
const Predicate P{"P", {&thing}, nullptr};
const Predicate Q{"Q", {&thing, &thing}, nullptr};

const Variable vx{"?x", &thing};
const Variable vy{"?y", &thing};

// Move(?x, ?y): pre {P(?x)}, add {Q(?x,?y)}, del {P(?x)}.
Nsrt make_move() {
    Nsrt op;
    op.name = "Move";
    op.params = {vx, vy};
    op.preconditions = {LiftedAtom{&P, {vx}}};
    op.add_effects = {LiftedAtom{&Q, {vx, vy}}};
    op.del_effects = {LiftedAtom{&P, {vx}}};
    op.action_dim = 1;
    return op;
}

State two_things() {
    State s;
    s.add_object(Object{"a", &thing}, {1.0, 2.0});
    s.add_object(Object{"b", &thing}, {3.0, 4.0});
    return s;
}

}  // namespace

TEST_CASE("grounding enumerates distinct typed bindings in odometer order") {
    const ObjType block{"block", 1};
    const ObjType target{"target", 2};
    Nsrt op;
    op.name = "Shuffle";
    op.params = {Variable{"?x", &block}, Variable{"?y", &target}, Variable{"?z", &block}};

    State s;
    for (const char* n : {"b0", "b1", "b2"}) s.add_object(Object{n, &block}, {0.0});
    for (const char* n : {"t0", "t1"}) s.add_object(Object{n, &target}, {0.0, 1.0});

    const auto gs = ground(op, s);
    REQUIRE(gs.size() == 12);  // 3 * 2 * 2: ?z never aliases ?x
    CHECK(gs[0].str() == "Shuffle(b0, t0, b1)");
    CHECK(gs[1].str() == "Shuffle(b0, t0, b2)");
    CHECK(gs[2].str() == "Shuffle(b0, t1, b1)");
    CHECK(gs[4].str() == "Shuffle(b1, t0, b0)");
    CHECK(gs.back().str() == "Shuffle(b2, t1, b1)");
    for (const GroundNsrt& g : gs) {
        CHECK(g.binding[0].name != g.binding[2].name);
        CHECK(g.binding[1].type == &target);
    }
}

TEST_CASE("applicability, symbolic step, and exact-delta coverage") {
    const Nsrt op = make_move();
    const State s = two_things();
    const auto gs = ground(op, s);
    REQUIRE(gs.size() == 2);
    const GroundNsrt& ab = gs[0];  // (a, b)
    const GroundNsrt& ba = gs[1];  // (b, a)

    const Object a{"a", &thing}, b{"b", &thing};
    const AbstractState abs{{GroundAtom{&P, {a}}}};

    CHECK(applicable(ab, abs));
    CHECK_FALSE(applicable(ba, abs));

    CHECK(ground_preconditions(ab) == std::vector<GroundAtom>{GroundAtom{&P, {a}}});
    CHECK(ab.sigma().at(vx) == a);
    CHECK(ab.sigma().at(vy) == b);

    const AbstractState next = abstract_step(ab, abs);
    CHECK(next == AbstractState{{GroundAtom{&Q, {a, b}}}});

    CHECK(covers(ab, abs, next));
    CHECK_FALSE(covers(ba, abs, next));
    // Same add without the delete: the observed delta no longer matches.
    const AbstractState sloppy{{GroundAtom{&P, {a}}, GroundAtom{&Q, {a, b}}}};
    CHECK_FALSE(covers(ab, abs, sloppy));
}

TEST_CASE("context vectors concatenate attribute blocks in parameter order") {
    State s = two_things();
    s.add_object(Object{"s0", &spot}, {7.0});

    Nsrt op;
    op.params = {vx, Variable{"?y", &spot}};
    CHECK(op.context_dim() == 3);
    const GroundNsrt g{&op, {Object{"a", &thing}, Object{"s0", &spot}}};
    CHECK(context_vector(g, s) == std::vector<double>{1.0, 2.0, 7.0});

    Nsrt rev;
    rev.params = {Variable{"?y", &spot}, vx};
    const GroundNsrt h{&rev, {Object{"s0", &spot}, Object{"b", &thing}}};
    CHECK(context_vector(h, s) == std::vector<double>{7.0, 3.0, 4.0});
}

TEST_CASE("untrained heads fall back to safe defaults") {
    Nsrt op = make_move();
    op.action_dim = 2;
    const std::vector<double> ctx{1.0, 2.0, 3.0, 4.0};
    Rng rng(1);

    CHECK(predict_next_context(op, ctx, {0.5, 0.5}) == ctx);
    CHECK(applicability_prob(op, ctx, {0.5, 0.5}) == 1.0);
    CHECK_FALSE(sample_action(op, ctx, rng).has_value());
    CHECK(sample_action_raw(op, ctx, rng) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("transition head overwrites exactly the changed slots") {
    Rng rng(2);
    Nsrt op = make_move();
    op.changed_slots = {2};
    op.transition = Mlp({5, 1}, rng);  // context 4 + action 1
    std::fill(op.transition.theta().begin(), op.transition.theta().end(), 0.0);
    op.transition.theta().back() = 9.5;  // bias-only net: constant output

    const std::vector<double> ctx{1.0, 2.0, 3.0, 4.0};
    const auto next = predict_next_context(op, ctx, {0.0});
    CHECK(next == std::vector<double>{1.0, 2.0, 9.5, 4.0});
}

TEST_CASE("the classifier gates sampled actions") {
    Rng rng(3);
    Nsrt op = make_move();
    op.action_dim = 1;
    op.sampler = Mlp({4, 2}, rng);  // context -> (mean, variance param)
    std::fill(op.sampler.theta().begin(), op.sampler.theta().end(), 0.0);
    op.sampler.theta()[8] = 0.3;   // mean bias
    op.sampler.theta()[9] = -5.0;  // variance param bias: tiny spread
    op.classifier = Mlp({5, 1}, rng);
    std::fill(op.classifier.theta().begin(), op.classifier.theta().end(), 0.0);

    const std::vector<double> ctx{0.0, 0.0, 0.0, 0.0};

    op.classifier.theta().back() = -10.0;  // reject everything
    CHECK(applicability_prob(op, ctx, {0.3}) < 0.5);
    CHECK_FALSE(sample_action(op, ctx, rng).has_value());

    op.classifier.theta().back() = 10.0;  // accept everything
    const auto a = sample_action(op, ctx, rng);
    REQUIRE(a.has_value());
    REQUIRE(a->size() == 1);
    const double sd = std::sqrt(std::exp(-5.0) - 1.0 + 1.0 + 1e-6);
    CHECK(std::abs((*a)[0] - 0.3) <= sd + 1e-12);  // clip_std = 1

    const auto raw = sample_action_raw(op, ctx, rng);
    REQUIRE(raw.size() == 1);
    CHECK(std::abs(raw[0] - 0.3) <= sd + 1e-12);
}

TEST_CASE("operators print their full signature") {
    const Nsrt op = make_move();
    CHECK(op.str() ==
          "Move(?x:thing, ?y:thing)\n"
          "  pre: {P(?x)}\n"
          "  add: {Q(?x,?y)}\n"
          "  del: {P(?x)}");

    const GroundNsrt g{&op, {Object{"a", &thing}, Object{"b", &thing}}};
    CHECK(g.str() == "Move(a, b)");
}

TEST_CASE("ground operators order by operator name then binding") {
    const Nsrt op = make_move();
    Nsrt other = make_move();
    other.name = "Zap";

    const Object a{"a", &thing}, b{"b", &thing};
    const GroundNsrt m_ab{&op, {a, b}}, m_ba{&op, {b, a}}, z_ab{&other, {a, b}};
    CHECK(m_ab < m_ba);
    CHECK(m_ba < z_ab);
    CHECK(m_ab == GroundNsrt{&op, {a, b}});
    CHECK_FALSE(m_ab == m_ba);
}
