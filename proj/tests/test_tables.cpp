#include <doctest.h>

#include <cmath>

#include "hvlab/partition.hpp"
#include "hvlab/tables.hpp"
#include "support.hpp"

using namespace hvlab;
using hvlab::testing::exact_table;

namespace {

EventRecord event(int x, int y, UnitVector lambda = UnitVector::z_axis())
{
    EventRecord r;
    r.lambda = lambda;
    r.x = static_cast<std::int8_t>(x);
    r.y = static_cast<std::int8_t>(y);
    return r;
}

}  // namespace

TEST_CASE("joint table validation")
{
    std::vector<Variable> const v{{"X", {"-1", "+1"}}};
    CHECK_NOTHROW(JointTable(v, {0.5, 0.5}));
    CHECK_THROWS_AS(JointTable(v, {0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(JointTable(v, {1.5, -0.5}), std::invalid_argument);
    CHECK_THROWS_AS(JointTable(v, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(JointTable({{"X", {"a", "a"}}}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(JointTable({{"X", {"a"}}, {"X", {"b"}}}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(JointTable({{"X", {}}}, {}), std::invalid_argument);
    CHECK_THROWS_AS(JointTable(v, {0.5, 0.5}, 0.0), std::invalid_argument);

    JointTable const t({{"A", {"a0", "a1"}}, {"X", {"-1", "+1"}}}, {0.1, 0.2, 0.3, 0.4});
    CHECK(t.is_exact());
    CHECK(t.at({1, 0}) == doctest::Approx(0.3));
    CHECK(t.variable_index("X") == 1);
    CHECK(t.label_index(0, "a1") == 1);
    CHECK_THROWS_AS(t.variable_index("Q"), std::out_of_range);
    CHECK_THROWS_AS(t.label_index(0, "a9"), std::out_of_range);
}

TEST_CASE("two opposite events give P(x = +1) = 1/2")
{
    auto const grid = SettingsGrid::single_pair(0.0);
    std::vector<EventRecord> const events{event(1, -1), event(-1, 1)};
    auto const t = build_table(events, grid, LambdaPartition::trivial());
    auto const px = marginal(t, {"X"});
    CHECK(px.probability({{"X", "+1"}}) == doctest::Approx(0.5));
    CHECK(t.sample_count() == 2.0);
    CHECK(t.variables()[2].alphabet == std::vector<std::string>{kObserveLambda});
    CHECK_THROWS_AS(build_table(std::vector<EventRecord>{}, grid, LambdaPartition::trivial()), std::invalid_argument);
}

TEST_CASE("gr at omega = 0 gives x = -y with probability one")
{
    RunConfig cfg;
    cfg.model = Model::gr();
    cfg.grid = SettingsGrid::single_pair(0.0);
    cfg.samples = 100000;
    cfg.seed = 41;
    auto const t = build_table(cfg, LambdaPartition::for_model(cfg.model, cfg.grid));
    auto const xy = marginal(t, {"X", "Y"});
    CHECK(xy.probability({{"X", "+1"}, {"Y", "-1"}}) + xy.probability({{"X", "-1"}, {"Y", "+1"}}) == 1.0);
    double sum = 0.0;
    for (double p : t.probabilities())
    {
        sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("conditionals on exact tables")
{
    // uniform independent
    auto const u = exact_table(2, 2, 1, 3, [](auto, auto, auto, int, int, auto) { return 1.0; });
    auto const px = marginal(u, {"X"});
    auto const pxa = conditional(u, {"X"}, {{"A", "a0"}});
    for (std::size_t i = 0; i < px.p.size(); ++i)
    {
        CHECK(pxa.p[i] == doctest::Approx(px.p[i]).epsilon(1e-14));
    }

    // X = f(A): a0 -> +1, a1 -> -1
    auto const f = exact_table(2, 2, 1, 1, [](std::size_t a, auto, auto, int x, int, auto) {
        return (a == 0) == (x == 1) ? 1.0 : 0.0;
    });
    CHECK(conditional(f, {"X"}, {{"A", "a0"}}).probability({{"X", "+1"}}) == 1.0);
    CHECK(conditional(f, {"X"}, {{"A", "a1"}}).probability({{"X", "-1"}}) == 1.0);

    CHECK_THROWS_AS(conditional(f, {"A"}, {{"X", "+1"}, {"B", "b0"}, {"A", "a1"}}), std::invalid_argument);
    auto const z = exact_table(2, 1, 1, 1, [](std::size_t a, auto, auto, int, int, auto) { return a == 0 ? 1.0 : 0.0; });
    CHECK_THROWS_AS(conditional(z, {"X"}, {{"A", "a1"}}), ZeroConditioningEvent);

    auto const two = conditional(u, {"X", "Y"}, {{"Z", "z2"}});
    CHECK(two.p.size() == 4);
    CHECK(two.probability({{"X", "-1"}, {"Y", "+1"}}) == doctest::Approx(0.25));
}

TEST_CASE("gr table cells are sign homogeneous")
{
    RunConfig cfg;
    cfg.model = Model::gr();
    cfg.grid = SettingsGrid::chsh();
    cfg.samples = 50000;
    cfg.seed = 42;
    auto const partition = LambdaPartition::for_model(cfg.model, cfg.grid);
    auto const events = collect_events(cfg);
    auto const t = build_table(events, cfg.grid, partition);
    auto const la = cfg.grid.labels_a();
    auto const lb = cfg.grid.labels_b();
    for (std::size_t i = 0; i < 2000; ++i)
    {
        auto const& r = events[i];
        auto const cell = partition.cell_label(partition.cell_id(r.lambda));
        auto const d = conditional(t, {"X", "Y"}, {{"A", la[r.a_index]}, {"B", lb[r.b_index]}, {"Z", cell}});
        // brute force: recompute the outcome from the rotated axes
        auto const& a = cfg.grid.wing_a()[r.a_index].direction;
        auto const& b = cfg.grid.wing_b()[r.b_index].direction;
        auto const [ah, bh] = rotate_pair(a, b);
        std::string const x = ah.dot(r.lambda) >= 0 ? "+1" : "-1";
        std::string const y = bh.dot(r.lambda) >= 0 ? "-1" : "+1";
        CHECK(d.probability({{"X", x}, {"Y", y}}) == 1.0);
    }

    // with a single pair at pi/2 nothing rotates: X given (A, Z) is sgn(a . lambda)
    cfg.grid = SettingsGrid::single_pair(kPi / 2);
    auto const p2 = LambdaPartition::for_model(cfg.model, cfg.grid);
    auto const ev2 = collect_events(cfg);
    auto const t2 = build_table(ev2, cfg.grid, p2);
    for (std::size_t i = 0; i < 500; ++i)
    {
        auto const cell = p2.cell_label(p2.cell_id(ev2[i].lambda));
        auto const d = conditional(t2, {"X"}, {{"A", "a0"}, {"Z", cell}});
        CHECK(d.probability({{"X", ev2[i].lambda.z() >= 0 ? "+1" : "-1"}}) == 1.0);
    }
}

TEST_CASE("partitions")
{
    auto const triv = LambdaPartition::trivial();
    CHECK(triv.cell_id(UnitVector::x_axis()) == 0);
    CHECK(triv.cell_label(0) == "all");

    auto const s = LambdaPartition::sign_cells({UnitVector::z_axis(), -UnitVector::z_axis(), UnitVector::x_axis()});
    CHECK(s.axis_count() == 2);
    CHECK(s.cell_label(s.cell_id(UnitVector::from_components(1, 0, 1))) == "++");
    CHECK(s.cell_label(s.cell_id(UnitVector::from_components(-1, 0, 1))) == "+-");
    std::vector<UnitVector> many;
    for (int i = 0; i < 70; ++i)
    {
        many.push_back(UnitVector::from_spherical(0.02 * (i + 1), 0.1 * i));
    }
    CHECK_THROWS_AS(LambdaPartition::sign_cells(many), std::invalid_argument);

    auto const bands = LambdaPartition::z_bands({-0.5, 0.2, 1.0});
    CHECK(bands.cell_id(UnitVector::from_components(1, 0, -0.9)) == 0);
    CHECK(bands.cell_id(UnitVector::from_components(1, 0, 0.0)) == 1);
    CHECK(bands.cell_id(UnitVector::z_axis()) == 2);
    CHECK_THROWS(LambdaPartition::z_bands({0.5, 0.2, 1.0}));
    CHECK_THROWS(LambdaPartition::z_bands({0.5}));
}

TEST_CASE("accumulator merge rejects mismatched shapes")
{
    TableAccumulator a(SettingsGrid::chsh(), LambdaPartition::trivial());
    TableAccumulator b(SettingsGrid::single_pair(0.0), LambdaPartition::trivial());
    TableAccumulator c(SettingsGrid::chsh(), LambdaPartition::sign_cells({UnitVector::z_axis()}));
    CHECK_THROWS_AS(a.merge(b), std::invalid_argument);
    CHECK_THROWS_AS(a.merge(c), std::invalid_argument);
    CHECK_THROWS_AS(a.table(), std::invalid_argument);
}

TEST_CASE("table JSON round trip")
{
    auto const t = exact_table(2, 2, 1, 2, [](std::size_t a, std::size_t b, auto, int x, int y, std::size_t z) {
        return 1.0 + a + 2.0 * b + (x > 0) + 0.5 * (y > 0) + 3.0 * z;
    });
    auto const back = JointTable::from_json(t.to_json());
    CHECK(back.variables() == t.variables());
    CHECK(back.probabilities() == t.probabilities());
    CHECK(back.is_exact());
    JointTable const sampled({{"X", {"-1", "+1"}}}, {0.25, 0.75}, 40.0);
    CHECK(JointTable::from_json(sampled.to_json()).sample_count() == 40.0);
    CHECK_THROWS(JointTable::from_json(nlohmann::json::parse(R"({"p":[1]})")));
}
