#include <doctest.h>

#include <cmath>
#include <random>

#include "hvlab/checkers.hpp"
#include "hvlab/partition.hpp"
#include "random_tables.hpp"

using namespace hvlab;
using namespace hvlab::testing;

namespace {

JointTable local_mixture_table()
{
    // three strategies over z, responses fixed per (setting, z)
    int const ra[3][2] = {{1, -1}, {-1, -1}, {1, 1}};
    int const rb[3][2] = {{1, 1}, {-1, 1}, {-1, -1}};
    double const w[3] = {0.4, 0.35, 0.25};
    return exact_table(2, 2, 1, 3, [&](std::size_t a, std::size_t b, auto, int x, int y, std::size_t z) {
        return w[z] * (ra[z][a] == x) * (rb[z][b] == y);
    });
}

JointTable gr_table(std::uint64_t samples, std::uint64_t seed)
{
    RunConfig cfg;
    cfg.model = Model::gr();
    cfg.grid = SettingsGrid::chsh();
    cfg.samples = samples;
    cfg.seed = seed;
    cfg.threads = 0;
    return build_table(cfg, LambdaPartition::for_model(cfg.model, cfg.grid));
}

}  // namespace

TEST_CASE("statistical tolerance")
{
    CHECK(statistical_tolerance(4, 2, 100) == doctest::Approx(4 * std::sqrt(0.02)));
    for (double n : {10.0, 1e3, 1e6})
    {
        CHECK(statistical_tolerance(4, 4, 2 * n) * std::sqrt(2.0) == doctest::Approx(statistical_tolerance(4, 4, n)));
    }
}

TEST_CASE("product table passes every checker with zero deviation")
{
    std::mt19937_64 rng(51);
    auto const t = random_table(rng, TableFamily::Product);
    for (auto const& r : check_all(t))
    {
        CAPTURE(r.id);
        CHECK(r.pass);
        CHECK(r.peak_deviation < 1e-12);
        CHECK(r.skipped_cells == 0);
    }
    auto const audit = audit_implications(t, {false, false});
    CHECK_FALSE(audit.inconsistent());
    CHECK(audit.fr_chain_status == "confirmed");
}

TEST_CASE("local mixture table: locality constraints hold exactly")
{
    auto const t = local_mixture_table();
    for (auto const* id : {"FR", "NS_full", "FW", "NS_weak", "PI", "OI", "B-Loc"})
    {
        auto const all = check_all(t);
        auto const it = std::find_if(all.begin(), all.end(), [&](auto const& r) { return r.id == id; });
        REQUIRE(it != all.end());
        CAPTURE(id);
        CHECK(it->pass);
        CHECK(it->peak_deviation < 1e-12);
    }
    auto const chsh = table_chsh(t);
    REQUIRE(chsh);
    CHECK(chsh->value <= 2.0 + 1e-12);
}

TEST_CASE("staticity fails once outcomes depend on the ontic state")
{
    // P(Z | A, B, X, Y) is pinned by the outcomes whenever responses vary with Z
    auto const st = check_ST(local_mixture_table());
    CHECK_FALSE(st.pass);
    CHECK(st.max_deviation > 0.1);
    CHECK(st.relation == "P(C,Z|A,B,X,Y) = P(C,Z)");
    CHECK(st.witness.contains("X"));
}

TEST_CASE("checker witnesses name the conditioning assignment")
{
    std::mt19937_64 rng(52);
    auto const t = random_table(rng, TableFamily::PiViolating);
    auto const pi = check_PI(t);
    CHECK(pi.witness.contains("A"));
    CHECK(pi.witness.contains("B"));
    CHECK(pi.witness.contains("Z"));
    CHECK(pi.tolerance == 1e-9);
    auto const j = pi.to_json();
    CHECK(j["id"] == "PI");
    CHECK(j.contains("skipped_cells"));
}

TEST_CASE("B-Loc coincides with PI and OI on random exact tables")
{
    std::mt19937_64 rng(53);
    int both_zero = 0;
    for (int i = 0; i < 200; ++i)
    {
        auto const family = static_cast<TableFamily>(i % 5);
        auto const t = random_table(rng, family, 2 + i % 3);
        double const bloc = check_BLoc(t).peak_deviation;
        double const pi = check_PI(t).peak_deviation;
        double const oi = check_OI(t).peak_deviation;
        CAPTURE(i);
        CHECK((bloc < 1e-12) == (pi < 1e-12 && oi < 1e-12));
        CHECK(bloc <= oi + 2 * pi + 1e-12);
        both_zero += bloc < 1e-12;
    }
    CHECK(both_zero >= 40);
    CHECK(both_zero < 200);
}

TEST_CASE("FR implies NS_full on exact tables")
{
    std::mt19937_64 rng(54);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int i = 0; i < 50; ++i)
    {
        // shared hidden index k, each outcome depends only on its own setting and k
        std::size_t const nk = 3;
        std::vector<double> wk(nk);
        std::vector<double> fx(2 * nk);
        std::vector<double> gy(2 * nk);
        std::vector<double> hz(nk * 2);
        for (auto* v : {&wk, &fx, &gy, &hz})
        {
            for (auto& x : *v)
            {
                x = u(rng);
            }
        }
        double const pa0 = u(rng);
        double const pb0 = u(rng);
        auto const t = exact_table(2, 2, 1, 2, [&](std::size_t a, std::size_t b, auto, int x, int y, std::size_t z) {
            double s = 0.0;
            for (std::size_t k = 0; k < nk; ++k)
            {
                double const px = x > 0 ? fx[a * nk + k] : 1 - fx[a * nk + k];
                double const py = y > 0 ? gy[b * nk + k] : 1 - gy[b * nk + k];
                double const pz = z == 1 ? hz[k] : 1 - hz[k];
                s += wk[k] * px * py * pz;
            }
            return (a == 0 ? pa0 : 1 - pa0 + 0.1) * (b == 0 ? pb0 : 1 - pb0 + 0.1) * s;
        });
        auto const fr = check_FR(t);
        REQUIRE(fr.peak_deviation < 1e-12);
        CHECK(check_NS_full(t).peak_deviation < 1e-12);
    }
}

TEST_CASE("exact tables never trip the FW, NS, ST => FR audit")
{
    std::mt19937_64 rng(55);
    for (int i = 0; i < 100; ++i)
    {
        auto const t = random_table(rng, static_cast<TableFamily>(i % 5));
        auto const audit = audit_implications(t, {false, false});
        CHECK(audit.fr_chain_status != "INCONSISTENT");
    }
}

TEST_CASE("deterministic-model chain flags a Bell violation without a PI failure")
{
    // PR box: no-signaling, CHSH = 4, no hidden structure in Z
    auto const pr = exact_table(2, 2, 1, 1, [](std::size_t a, std::size_t b, auto, int x, int y, auto) {
        bool const parity = (x != y);
        return parity == (a == 1 && b == 1) ? 1.0 : 0.0;
    });
    auto const chsh = table_chsh(pr);
    REQUIRE(chsh);
    CHECK(chsh->value == doctest::Approx(4.0));
    CHECK(check_PI(pr).pass);

    auto const declared = audit_implications(pr, {true, true});
    CHECK(declared.det_chain_status == "INCONSISTENT");
    CHECK(declared.inconsistent());
    auto const honest = audit_implications(pr, {false, true});
    CHECK(honest.det_chain_status == "not-applicable");
    CHECK_FALSE(honest.inconsistent());
}

TEST_CASE("gr table shows the expected constraint pattern")
{
    auto const t = gr_table(400000, 56);
    auto const all = check_all(t);
    auto get = [&](char const* id) {
        return *std::find_if(all.begin(), all.end(), [&](auto const& r) { return r.id == id; });
    };
    CHECK_FALSE(get("FR").pass);
    CHECK_FALSE(get("PI").pass);
    CHECK(get("OI").pass);
    CHECK(get("NS_weak").pass);
    CHECK(get("FW").pass);
    CHECK_FALSE(get("ST").pass);

    // in a flipping cell the outcome is pinned per B, so the mixture over B sits about 1/2 away
    CHECK(get("PI").peak_deviation > 0.4);

    auto const audit = audit_implications(t, {true, true});
    CHECK(audit.det_chain_status == "confirmed");
    CHECK(audit.fr_chain_status == "premise-false");
    CHECK_FALSE(audit.inconsistent());
    REQUIRE(audit.chsh);
    CHECK(audit.chsh->value == doctest::Approx(2 * std::sqrt(2.0)).epsilon(0.01));
}

TEST_CASE("hidden lambda runs only the Z-free checker")
{
    auto const t = gr_table(100000, 57);
    auto const audit = audit_implications(t, {true, true}, false);
    REQUIRE(audit.reports.size() == 1);
    CHECK(audit.reports[0].id == "NS_weak");
    CHECK(audit.reports[0].pass);
    CHECK_FALSE(audit.to_json()["lambda_visible"].get<bool>());
}

TEST_CASE("checker errors")
{
    JointTable const tiny({{"A", {"a0"}}, {"B", {"b0"}}, {"C", {"c"}}, {"X", {"-1", "+1"}}, {"Y", {"-1", "+1"}},
                           {"Z", {"z"}}},
                          {0.25, 0.25, 0.25, 0.25}, 5.0);
    CHECK_THROWS_AS(check_NS_weak(tiny), AllConditioningEventsEmpty);
    JointTable const partial({{"A", {"a0"}}, {"X", {"-1", "+1"}}}, {0.5, 0.5});
    CHECK_THROWS_AS(check_PI(partial), std::out_of_range);
}

TEST_CASE("pass/fail is a function of the table alone")
{
    auto const t = gr_table(60000, 58);
    auto const one = check_all(t);
    auto const two = check_all(t);
    for (std::size_t i = 0; i < one.size(); ++i)
    {
        CHECK(one[i].pass == two[i].pass);
        CHECK(one[i].max_deviation == two[i].max_deviation);
    }
}
