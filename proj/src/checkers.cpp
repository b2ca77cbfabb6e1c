#include "hvlab/checkers.hpp"

#include <charconv>
#include <cmath>
#include <functional>

#include "marginal.hpp"

namespace hvlab {
namespace {

using detail::Marginal;
using Full = std::vector<std::size_t>;

struct Relation
{
    std::string text;
    std::vector<std::string> targets;
    std::vector<std::string> givens;
    std::vector<std::string> reduced;  // subset of givens kept on the right-hand side
};

class Evaluator
{
  public:
    Evaluator(JointTable const& table, CheckOptions const& opts, std::string id)
        : table_(table), opts_(opts), exact_(table.is_exact()), samples_(table.sample_count().value_or(0.0))
    {
        report_.id = std::move(id);
    }

    std::vector<std::size_t> indices(std::vector<std::string> const& names) const
    {
        std::vector<std::size_t> out;
        for (auto const& n : names)
        {
            out.push_back(table_.variable_index(n));
        }
        return out;
    }

    /// rhs(full) is the right-hand side probability of the target values in `full`.
    void compare(std::string const& text,
                 std::vector<std::size_t> const& givens,
                 std::vector<std::size_t> const& targets,
                 std::function<double(Full const&)> const& rhs)
    {
        std::vector<std::size_t> joint_vars = givens;
        joint_vars.insert(joint_vars.end(), targets.begin(), targets.end());
        Marginal const joint(table_, joint_vars);
        Marginal const given(table_, givens);

        double k = 1.0;
        for (auto v : targets)
        {
            k *= static_cast<double>(table_.variables()[v].alphabet.size());
        }

        Full full(table_.variables().size(), 0);
        do
        {
            double const pg = given.at(full);
            if (below_floor(pg))
            {
                ++report_.skipped_cells;
                continue;
            }
            double l1 = 0.0;
            do
            {
                l1 += std::abs(joint.at(full) / pg - rhs(full));
            } while (detail::advance(full, targets, table_));
            double const tv = l1 / 2;
            double const tol = exact_ ? opts_.exact_tolerance : statistical_tolerance(opts_.sigma_multiplier, k, pg * samples_);

            ++report_.evaluated_cells;
            report_.peak_deviation = std::max(report_.peak_deviation, tv);
            double const ratio = tv / tol;
            if (ratio > best_ratio_)
            {
                best_ratio_ = ratio;
                report_.max_deviation = tv;
                report_.tolerance = tol;
                report_.relation = text;
                report_.witness.clear();
                for (auto v : givens)
                {
                    report_.witness[table_.variables()[v].name] = table_.variables()[v].alphabet[full[v]];
                }
            }
        } while (detail::advance(full, givens, table_));
    }

    void compare(Relation const& r)
    {
        auto const givens = indices(r.givens);
        auto const targets = indices(r.targets);
        auto reduced_joint = indices(r.reduced);
        reduced_joint.insert(reduced_joint.end(), targets.begin(), targets.end());
        Marginal const rhs_joint(table_, reduced_joint);
        Marginal const rhs_given(table_, indices(r.reduced));
        compare(r.text, givens, targets,
                [&](Full const& full) { return rhs_joint.at(full) / rhs_given.at(full); });
    }

    ConstraintReport finish()
    {
        if (report_.evaluated_cells == 0)
        {
            throw AllConditioningEventsEmpty(report_.id + ": every conditioning event is below the floor");
        }
        report_.pass = report_.max_deviation <= report_.tolerance;
        return report_;
    }

    JointTable const& table() const { return table_; }

  private:
    bool below_floor(double p) const
    {
        return exact_ ? p <= opts_.exact_floor : p * samples_ < opts_.floor_counts;
    }

    JointTable const& table_;
    CheckOptions const& opts_;
    bool exact_;
    double samples_;
    ConstraintReport report_;
    double best_ratio_ = -1.0;
};

ConstraintReport run_relations(JointTable const& t,
                               CheckOptions const& opts,
                               std::string id,
                               std::vector<Relation> const& relations)
{
    Evaluator ev(t, opts, std::move(id));
    for (auto const& r : relations)
    {
        ev.compare(r);
    }
    return ev.finish();
}

std::optional<int> spin_value(std::string const& label)
{
    int v = 0;
    char const* begin = label.data() + (label.starts_with('+') ? 1 : 0);
    auto const [end, ec] = std::from_chars(begin, label.data() + label.size(), v);
    if (ec != std::errc() || end != label.data() + label.size() || (v != 1 && v != -1))
    {
        return std::nullopt;
    }
    return v;
}

}  // namespace

double statistical_tolerance(double c, double alphabet_size, double samples)
{
    return c * std::sqrt(alphabet_size / samples);
}

nlohmann::json ConstraintReport::to_json() const
{
    return {{"id", id},
            {"pass", pass},
            {"max_deviation", max_deviation},
            {"tolerance", tolerance},
            {"witness", witness},
            {"relation", relation},
            {"skipped_cells", skipped_cells},
            {"evaluated_cells", evaluated_cells},
            {"peak_deviation", peak_deviation}};
}

ConstraintReport check_FR(JointTable const& t, CheckOptions const& opts)
{
    return run_relations(t, opts, "FR",
                         {{"P(A|B,C,Y,Z) = P(A)", {"A"}, {"B", "C", "Y", "Z"}, {}},
                          {"P(B|A,C,X,Z) = P(B)", {"B"}, {"A", "C", "X", "Z"}, {}},
                          {"P(C|A,B,X,Y) = P(C)", {"C"}, {"A", "B", "X", "Y"}, {}}});
}

ConstraintReport check_NS_full(JointTable const& t, CheckOptions const& opts)
{
    return run_relations(t, opts, "NS_full",
                         {{"P(Y,Z|A,B,C) = P(Y,Z|B,C)", {"Y", "Z"}, {"A", "B", "C"}, {"B", "C"}},
                          {"P(X,Z|A,B,C) = P(X,Z|A,C)", {"X", "Z"}, {"A", "B", "C"}, {"A", "C"}},
                          {"P(X,Y|A,B,C) = P(X,Y|A,B)", {"X", "Y"}, {"A", "B", "C"}, {"A", "B"}}});
}

ConstraintReport check_FW(JointTable const& t, CheckOptions const& opts)
{
    return run_relations(t, opts, "FW",
                         {{"P(A|B,Z) = P(A)", {"A"}, {"B", "Z"}, {}},
                          {"P(B|A,Z) = P(B)", {"B"}, {"A", "Z"}, {}}});
}

ConstraintReport check_ST(JointTable const& t, CheckOptions const& opts)
{
    return run_relations(t, opts, "ST", {{"P(C,Z|A,B,X,Y) = P(C,Z)", {"C", "Z"}, {"A", "B", "X", "Y"}, {}}});
}

ConstraintReport check_NS_weak(JointTable const& t, CheckOptions const& opts)
{
    return run_relations(t, opts, "NS_weak",
                         {{"P(X|A,B) = P(X|A)", {"X"}, {"A", "B"}, {"A"}},
                          {"P(Y|A,B) = P(Y|B)", {"Y"}, {"A", "B"}, {"B"}}});
}

ConstraintReport check_PI(JointTable const& t, CheckOptions const& opts)
{
    return run_relations(t, opts, "PI",
                         {{"P(X|A,B,Z) = P(X|A,Z)", {"X"}, {"A", "B", "Z"}, {"A", "Z"}},
                          {"P(Y|A,B,Z) = P(Y|B,Z)", {"Y"}, {"A", "B", "Z"}, {"B", "Z"}}});
}

ConstraintReport check_OI(JointTable const& t, CheckOptions const& opts)
{
    return run_relations(t, opts, "OI",
                         {{"P(X|A,B,Y,Z) = P(X|A,B,Z)", {"X"}, {"A", "B", "Y", "Z"}, {"A", "B", "Z"}},
                          {"P(Y|A,B,X,Z) = P(Y|A,B,Z)", {"Y"}, {"A", "B", "X", "Z"}, {"A", "B", "Z"}}});
}

ConstraintReport check_BLoc(JointTable const& t, CheckOptions const& opts)
{
    Evaluator ev(t, opts, "B-Loc");
    auto const a = t.variable_index("A");
    auto const b = t.variable_index("B");
    auto const x = t.variable_index("X");
    auto const y = t.variable_index("Y");
    auto const z = t.variable_index("Z");
    Marginal const xaz(t, {a, z, x});
    Marginal const az(t, {a, z});
    Marginal const ybz(t, {b, z, y});
    Marginal const bz(t, {b, z});
    ev.compare("P(X,Y|A,B,Z) = P(X|A,Z) P(Y|B,Z)", {a, b, z}, {x, y}, [&](Full const& full) {
        return (xaz.at(full) / az.at(full)) * (ybz.at(full) / bz.at(full));
    });
    return ev.finish();
}

std::vector<ConstraintReport> check_all(JointTable const& t, CheckOptions const& opts)
{
    return {check_FR(t, opts),      check_NS_full(t, opts), check_FW(t, opts), check_ST(t, opts),
            check_NS_weak(t, opts), check_PI(t, opts),      check_OI(t, opts), check_BLoc(t, opts)};
}

std::optional<TableChsh> table_chsh(JointTable const& t, CheckOptions const& opts)
{
    auto const a = t.variable_index("A");
    auto const b = t.variable_index("B");
    auto const x = t.variable_index("X");
    auto const y = t.variable_index("Y");
    auto const& vars = t.variables();
    std::size_t const na = vars[a].alphabet.size();
    std::size_t const nb = vars[b].alphabet.size();
    if (na < 2 || nb < 2)
    {
        return std::nullopt;
    }
    std::vector<int> xs;
    std::vector<int> ys;
    for (auto const& l : vars[x].alphabet)
    {
        auto v = spin_value(l);
        if (!v)
        {
            return std::nullopt;
        }
        xs.push_back(*v);
    }
    for (auto const& l : vars[y].alphabet)
    {
        auto v = spin_value(l);
        if (!v)
        {
            return std::nullopt;
        }
        ys.push_back(*v);
    }

    Marginal const abxy(t, {a, b, x, y});
    Marginal const ab(t, {a, b});
    std::vector<double> corr(na * nb, 0.0);
    std::vector<double> inv_counts(na * nb, 0.0);
    Full full(vars.size(), 0);
    for (std::size_t i = 0; i < na; ++i)
    {
        for (std::size_t j = 0; j < nb; ++j)
        {
            full[a] = i;
            full[b] = j;
            double const pab = ab.at(full);
            if (!(pab > 0))
            {
                corr[i * nb + j] = std::nan("");
                continue;
            }
            double e = 0.0;
            for (std::size_t u = 0; u < xs.size(); ++u)
            {
                for (std::size_t v = 0; v < ys.size(); ++v)
                {
                    full[x] = u;
                    full[y] = v;
                    e += xs[u] * ys[v] * abxy.at(full);
                }
            }
            full[x] = 0;
            full[y] = 0;
            corr[i * nb + j] = e / pab;
            if (!t.is_exact())
            {
                inv_counts[i * nb + j] = 1.0 / (pab * *t.sample_count());
            }
        }
    }

    std::optional<TableChsh> best;
    for (std::size_t i = 0; i < na; ++i)
    {
        for (std::size_t i2 = 0; i2 < na; ++i2)
        {
            for (std::size_t j = 0; j < nb; ++j)
            {
                for (std::size_t j2 = 0; j2 < nb; ++j2)
                {
                    if (i == i2 || j == j2)
                    {
                        continue;
                    }
                    double const s = corr[i * nb + j] + corr[i * nb + j2] + corr[i2 * nb + j] - corr[i2 * nb + j2];
                    if (std::isnan(s))
                    {
                        continue;
                    }
                    if (!best || std::abs(s) > best->value)
                    {
                        double const tol = t.is_exact()
                                               ? opts.exact_tolerance
                                               : opts.sigma_multiplier
                                                     * std::sqrt(inv_counts[i * nb + j] + inv_counts[i * nb + j2]
                                                                 + inv_counts[i2 * nb + j] + inv_counts[i2 * nb + j2]);
                        best = TableChsh{std::abs(s), tol};
                    }
                }
            }
        }
    }
    return best;
}

bool ImplicationAudit::inconsistent() const
{
    return fr_chain_status == "INCONSISTENT" || det_chain_status == "INCONSISTENT";
}

ConstraintReport const* ImplicationAudit::find(std::string const& id) const
{
    for (auto const& r : reports)
    {
        if (r.id == id)
        {
            return &r;
        }
    }
    return nullptr;
}

nlohmann::json ImplicationAudit::to_json() const
{
    nlohmann::json constraints = nlohmann::json::array();
    for (auto const& r : reports)
    {
        constraints.push_back(r.to_json());
    }
    nlohmann::json j = {{"constraints", constraints},
                        {"lambda_visible", lambda_visible},
                        {"fw_ns_st_implies_fr", fr_chain_status},
                        {"deterministic_qm_forces_pi_failure", det_chain_status},
                        {"inconsistent", inconsistent()}};
    if (chsh)
    {
        j["table_chsh"] = {{"value", chsh->value}, {"tolerance", chsh->tolerance}};
    }
    return j;
}

ImplicationAudit audit_implications(JointTable const& t, ModelTraits traits, bool lambda_visible, CheckOptions const& opts)
{
    ImplicationAudit audit;
    audit.lambda_visible = lambda_visible;
    if (!lambda_visible)
    {
        audit.reports.push_back(check_NS_weak(t, opts));
        audit.fr_chain_status = "not-evaluated";
        audit.det_chain_status = traits.deterministic && traits.qm_equivalent ? "not-evaluated" : "not-applicable";
        return audit;
    }

    audit.reports = check_all(t, opts);
    auto const& fr = *audit.find("FR");
    auto const& fw = *audit.find("FW");
    auto const& ns = *audit.find("NS_weak");
    auto const& st = *audit.find("ST");
    if (!(fw.pass && ns.pass && st.pass))
    {
        audit.fr_chain_status = "premise-false";
    }
    else if (fr.pass || fr.max_deviation <= fr.tolerance + fw.tolerance + ns.tolerance + st.tolerance)
    {
        audit.fr_chain_status = "confirmed";
    }
    else
    {
        audit.fr_chain_status = "INCONSISTENT";
    }

    audit.chsh = table_chsh(t, opts);
    if (!(traits.deterministic && traits.qm_equivalent))
    {
        audit.det_chain_status = "not-applicable";
    }
    else if (!audit.chsh || audit.chsh->value <= 2.0 + audit.chsh->tolerance)
    {
        audit.det_chain_status = "no-bell-violation";
    }
    else
    {
        audit.det_chain_status = audit.find("PI")->pass ? "INCONSISTENT" : "confirmed";
    }
    return audit;
}

}  // namespace hvlab
