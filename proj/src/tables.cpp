#include "hvlab/tables.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "marginal.hpp"

namespace hvlab {

//---------------------------------------------------------------------------//
// Marginal helpers
//---------------------------------------------------------------------------//

namespace detail {

Marginal::Marginal(JointTable const& table, std::vector<std::size_t> vars) : vars_(std::move(vars))
{
    auto const& variables = table.variables();
    std::size_t size = 1;
    for (auto v : vars_)
    {
        dims_.push_back(variables.at(v).alphabet.size());
        size *= dims_.back();
    }
    p_.assign(size, 0.0);

    // Walk the table in storage order, tracking the full assignment.
    std::vector<std::size_t> full(variables.size(), 0);
    for (double const prob : table.probabilities())
    {
        if (prob != 0.0)
        {
            std::size_t idx = 0;
            for (std::size_t k = 0; k < vars_.size(); ++k)
            {
                idx = idx * dims_[k] + full[vars_[k]];
            }
            p_[idx] += prob;
        }
        for (std::size_t v = variables.size(); v-- > 0;)
        {
            if (++full[v] < variables[v].alphabet.size())
            {
                break;
            }
            full[v] = 0;
        }
    }
}

bool advance(std::vector<std::size_t>& full, std::vector<std::size_t> const& vars, JointTable const& table)
{
    for (std::size_t k = vars.size(); k-- > 0;)
    {
        std::size_t const v = vars[k];
        if (++full[v] < table.variables()[v].alphabet.size())
        {
            return true;
        }
        full[v] = 0;
    }
    return false;
}

}  // namespace detail

//---------------------------------------------------------------------------//
// JointTable
//---------------------------------------------------------------------------//

JointTable::JointTable(std::vector<Variable> variables,
                       std::vector<double> probabilities,
                       std::optional<double> sample_count)
    : variables_(std::move(variables)), p_(std::move(probabilities)), samples_(sample_count)
{
    if (variables_.empty())
    {
        throw std::invalid_argument("joint table needs at least one variable");
    }
    std::set<std::string> names;
    std::size_t expected = 1;
    for (auto const& v : variables_)
    {
        if (!names.insert(v.name).second)
        {
            throw std::invalid_argument("duplicate variable '" + v.name + "'");
        }
        if (v.alphabet.empty())
        {
            throw std::invalid_argument("variable '" + v.name + "' has an empty alphabet");
        }
        std::set<std::string> labels(v.alphabet.begin(), v.alphabet.end());
        if (labels.size() != v.alphabet.size())
        {
            throw std::invalid_argument("variable '" + v.name + "' has duplicate labels");
        }
        expected *= v.alphabet.size();
    }
    if (p_.size() != expected)
    {
        throw std::invalid_argument("joint table has " + std::to_string(p_.size()) + " entries, expected "
                                    + std::to_string(expected));
    }
    double sum = 0.0;
    for (double const x : p_)
    {
        if (!std::isfinite(x) || x < 0.0)
        {
            throw std::invalid_argument("joint table entries must be finite and non-negative");
        }
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9)
    {
        throw std::invalid_argument("joint table sums to " + std::to_string(sum) + ", not 1");
    }
    if (samples_ && !(*samples_ >= 1.0))
    {
        throw std::invalid_argument("joint table sample count must be >= 1");
    }
}

bool JointTable::has_variable(std::string_view name) const
{
    return std::any_of(variables_.begin(), variables_.end(), [&](Variable const& v) { return v.name == name; });
}

std::size_t JointTable::variable_index(std::string_view name) const
{
    for (std::size_t i = 0; i < variables_.size(); ++i)
    {
        if (variables_[i].name == name)
        {
            return i;
        }
    }
    throw std::out_of_range("table has no variable '" + std::string(name) + "'");
}

std::size_t JointTable::label_index(std::size_t variable, std::string_view label) const
{
    auto const& alphabet = variables_.at(variable).alphabet;
    auto const it = std::find(alphabet.begin(), alphabet.end(), label);
    if (it == alphabet.end())
    {
        throw std::out_of_range("variable '" + variables_[variable].name + "' has no label '" + std::string(label)
                                + "'");
    }
    return static_cast<std::size_t>(it - alphabet.begin());
}

double JointTable::at(std::vector<std::size_t> const& indices) const
{
    if (indices.size() != variables_.size())
    {
        throw std::invalid_argument("assignment length does not match the table");
    }
    std::size_t idx = 0;
    for (std::size_t v = 0; v < variables_.size(); ++v)
    {
        idx = idx * variables_[v].alphabet.size() + indices[v];
    }
    return p_.at(idx);
}

nlohmann::json JointTable::to_json() const
{
    nlohmann::json vars = nlohmann::json::array();
    for (auto const& v : variables_)
    {
        vars.push_back({{"name", v.name}, {"alphabet", v.alphabet}});
    }
    nlohmann::json j = {{"variables", vars}, {"p", p_}};
    j["samples"] = samples_ ? nlohmann::json(*samples_) : nlohmann::json(nullptr);
    return j;
}

JointTable JointTable::from_json(nlohmann::json const& j)
{
    if (!j.is_object() || !j.contains("variables") || !j.contains("p"))
    {
        throw std::invalid_argument("table JSON needs 'variables' and 'p'");
    }
    std::vector<Variable> vars;
    for (auto const& v : j["variables"])
    {
        vars.push_back({v.at("name").get<std::string>(), v.at("alphabet").get<std::vector<std::string>>()});
    }
    std::optional<double> samples;
    if (j.contains("samples") && !j["samples"].is_null())
    {
        samples = j["samples"].get<double>();
    }
    return JointTable(std::move(vars), j["p"].get<std::vector<double>>(), samples);
}

//---------------------------------------------------------------------------//
// Marginals and conditionals
//---------------------------------------------------------------------------//

double Distribution::probability(Assignment const& assignment) const
{
    std::size_t idx = 0;
    for (auto const& v : variables)
    {
        auto const it = assignment.find(v.name);
        if (it == assignment.end())
        {
            throw std::invalid_argument("assignment misses variable '" + v.name + "'");
        }
        auto const pos = std::find(v.alphabet.begin(), v.alphabet.end(), it->second);
        if (pos == v.alphabet.end())
        {
            throw std::out_of_range("variable '" + v.name + "' has no label '" + it->second + "'");
        }
        idx = idx * v.alphabet.size() + static_cast<std::size_t>(pos - v.alphabet.begin());
    }
    return p.at(idx);
}

Distribution marginal(JointTable const& table, std::vector<std::string> const& variables)
{
    std::vector<std::size_t> idx;
    Distribution d;
    for (auto const& name : variables)
    {
        idx.push_back(table.variable_index(name));
        d.variables.push_back(table.variables()[idx.back()]);
    }
    d.p = detail::Marginal(table, idx).values();
    return d;
}

Distribution conditional(JointTable const& table,
                         std::vector<std::string> const& targets,
                         Assignment const& givens)
{
    std::vector<std::size_t> target_vars;
    std::vector<std::size_t> vars;
    for (auto const& [name, label] : givens)
    {
        vars.push_back(table.variable_index(name));
    }
    std::vector<std::size_t> full(table.variables().size(), 0);
    for (auto const& [name, label] : givens)
    {
        std::size_t const v = table.variable_index(name);
        full[v] = table.label_index(v, label);
    }
    for (auto const& name : targets)
    {
        std::size_t const v = table.variable_index(name);
        if (givens.contains(name))
        {
            throw std::invalid_argument("variable '" + name + "' is both target and given");
        }
        target_vars.push_back(v);
    }

    detail::Marginal const given_marginal(table, vars);
    double const p_given = given_marginal.at(full);
    if (!(p_given > 0.0))
    {
        throw ZeroConditioningEvent("conditioning event has probability zero");
    }
    std::vector<std::size_t> joint_vars = vars;
    joint_vars.insert(joint_vars.end(), target_vars.begin(), target_vars.end());
    detail::Marginal const joint(table, joint_vars);

    Distribution d;
    for (auto v : target_vars)
    {
        d.variables.push_back(table.variables()[v]);
    }
    do
    {
        d.p.push_back(joint.at(full) / p_given);
    } while (detail::advance(full, target_vars, table));
    return d;
}

//---------------------------------------------------------------------------//
// Accumulation
//---------------------------------------------------------------------------//

std::size_t TableAccumulator::KeyHash::operator()(Key const& k) const
{
    std::uint64_t h = k.z * 0x9e3779b97f4a7c15ULL;
    h ^= (std::uint64_t{k.a} << 40) ^ (std::uint64_t{k.b} << 16) ^ (std::uint64_t{k.x} << 1) ^ k.y;
    h ^= h >> 29;
    h *= 0xbf58476d1ce4e5b9ULL;
    return static_cast<std::size_t>(h ^ (h >> 32));
}

TableAccumulator::TableAccumulator(SettingsGrid const& grid, LambdaPartition partition)
    : labels_a_(grid.labels_a()), labels_b_(grid.labels_b()), partition_(std::move(partition))
{
}

void TableAccumulator::add(EventRecord const& r)
{
    Key const key{r.a_index, r.b_index, static_cast<std::uint8_t>(r.x > 0), static_cast<std::uint8_t>(r.y > 0),
                  partition_.cell_id(r.lambda)};
    ++counts_[key];
    ++total_;
}

void TableAccumulator::add(std::span<EventRecord const> records)
{
    for (auto const& r : records)
    {
        add(r);
    }
}

void TableAccumulator::merge(TableAccumulator const& other)
{
    if (other.labels_a_ != labels_a_ || other.labels_b_ != labels_b_
        || other.partition_.describe() != partition_.describe())
    {
        throw std::invalid_argument("cannot merge accumulators over different grids or partitions");
    }
    for (auto const& [key, count] : other.counts_)
    {
        counts_[key] += count;
    }
    total_ += other.total_;
}

JointTable TableAccumulator::table() const
{
    if (total_ == 0)
    {
        throw std::invalid_argument("cannot build a table from an empty event stream");
    }
    std::vector<std::pair<Key, std::uint64_t>> sorted(counts_.begin(), counts_.end());
    std::sort(sorted.begin(), sorted.end());

    std::vector<std::uint64_t> cells;
    for (auto const& [key, count] : sorted)
    {
        cells.push_back(key.z);
    }
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());

    std::vector<std::string> z_labels;
    for (auto const id : cells)
    {
        z_labels.push_back(partition_.cell_label(id));
    }
    std::vector<Variable> vars{{var::A, labels_a_},
                               {var::B, labels_b_},
                               {var::C, {kObserveLambda}},
                               {var::X, {"-1", "+1"}},
                               {var::Y, {"-1", "+1"}},
                               {var::Z, z_labels}};
    std::size_t const nz = cells.size();
    std::size_t const nb = labels_b_.size();
    std::vector<double> p(labels_a_.size() * nb * 2 * 2 * nz, 0.0);
    double const n = static_cast<double>(total_);
    for (auto const& [key, count] : sorted)
    {
        auto const z = static_cast<std::size_t>(std::lower_bound(cells.begin(), cells.end(), key.z) - cells.begin());
        std::size_t const idx = (((key.a * nb + key.b) * 2 + key.x) * 2 + key.y) * nz + z;
        p[idx] = static_cast<double>(count) / n;
    }
    return JointTable(std::move(vars), std::move(p), n);
}

JointTable build_table(std::span<EventRecord const> events,
                       SettingsGrid const& grid,
                       LambdaPartition const& partition)
{
    TableAccumulator acc(grid, partition);
    acc.add(events);
    return acc.table();
}

JointTable build_table(RunConfig const& cfg, LambdaPartition const& partition)
{
    TableAccumulator acc(cfg.grid, partition);
    run_experiment(cfg, [&acc](std::span<EventRecord const> records) { acc.add(records); });
    return acc.table();
}

}  // namespace hvlab
