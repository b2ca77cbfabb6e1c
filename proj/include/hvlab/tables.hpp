#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "hvlab/partition.hpp"
#include "hvlab/sampling.hpp"

namespace hvlab {

/// A discrete random variable with a labeled alphabet.
struct Variable
{
    std::string name;
    std::vector<std::string> alphabet;

    friend bool operator==(Variable const&, Variable const&) = default;
};

/// Variable name -> label.
using Assignment = std::map<std::string, std::string>;

/// Conditioning event of probability zero.
class ZeroConditioningEvent : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/*!
 * Finite joint distribution over labeled variables.
 *
 * Probabilities are stored row-major in declared variable order (last
 * variable fastest). A table estimated from data carries its sample count;
 * one without it is an exact (analytic) table.
 */
class JointTable
{
  public:
    /// Throws std::invalid_argument unless names and labels are unique,
    /// alphabets non-empty, the size matches, entries are >= 0 and the sum
    /// is 1 within 1e-9.
    JointTable(std::vector<Variable> variables,
               std::vector<double> probabilities,
               std::optional<double> sample_count = std::nullopt);

    std::vector<Variable> const& variables() const { return variables_; }
    std::vector<double> const& probabilities() const { return p_; }
    std::optional<double> sample_count() const { return samples_; }
    bool is_exact() const { return !samples_.has_value(); }

    std::size_t size() const { return p_.size(); }
    bool has_variable(std::string_view name) const;
    /// Throws std::out_of_range for an unknown name.
    std::size_t variable_index(std::string_view name) const;
    std::size_t label_index(std::size_t variable, std::string_view label) const;

    /// Probability of a full assignment given as one label index per variable.
    double at(std::vector<std::size_t> const& indices) const;

    nlohmann::json to_json() const;
    static JointTable from_json(nlohmann::json const& j);

  private:
    std::vector<Variable> variables_;
    std::vector<double> p_;
    std::optional<double> samples_;
};

/// Joint distribution of `variables` (in the given order), flattened row-major.
struct Distribution
{
    std::vector<Variable> variables;
    std::vector<double> p;

    double probability(Assignment const& assignment) const;
};

/// Marginal of the table over `variables`, in the given order.
Distribution marginal(JointTable const& table, std::vector<std::string> const& variables);

/// Normalized distribution of `targets` given the assignment to the givens.
/// Throws ZeroConditioningEvent if the conditioning event has probability 0.
Distribution conditional(JointTable const& table,
                         std::vector<std::string> const& targets,
                         Assignment const& givens);

/// Variable names used by the event tables.
namespace var {
inline constexpr char const* A = "A";
inline constexpr char const* B = "B";
inline constexpr char const* C = "C";
inline constexpr char const* X = "X";
inline constexpr char const* Y = "Y";
inline constexpr char const* Z = "Z";
}  // namespace var

/// Label of the single value of C: lambda is read out directly.
inline constexpr char const* kObserveLambda = "observe-lambda";

/// Mergeable event counts over (A, B, X, Y, Z-cell).
class TableAccumulator
{
  public:
    TableAccumulator(SettingsGrid const& grid, LambdaPartition partition);

    void add(EventRecord const& record);
    void add(std::span<EventRecord const> records);

    /// Associative and commutative. Throws std::invalid_argument if the grid
    /// shapes or partitions differ.
    void merge(TableAccumulator const& other);

    std::uint64_t total() const { return total_; }

    /// Empirical joint over (A, B, C, X, Y, Z). C is the singleton
    /// "observe-lambda"; Z ranges over the observed cells, sorted by id.
    /// Throws std::invalid_argument when no event was added.
    JointTable table() const;

    bool same_counts(TableAccumulator const& other) const { return counts_ == other.counts_; }

  private:
    struct Key
    {
        std::uint32_t a;
        std::uint32_t b;
        std::uint8_t x;
        std::uint8_t y;
        std::uint64_t z;

        friend bool operator==(Key const&, Key const&) = default;
        friend auto operator<=>(Key const&, Key const&) = default;
    };
    struct KeyHash
    {
        std::size_t operator()(Key const& k) const;
    };

    std::vector<std::string> labels_a_;
    std::vector<std::string> labels_b_;
    LambdaPartition partition_;
    std::unordered_map<Key, std::uint64_t, KeyHash> counts_;
    std::uint64_t total_ = 0;
};

/// Throws std::invalid_argument for an empty event stream.
JointTable build_table(std::span<EventRecord const> events,
                       SettingsGrid const& grid,
                       LambdaPartition const& partition);

/// Streams the run straight into the accumulator.
JointTable build_table(RunConfig const& cfg, LambdaPartition const& partition);

}  // namespace hvlab
