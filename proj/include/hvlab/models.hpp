#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hvlab/geometry.hpp"

namespace hvlab {

using RandomEngine = std::mt19937_64;

/// |axis . lambda| below this is treated as a sign boundary.
inline constexpr double kSignEpsilon = 1e-12;

enum class MeasurementMode
{
    SingleA,
    SingleB,
    Joint
};

/// Which wings are measured and along which directions.
///
/// Labels are optional; local-deterministic strategies respond to labels, the
/// geometric models to directions.
class MeasurementContext
{
  public:
    static MeasurementContext single_a(UnitVector const& a, std::string label = {});
    static MeasurementContext single_b(UnitVector const& b, std::string label = {});
    static MeasurementContext joint(UnitVector const& a,
                                    UnitVector const& b,
                                    std::string a_label = {},
                                    std::string b_label = {});

    MeasurementMode mode() const { return mode_; }
    bool has_a() const { return a_.has_value(); }
    bool has_b() const { return b_.has_value(); }

    // Throw std::logic_error when the wing is not measured in this context.
    UnitVector const& a() const;
    UnitVector const& b() const;

    std::string const& a_label() const { return a_label_; }
    std::string const& b_label() const { return b_label_; }

  private:
    MeasurementContext() = default;

    MeasurementMode mode_ = MeasurementMode::Joint;
    std::optional<UnitVector> a_;
    std::optional<UnitVector> b_;
    std::string a_label_;
    std::string b_label_;
};

/// The supplementary variable. The state vector is always the singlet and is
/// not carried.
struct HiddenState
{
    UnitVector lambda;
};

/// Outcomes in {-1, +1}; a wing that is not measured has no value.
struct OutcomePair
{
    std::optional<int> x;
    std::optional<int> y;

    friend bool operator==(OutcomePair const&, OutcomePair const&) = default;
};

/// Thrown when a projection lies on the sign boundary and the policy asks
/// the caller to resample.
class SignUndefined : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

enum class TieBreak
{
    PlusOne,   //!< sgn(0) := +1
    Resample,  //!< throw SignUndefined, caller draws a fresh lambda
};

int sign_of(double projection, TieBreak policy = TieBreak::PlusOne);

/// Symmetric nonlocal model: raw axes for a single measurement, rotated
/// pair (rotate_pair) for a joint one.
OutcomePair gr_outcome(MeasurementContext const& ctx,
                       HiddenState const& state,
                       TieBreak policy = TieBreak::PlusOne);

/// Rotated A axis of the asymmetric reference variant: in span(a, b), on a's
/// side of b, at angle omega_hat from b.
UnitVector bell_rotated_a(UnitVector const& a, UnitVector const& b);

/// Asymmetric reference variant: only wing A's axis is rotated in a joint
/// measurement; wing B always answers -sgn(b . lambda).
OutcomePair bell_outcome(MeasurementContext const& ctx,
                         HiddenState const& state,
                         TieBreak policy = TieBreak::PlusOne);

/// Singlet probability of `outcome`: (1 - x y cos omega) / 4 jointly, 1/2
/// for a single wing. Throws std::invalid_argument if the outcome does not
/// match the context's wings or holds a value other than +-1.
double qm_probability(MeasurementContext const& ctx, OutcomePair const& outcome);

/// One wing's deterministic response: a constant, or a value per setting label.
class LocalResponse
{
  public:
    static LocalResponse constant(int value);
    static LocalResponse by_label(std::map<std::string, int> table, std::optional<int> fallback = {});

    /// Throws std::out_of_range for an unknown label without a fallback.
    int operator()(std::string_view label) const;

    nlohmann::json to_json() const;
    static LocalResponse from_json(nlohmann::json const& j);

  private:
    std::map<std::string, int, std::less<>> table_;
    std::optional<int> fallback_;
};

struct LocalStrategy
{
    LocalResponse a;
    LocalResponse b;
    double weight = 1.0;
};

/*!
 * Finite mixture of local deterministic strategies.
 *
 * The strategy index is the hidden variable. When driven by a sphere point,
 * the index is read from the lambda_z band: lambda_z is uniform on [-1, 1]
 * for uniform lambda, so band widths proportional to the weights realize the
 * mixture exactly.
 */
class LocalDetMixture
{
  public:
    /// Weights must be finite, non-negative and not all zero; they are normalized.
    explicit LocalDetMixture(std::vector<LocalStrategy> strategies);

    std::size_t size() const { return strategies_.size(); }
    std::vector<LocalStrategy> const& strategies() const { return strategies_; }
    double weight(std::size_t index) const { return strategies_.at(index).weight; }

    /// Throws std::out_of_range for an index past the strategy list.
    OutcomePair outcome(MeasurementContext const& ctx, std::size_t index) const;

    std::size_t strategy_index(UnitVector const& lambda) const;

    /// Upper lambda_z edge of each strategy band; the last is exactly 1.
    std::vector<double> const& band_edges() const { return upper_edges_; }

    nlohmann::json to_json() const;
    static LocalDetMixture from_json(nlohmann::json const& j);
    static LocalDetMixture load(std::filesystem::path const& path);

    /// Every deterministic strategy pair over the given labels, unit weights.
    static std::vector<LocalStrategy> all_deterministic(std::vector<std::string> const& labels_a,
                                                        std::vector<std::string> const& labels_b);

  private:
    std::vector<LocalStrategy> strategies_;
    std::vector<double> upper_edges_;
};

OutcomePair localdet_outcome(LocalDetMixture const& mixture,
                             MeasurementContext const& ctx,
                             std::size_t index);

enum class ModelKind
{
    GrSymmetric,
    BellAsymmetric,
    QmOracle,
    LocalDetMixture
};

/// Outcome rule resolved for one joint settings pair so that per-sample
/// evaluation never repeats the rotation.
class JointRule
{
  public:
    OutcomePair evaluate(UnitVector const& lambda, TieBreak policy, RandomEngine& outcome_rng) const;

    /// Axes whose signs fully determine the outcome of this pair.
    std::vector<UnitVector> decisive_axes() const;

  private:
    friend class Model;

    ModelKind kind_ = ModelKind::GrSymmetric;
    UnitVector axis_a_;
    UnitVector axis_b_;
    double cos_omega_ = 1.0;
    std::shared_ptr<LocalDetMixture const> mixture_;
    std::string a_label_;
    std::string b_label_;
};

/// A model selected by id: "gr", "bell", "qm" or "localdet:<json file>".
class Model
{
  public:
    static Model gr();
    static Model bell();
    static Model qm();
    static Model localdet(LocalDetMixture mixture);

    /// Throws std::invalid_argument for an unknown id.
    static Model parse(std::string_view id);

    ModelKind kind() const { return kind_; }
    std::string const& name() const { return name_; }

    bool deterministic() const { return kind_ != ModelKind::QmOracle; }
    bool qm_equivalent() const { return kind_ != ModelKind::LocalDetMixture; }

    LocalDetMixture const* mixture() const { return mixture_.get(); }

    JointRule prepare_joint(UnitVector const& a,
                            UnitVector const& b,
                            std::string a_label = {},
                            std::string b_label = {}) const;

    /// General evaluation in any measurement mode. `outcome_rng` is only
    /// consumed by the quantum oracle.
    OutcomePair outcome(MeasurementContext const& ctx,
                        UnitVector const& lambda,
                        TieBreak policy,
                        RandomEngine& outcome_rng) const;

  private:
    Model(ModelKind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

    ModelKind kind_;
    std::string name_;
    std::shared_ptr<LocalDetMixture const> mixture_;
};

}  // namespace hvlab
