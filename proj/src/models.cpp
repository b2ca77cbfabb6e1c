#include "hvlab/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace hvlab {
namespace {

int checked_spin(std::optional<int> const& v, char const* wing)
{
    if (!v || (*v != 1 && *v != -1))
    {
        throw std::invalid_argument(std::string("outcome for wing ") + wing + " must be +1 or -1");
    }
    return *v;
}

int random_spin(RandomEngine& rng)
{
    return (rng() >> 63) != 0 ? 1 : -1;
}

double unit_uniform(RandomEngine& rng)
{
    // 53 random mantissa bits, in [0, 1).
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

//---------------------------------------------------------------------------//
// MeasurementContext
//---------------------------------------------------------------------------//

MeasurementContext MeasurementContext::single_a(UnitVector const& a, std::string label)
{
    MeasurementContext ctx;
    ctx.mode_ = MeasurementMode::SingleA;
    ctx.a_ = a;
    ctx.a_label_ = std::move(label);
    return ctx;
}

MeasurementContext MeasurementContext::single_b(UnitVector const& b, std::string label)
{
    MeasurementContext ctx;
    ctx.mode_ = MeasurementMode::SingleB;
    ctx.b_ = b;
    ctx.b_label_ = std::move(label);
    return ctx;
}

MeasurementContext MeasurementContext::joint(UnitVector const& a,
                                             UnitVector const& b,
                                             std::string a_label,
                                             std::string b_label)
{
    MeasurementContext ctx;
    ctx.mode_ = MeasurementMode::Joint;
    ctx.a_ = a;
    ctx.b_ = b;
    ctx.a_label_ = std::move(a_label);
    ctx.b_label_ = std::move(b_label);
    return ctx;
}

UnitVector const& MeasurementContext::a() const
{
    if (!a_)
    {
        throw std::logic_error("wing A is not measured in this context");
    }
    return *a_;
}

UnitVector const& MeasurementContext::b() const
{
    if (!b_)
    {
        throw std::logic_error("wing B is not measured in this context");
    }
    return *b_;
}

//---------------------------------------------------------------------------//
// Deterministic sign models
//---------------------------------------------------------------------------//

int sign_of(double projection, TieBreak policy)
{
    if (std::abs(projection) < kSignEpsilon)
    {
        if (policy == TieBreak::Resample)
        {
            throw SignUndefined("projection on the sign boundary");
        }
        return 1;
    }
    return projection > 0 ? 1 : -1;
}

OutcomePair gr_outcome(MeasurementContext const& ctx, HiddenState const& state, TieBreak policy)
{
    UnitVector const& lambda = state.lambda;
    switch (ctx.mode())
    {
    case MeasurementMode::SingleA:
        return {sign_of(ctx.a().dot(lambda), policy), std::nullopt};
    case MeasurementMode::SingleB:
        return {std::nullopt, -sign_of(ctx.b().dot(lambda), policy)};
    case MeasurementMode::Joint:
        break;
    }
    auto const [a_hat, b_hat] = rotate_pair(ctx.a(), ctx.b());
    return {sign_of(a_hat.dot(lambda), policy), -sign_of(b_hat.dot(lambda), policy)};
}

UnitVector bell_rotated_a(UnitVector const& a, UnitVector const& b)
{
    // Component of a orthogonal to b, inside span(a, b).
    double const c = a.dot(b);
    double const px = a.x() - c * b.x();
    double const py = a.y() - c * b.y();
    double const pz = a.z() - c * b.z();
    if (std::hypot(px, py, pz) < kSignEpsilon)
    {
        // Parallel or antipodal: omega_hat equals omega, nothing to rotate.
        return a;
    }
    UnitVector const side = UnitVector::from_components(px, py, pz);
    double const w = omega_hat(angle_between(a, b)).radians();
    double const cw = std::cos(w);
    double const sw = std::sin(w);
    return UnitVector::from_components(cw * b.x() + sw * side.x(),
                                       cw * b.y() + sw * side.y(),
                                       cw * b.z() + sw * side.z());
}

OutcomePair bell_outcome(MeasurementContext const& ctx, HiddenState const& state, TieBreak policy)
{
    UnitVector const& lambda = state.lambda;
    switch (ctx.mode())
    {
    case MeasurementMode::SingleA:
        return {sign_of(ctx.a().dot(lambda), policy), std::nullopt};
    case MeasurementMode::SingleB:
        return {std::nullopt, -sign_of(ctx.b().dot(lambda), policy)};
    case MeasurementMode::Joint:
        break;
    }
    UnitVector const a_rot = bell_rotated_a(ctx.a(), ctx.b());
    return {sign_of(a_rot.dot(lambda), policy), -sign_of(ctx.b().dot(lambda), policy)};
}

double qm_probability(MeasurementContext const& ctx, OutcomePair const& outcome)
{
    switch (ctx.mode())
    {
    case MeasurementMode::SingleA:
        checked_spin(outcome.x, "A");
        if (outcome.y)
        {
            throw std::invalid_argument("wing B is not measured");
        }
        return 0.5;
    case MeasurementMode::SingleB:
        checked_spin(outcome.y, "B");
        if (outcome.x)
        {
            throw std::invalid_argument("wing A is not measured");
        }
        return 0.5;
    case MeasurementMode::Joint:
        break;
    }
    int const x = checked_spin(outcome.x, "A");
    int const y = checked_spin(outcome.y, "B");
    double const cos_omega = std::clamp(ctx.a().dot(ctx.b()), -1.0, 1.0);
    return (1.0 - x * y * cos_omega) / 4.0;
}

//---------------------------------------------------------------------------//
// Local deterministic mixtures
//---------------------------------------------------------------------------//

LocalResponse LocalResponse::constant(int value)
{
    if (value != 1 && value != -1)
    {
        throw std::invalid_argument("local response must be +1 or -1");
    }
    LocalResponse r;
    r.fallback_ = value;
    return r;
}

LocalResponse LocalResponse::by_label(std::map<std::string, int> table, std::optional<int> fallback)
{
    LocalResponse r;
    for (auto const& [label, value] : table)
    {
        if (value != 1 && value != -1)
        {
            throw std::invalid_argument("local response for '" + label + "' must be +1 or -1");
        }
        r.table_.emplace(label, value);
    }
    if (fallback && *fallback != 1 && *fallback != -1)
    {
        throw std::invalid_argument("local response fallback must be +1 or -1");
    }
    r.fallback_ = fallback;
    return r;
}

int LocalResponse::operator()(std::string_view label) const
{
    if (auto it = table_.find(label); it != table_.end())
    {
        return it->second;
    }
    if (fallback_)
    {
        return *fallback_;
    }
    throw std::out_of_range("no local response for setting '" + std::string(label) + "'");
}

nlohmann::json LocalResponse::to_json() const
{
    if (table_.empty() && fallback_)
    {
        return *fallback_;
    }
    nlohmann::json j = nlohmann::json::object();
    for (auto const& [label, value] : table_)
    {
        j[label] = value;
    }
    if (fallback_)
    {
        j["*"] = *fallback_;
    }
    return j;
}

LocalResponse LocalResponse::from_json(nlohmann::json const& j)
{
    if (j.is_number_integer())
    {
        return constant(j.get<int>());
    }
    if (!j.is_object())
    {
        throw std::invalid_argument("local response must be an integer or an object of label -> +-1");
    }
    std::map<std::string, int> table;
    std::optional<int> fallback;
    for (auto const& [label, value] : j.items())
    {
        if (!value.is_number_integer())
        {
            throw std::invalid_argument("local response for '" + label + "' must be an integer");
        }
        if (label == "*")
        {
            fallback = value.get<int>();
        }
        else
        {
            table.emplace(label, value.get<int>());
        }
    }
    return by_label(std::move(table), fallback);
}

LocalDetMixture::LocalDetMixture(std::vector<LocalStrategy> strategies)
    : strategies_(std::move(strategies))
{
    if (strategies_.empty())
    {
        throw std::invalid_argument("local-deterministic mixture needs at least one strategy");
    }
    double total = 0.0;
    for (auto const& s : strategies_)
    {
        if (!std::isfinite(s.weight) || s.weight < 0)
        {
            throw std::invalid_argument("mixture weights must be finite and non-negative");
        }
        total += s.weight;
    }
    if (!(total > 0))
    {
        throw std::invalid_argument("mixture weights must not all be zero");
    }
    double cumulative = 0.0;
    upper_edges_.reserve(strategies_.size());
    for (auto& s : strategies_)
    {
        s.weight /= total;
        cumulative += s.weight;
        upper_edges_.push_back(std::min(1.0, -1.0 + 2.0 * cumulative));
    }
    upper_edges_.back() = 1.0;
}

OutcomePair LocalDetMixture::outcome(MeasurementContext const& ctx, std::size_t index) const
{
    if (index >= strategies_.size())
    {
        throw std::out_of_range("strategy index " + std::to_string(index) + " out of range");
    }
    auto const& s = strategies_[index];
    OutcomePair out;
    if (ctx.mode() != MeasurementMode::SingleB)
    {
        out.x = s.a(ctx.a_label());
    }
    if (ctx.mode() != MeasurementMode::SingleA)
    {
        out.y = s.b(ctx.b_label());
    }
    return out;
}

std::size_t LocalDetMixture::strategy_index(UnitVector const& lambda) const
{
    auto const it = std::upper_bound(upper_edges_.begin(), upper_edges_.end(), lambda.z());
    auto index = std::min(static_cast<std::size_t>(it - upper_edges_.begin()), strategies_.size() - 1);
    // lambda_z = 1 exactly falls past every band; give it to the last strategy with weight
    while (index > 0 && strategies_[index].weight == 0.0)
    {
        --index;
    }
    return index;
}

nlohmann::json LocalDetMixture::to_json() const
{
    nlohmann::json list = nlohmann::json::array();
    for (auto const& s : strategies_)
    {
        list.push_back({{"weight", s.weight}, {"a", s.a.to_json()}, {"b", s.b.to_json()}});
    }
    return {{"strategies", list}};
}

LocalDetMixture LocalDetMixture::from_json(nlohmann::json const& j)
{
    if (!j.is_object() || !j.contains("strategies") || !j["strategies"].is_array())
    {
        throw std::invalid_argument("mixture JSON needs a 'strategies' array");
    }
    std::vector<LocalStrategy> strategies;
    for (auto const& item : j["strategies"])
    {
        if (!item.contains("a") || !item.contains("b"))
        {
            throw std::invalid_argument("each strategy needs 'a' and 'b' responses");
        }
        LocalStrategy s{LocalResponse::from_json(item["a"]), LocalResponse::from_json(item["b"]), 1.0};
        if (item.contains("weight"))
        {
            s.weight = item["weight"].get<double>();
        }
        strategies.push_back(std::move(s));
    }
    return LocalDetMixture(std::move(strategies));
}

LocalDetMixture LocalDetMixture::load(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw std::runtime_error("cannot read mixture file " + path.string());
    }
    nlohmann::json j;
    try
    {
        in >> j;
    }
    catch (nlohmann::json::exception const& e)
    {
        throw std::invalid_argument("malformed mixture file " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

std::vector<LocalStrategy> LocalDetMixture::all_deterministic(std::vector<std::string> const& labels_a,
                                                              std::vector<std::string> const& labels_b)
{
    auto responses = [](std::vector<std::string> const& labels) {
        if (labels.size() >= 20)
        {
            throw std::invalid_argument("too many settings to enumerate deterministic responses");
        }
        std::vector<LocalResponse> out;
        std::size_t const count = std::size_t{1} << labels.size();
        for (std::size_t mask = 0; mask < count; ++mask)
        {
            std::map<std::string, int> table;
            for (std::size_t i = 0; i < labels.size(); ++i)
            {
                table.emplace(labels[i], ((mask >> i) & 1U) != 0 ? 1 : -1);
            }
            out.push_back(LocalResponse::by_label(std::move(table)));
        }
        return out;
    };
    auto const ra = responses(labels_a);
    auto const rb = responses(labels_b);
    std::vector<LocalStrategy> all;
    all.reserve(ra.size() * rb.size());
    for (auto const& a : ra)
    {
        for (auto const& b : rb)
        {
            all.push_back({a, b, 1.0});
        }
    }
    return all;
}

OutcomePair localdet_outcome(LocalDetMixture const& mixture,
                             MeasurementContext const& ctx,
                             std::size_t index)
{
    return mixture.outcome(ctx, index);
}

//---------------------------------------------------------------------------//
// Model dispatch
//---------------------------------------------------------------------------//

OutcomePair JointRule::evaluate(UnitVector const& lambda, TieBreak policy, RandomEngine& outcome_rng) const
{
    switch (kind_)
    {
    case ModelKind::GrSymmetric:
    case ModelKind::BellAsymmetric:
        return {sign_of(axis_a_.dot(lambda), policy), -sign_of(axis_b_.dot(lambda), policy)};
    case ModelKind::QmOracle:
    {
        int const x = random_spin(outcome_rng);
        // P(y = -x | x) = (1 + cos omega) / 2
        bool const anti = unit_uniform(outcome_rng) < (1.0 + cos_omega_) / 2.0;
        return {x, anti ? -x : x};
    }
    case ModelKind::LocalDetMixture:
    {
        auto const& s = mixture_->strategies()[mixture_->strategy_index(lambda)];
        return {s.a(a_label_), s.b(b_label_)};
    }
    }
    throw std::logic_error("unknown model kind");
}

std::vector<UnitVector> JointRule::decisive_axes() const
{
    if (kind_ == ModelKind::GrSymmetric || kind_ == ModelKind::BellAsymmetric)
    {
        return {axis_a_, axis_b_};
    }
    return {};
}

Model Model::gr()
{
    return Model(ModelKind::GrSymmetric, "gr");
}

Model Model::bell()
{
    return Model(ModelKind::BellAsymmetric, "bell");
}

Model Model::qm()
{
    return Model(ModelKind::QmOracle, "qm");
}

Model Model::localdet(LocalDetMixture mixture)
{
    Model m(ModelKind::LocalDetMixture, "localdet");
    m.mixture_ = std::make_shared<LocalDetMixture const>(std::move(mixture));
    return m;
}

Model Model::parse(std::string_view id)
{
    if (id == "gr")
    {
        return gr();
    }
    if (id == "bell")
    {
        return bell();
    }
    if (id == "qm")
    {
        return qm();
    }
    constexpr std::string_view prefix = "localdet:";
    if (id.starts_with(prefix) && id.size() > prefix.size())
    {
        Model m = localdet(LocalDetMixture::load(std::string(id.substr(prefix.size()))));
        m.name_ = std::string(id);
        return m;
    }
    throw std::invalid_argument("unknown model '" + std::string(id)
                                + "' (expected gr, bell, qm or localdet:<file>)");
}

JointRule Model::prepare_joint(UnitVector const& a,
                               UnitVector const& b,
                               std::string a_label,
                               std::string b_label) const
{
    JointRule rule;
    rule.kind_ = kind_;
    rule.a_label_ = std::move(a_label);
    rule.b_label_ = std::move(b_label);
    rule.cos_omega_ = std::clamp(a.dot(b), -1.0, 1.0);
    rule.mixture_ = mixture_;
    switch (kind_)
    {
    case ModelKind::GrSymmetric:
    {
        auto const [a_hat, b_hat] = rotate_pair(a, b);
        rule.axis_a_ = a_hat;
        rule.axis_b_ = b_hat;
        break;
    }
    case ModelKind::BellAsymmetric:
        rule.axis_a_ = bell_rotated_a(a, b);
        rule.axis_b_ = b;
        break;
    case ModelKind::QmOracle:
    case ModelKind::LocalDetMixture:
        rule.axis_a_ = a;
        rule.axis_b_ = b;
        break;
    }
    return rule;
}

OutcomePair Model::outcome(MeasurementContext const& ctx,
                           UnitVector const& lambda,
                           TieBreak policy,
                           RandomEngine& outcome_rng) const
{
    HiddenState const state{lambda};
    switch (kind_)
    {
    case ModelKind::GrSymmetric:
        return gr_outcome(ctx, state, policy);
    case ModelKind::BellAsymmetric:
        return bell_outcome(ctx, state, policy);
    case ModelKind::LocalDetMixture:
        return mixture_->outcome(ctx, mixture_->strategy_index(lambda));
    case ModelKind::QmOracle:
        break;
    }
    switch (ctx.mode())
    {
    case MeasurementMode::SingleA:
        return {random_spin(outcome_rng), std::nullopt};
    case MeasurementMode::SingleB:
        return {std::nullopt, random_spin(outcome_rng)};
    case MeasurementMode::Joint:
        break;
    }
    return prepare_joint(ctx.a(), ctx.b()).evaluate(lambda, policy, outcome_rng);
}

}  // namespace hvlab
