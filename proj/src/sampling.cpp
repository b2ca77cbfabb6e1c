#include "hvlab/sampling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <ostream>
#include <set>
#include <thread>

#include "hvlab/angle_expr.hpp"

namespace hvlab {
namespace {

void check_wing(std::vector<LabeledSetting> const& wing, char const* name)
{
    if (wing.empty())
    {
        throw std::invalid_argument(std::string("settings grid: wing ") + name + " is empty");
    }
    std::set<std::string> seen;
    for (auto const& s : wing)
    {
        if (s.label.empty())
        {
            throw std::invalid_argument(std::string("settings grid: empty label on wing ") + name);
        }
        if (!seen.insert(s.label).second)
        {
            throw std::invalid_argument("settings grid: duplicate label '" + s.label + "' on wing " + name);
        }
    }
}

std::vector<LabeledSetting> labeled_plane(std::vector<double> const& angles, char prefix)
{
    std::vector<LabeledSetting> out;
    for (std::size_t i = 0; i < angles.size(); ++i)
    {
        out.push_back({prefix + std::to_string(i), UnitVector::in_xz_plane(angles[i])});
    }
    return out;
}

std::vector<LabeledSetting> wing_from_json(nlohmann::json const& j, char const* name)
{
    if (!j.is_array())
    {
        throw std::invalid_argument(std::string("settings grid: '") + name + "' must be an array");
    }
    std::vector<LabeledSetting> out;
    for (auto const& item : j)
    {
        if (!item.is_object() || !item.contains("label"))
        {
            throw std::invalid_argument("settings grid: every setting needs a 'label'");
        }
        LabeledSetting s{item["label"].get<std::string>(), UnitVector::z_axis()};
        if (item.contains("direction"))
        {
            auto const& d = item["direction"];
            if (!d.is_array() || d.size() != 3)
            {
                throw std::invalid_argument("settings grid: 'direction' must be [x, y, z]");
            }
            s.direction = UnitVector::from_components(d[0].get<double>(), d[1].get<double>(), d[2].get<double>());
        }
        else if (item.contains("angle"))
        {
            auto const& a = item["angle"];
            double const angle = a.is_string() ? parse_angle(a.get<std::string>()) : a.get<double>();
            s.direction = UnitVector::in_xz_plane(angle);
        }
        else
        {
            throw std::invalid_argument("settings grid: setting '" + s.label + "' needs 'direction' or 'angle'");
        }
        out.push_back(std::move(s));
    }
    return out;
}

nlohmann::json wing_to_json(std::vector<LabeledSetting> const& wing)
{
    nlohmann::json out = nlohmann::json::array();
    for (auto const& s : wing)
    {
        out.push_back({{"label", s.label},
                       {"direction", {s.direction.x(), s.direction.y(), s.direction.z()}}});
    }
    return out;
}

}  // namespace

//---------------------------------------------------------------------------//
// SettingsGrid
//---------------------------------------------------------------------------//

SettingsGrid::SettingsGrid(std::vector<LabeledSetting> wing_a, std::vector<LabeledSetting> wing_b)
    : wing_a_(std::move(wing_a)), wing_b_(std::move(wing_b))
{
    check_wing(wing_a_, "A");
    check_wing(wing_b_, "B");
}

SettingsGrid SettingsGrid::coplanar(std::vector<double> const& angles_a, std::vector<double> const& angles_b)
{
    return SettingsGrid(labeled_plane(angles_a, 'a'), labeled_plane(angles_b, 'b'));
}

SettingsGrid SettingsGrid::single_pair(double omega)
{
    return coplanar({0.0}, {omega});
}

SettingsGrid SettingsGrid::chsh()
{
    return coplanar({0.0, kPi / 2}, {kPi / 4, 3 * kPi / 4});
}

std::vector<std::string> SettingsGrid::labels_a() const
{
    std::vector<std::string> out;
    for (auto const& s : wing_a_)
    {
        out.push_back(s.label);
    }
    return out;
}

std::vector<std::string> SettingsGrid::labels_b() const
{
    std::vector<std::string> out;
    for (auto const& s : wing_b_)
    {
        out.push_back(s.label);
    }
    return out;
}

SettingsGrid SettingsGrid::from_json(nlohmann::json const& j)
{
    if (!j.is_object() || !j.contains("wingA") || !j.contains("wingB"))
    {
        throw std::invalid_argument("settings grid JSON needs 'wingA' and 'wingB'");
    }
    return SettingsGrid(wing_from_json(j["wingA"], "wingA"), wing_from_json(j["wingB"], "wingB"));
}

SettingsGrid SettingsGrid::load(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw std::runtime_error("cannot read grid file " + path.string());
    }
    nlohmann::json j;
    try
    {
        in >> j;
    }
    catch (nlohmann::json::exception const& e)
    {
        throw std::invalid_argument("malformed grid file " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::json SettingsGrid::to_json() const
{
    return {{"wingA", wing_to_json(wing_a_)}, {"wingB", wing_to_json(wing_b_)}};
}

void RunConfig::validate() const
{
    if (samples < 1)
    {
        throw std::invalid_argument("run config: samples must be >= 1");
    }
    if (auto const* fixed = std::get_if<FixedSettings>(&setting_policy))
    {
        if (fixed->a_index >= grid.wing_a().size() || fixed->b_index >= grid.wing_b().size())
        {
            throw std::invalid_argument("run config: fixed setting index outside the grid");
        }
    }
    if (grid.wing_a().size() > UINT32_MAX || grid.wing_b().size() > UINT32_MAX)
    {
        throw std::invalid_argument("run config: grid too large");
    }
}

//---------------------------------------------------------------------------//
// Random streams
//---------------------------------------------------------------------------//

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t shard, std::uint64_t stream)
{
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(seed) ^ shard) ^ (stream * 0xd1b54a32d192ed03ULL));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t shard, Stream stream)
{
    return derive_seed(seed, shard, static_cast<std::uint64_t>(stream));
}

UnitVector sample_sphere(RandomEngine& rng)
{
    std::normal_distribution<double> normal;
    for (;;)
    {
        double const x = normal(rng);
        double const y = normal(rng);
        double const z = normal(rng);
        if (std::hypot(x, y, z) > 1e-150)
        {
            return UnitVector::from_components(x, y, z);
        }
    }
}

//---------------------------------------------------------------------------//
// Runner
//---------------------------------------------------------------------------//

std::uint64_t shard_count(std::uint64_t samples)
{
    return (samples + kShardSize - 1) / kShardSize;
}

std::vector<EventRecord> run_shard(RunConfig const& cfg, std::uint64_t shard)
{
    std::uint64_t const first = shard * kShardSize;
    if (first >= cfg.samples)
    {
        return {};
    }
    std::uint64_t const count = std::min(kShardSize, cfg.samples - first);

    auto const& wa = cfg.grid.wing_a();
    auto const& wb = cfg.grid.wing_b();

    // One resolved rule per setting pair.
    std::vector<JointRule> rules;
    rules.reserve(wa.size() * wb.size());
    for (auto const& sa : wa)
    {
        for (auto const& sb : wb)
        {
            rules.push_back(cfg.model.prepare_joint(sa.direction, sb.direction, sa.label, sb.label));
        }
    }

    RandomEngine settings_rng(derive_seed(cfg.seed, shard, Stream::Settings));
    RandomEngine lambda_rng(derive_seed(cfg.seed, shard, Stream::Lambda));
    RandomEngine outcome_rng(derive_seed(cfg.seed, shard, Stream::Outcome));
    std::uniform_int_distribution<std::size_t> pick_a(0, wa.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_b(0, wb.size() - 1);
    auto const* fixed = std::get_if<FixedSettings>(&cfg.setting_policy);

    std::vector<EventRecord> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i)
    {
        EventRecord rec;
        rec.run_index = first + i;
        std::size_t const ia = fixed ? fixed->a_index : pick_a(settings_rng);
        std::size_t const ib = fixed ? fixed->b_index : pick_b(settings_rng);
        rec.a_index = static_cast<std::uint32_t>(ia);
        rec.b_index = static_cast<std::uint32_t>(ib);
        JointRule const& rule = rules[ia * wb.size() + ib];
        for (;;)
        {
            rec.lambda = sample_sphere(lambda_rng);
            try
            {
                auto const outcome = rule.evaluate(rec.lambda, cfg.tie_break, outcome_rng);
                rec.x = static_cast<std::int8_t>(*outcome.x);
                rec.y = static_cast<std::int8_t>(*outcome.y);
                break;
            }
            catch (SignUndefined const&)
            {
                // Boundary draw under the resample policy.
            }
        }
        out.push_back(rec);
    }
    return out;
}

void run_experiment(RunConfig const& cfg, EventSink const& sink)
{
    cfg.validate();
    std::uint64_t const shards = shard_count(cfg.samples);
    unsigned workers = cfg.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : cfg.threads;
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, shards));

    if (workers <= 1)
    {
        for (std::uint64_t s = 0; s < shards; ++s)
        {
            auto const records = run_shard(cfg, s);
            sink(records);
        }
        return;
    }
    for (std::uint64_t begin = 0; begin < shards; begin += workers)
    {
        std::uint64_t const end = std::min<std::uint64_t>(shards, begin + workers);
        std::vector<std::future<std::vector<EventRecord>>> batch;
        for (std::uint64_t s = begin; s < end; ++s)
        {
            batch.push_back(std::async(std::launch::async, [&cfg, s] { return run_shard(cfg, s); }));
        }
        for (auto& f : batch)
        {
            auto const records = f.get();
            sink(records);
        }
    }
}

std::vector<EventRecord> collect_events(RunConfig const& cfg)
{
    std::vector<EventRecord> all;
    all.reserve(cfg.samples);
    run_experiment(cfg, [&all](std::span<EventRecord const> records) {
        all.insert(all.end(), records.begin(), records.end());
    });
    return all;
}

//---------------------------------------------------------------------------//
// CSV output
//---------------------------------------------------------------------------//

std::string format_double(double value)
{
    char buf[64];
    auto const [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc())
    {
        throw std::runtime_error("cannot format floating-point value");
    }
    return std::string(buf, end);
}

CsvEventWriter::CsvEventWriter(std::ostream& out, SettingsGrid const& grid, bool hide_lambda)
    : out_(out), grid_(grid), hide_lambda_(hide_lambda)
{
    out_ << (hide_lambda_ ? "run,a,b,x,y\n" : "run,a,b,lx,ly,lz,x,y\n");
}

void CsvEventWriter::write(std::span<EventRecord const> records)
{
    std::string line;
    for (auto const& r : records)
    {
        line.clear();
        line += std::to_string(r.run_index);
        line += ',';
        line += grid_.wing_a()[r.a_index].label;
        line += ',';
        line += grid_.wing_b()[r.b_index].label;
        if (!hide_lambda_)
        {
            line += ',';
            line += format_double(r.lambda.x());
            line += ',';
            line += format_double(r.lambda.y());
            line += ',';
            line += format_double(r.lambda.z());
        }
        line += r.x > 0 ? ",1" : ",-1";
        line += r.y > 0 ? ",1\n" : ",-1\n";
        out_ << line;
    }
    if (!out_)
    {
        throw std::runtime_error("write failure on event sink");
    }
}

}  // namespace hvlab
