#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hvlab/geometry.hpp"
#include "hvlab/models.hpp"

namespace hvlab {

struct LabeledSetting
{
    std::string label;
    UnitVector direction;
};

/// Labeled measurement directions for both wings.
class SettingsGrid
{
  public:
    /// Throws std::invalid_argument if a wing is empty or a label repeats within a wing.
    SettingsGrid(std::vector<LabeledSetting> wing_a, std::vector<LabeledSetting> wing_b);

    /// Directions in the xz-plane at the given angles from +z, labeled a0.., b0...
    static SettingsGrid coplanar(std::vector<double> const& angles_a, std::vector<double> const& angles_b);

    /// A single pair: a = +z, b in the xz-plane at angle omega from a.
    static SettingsGrid single_pair(double omega);

    /// Planar settings (0, pi/2; pi/4, 3pi/4), which maximize the singlet CHSH value.
    static SettingsGrid chsh();

    std::vector<LabeledSetting> const& wing_a() const { return wing_a_; }
    std::vector<LabeledSetting> const& wing_b() const { return wing_b_; }

    std::vector<std::string> labels_a() const;
    std::vector<std::string> labels_b() const;

    /// {"wingA": [{"label": .., "direction": [x, y, z]} | {"label": .., "angle": "3pi/4"}], "wingB": [..]}
    /// An "angle" entry lies in the xz-plane.
    static SettingsGrid from_json(nlohmann::json const& j);
    static SettingsGrid load(std::filesystem::path const& path);
    nlohmann::json to_json() const;

  private:
    std::vector<LabeledSetting> wing_a_;
    std::vector<LabeledSetting> wing_b_;
};

/// Every setting pair is drawn independently and uniformly.
struct UniformIID
{
};

/// Always the same pair, by grid index.
struct FixedSettings
{
    std::size_t a_index = 0;
    std::size_t b_index = 0;
};

using SettingPolicy = std::variant<UniformIID, FixedSettings>;

struct RunConfig
{
    Model model = Model::gr();
    SettingsGrid grid = SettingsGrid::single_pair(kPi / 2);
    std::uint64_t samples = 1;
    std::uint64_t seed = 0;
    SettingPolicy setting_policy = UniformIID{};
    TieBreak tie_break = TieBreak::PlusOne;
    unsigned threads = 1;  //!< 0 selects the hardware concurrency

    /// Throws std::invalid_argument for zero samples or a fixed index outside the grid.
    void validate() const;
};

/// One simulated run. Settings are stored as grid indices; labels come from the grid.
struct EventRecord
{
    std::uint64_t run_index = 0;
    std::uint32_t a_index = 0;
    std::uint32_t b_index = 0;
    UnitVector lambda;
    std::int8_t x = 1;
    std::int8_t y = 1;

    friend bool operator==(EventRecord const&, EventRecord const&) = default;
};

/// Independent RNG substreams of one run.
enum class Stream : std::uint64_t
{
    Settings = 1,
    Lambda = 2,
    Outcome = 3,
};

/// SplitMix64-style mixing of (seed, shard, stream) into an engine seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t shard, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t shard, Stream stream);

/// Uniform point on S^2 from a normalized Gaussian triple.
UnitVector sample_sphere(RandomEngine& rng);

/// Runs per shard. Shard layout depends only on the sample count, never on
/// the thread count, so output is identical for any --threads value.
inline constexpr std::uint64_t kShardSize = 1U << 16;

std::uint64_t shard_count(std::uint64_t samples);

/// Records [shard * kShardSize, ...) of the run, generated from the shard's own substreams.
std::vector<EventRecord> run_shard(RunConfig const& cfg, std::uint64_t shard);

using EventSink = std::function<void(std::span<EventRecord const>)>;

/// Streams every record of the run to `sink`, shard by shard in run order.
/// Shards are generated in parallel, up to cfg.threads at a time.
void run_experiment(RunConfig const& cfg, EventSink const& sink);

/// Convenience: the whole run in memory.
std::vector<EventRecord> collect_events(RunConfig const& cfg);

/// CSV with header run,a,b,lx,ly,lz,x,y (or run,a,b,x,y when lambda is hidden).
class CsvEventWriter
{
  public:
    CsvEventWriter(std::ostream& out, SettingsGrid const& grid, bool hide_lambda);

    void write(std::span<EventRecord const> records);

  private:
    std::ostream& out_;
    SettingsGrid const& grid_;
    bool hide_lambda_;
};

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace hvlab
