#include "hvlab/partition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hvlab {

LambdaPartition LambdaPartition::trivial()
{
    return LambdaPartition();
}

LambdaPartition LambdaPartition::sign_cells(std::vector<UnitVector> const& axes)
{
    LambdaPartition p;
    p.kind_ = Kind::SignCells;
    for (auto const& axis : axes)
    {
        bool const duplicate = std::any_of(p.axes_.begin(), p.axes_.end(), [&](UnitVector const& seen) {
            return std::abs(seen.dot(axis)) > 1.0 - 1e-12;
        });
        if (!duplicate)
        {
            p.axes_.push_back(axis);
        }
    }
    if (p.axes_.size() > 64)
    {
        throw std::invalid_argument("sign-cell partition supports at most 64 distinct axes, got "
                                    + std::to_string(p.axes_.size()));
    }
    return p;
}

LambdaPartition LambdaPartition::z_bands(std::vector<double> upper_edges)
{
    if (upper_edges.empty() || upper_edges.back() != 1.0
        || !std::is_sorted(upper_edges.begin(), upper_edges.end()) || upper_edges.front() < -1.0)
    {
        throw std::invalid_argument("z-band edges must be sorted within [-1, 1] and end at 1");
    }
    LambdaPartition p;
    p.kind_ = Kind::ZBands;
    p.edges_ = std::move(upper_edges);
    return p;
}

LambdaPartition LambdaPartition::for_model(Model const& model, SettingsGrid const& grid)
{
    if (model.kind() == ModelKind::LocalDetMixture)
    {
        return z_bands(model.mixture()->band_edges());
    }
    std::vector<UnitVector> axes;
    for (auto const& s : grid.wing_a())
    {
        axes.push_back(s.direction);
    }
    for (auto const& s : grid.wing_b())
    {
        axes.push_back(s.direction);
    }
    for (auto const& sa : grid.wing_a())
    {
        for (auto const& sb : grid.wing_b())
        {
            for (auto const& axis : model.prepare_joint(sa.direction, sb.direction).decisive_axes())
            {
                axes.push_back(axis);
            }
        }
    }
    return sign_cells(axes);
}

std::uint64_t LambdaPartition::cell_id(UnitVector const& lambda) const
{
    switch (kind_)
    {
    case Kind::Trivial:
        return 0;
    case Kind::SignCells:
    {
        std::uint64_t id = 0;
        for (std::size_t i = 0; i < axes_.size(); ++i)
        {
            if (axes_[i].dot(lambda) > 0)
            {
                id |= std::uint64_t{1} << i;
            }
        }
        return id;
    }
    case Kind::ZBands:
    {
        auto const it = std::upper_bound(edges_.begin(), edges_.end(), lambda.z());
        return std::min<std::uint64_t>(static_cast<std::uint64_t>(it - edges_.begin()), edges_.size() - 1);
    }
    }
    return 0;
}

std::string LambdaPartition::cell_label(std::uint64_t id) const
{
    switch (kind_)
    {
    case Kind::Trivial:
        return "all";
    case Kind::SignCells:
    {
        std::string label;
        for (std::size_t i = 0; i < axes_.size(); ++i)
        {
            label += ((id >> i) & 1U) != 0 ? '+' : '-';
        }
        return label;
    }
    case Kind::ZBands:
        return "s" + std::to_string(id);
    }
    return {};
}

std::string LambdaPartition::describe() const
{
    switch (kind_)
    {
    case Kind::Trivial:
        return "trivial";
    case Kind::SignCells:
        return "sign-cells(" + std::to_string(axes_.size()) + " axes)";
    case Kind::ZBands:
        return "z-bands(" + std::to_string(edges_.size()) + ")";
    }
    return {};
}

}  // namespace hvlab
