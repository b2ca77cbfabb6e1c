#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hvlab/geometry.hpp"
#include "hvlab/models.hpp"
#include "hvlab/sampling.hpp"

namespace hvlab {

/// Discretizes the hidden variable into finitely many cells covering S^2.
/// Every lambda maps to exactly one cell id.
class LambdaPartition
{
  public:
    enum class Kind
    {
        Trivial,
        SignCells,
        ZBands,
    };

    /// One cell: the whole sphere.
    static LambdaPartition trivial();

    /// Cells are sign vectors of lambda against each axis. Axes that agree
    /// up to sign are merged. At most 64 distinct axes.
    static LambdaPartition sign_cells(std::vector<UnitVector> const& axes);

    /// Cells are bands of lambda_z; `upper_edges` is increasing and ends at 1.
    static LambdaPartition z_bands(std::vector<double> upper_edges);

    /*!
     * Partition on which the model's outcomes are constant per cell.
     *
     * Sign cells over every raw and effective axis of the grid for the
     * geometric models, strategy bands for local mixtures. The quantum
     * oracle ignores lambda; it gets sign cells of the raw axes so that Z
     * is an honest, independent readout.
     */
    static LambdaPartition for_model(Model const& model, SettingsGrid const& grid);

    Kind kind() const { return kind_; }
    std::size_t axis_count() const { return axes_.size(); }
    std::vector<UnitVector> const& axes() const { return axes_; }

    std::uint64_t cell_id(UnitVector const& lambda) const;
    std::string cell_label(std::uint64_t id) const;

    std::string describe() const;

  private:
    LambdaPartition() = default;

    Kind kind_ = Kind::Trivial;
    std::vector<UnitVector> axes_;
    std::vector<double> edges_;
};

}  // namespace hvlab
