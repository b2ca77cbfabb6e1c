#pragma once

#include <cstddef>
#include <vector>

#include "hvlab/tables.hpp"

namespace hvlab::detail {

// Dense marginal over a subset of table variables, addressed by full
// assignments (one label index per table variable).
class Marginal
{
  public:
    Marginal(JointTable const& table, std::vector<std::size_t> vars);

    double at(std::vector<std::size_t> const& full) const
    {
        std::size_t idx = 0;
        for (std::size_t k = 0; k < vars_.size(); ++k)
        {
            idx = idx * dims_[k] + full[vars_[k]];
        }
        return p_[idx];
    }

    std::vector<std::size_t> const& vars() const { return vars_; }
    std::vector<double> const& values() const { return p_; }

  private:
    std::vector<std::size_t> vars_;
    std::vector<std::size_t> dims_;
    std::vector<double> p_;
};

// Mixed-radix increment of the listed coordinates of `full`; false after wrap-around.
bool advance(std::vector<std::size_t>& full, std::vector<std::size_t> const& vars, JointTable const& table);

}  // namespace hvlab::detail
