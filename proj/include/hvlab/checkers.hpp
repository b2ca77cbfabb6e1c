#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hvlab/tables.hpp"

namespace hvlab {

/// Every conditioning event was below the probability floor.
class AllConditioningEventsEmpty : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct CheckOptions
{
    double sigma_multiplier = 4.0;      //!< c in c * sqrt(k / n)
    double floor_counts = 10.0;         //!< events with fewer expected counts are skipped
    double exact_tolerance = 1e-9;      //!< for tables without a sample count
    double exact_floor = 1e-14;         //!< probability floor for exact tables
};

/*!
 * Outcome of one constraint check.
 *
 * Each identity compares two conditional distributions over every
 * conditioning assignment; the deviation is their total-variation distance.
 * For exact tables the tolerance is fixed. For sampled tables each
 * assignment with n expected counts gets c * sqrt(k / n), k being the target
 * alphabet size, and the witness is the assignment with the largest
 * deviation-to-tolerance ratio. Either way pass <=> max_deviation <= tolerance,
 * both read at the witness.
 */
struct ConstraintReport
{
    std::string id;
    bool pass = true;
    double max_deviation = 0.0;
    double tolerance = 0.0;
    Assignment witness;
    std::string relation;            //!< which identity produced the witness
    std::size_t skipped_cells = 0;   //!< conditioning events below the floor
    std::size_t evaluated_cells = 0;
    double peak_deviation = 0.0;     //!< largest deviation over all evaluated events

    nlohmann::json to_json() const;
};

/// c * sqrt(k / n).
double statistical_tolerance(double c, double alphabet_size, double samples);

// Each checker throws std::out_of_range if the table lacks a variable it
// needs and AllConditioningEventsEmpty if nothing could be evaluated.

/// A|BCYZ = A, B|ACXZ = B, C|ABXY = C.
ConstraintReport check_FR(JointTable const& t, CheckOptions const& opts = {});
/// YZ|ABC = YZ|BC, XZ|ABC = XZ|AC, XY|ABC = XY|AB.
ConstraintReport check_NS_full(JointTable const& t, CheckOptions const& opts = {});
/// A|BZ = A, B|AZ = B (the ontic state read as Z).
ConstraintReport check_FW(JointTable const& t, CheckOptions const& opts = {});
/// CZ|ABXY = CZ.
ConstraintReport check_ST(JointTable const& t, CheckOptions const& opts = {});
/// X|AB = X|A, Y|AB = Y|B.
ConstraintReport check_NS_weak(JointTable const& t, CheckOptions const& opts = {});
/// X|ABZ = X|AZ, Y|ABZ = Y|BZ.
ConstraintReport check_PI(JointTable const& t, CheckOptions const& opts = {});
/// X|ABYZ = X|ABZ, Y|ABXZ = Y|ABZ.
ConstraintReport check_OI(JointTable const& t, CheckOptions const& opts = {});
/// XY|ABZ = X|AZ * Y|BZ.
ConstraintReport check_BLoc(JointTable const& t, CheckOptions const& opts = {});

/// All eight checkers in the order FR, NS_full, FW, ST, NS_weak, PI, OI, B-Loc.
std::vector<ConstraintReport> check_all(JointTable const& t, CheckOptions const& opts = {});

/// Largest CHSH value over all 2x2 sub-grids of P(XY|AB), with its tolerance
/// (4 sigma from the pair counts for sampled tables). Nothing when either
/// wing has a single setting.
struct TableChsh
{
    double value = 0.0;
    double tolerance = 0.0;
};
std::optional<TableChsh> table_chsh(JointTable const& t, CheckOptions const& opts = {});

struct ModelTraits
{
    bool deterministic = false;
    bool qm_equivalent = false;
};

/*!
 * Cross-checks the checker results against the implication relations.
 *
 * FW and NS and ST imply FR: if the three premises pass while FR fails by
 * more than the four tolerances combined, the table is INCONSISTENT.
 *
 * A deterministic model is outcome independent, so a Bell violation in its
 * statistics forces a parameter-independence failure. When the model is
 * declared deterministic and quantum-equivalent and the table's CHSH value
 * exceeds 2 beyond tolerance, a passing PI check is INCONSISTENT too.
 */
struct ImplicationAudit
{
    std::vector<ConstraintReport> reports;
    bool lambda_visible = true;

    std::string fr_chain_status;  //!< "premise-false", "confirmed", "INCONSISTENT", "not-evaluated"
    std::string det_chain_status; //!< "not-applicable", "no-bell-violation", "confirmed", "INCONSISTENT"
    std::optional<TableChsh> chsh;

    bool inconsistent() const;
    ConstraintReport const* find(std::string const& id) const;
    nlohmann::json to_json() const;
};

/// With `lambda_visible` false only the Z-free checker (NS_weak) runs.
ImplicationAudit audit_implications(JointTable const& t,
                                    ModelTraits traits,
                                    bool lambda_visible = true,
                                    CheckOptions const& opts = {});

}  // namespace hvlab
