#ifndef FLEETCHARGE_LP_PROBLEM_HPP
#define FLEETCHARGE_LP_PROBLEM_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace fleetcharge {

enum class RowSense { LessEqual, Equal };

/// Constraint family a row belongs to; used for row counts and infeasibility hints.
enum class RowFamily {
    Aggregate,       ///< Σ_k P_k,t ≤ peak
    CumulativeUpper, ///< SoC_k,t ≤ soc_max through the cumulative sum
    CumulativeLower, ///< SoC_k,t ≥ soc_min through the cumulative sum
    TerminalUpper,
    TerminalLower,
    Dynamics, ///< SoC_k,t+1 − SoC_k,t − gain·P_k,t = −ΔSoC_op (state-space form)
    PeakLink, ///< peak copies tied together (state-space form)
    Elastic,
    Generic,
};

std::string to_string(RowFamily f);

struct LpRow {
    std::vector<std::pair<std::size_t, double>> terms;
    RowSense sense = RowSense::LessEqual;
    double rhs = 0.0;
    RowFamily family = RowFamily::Generic;
    std::string name;
};

/// min cᵀx  s.t.  rows (≤ or =),  lower ≤ x ≤ upper. Lower bounds must be finite.
struct LpProblem {
    std::vector<double> cost;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::string> names;
    std::vector<LpRow> rows;

    std::size_t num_vars() const { return cost.size(); }
    std::size_t num_rows() const { return rows.size(); }

    std::size_t add_variable(std::string name, double c, double lo, double hi);
    std::size_t add_row(LpRow row);

    std::size_t count_rows(RowFamily f) const;
    double objective(const std::vector<double>& x) const;

    /// Largest violation of any row or bound by `x` (0 when feasible).
    double max_violation(const std::vector<double>& x) const;
    /// Same, restricted to rows of one family.
    double max_row_violation(const std::vector<double>& x, RowFamily f) const;
};

/// Writes the problem in CPLEX LP text format (grammar in docs/formats.md).
void write_lp_format(const LpProblem& p, std::ostream& out);

} // namespace fleetcharge

#endif // FLEETCHARGE_LP_PROBLEM_HPP
