#ifndef FLEETCHARGE_LP_SOLVE_HPP
#define FLEETCHARGE_LP_SOLVE_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "fleetcharge/lp_problem.hpp"

namespace fleetcharge {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, NumericalFailure };

std::string to_string(LpStatus s);

enum class LpMethod { Auto, Simplex, InteriorPoint };

enum class CholeskyOrdering { Amd, Natural };

struct LpOptions {
    LpMethod method = LpMethod::Auto;
    /// Auto uses the dense simplex when rows · columns stays below this.
    std::size_t dense_limit = 250'000;
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    std::size_t max_iterations = 200;
    std::size_t max_simplex_pivots = 1'000'000;
    CholeskyOrdering ordering = CholeskyOrdering::Amd;
    /// Run the elastic feasibility problem after a failure to name the violated row families.
    bool diagnose_infeasibility = true;
};

struct LpResult {
    LpStatus status = LpStatus::NumericalFailure;
    std::vector<double> x;
    double objective = 0.0;
    /// Largest row or bound violation of `x` on the original problem.
    double primal_residual = 0.0;
    /// Relative dual residual and duality gap at termination (interior point only).
    double dual_residual = 0.0;
    double gap = 0.0;
    std::size_t iterations = 0;
    std::string method;
    double seconds = 0.0;
    /// For infeasible problems: row families that could not be satisfied.
    std::vector<RowFamily> infeasible_families;

    bool optimal() const { return status == LpStatus::Optimal; }
    std::string hint() const;
};

/// Bounded-variable primal simplex on a dense tableau, Bland's rule, two phases.
LpResult solve_simplex(const LpProblem& p, const LpOptions& opt = {});

/// Mehrotra predictor-corrector interior point with upper bounds, sparse normal equations.
LpResult solve_interior_point(const LpProblem& p, const LpOptions& opt = {});

/// Dispatches on size and, if the problem is not solved, attaches an infeasibility hint.
LpResult solve_lp(const LpProblem& p, const LpOptions& opt = {});

/// Row families whose elastic slack is positive at the minimum total violation.
/// Empty when the problem is feasible.
std::vector<RowFamily> diagnose_infeasibility(const LpProblem& p, const LpOptions& opt = {});

} // namespace fleetcharge

#endif // FLEETCHARGE_LP_SOLVE_HPP
