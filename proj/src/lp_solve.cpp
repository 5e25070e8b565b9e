#include "fleetcharge/lp_solve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace fleetcharge {

std::string to_string(LpStatus s) {
    switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration_limit";
    case LpStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

std::string LpResult::hint() const {
    if (infeasible_families.empty()) {
        return {};
    }
    std::string out = "violated constraint families:";
    for (RowFamily f : infeasible_families) {
        out += ' ' + to_string(f);
    }
    return out;
}

namespace {

bool use_simplex(const LpProblem& p, const LpOptions& opt) {
    switch (opt.method) {
    case LpMethod::Simplex: return true;
    case LpMethod::InteriorPoint: return false;
    case LpMethod::Auto: break;
    }
    const double cells = static_cast<double>(p.num_rows()) * static_cast<double>(p.num_vars() + 2 * p.num_rows());
    return cells <= static_cast<double>(opt.dense_limit);
}

LpResult dispatch(const LpProblem& p, const LpOptions& opt) {
    return use_simplex(p, opt) ? solve_simplex(p, opt) : solve_interior_point(p, opt);
}

} // namespace

std::vector<RowFamily> diagnose_infeasibility(const LpProblem& p, const LpOptions& opt) {
    LpProblem e;
    e.cost.assign(p.num_vars(), 0.0);
    e.lower = p.lower;
    e.upper = p.upper;
    e.names = p.names;
    e.rows = p.rows;
    std::vector<std::pair<std::size_t, std::size_t>> slack_of_row; // (row, variable)
    for (std::size_t i = 0; i < e.rows.size(); ++i) {
        LpRow& r = e.rows[i];
        const std::size_t down = e.add_variable("elastic_down_" + std::to_string(i), 1.0, 0.0,
                                                std::numeric_limits<double>::infinity());
        r.terms.emplace_back(down, -1.0);
        slack_of_row.emplace_back(i, down);
        if (r.sense == RowSense::Equal) {
            const std::size_t up = e.add_variable("elastic_up_" + std::to_string(i), 1.0, 0.0,
                                                  std::numeric_limits<double>::infinity());
            r.terms.emplace_back(up, 1.0);
            slack_of_row.emplace_back(i, up);
        }
    }
    LpOptions sub = opt;
    sub.diagnose_infeasibility = false;
    const LpResult r = dispatch(e, sub);
    std::vector<RowFamily> out;
    if (!r.optimal()) {
        return out;
    }
    double scale = 1.0;
    for (const LpRow& row : p.rows) {
        scale = std::max(scale, std::abs(row.rhs));
    }
    if (r.objective <= 1e-6 * scale) {
        return out;
    }
    for (const auto& [row, var] : slack_of_row) {
        if (r.x[var] > 1e-7 * scale) {
            const RowFamily f = p.rows[row].family;
            if (std::find(out.begin(), out.end(), f) == out.end()) {
                out.push_back(f);
            }
        }
    }
    return out;
}

LpResult solve_lp(const LpProblem& p, const LpOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    LpResult res = dispatch(p, opt);
    if (res.optimal() && res.primal_residual > 1e-6) {
        res.status = LpStatus::NumericalFailure;
    }
    if (!res.optimal() && res.status != LpStatus::Unbounded && opt.diagnose_infeasibility) {
        auto families = diagnose_infeasibility(p, opt);
        if (!families.empty()) {
            res.status = LpStatus::Infeasible;
            res.infeasible_families = std::move(families);
        } else if (res.status == LpStatus::Infeasible && res.infeasible_families.empty()) {
            res.status = LpStatus::NumericalFailure;
        }
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

} // namespace fleetcharge
