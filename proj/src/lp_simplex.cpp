#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "fleetcharge/lp_solve.hpp"

namespace fleetcharge {

namespace {

constexpr double PIVOT_TOL = 1e-9;
constexpr double INF_BOUND = std::numeric_limits<double>::infinity();

enum class At : unsigned char { Basic, Lower, Upper };

class Tableau {
  public:
    Tableau(std::size_t m, std::size_t n) : m_(m), n_(n), a_(m * n, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }

  private:
    std::size_t m_, n_;
    std::vector<double> a_;
};

struct SimplexState {
    Tableau tab;
    std::vector<double> ub;  // upper bound of every column after shifting lower bounds to 0
    std::vector<At> at;      // status of every column
    std::vector<std::size_t> basis;
    std::vector<double> beta; // values of the basic variables
    std::vector<double> d;    // reduced costs
    std::size_t pivots = 0;

    double value(std::size_t j) const {
        if (at[j] == At::Lower) {
            return 0.0;
        }
        if (at[j] == At::Upper) {
            return ub[j];
        }
        for (std::size_t i = 0; i < basis.size(); ++i) {
            if (basis[i] == j) {
                return beta[i];
            }
        }
        return 0.0;
    }

    void pivot(std::size_t r, std::size_t j) {
        const std::size_t m = tab.rows();
        const std::size_t n = tab.cols();
        const double pv = tab(r, j);
        for (std::size_t c = 0; c < n; ++c) {
            tab(r, c) /= pv;
        }
        tab(r, j) = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == r) {
                continue;
            }
            const double f = tab(i, j);
            if (f == 0.0) {
                continue;
            }
            for (std::size_t c = 0; c < n; ++c) {
                tab(i, c) -= f * tab(r, c);
            }
            tab(i, j) = 0.0;
        }
        const double f = d[j];
        if (f != 0.0) {
            for (std::size_t c = 0; c < n; ++c) {
                d[c] -= f * tab(r, c);
            }
            d[j] = 0.0;
        }
        at[basis[r]] = At::Lower;
        basis[r] = j;
        at[j] = At::Basic;
        ++pivots;
    }

    void price(const std::vector<double>& cost) {
        const std::size_t n = tab.cols();
        d = cost;
        for (std::size_t i = 0; i < basis.size(); ++i) {
            const double cb = cost[basis[i]];
            if (cb == 0.0) {
                continue;
            }
            for (std::size_t c = 0; c < n; ++c) {
                d[c] -= cb * tab(i, c);
            }
        }
    }
};

enum class PhaseOutcome { Optimal, Unbounded, PivotLimit };

PhaseOutcome run_phase(SimplexState& s, const std::vector<double>& cost, const std::vector<char>& may_enter,
                       double tol, std::size_t max_pivots) {
    s.price(cost);
    const std::size_t n = s.tab.cols();
    const std::size_t m = s.tab.rows();
    for (;;) {
        if (s.pivots >= max_pivots) {
            return PhaseOutcome::PivotLimit;
        }
        std::size_t j = n;
        for (std::size_t c = 0; c < n; ++c) {
            if (!may_enter[c] || s.at[c] == At::Basic || s.ub[c] <= 0.0) {
                continue;
            }
            if ((s.at[c] == At::Lower && s.d[c] < -tol) || (s.at[c] == At::Upper && s.d[c] > tol)) {
                j = c;
                break;
            }
        }
        if (j == n) {
            return PhaseOutcome::Optimal;
        }
        const double dir = s.at[j] == At::Lower ? 1.0 : -1.0;
        double theta = s.ub[j];
        std::size_t leave = m;
        bool leave_to_upper = false;
        for (std::size_t i = 0; i < m; ++i) {
            const double rate = -dir * s.tab(i, j); // change of basic i per unit step
            double limit = INF_BOUND;
            bool to_upper = false;
            if (rate < -PIVOT_TOL) {
                limit = std::max(0.0, s.beta[i]) / -rate;
            } else if (rate > PIVOT_TOL && std::isfinite(s.ub[s.basis[i]])) {
                limit = std::max(0.0, s.ub[s.basis[i]] - s.beta[i]) / rate;
                to_upper = true;
            } else {
                continue;
            }
            if (limit < theta || (limit == theta && leave < m && s.basis[i] < s.basis[leave])) {
                theta = limit;
                leave = i;
                leave_to_upper = to_upper;
            }
        }
        if (!std::isfinite(theta)) {
            return PhaseOutcome::Unbounded;
        }
        for (std::size_t i = 0; i < m; ++i) {
            s.beta[i] += -dir * s.tab(i, j) * theta;
        }
        if (leave == m) {
            s.at[j] = s.at[j] == At::Lower ? At::Upper : At::Lower;
            ++s.pivots;
            continue;
        }
        const double entering_value = dir > 0 ? theta : s.ub[j] - theta;
        const std::size_t out = s.basis[leave];
        s.pivot(leave, j);
        s.at[out] = leave_to_upper ? At::Upper : At::Lower;
        s.beta[leave] = entering_value;
    }
}

} // namespace

LpResult solve_simplex(const LpProblem& p, const LpOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    LpResult res;
    res.method = "simplex";
    const std::size_t n0 = p.num_vars();
    const std::size_t m = p.num_rows();

    std::vector<double> rhs(m);
    std::vector<bool> flip(m, false);
    std::vector<bool> needs_art(m, false);
    std::size_t n_slack = 0;
    std::size_t n_art = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const LpRow& r = p.rows[i];
        double b = r.rhs;
        for (const auto& [j, a] : r.terms) {
            b -= a * p.lower[j];
        }
        rhs[i] = b;
        if (r.sense == RowSense::LessEqual) {
            ++n_slack;
        }
        flip[i] = b < 0.0;
        needs_art[i] = r.sense == RowSense::Equal || flip[i];
        n_art += needs_art[i] ? 1 : 0;
    }
    const std::size_t n = n0 + n_slack + n_art;

    SimplexState s{Tableau(m, n), std::vector<double>(n, INF_BOUND), std::vector<At>(n, At::Lower),
                   std::vector<std::size_t>(m), std::vector<double>(m), {}, 0};
    for (std::size_t j = 0; j < n0; ++j) {
        s.ub[j] = p.upper[j] - p.lower[j];
    }
    std::vector<char> is_art(n, 0);
    std::vector<std::size_t> art_of_row(m, n);
    std::size_t slack = n0;
    std::size_t art = n0 + n_slack;
    for (std::size_t i = 0; i < m; ++i) {
        const LpRow& r = p.rows[i];
        const double sign = flip[i] ? -1.0 : 1.0;
        for (const auto& [j, a] : r.terms) {
            s.tab(i, j) += sign * a;
        }
        std::size_t basic = n;
        if (r.sense == RowSense::LessEqual) {
            s.tab(i, slack) = sign;
            basic = slack;
            ++slack;
        }
        if (needs_art[i]) {
            s.tab(i, art) = 1.0;
            is_art[art] = 1;
            art_of_row[i] = art;
            basic = art;
            ++art;
        }
        s.basis[i] = basic;
        s.at[basic] = At::Basic;
        s.beta[i] = sign * rhs[i];
    }

    const double tol = opt.optimality_tol;
    std::vector<char> may_enter(n, 1);
    if (n_art > 0) {
        std::vector<double> phase1(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            phase1[j] = is_art[j] ? 1.0 : 0.0;
        }
        const auto outcome = run_phase(s, phase1, may_enter, tol, opt.max_simplex_pivots);
        if (outcome == PhaseOutcome::PivotLimit) {
            res.status = LpStatus::IterationLimit;
            res.iterations = s.pivots;
            return res;
        }
        double infeas = 0.0;
        double scale = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            scale = std::max(scale, std::abs(rhs[i]));
            if (is_art[s.basis[i]]) {
                infeas += std::max(0.0, s.beta[i]);
            }
        }
        if (infeas > opt.feasibility_tol * 100.0 * scale) {
            res.status = LpStatus::Infeasible;
            res.iterations = s.pivots;
            for (std::size_t i = 0; i < m; ++i) {
                if (is_art[s.basis[i]] && s.beta[i] > opt.feasibility_tol * scale) {
                    for (std::size_t r = 0; r < m; ++r) {
                        if (art_of_row[r] == s.basis[i]) {
                            res.infeasible_families.push_back(p.rows[r].family);
                        }
                    }
                }
            }
            res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            return res;
        }
        // Drive zero-valued artificials out of the basis where a structural column allows it.
        for (std::size_t i = 0; i < m; ++i) {
            if (!is_art[s.basis[i]]) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                if (is_art[j] || s.at[j] == At::Basic || std::abs(s.tab(i, j)) <= 1e-7) {
                    continue;
                }
                const double v = s.at[j] == At::Upper ? s.ub[j] : 0.0;
                s.pivot(i, j);
                s.beta[i] = v;
                break;
            }
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (is_art[j]) {
                s.ub[j] = 0.0;
                may_enter[j] = 0;
            }
        }
    }

    std::vector<double> cost(n, 0.0);
    for (std::size_t j = 0; j < n0; ++j) {
        cost[j] = p.cost[j];
    }
    const auto outcome = run_phase(s, cost, may_enter, tol, opt.max_simplex_pivots);
    res.iterations = s.pivots;
    if (outcome == PhaseOutcome::Unbounded) {
        res.status = LpStatus::Unbounded;
        return res;
    }
    if (outcome == PhaseOutcome::PivotLimit) {
        res.status = LpStatus::IterationLimit;
        return res;
    }
    std::vector<double> shifted(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (s.at[j] == At::Upper) {
            shifted[j] = s.ub[j];
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        shifted[s.basis[i]] = s.beta[i];
    }
    res.x.resize(n0);
    for (std::size_t j = 0; j < n0; ++j) {
        res.x[j] = std::clamp(p.lower[j] + shifted[j], p.lower[j], p.upper[j]);
    }
    res.objective = p.objective(res.x);
    res.primal_residual = p.max_violation(res.x);
    res.status = LpStatus::Optimal;
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

} // namespace fleetcharge
