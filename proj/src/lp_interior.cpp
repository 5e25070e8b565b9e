#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "fleetcharge/lp_solve.hpp"

namespace fleetcharge {

namespace {

/// Stalled runs fall back to the best iterate when it is this close to optimal.
constexpr double ACCEPT_RESIDUAL = 1e-7;
constexpr double ACCEPT_GAP = 1e-5;
/// The duality gap floors at (primal residual x dual magnitude), so it weighs less when ranking iterates.
constexpr double GAP_WEIGHT = 0.01;

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vec = Eigen::VectorXd;

/// Shifted, slack-augmented and equilibrated form: min cᵀx, A x = b, 0 ≤ x ≤ u.
struct StandardForm {
    SpMat A;
    Vec b, c, u;
    std::vector<char> has_ub;
    std::vector<long> source; // original variable of each column, -1 for slacks
    Vec col_scale;
    double bound_scale = 1.0;
    double cost_scale = 1.0;
    bool trivially_infeasible = false;
    std::vector<RowFamily> failed_families;
};

StandardForm standardize(const LpProblem& p, double tol) {
    StandardForm f;
    const std::size_t n0 = p.num_vars();
    std::vector<long> col_of(n0, -1);
    long n = 0;
    for (std::size_t j = 0; j < n0; ++j) {
        const double width = p.upper[j] - p.lower[j];
        if (width > 1e-12 * std::max(1.0, std::abs(p.lower[j]))) {
            col_of[j] = n++;
            f.source.push_back(static_cast<long>(j));
        }
    }
    std::vector<Eigen::Triplet<double, int>> trip;
    std::vector<double> rhs;
    for (const LpRow& r : p.rows) {
        double b = r.rhs;
        std::size_t live = 0;
        for (const auto& [j, a] : r.terms) {
            b -= a * p.lower[j];
            if (col_of[j] >= 0 && a != 0.0) {
                ++live;
            }
        }
        if (r.sense == RowSense::Equal && live == 0) {
            if (std::abs(b) > tol * (1.0 + std::abs(r.rhs))) {
                f.trivially_infeasible = true;
                f.failed_families.push_back(r.family);
            }
            continue;
        }
        const int row = static_cast<int>(rhs.size());
        for (const auto& [j, a] : r.terms) {
            if (col_of[j] >= 0 && a != 0.0) {
                trip.emplace_back(row, static_cast<int>(col_of[j]), a);
            }
        }
        if (r.sense == RowSense::LessEqual) {
            trip.emplace_back(row, static_cast<int>(n), 1.0);
            f.source.push_back(-1);
            ++n;
        }
        rhs.push_back(b);
    }
    const int m = static_cast<int>(rhs.size());
    f.A.resize(m, static_cast<int>(n));
    f.A.setFromTriplets(trip.begin(), trip.end());
    f.A.makeCompressed();
    f.b = Eigen::Map<Vec>(rhs.data(), m);
    f.c = Vec::Zero(n);
    f.u = Vec::Constant(n, std::numeric_limits<double>::infinity());
    f.has_ub.assign(static_cast<std::size_t>(n), 0);
    for (long k = 0; k < n; ++k) {
        const long j = f.source[static_cast<std::size_t>(k)];
        if (j >= 0) {
            f.c[k] = p.cost[static_cast<std::size_t>(j)];
            const double width = p.upper[static_cast<std::size_t>(j)] - p.lower[static_cast<std::size_t>(j)];
            if (std::isfinite(width)) {
                f.u[k] = width;
                f.has_ub[static_cast<std::size_t>(k)] = 1;
            }
        }
    }

    // Ruiz equilibration.
    Vec row_scale = Vec::Ones(m);
    f.col_scale = Vec::Ones(n);
    for (int pass = 0; pass < 10; ++pass) {
        Vec rmax = Vec::Zero(m);
        Vec cmax = Vec::Zero(n);
        for (int k = 0; k < f.A.outerSize(); ++k) {
            for (SpMat::InnerIterator it(f.A, k); it; ++it) {
                const double a = std::abs(it.value());
                rmax[it.row()] = std::max(rmax[it.row()], a);
                cmax[k] = std::max(cmax[k], a);
            }
        }
        double spread = 0.0;
        for (int i = 0; i < m; ++i) {
            rmax[i] = rmax[i] > 0.0 ? 1.0 / std::sqrt(rmax[i]) : 1.0;
            spread = std::max(spread, std::abs(1.0 - rmax[i]));
        }
        for (long k = 0; k < n; ++k) {
            cmax[k] = cmax[k] > 0.0 ? 1.0 / std::sqrt(cmax[k]) : 1.0;
            spread = std::max(spread, std::abs(1.0 - cmax[k]));
        }
        for (int k = 0; k < f.A.outerSize(); ++k) {
            for (SpMat::InnerIterator it(f.A, k); it; ++it) {
                it.valueRef() *= rmax[it.row()] * cmax[k];
            }
        }
        row_scale = row_scale.cwiseProduct(rmax);
        f.col_scale = f.col_scale.cwiseProduct(cmax);
        if (spread < 1e-3) {
            break;
        }
    }
    f.b = f.b.cwiseProduct(row_scale);
    f.c = f.c.cwiseProduct(f.col_scale);
    for (long k = 0; k < n; ++k) {
        if (f.has_ub[static_cast<std::size_t>(k)]) {
            f.u[k] /= f.col_scale[k];
        }
    }
    double bmax = f.b.size() ? f.b.lpNorm<Eigen::Infinity>() : 0.0;
    for (long k = 0; k < n; ++k) {
        if (f.has_ub[static_cast<std::size_t>(k)]) {
            bmax = std::max(bmax, f.u[k]);
        }
    }
    f.bound_scale = bmax > 0.0 ? bmax : 1.0;
    f.b /= f.bound_scale;
    for (long k = 0; k < n; ++k) {
        if (f.has_ub[static_cast<std::size_t>(k)]) {
            f.u[k] /= f.bound_scale;
        }
    }
    const double cmax_all = f.c.size() ? f.c.lpNorm<Eigen::Infinity>() : 0.0;
    f.cost_scale = cmax_all > 0.0 ? cmax_all : 1.0;
    f.c /= f.cost_scale;
    return f;
}

/// Lower triangle of A·diag(θ)·Aᵀ with a fixed pattern; values are refreshed in place.
class NormalMatrix {
  public:
    explicit NormalMatrix(const SpMat& A) : A_(A) {
        const int m = static_cast<int>(A.rows());
        std::vector<Eigen::Triplet<double, int>> trip;
        for (int i = 0; i < m; ++i) {
            trip.emplace_back(i, i, 1.0);
        }
        for (int k = 0; k < A.outerSize(); ++k) {
            for (SpMat::InnerIterator a(A, k); a; ++a) {
                for (SpMat::InnerIterator b(A, k); b; ++b) {
                    if (b.row() >= a.row()) {
                        trip.emplace_back(b.row(), a.row(), 1.0);
                    }
                }
            }
        }
        M_.resize(m, m);
        M_.setFromTriplets(trip.begin(), trip.end());
        M_.makeCompressed();
        diag_.resize(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) {
            diag_[static_cast<std::size_t>(i)] = slot(i, i);
        }
        col_begin_.push_back(0);
        for (int k = 0; k < A.outerSize(); ++k) {
            for (SpMat::InnerIterator a(A, k); a; ++a) {
                for (SpMat::InnerIterator b(A, k); b; ++b) {
                    if (b.row() >= a.row()) {
                        contrib_.push_back({slot(b.row(), a.row()), a.value() * b.value()});
                    }
                }
            }
            col_begin_.push_back(contrib_.size());
        }
    }

    SpMat& assemble(const Vec& theta, double reg) {
        double* v = M_.valuePtr();
        std::fill(v, v + M_.nonZeros(), 0.0);
        for (int k = 0; k < A_.outerSize(); ++k) {
            const double t = theta[k];
            for (std::size_t q = col_begin_[static_cast<std::size_t>(k)]; q < col_begin_[static_cast<std::size_t>(k) + 1];
                 ++q) {
                v[contrib_[q].slot] += t * contrib_[q].product;
            }
        }
        for (std::size_t s : diag_) {
            v[s] += reg * (1.0 + v[s]);
        }
        return M_;
    }

    const SpMat& pattern() const { return M_; }

  private:
    std::size_t slot(int row, int col) const {
        const int* inner = M_.innerIndexPtr();
        const int* b = inner + M_.outerIndexPtr()[col];
        const int* e = inner + M_.outerIndexPtr()[col + 1];
        return static_cast<std::size_t>(std::lower_bound(b, e, row) - inner);
    }

    struct Contribution {
        std::size_t slot;
        double product;
    };

    const SpMat& A_;
    SpMat M_;
    std::vector<std::size_t> diag_;
    std::vector<Contribution> contrib_;
    std::vector<std::size_t> col_begin_;
};

double max_step(const Vec& x, const Vec& dx, const std::vector<char>* mask) {
    double a = 1.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (mask && !(*mask)[static_cast<std::size_t>(j)]) {
            continue;
        }
        if (dx[j] < 0.0) {
            a = std::min(a, -x[j] / dx[j]);
        }
    }
    return a;
}

template <class Ordering>
LpResult interior_point(const LpProblem& p, const StandardForm& f, const LpOptions& opt) {
    LpResult res;
    res.method = "interior_point";
    const Eigen::Index m = f.A.rows();
    const Eigen::Index n = f.A.cols();
    const std::vector<char>& ub = f.has_ub;
    const SpMat At = f.A.transpose();

    Vec x(n), z(n), w = Vec::Zero(n), v = Vec::Zero(n), y = Vec::Zero(m);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (ub[static_cast<std::size_t>(j)]) {
            x[j] = f.u[j] / 2.0;
            w[j] = f.u[j] - x[j];
            v[j] = 1.0;
        } else {
            x[j] = 1.0;
        }
        z[j] = 1.0;
    }
    std::size_t n_ub = 0;
    for (char c : ub) {
        n_ub += c ? 1 : 0;
    }
    const double total = static_cast<double>(n) + static_cast<double>(n_ub);
    const double bnorm = 1.0 + (m ? f.b.lpNorm<Eigen::Infinity>() : 0.0);
    const double cnorm = 1.0 + (n ? f.c.lpNorm<Eigen::Infinity>() : 0.0);
    double unorm = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (ub[static_cast<std::size_t>(j)]) {
            unorm = std::max(unorm, 1.0 + f.u[j]);
        }
    }

    NormalMatrix normal(f.A);
    Eigen::SimplicialLLT<SpMat, Eigen::Lower, Ordering> chol;
    if (m > 0) {
        chol.analyzePattern(normal.pattern());
    }

    Vec theta(n), rb(m), rc(n), ru = Vec::Zero(n);
    Vec dx(n), dy(m), dz(n), dw(n), dv(n);
    Vec dxa(n), dya(m), dza(n), dwa(n), dva(n);
    double best_merit = std::numeric_limits<double>::infinity();
    double best_seen = std::numeric_limits<double>::infinity();
    double best_p = std::numeric_limits<double>::infinity();
    double best_d = best_p, best_g = best_p;
    Vec best_x = x;
    std::size_t since_best = 0;
    double relp = 0.0, reld = 0.0, relg = 0.0;
    res.status = LpStatus::IterationLimit;

    const auto solve_direction = [&](const Vec& rxz, const Vec& rwv, Vec& ddx, Vec& ddy, Vec& ddz, Vec& ddw,
                                     Vec& ddv) {
        Vec rhat = rc - rxz.cwiseQuotient(x);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (ub[static_cast<std::size_t>(j)]) {
                rhat[j] += (rwv[j] - v[j] * ru[j]) / w[j];
            }
        }
        const Vec rhs = rb + f.A * theta.cwiseProduct(rhat);
        ddy = m ? Vec(chol.solve(rhs)) : Vec(rhs);
        ddx = theta.cwiseProduct(At * ddy - rhat);
        ddz = (rxz - z.cwiseProduct(ddx)).cwiseQuotient(x);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (ub[static_cast<std::size_t>(j)]) {
                ddw[j] = ru[j] - ddx[j];
                ddv[j] = (rwv[j] - v[j] * ddw[j]) / w[j];
            } else {
                ddw[j] = 0.0;
                ddv[j] = 0.0;
            }
        }
    };

    std::size_t it = 0;
    for (; it < opt.max_iterations; ++it) {
        rb = f.b - f.A * x;
        rc = f.c - At * y - z + v;
        double run = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (ub[static_cast<std::size_t>(j)]) {
                ru[j] = f.u[j] - x[j] - w[j];
                run = std::max(run, std::abs(ru[j]));
            }
        }
        const double mu = (x.dot(z) + w.dot(v)) / std::max(1.0, total);
        double pobj = f.c.dot(x);
        double dobj = f.b.dot(y);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (ub[static_cast<std::size_t>(j)]) {
                dobj -= f.u[j] * v[j];
            }
        }
        relp = std::max((m ? rb.lpNorm<Eigen::Infinity>() : 0.0) / bnorm, run / unorm);
        reld = (n ? rc.lpNorm<Eigen::Infinity>() : 0.0) / cnorm;
        relg = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
        if (relp < opt.feasibility_tol && reld < opt.optimality_tol && relg < opt.optimality_tol) {
            res.status = LpStatus::Optimal;
            break;
        }
        const double merit = std::max({relp, reld, GAP_WEIGHT * relg});
        if (merit < best_seen) {
            best_seen = merit;
            best_x = x;
            best_p = relp;
            best_d = reld;
            best_g = relg;
        }
        if (merit < best_merit * 0.99) {
            best_merit = merit;
            since_best = 0;
        } else if (++since_best > 25) {
            break;
        }
        if (!std::isfinite(merit) || x.lpNorm<Eigen::Infinity>() > 1e14 || y.lpNorm<Eigen::Infinity>() > 1e14) {
            res.status = LpStatus::NumericalFailure;
            break;
        }

        for (Eigen::Index j = 0; j < n; ++j) {
            double d = z[j] / x[j];
            if (ub[static_cast<std::size_t>(j)]) {
                d += v[j] / w[j];
            }
            theta[j] = 1.0 / d;
        }
        if (m > 0) {
            double reg = 1e-14;
            for (;;) {
                chol.factorize(normal.assemble(theta, reg));
                if (chol.info() == Eigen::Success) {
                    break;
                }
                reg *= 100.0;
                if (reg > 1e-4) {
                    res.status = LpStatus::NumericalFailure;
                    break;
                }
            }
            if (res.status == LpStatus::NumericalFailure) {
                break;
            }
        }

        // Predictor.
        const Vec rxz_a = -x.cwiseProduct(z);
        const Vec rwv_a = -w.cwiseProduct(v);
        solve_direction(rxz_a, rwv_a, dxa, dya, dza, dwa, dva);
        const double ap_a = std::min(max_step(x, dxa, nullptr), max_step(w, dwa, &ub));
        const double ad_a = std::min(max_step(z, dza, nullptr), max_step(v, dva, &ub));
        double mu_aff = (x + ap_a * dxa).dot(z + ad_a * dza);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (ub[static_cast<std::size_t>(j)]) {
                mu_aff += (w[j] + ap_a * dwa[j]) * (v[j] + ad_a * dva[j]);
            }
        }
        mu_aff /= std::max(1.0, total);
        const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);

        // Corrector.
        Vec rxz = Vec::Constant(n, sigma * mu) - x.cwiseProduct(z) - dxa.cwiseProduct(dza);
        Vec rwv = Vec::Zero(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (ub[static_cast<std::size_t>(j)]) {
                rwv[j] = sigma * mu - w[j] * v[j] - dwa[j] * dva[j];
            }
        }
        solve_direction(rxz, rwv, dx, dy, dz, dw, dv);
        const double eta = std::max(0.9, 1.0 - 10.0 * mu);
        const double eta_capped = std::min(eta, 0.99995);
        const double ap = std::min(1.0, eta_capped * std::min(max_step(x, dx, nullptr), max_step(w, dw, &ub)));
        const double ad = std::min(1.0, eta_capped * std::min(max_step(z, dz, nullptr), max_step(v, dv, &ub)));
        x += ap * dx;
        y += ad * dy;
        z += ad * dz;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (ub[static_cast<std::size_t>(j)]) {
                w[j] += ap * dw[j];
                v[j] += ad * dv[j];
            }
        }
    }
    res.iterations = it;
    res.dual_residual = reld;
    res.gap = relg;
    if (res.status != LpStatus::Optimal && best_p <= ACCEPT_RESIDUAL && best_d <= ACCEPT_RESIDUAL &&
        best_g <= ACCEPT_GAP) {
        x = best_x;
        res.dual_residual = best_d;
        res.gap = best_g;
        res.status = LpStatus::Optimal;
    }

    res.x.assign(p.num_vars(), 0.0);
    for (std::size_t j = 0; j < p.num_vars(); ++j) {
        res.x[j] = p.lower[j];
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        const long j = f.source[static_cast<std::size_t>(k)];
        if (j >= 0) {
            const auto jj = static_cast<std::size_t>(j);
            const double val = p.lower[jj] + x[k] * f.col_scale[k] * f.bound_scale;
            res.x[jj] = std::clamp(val, p.lower[jj], p.upper[jj]);
        }
    }
    res.objective = p.objective(res.x);
    res.primal_residual = p.max_violation(res.x);
    return res;
}

} // namespace

LpResult solve_interior_point(const LpProblem& p, const LpOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    const StandardForm f = standardize(p, opt.feasibility_tol);
    LpResult res;
    if (f.trivially_infeasible) {
        res.method = "interior_point";
        res.status = LpStatus::Infeasible;
        res.infeasible_families = f.failed_families;
    } else if (opt.ordering == CholeskyOrdering::Natural) {
        res = interior_point<Eigen::NaturalOrdering<int>>(p, f, opt);
    } else {
        res = interior_point<Eigen::AMDOrdering<int>>(p, f, opt);
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

} // namespace fleetcharge
