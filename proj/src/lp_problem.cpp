#include "fleetcharge/lp_problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace fleetcharge {

std::string to_string(RowFamily f) {
    switch (f) {
    case RowFamily::Aggregate: return "aggregate";
    case RowFamily::CumulativeUpper: return "cumulative_upper";
    case RowFamily::CumulativeLower: return "cumulative_lower";
    case RowFamily::TerminalUpper: return "terminal_upper";
    case RowFamily::TerminalLower: return "terminal_lower";
    case RowFamily::Dynamics: return "dynamics";
    case RowFamily::PeakLink: return "peak_link";
    case RowFamily::Elastic: return "elastic";
    case RowFamily::Generic: return "generic";
    }
    return "unknown";
}

std::size_t LpProblem::add_variable(std::string name, double c, double lo, double hi) {
    if (!std::isfinite(lo)) {
        throw std::invalid_argument("variable " + name + " needs a finite lower bound");
    }
    if (hi < lo) {
        throw std::invalid_argument("variable " + name + " has upper bound below lower bound");
    }
    cost.push_back(c);
    lower.push_back(lo);
    upper.push_back(hi);
    names.push_back(std::move(name));
    return cost.size() - 1;
}

std::size_t LpProblem::add_row(LpRow row) {
    for (const auto& [j, a] : row.terms) {
        if (j >= num_vars()) {
            throw std::out_of_range("row " + row.name + " references unknown variable");
        }
        (void)a;
    }
    rows.push_back(std::move(row));
    return rows.size() - 1;
}

std::size_t LpProblem::count_rows(RowFamily f) const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [f](const LpRow& r) { return r.family == f; }));
}

double LpProblem::objective(const std::vector<double>& x) const {
    double v = 0.0;
    for (std::size_t j = 0; j < cost.size(); ++j) {
        v += cost[j] * x[j];
    }
    return v;
}

namespace {

double row_violation(const LpRow& r, const std::vector<double>& x) {
    double lhs = 0.0;
    for (const auto& [j, a] : r.terms) {
        lhs += a * x[j];
    }
    const double d = lhs - r.rhs;
    return r.sense == RowSense::Equal ? std::abs(d) : std::max(0.0, d);
}

} // namespace

double LpProblem::max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < num_vars(); ++j) {
        worst = std::max({worst, lower[j] - x[j], x[j] - upper[j]});
    }
    for (const LpRow& r : rows) {
        worst = std::max(worst, row_violation(r, x));
    }
    return worst;
}

double LpProblem::max_row_violation(const std::vector<double>& x, RowFamily f) const {
    double worst = 0.0;
    for (const LpRow& r : rows) {
        if (r.family == f) {
            worst = std::max(worst, row_violation(r, x));
        }
    }
    return worst;
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string var_name(const LpProblem& p, std::size_t j) {
    return p.names[j].empty() ? "x" + std::to_string(j) : p.names[j];
}

void write_terms(std::ostream& out, const LpProblem& p, const std::vector<std::pair<std::size_t, double>>& terms) {
    bool first = true;
    for (const auto& [j, a] : terms) {
        if (a == 0.0) {
            continue;
        }
        if (first) {
            out << (a < 0 ? "- " : "") << num(std::abs(a)) << ' ' << var_name(p, j);
        } else {
            out << (a < 0 ? " - " : " + ") << num(std::abs(a)) << ' ' << var_name(p, j);
        }
        first = false;
    }
    if (first) {
        out << "0 " << (p.num_vars() ? var_name(p, 0) : std::string("x0"));
    }
}

} // namespace

void write_lp_format(const LpProblem& p, std::ostream& out) {
    out << "\\ fleetcharge LP export\n";
    out << "Minimize\n obj: ";
    std::vector<std::pair<std::size_t, double>> obj;
    for (std::size_t j = 0; j < p.num_vars(); ++j) {
        if (p.cost[j] != 0.0) {
            obj.emplace_back(j, p.cost[j]);
        }
    }
    write_terms(out, p, obj);
    out << "\nSubject To\n";
    for (std::size_t i = 0; i < p.num_rows(); ++i) {
        const LpRow& r = p.rows[i];
        out << ' ' << (r.name.empty() ? "r" + std::to_string(i) : r.name) << ": ";
        write_terms(out, p, r.terms);
        out << (r.sense == RowSense::Equal ? " = " : " <= ") << num(r.rhs) << '\n';
    }
    out << "Bounds\n";
    for (std::size_t j = 0; j < p.num_vars(); ++j) {
        out << ' ' << num(p.lower[j]) << " <= " << var_name(p, j) << " <= ";
        out << (std::isinf(p.upper[j]) ? std::string("+inf") : num(p.upper[j])) << '\n';
    }
    out << "End\n";
}

} // namespace fleetcharge
