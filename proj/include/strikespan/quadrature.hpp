#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <utility>
#include <vector>

namespace strikespan::quad {

struct Result {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t cells = 0;
    bool converged = true;
    std::vector<double> partition; // final nodes incl. cell midpoints, when requested
};

/// Pairwise (tree) summation; the result depends only on the order of `terms`.
inline double pairwise_sum(std::span<const double> terms) {
    if (terms.size() <= 8) {
        double s = 0.0;
        for (double t : terms) {
            s += t;
        }
        return s;
    }
    const std::size_t half = terms.size() / 2;
    return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

/// Sorted, de-duplicated partition of [lo, hi] containing every forced node
/// that falls strictly inside plus `base_cells` uniform cells.
inline std::vector<double> make_partition(double lo, double hi, std::span<const double> forced,
                                          std::size_t base_cells) {
    std::vector<double> nodes;
    nodes.reserve(forced.size() + base_cells + 2);
    nodes.push_back(lo);
    nodes.push_back(hi);
    for (double s : forced) {
        if (s > lo && s < hi) {
            nodes.push_back(s);
        }
    }
    const double width = hi - lo;
    for (std::size_t i = 1; i < base_cells; ++i) {
        nodes.push_back(lo + width * static_cast<double>(i) / static_cast<double>(base_cells));
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

/// Adaptive bisection driver. `rule(l, r)` estimates the integral over one
/// cell; a cell's error indicator is |rule(l,m) + rule(m,r) - rule(l,r)|.
/// The cell with the largest indicator is bisected until the summed
/// indicators fall below `tol` or the cell budget is spent. Cells never
/// straddle the initial nodes.
template <class Rule>
Result adaptive(std::span<const double> nodes, double tol, std::size_t max_cells, Rule&& rule,
                bool keep_partition = false) {
    struct Cell {
        double lo;
        double hi;
        double fine;
        double err;
    };
    auto make_cell = [&](double l, double r, double coarse) {
        const double m = 0.5 * (l + r);
        const double fine = rule(l, m) + rule(m, r);
        return Cell{l, r, fine, std::abs(fine - coarse)};
    };

    std::vector<Cell> cells;
    if (nodes.size() < 2) {
        return {};
    }
    cells.reserve(std::max(nodes.size(), std::min<std::size_t>(max_cells, 1u << 16)));
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        cells.push_back(make_cell(nodes[i], nodes[i + 1], rule(nodes[i], nodes[i + 1])));
    }

    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry> heap;
    double total = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        heap.emplace(cells[i].err, i);
        total += cells[i].err;
    }

    auto exact_total = [&] {
        double s = 0.0;
        for (const auto& c : cells) {
            s += c.err;
        }
        return s;
    };

    bool converged = true;
    std::size_t since_resum = 0;
    while (total > tol) {
        if (cells.size() >= max_cells) {
            total = exact_total();
            converged = total <= tol;
            break;
        }
        const auto [err, idx] = heap.top();
        heap.pop();
        const Cell parent = cells[idx];
        const double mid = 0.5 * (parent.lo + parent.hi);
        if (!(mid > parent.lo && mid < parent.hi)) {
            // Cell is at floating-point resolution; it cannot be refined further.
            total -= parent.err;
            cells[idx].err = 0.0;
            continue;
        }
        const Cell left = make_cell(parent.lo, mid, rule(parent.lo, mid));
        const Cell right = make_cell(mid, parent.hi, rule(mid, parent.hi));
        cells[idx] = left;
        cells.push_back(right);
        heap.emplace(left.err, idx);
        heap.emplace(right.err, cells.size() - 1);
        total += left.err + right.err - parent.err;

        if (++since_resum == 1024 || total <= tol) {
            total = exact_total();
            since_resum = 0;
        }
    }

    std::vector<std::size_t> order(cells.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cells[a].lo < cells[b].lo; });
    std::vector<double> terms;
    terms.reserve(cells.size());
    for (std::size_t i : order) {
        terms.push_back(cells[i].fine);
    }
    Result out{pairwise_sum(terms), total, cells.size(), converged, {}};
    if (keep_partition) {
        out.partition.reserve(2 * cells.size() + 1);
        for (std::size_t i : order) {
            out.partition.push_back(cells[i].lo);
            out.partition.push_back(0.5 * (cells[i].lo + cells[i].hi));
        }
        out.partition.push_back(cells[order.back()].hi);
    }
    return out;
}

/// Riemann-Stieltjes sum of g against F with g sampled at cell midpoints and
/// exact increments of F.
template <class G, class F>
Result stieltjes_midpoint(G&& g, F&& integrator, std::span<const double> nodes, double tol,
                          std::size_t max_cells, bool keep_partition = false) {
    return adaptive(
        nodes, tol, max_cells,
        [&](double l, double r) { return g(0.5 * (l + r)) * (integrator(r) - integrator(l)); }, keep_partition);
}

/// Same sum on a fixed partition, no refinement.
template <class G, class F>
Result stieltjes_fixed(G&& g, F&& integrator, std::span<const double> nodes) {
    std::vector<double> terms;
    terms.reserve(nodes.size());
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double l = nodes[i];
        const double r = nodes[i + 1];
        terms.push_back(g(0.5 * (l + r)) * (integrator(r) - integrator(l)));
    }
    return Result{pairwise_sum(terms), 0.0, terms.size(), true, {}};
}

/// Adaptive three-point Gauss-Legendre. Only interior abscissae are used, so
/// integrands with jumps exactly at nodes are handled correctly.
template <class G>
Result gauss_legendre(G&& g, std::span<const double> nodes, double tol, std::size_t max_cells) {
    static const double x1 = std::sqrt(0.6);
    return adaptive(nodes, tol, max_cells, [&](double l, double r) {
        const double c = 0.5 * (l + r);
        const double h = 0.5 * (r - l);
        return h * ((5.0 / 9.0) * (g(c - h * x1) + g(c + h * x1)) + (8.0 / 9.0) * g(c));
    });
}

} // namespace strikespan::quad
