#pragma once

#include <vector>

#include <Eigen/Core>

#include "fsheat/errors.hpp"

namespace fsheat {

// Uniform cell-centered grid on (-1, 1).  Node i is the midpoint of cell i,
// computed as (2i+1-n)/n so that the node set is exactly symmetric about 0
// and h * n_cells == 2 without rounding for power-of-two cell counts.
struct Grid1D {
    int n_cells = 0;
    double h = 0.0;
    Eigen::VectorXd x; // midpoints, ascending

    static Grid1D make(int n_cells) {
        require(n_cells >= 2, "Grid1D: n_cells must be >= 2");
        Grid1D g;
        g.n_cells = n_cells;
        g.h = 2.0 / n_cells;
        g.x.resize(n_cells);
        for (int i = 0; i < n_cells; ++i)
            g.x[i] = static_cast<double>(2 * i + 1 - n_cells) / n_cells;
        return g;
    }

    // Indices of nodes with |x| <= 1 - eps (the eps-interior).
    std::vector<int> interior_nodes(double eps) const {
        require(eps >= 0.0 && eps < 1.0, "Grid1D: eps must lie in [0, 1)");
        std::vector<int> idx;
        for (int i = 0; i < n_cells; ++i)
            if (std::abs(x[i]) <= 1.0 - eps) idx.push_back(i);
        return idx;
    }

    // Index of the node closest to the point y.
    int nearest_node(double y) const {
        int best = 0;
        double d = std::abs(x[0] - y);
        for (int i = 1; i < n_cells; ++i) {
            double di = std::abs(x[i] - y);
            if (di < d) { d = di; best = i; }
        }
        return best;
    }
};

} // namespace fsheat
