#pragma once

#include <cstddef>
#include <vector>

namespace brw {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendre gauss_legendre(int n);

/// Cubature rule on the reference cube [-1, 1]^d. Nodes are stored row-major,
/// `dim` coordinates per node.
struct PanelRule {
  int dim = 0;
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

PanelRule tensor_rule(int dim, int points_per_dim);

/// Smolyak combination of Gauss-Legendre rules with 1, 3, 5, ... points.
/// `level` = 1 is the midpoint rule; weights may be negative.
PanelRule smolyak_rule(int dim, int level);

/// Panel rule used by the Brillouin-zone integrator for a given dimension:
/// tensor Gauss-Legendre up to d = 4, Smolyak beyond.
PanelRule default_panel_rule(int dim);

}  // namespace brw
