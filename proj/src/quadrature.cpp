#include "brw/quadrature.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "brw/error.hpp"

namespace brw {

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "Gauss-Legendre needs n >= 1");
  if (n == 1) return GaussLegendre{{0.0}, {2.0}};
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Tricomi initial guess, Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Re-evaluate the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

PanelRule tensor_rule(int dim, int points_per_dim) {
  const GaussLegendre g = gauss_legendre(points_per_dim);
  PanelRule rule;
  rule.dim = dim;
  std::size_t count = 1;
  for (int i = 0; i < dim; ++i) count *= static_cast<std::size_t>(points_per_dim);
  rule.nodes.resize(count * dim);
  rule.weights.resize(count);
  std::vector<int> idx(dim, 0);
  for (std::size_t p = 0; p < count; ++p) {
    double w = 1.0;
    for (int i = 0; i < dim; ++i) {
      rule.nodes[p * dim + i] = g.nodes[idx[i]];
      w *= g.weights[idx[i]];
    }
    rule.weights[p] = w;
    for (int i = 0; i < dim; ++i) {
      if (++idx[i] < points_per_dim) break;
      idx[i] = 0;
    }
  }
  return rule;
}

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

PanelRule smolyak_rule(int dim, int level) {
  if (level < 1) throw Error(ErrorCode::InvalidArgument, "Smolyak level must be >= 1");
  std::vector<GaussLegendre> one_d;
  for (int l = 1; l <= level; ++l) one_d.push_back(gauss_legendre(2 * l - 1));

  PanelRule rule;
  rule.dim = dim;
  const int q = dim + level - 1;
  std::vector<int> levels(dim, 1);
  // Enumerate multi-indices with q - d + 1 <= |l| <= q, l_i >= 1.
  std::function<void(int, int)> recurse = [&](int axis, int used) {
    if (axis == dim) {
      const int norm = used;
      if (norm < q - dim + 1 || norm > q) return;
      const double coef = ((q - norm) % 2 == 0 ? 1.0 : -1.0) * binomial(dim - 1, q - norm);
      if (coef == 0.0) return;
      std::vector<int> idx(dim, 0);
      while (true) {
        double w = coef;
        for (int i = 0; i < dim; ++i) {
          const auto& g = one_d[levels[i] - 1];
          rule.nodes.push_back(g.nodes[idx[i]]);
          w *= g.weights[idx[i]];
        }
        rule.weights.push_back(w);
        int i = 0;
        for (; i < dim; ++i) {
          if (++idx[i] < static_cast<int>(one_d[levels[i] - 1].nodes.size())) break;
          idx[i] = 0;
        }
        if (i == dim) break;
      }
      return;
    }
    for (int l = 1; l <= level && used + l + (dim - axis - 1) <= q; ++l) {
      levels[axis] = l;
      recurse(axis + 1, used + l);
    }
  };
  recurse(0, 0);
  return rule;
}

PanelRule default_panel_rule(int dim) {
  switch (dim) {
    case 1: return tensor_rule(1, 20);
    case 2: return tensor_rule(2, 12);
    case 3: return tensor_rule(3, 8);
    case 4: return tensor_rule(4, 6);
    default: return smolyak_rule(dim, 4);
  }
}

}  // namespace brw
