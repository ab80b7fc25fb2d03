#ifndef Q2AMG_MESH_HPP
#define Q2AMG_MESH_HPP

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "q2amg/matrix_market.hpp"
#include "q2amg/sparse.hpp"

namespace q2amg {

enum class Domain { LidCavity, BackwardStep, Obstacle };

inline std::string to_string(Domain d) {
  switch (d) {
    case Domain::LidCavity: return "cavity";
    case Domain::BackwardStep: return "step";
    case Domain::Obstacle: return "obstacle";
  }
  return "?";
}

struct Rect {
  double x0, x1, y0, y1;
};

/// `refinement` is the number of elements across the unit-2 width of every
/// domain (cavity side, channel height), so h = 2 / refinement.
struct ProblemSpec {
  Domain domain = Domain::LidCavity;
  int refinement = 8;
  double viscosity = 1.0;
  double channel_length = 5.0;                        // step outlet position / obstacle channel length
  Rect obstacle{1.75, 2.25, -0.25, 0.25};             // removed block of the obstacle channel
  std::optional<std::array<double, 2>> reynolds_meta;  // (U, L_char), informational

  [[nodiscard]] double h() const { return 2.0 / refinement; }
  [[nodiscard]] std::optional<double> reynolds() const {
    if (!reynolds_meta) return std::nullopt;
    return (*reynolds_meta)[0] * (*reynolds_meta)[1] / viscosity;
  }
};

enum class NodeTag { Interior, Dirichlet, Neumann };

struct Mesh {
  std::vector<Point> q2_coords;
  std::vector<Point> q1_coords;
  // Q2: corners (counterclockwise from lower left), edge midpoints (bottom,
  // right, top, left), centre. Q1: the four corners in the same order.
  std::vector<std::array<int, 9>> q2_elements;
  std::vector<std::array<int, 4>> q1_elements;
  std::vector<NodeTag> tags;        // per Q2 node
  std::vector<int> q1_to_q2;        // co-located velocity node of each pressure node
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;

  [[nodiscard]] int n_q2() const { return static_cast<int>(q2_coords.size()); }
  [[nodiscard]] int n_q1() const { return static_cast<int>(q1_coords.size()); }
  [[nodiscard]] bool has_neumann() const {
    for (auto t : tags)
      if (t == NodeTag::Neumann) return true;
    return false;
  }
};

struct BoundaryCondition {
  std::vector<char> dirichlet;  // per Q2 node, both components constrained together
  std::vector<double> wx, wy;
};

namespace detail {

inline int grid_count(double length, double h, const std::string& what) {
  const double r = length / h;
  const int n = static_cast<int>(std::lround(r));
  if (n <= 0 || std::abs(r - n) > 1e-9 * std::max(1.0, r))
    throw Error(what + " is not aligned with the element grid (h = " + std::to_string(h) + ")");
  return n;
}

}  // namespace detail

inline Mesh build_mesh(const ProblemSpec& spec) {
  if (spec.refinement < 1) throw Error("refinement must be >= 1");
  if (!(spec.viscosity > 0.0)) throw Error("viscosity must be positive");
  const double h = spec.h();
  Mesh mesh;
  switch (spec.domain) {
    case Domain::LidCavity: mesh.xmin = -1, mesh.xmax = 1, mesh.ymin = -1, mesh.ymax = 1; break;
    case Domain::BackwardStep: mesh.xmin = -1, mesh.xmax = spec.channel_length, mesh.ymin = -1, mesh.ymax = 1; break;
    case Domain::Obstacle: mesh.xmin = 0, mesh.xmax = spec.channel_length, mesh.ymin = -1, mesh.ymax = 1; break;
  }
  const int nx = detail::grid_count(mesh.xmax - mesh.xmin, h, "channel length");
  const int ny = detail::grid_count(mesh.ymax - mesh.ymin, h, "domain height");

  // removed element block [ex0, ex1) x [ey0, ey1)
  int ex0 = 0, ex1 = 0, ey0 = 0, ey1 = 0;
  if (spec.domain == Domain::BackwardStep) {
    ex1 = detail::grid_count(0.0 - mesh.xmin, h, "step corner");
    ey1 = detail::grid_count(0.0 - mesh.ymin, h, "step corner");
  } else if (spec.domain == Domain::Obstacle) {
    const Rect& o = spec.obstacle;
    if (!(o.x0 > mesh.xmin && o.x1 < mesh.xmax && o.y0 > mesh.ymin && o.y1 < mesh.ymax && o.x0 < o.x1 && o.y0 < o.y1))
      throw Error("obstacle footprint must lie strictly inside the channel");
    ex0 = detail::grid_count(o.x0 - mesh.xmin, h, "obstacle footprint");
    ex1 = detail::grid_count(o.x1 - mesh.xmin, h, "obstacle footprint");
    ey0 = detail::grid_count(o.y0 - mesh.ymin, h, "obstacle footprint");
    ey1 = detail::grid_count(o.y1 - mesh.ymin, h, "obstacle footprint");
  }
  auto element_active = [&](int ex, int ey) {
    if (ex < 0 || ey < 0 || ex >= nx || ey >= ny) return false;
    return !(ex >= ex0 && ex < ex1 && ey >= ey0 && ey < ey1);
  };

  const int lx = 2 * nx + 1, ly = 2 * ny + 1;
  auto lattice = [&](int ix, int iy) { return iy * lx + ix; };
  std::vector<char> active(static_cast<std::size_t>(lx) * ly, 0);
  for (int ey = 0; ey < ny; ++ey)
    for (int ex = 0; ex < nx; ++ex)
      if (element_active(ex, ey))
        for (int b = 0; b < 3; ++b)
          for (int a = 0; a < 3; ++a) active[lattice(2 * ex + a, 2 * ey + b)] = 1;

  std::vector<int> q2_id(active.size(), -1), q1_id(active.size(), -1);
  for (int iy = 0; iy < ly; ++iy)
    for (int ix = 0; ix < lx; ++ix) {
      if (!active[lattice(ix, iy)]) continue;
      q2_id[lattice(ix, iy)] = mesh.n_q2();
      mesh.q2_coords.push_back({mesh.xmin + (mesh.xmax - mesh.xmin) * ix / (2.0 * nx),
                                mesh.ymin + (mesh.ymax - mesh.ymin) * iy / (2.0 * ny)});
    }
  for (int iy = 0; iy < ly; iy += 2)
    for (int ix = 0; ix < lx; ix += 2) {
      const int q2 = q2_id[lattice(ix, iy)];
      if (q2 < 0) continue;
      q1_id[lattice(ix, iy)] = mesh.n_q1();
      mesh.q1_coords.push_back(mesh.q2_coords[q2]);
      mesh.q1_to_q2.push_back(q2);
    }

  static constexpr std::array<std::array<int, 2>, 9> local = {
      {{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 0}, {2, 1}, {1, 2}, {0, 1}, {1, 1}}};
  for (int ey = 0; ey < ny; ++ey)
    for (int ex = 0; ex < nx; ++ex) {
      if (!element_active(ex, ey)) continue;
      std::array<int, 9> e2{};
      std::array<int, 4> e1{};
      for (int k = 0; k < 9; ++k) e2[k] = q2_id[lattice(2 * ex + local[k][0], 2 * ey + local[k][1])];
      for (int k = 0; k < 4; ++k) e1[k] = q1_id[lattice(2 * ex + local[k][0], 2 * ey + local[k][1])];
      mesh.q2_elements.push_back(e2);
      mesh.q1_elements.push_back(e1);
    }

  // boundary edges: element sides without an active neighbour across them
  mesh.tags.assign(mesh.n_q2(), NodeTag::Interior);
  auto tag_side = [&](int ixa, int iya, int dx, int dy, bool outlet) {
    for (int s = 0; s < 3; ++s) {
      const int id = q2_id[lattice(ixa + s * dx, iya + s * dy)];
      auto& t = mesh.tags[id];
      if (!outlet) t = NodeTag::Dirichlet;
      else if (t == NodeTag::Interior) t = NodeTag::Neumann;
    }
  };
  const bool has_outlet = spec.domain != Domain::LidCavity;
  // outlet sides first so that wall corners end up Dirichlet
  for (int pass = 0; pass < 2; ++pass)
    for (int ey = 0; ey < ny; ++ey)
      for (int ex = 0; ex < nx; ++ex) {
        if (!element_active(ex, ey)) continue;
        const bool right_is_outlet = has_outlet && ex == nx - 1;
        if (pass == 0) {
          if (right_is_outlet) tag_side(2 * ex + 2, 2 * ey, 0, 1, true);
          continue;
        }
        if (!element_active(ex, ey - 1)) tag_side(2 * ex, 2 * ey, 1, 0, false);
        if (!element_active(ex, ey + 1)) tag_side(2 * ex, 2 * ey + 2, 1, 0, false);
        if (!element_active(ex - 1, ey)) tag_side(2 * ex, 2 * ey, 0, 1, false);
        if (!element_active(ex + 1, ey) && !right_is_outlet) tag_side(2 * ex + 2, 2 * ey, 0, 1, false);
      }
  return mesh;
}

/// Dirichlet data of the benchmark problems: leaky lid (u_x = 1 on the whole
/// top edge), parabolic inflow for the channels, no-slip elsewhere.
inline BoundaryCondition default_boundary_conditions(const Mesh& mesh, const ProblemSpec& spec) {
  BoundaryCondition bc;
  const int n = mesh.n_q2();
  bc.dirichlet.assign(n, 0);
  bc.wx.assign(n, 0.0);
  bc.wy.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (mesh.tags[i] != NodeTag::Dirichlet) continue;
    bc.dirichlet[i] = 1;
    const auto [x, y] = mesh.q2_coords[i];
    switch (spec.domain) {
      case Domain::LidCavity:
        if (y == mesh.ymax) bc.wx[i] = 1.0;
        break;
      case Domain::BackwardStep:
        if (x == mesh.xmin && y > 0.0 && y < 1.0) bc.wx[i] = 4.0 * y * (1.0 - y);
        break;
      case Domain::Obstacle:
        if (x == mesh.xmin) bc.wx[i] = 1.0 - y * y;
        break;
    }
  }
  return bc;
}

}  // namespace q2amg

#endif  // Q2AMG_MESH_HPP
