#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "heisenvar/heis_core.hpp"

namespace heisenvar {

// Uniform tensor-product lattice over a box, n = 1 (3-D).  Nodes include the
// box endpoints; the outermost node layer is always outside every mask.
class Grid {
  public:
    Grid(std::array<std::array<double, 2>, 3> bounds, std::array<int, 3> resolution);

    // [-hx,hx]^2 x [-ht,ht] style convenience: symmetric box.
    static std::shared_ptr<const Grid> make_box(double half_x, double half_y, double half_t,
                                                int nx, int ny, int nt);

    const std::array<std::array<double, 2>, 3>& bounds() const { return bounds_; }
    const std::array<int, 3>& resolution() const { return res_; }
    const std::array<double, 3>& spacing() const { return h_; }
    double cell_volume() const { return h_[0] * h_[1] * h_[2]; }
    std::size_t node_count() const { return count_; }

    std::size_t index(int ix, int iy, int it) const {
        return static_cast<std::size_t>(ix) +
               static_cast<std::size_t>(res_[0]) *
                   (static_cast<std::size_t>(iy) + static_cast<std::size_t>(res_[1]) * it);
    }
    void coords(std::size_t idx, int& ix, int& iy, int& it) const {
        ix = static_cast<int>(idx % res_[0]);
        iy = static_cast<int>((idx / res_[0]) % res_[1]);
        it = static_cast<int>(idx / (static_cast<std::size_t>(res_[0]) * res_[1]));
    }
    Point3 node(int ix, int iy, int it) const {
        return {bounds_[0][0] + h_[0] * ix, bounds_[1][0] + h_[1] * iy, bounds_[2][0] + h_[2] * it};
    }
    Point3 node(std::size_t idx) const {
        int ix, iy, it;
        coords(idx, ix, iy, it);
        return node(ix, iy, it);
    }

    bool same_layout(const Grid& other) const;

  private:
    std::array<std::array<double, 2>, 3> bounds_;
    std::array<int, 3> res_;
    std::array<double, 3> h_;
    std::size_t count_;
};

using GridPtr = std::shared_ptr<const Grid>;

// Node mask for the discrete S^1_0(Omega): true = inside.  The outermost box
// layer is forced outside so every masked field has zero trace.
class DomainMask {
  public:
    DomainMask(GridPtr grid, std::vector<std::uint8_t> inside);

    static std::shared_ptr<const DomainMask> full_box(GridPtr grid);
    static std::shared_ptr<const DomainMask> koranyi_ball(GridPtr grid, const Point3& center,
                                                          double radius);
    static std::shared_ptr<const DomainMask> ellipsoid(GridPtr grid, const Point3& center,
                                                       double ax, double ay, double at);
    static std::shared_ptr<const DomainMask> from_predicate(
        GridPtr grid, const std::function<bool(const Point3&)>& pred);

    const Grid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }
    bool inside(std::size_t idx) const { return inside_[idx] != 0; }
    const std::vector<std::uint8_t>& flags() const { return inside_; }
    std::size_t interior_count() const { return interior_count_; }
    // Quadrature measure of the mask (node count times cell volume).
    double volume() const;
    // True when the node is inside and at least one of the 6 axis neighbors is
    // outside; used for boundary-proximity labeling.
    bool is_boundary_adjacent(std::size_t idx) const;

  private:
    GridPtr grid_;
    std::vector<std::uint8_t> inside_;
    std::size_t interior_count_;
};

using MaskPtr = std::shared_ptr<const DomainMask>;

// Sampled field, zero outside the mask.  Values are stored for every node.
struct Field {
    GridPtr grid;
    MaskPtr mask;
    std::vector<double> values;

    Field() = default;
    Field(GridPtr g, MaskPtr m);

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
};

Field field_from_function(GridPtr grid, MaskPtr mask,
                          const std::function<double(const Point3&)>& f);

// sum |u|^p * hx*hy*ht over all nodes (masked nodes hold zeros).
double quadrature_lp(const Field& u, double p);
// sum u*v * cell volume.
double pairing(const Field& u, const Field& v);

Field axpy(double alpha, const Field& x, const Field& y);  // alpha*x + y
Field scale(double alpha, const Field& x);
double linf_norm(const Field& u);
std::size_t argmax_abs(const Field& u);

// HSF1 field files (see README for the byte layout).
void save_field(const Field& u, const std::string& path);
Field load_field(const std::string& path);

}  // namespace heisenvar
