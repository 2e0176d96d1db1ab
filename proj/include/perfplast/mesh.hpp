// Structured simplicial meshes of the unit interval and the unit square.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace perfplast {

enum class BoundaryTag : std::uint8_t { Dirichlet, Neumann };

// Sides of the unit square (x = 0, x = 1, y = 0, y = 1); for the interval
// only Left and Right exist.
enum Side : unsigned { kLeft = 1u, kRight = 2u, kBottom = 4u, kTop = 8u, kAllSides = 15u };

/// Which sides carry Dirichlet data. Parsed from strings such as
/// "left,right" or "all".
struct DirichletSpec {
    unsigned sides = kAllSides;

    static DirichletSpec parse(const std::string& text);
    std::string to_string() const;
    bool contains(Side s) const { return (sides & s) != 0u; }
};

struct BoundaryFacet {
    std::array<int, 2> nodes{-1, -1};  // second entry unused in 1D
    Side side = kLeft;
    BoundaryTag tag = BoundaryTag::Neumann;
};

class Mesh {
public:
    Mesh() = default;
    Mesh(int dim, std::vector<std::array<double, 2>> nodes, std::vector<std::array<int, 3>> cells,
         std::vector<BoundaryFacet> facets);

    int dim() const { return dim_; }
    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    int num_cells() const { return static_cast<int>(cells_.size()); }
    int num_dofs() const { return num_nodes() * dim_; }
    int nodes_per_cell() const { return dim_ + 1; }

    const std::array<double, 2>& node(int i) const { return nodes_[i]; }
    const std::array<int, 3>& cell(int c) const { return cells_[c]; }
    const std::vector<std::array<double, 2>>& nodes() const { return nodes_; }
    const std::vector<std::array<int, 3>>& cells() const { return cells_; }
    const std::vector<BoundaryFacet>& facets() const { return facets_; }

    double cell_volume(int c) const { return volume_[c]; }
    // Gradient of the local P1 basis function k (0..dim) on cell c.
    const std::array<double, 2>& basis_gradient(int c, int k) const { return grads_[c][k]; }
    std::array<double, 2> cell_centroid(int c) const;

    // Sorted node indices lying on a Dirichlet facet.
    const std::vector<int>& dirichlet_nodes() const { return dirichlet_nodes_; }
    // Per node: true when the node carries Dirichlet data.
    const std::vector<char>& dirichlet_mask() const { return dirichlet_mask_; }

    // Lumped (row-sum) mass per node: sum over incident cells of |T| / (dim + 1).
    std::vector<double> lumped_mass() const;
    double total_volume() const;

    bool operator==(const Mesh& o) const;

private:
    void compute_geometry();

    int dim_ = 1;
    std::vector<std::array<double, 2>> nodes_;
    std::vector<std::array<int, 3>> cells_;
    std::vector<BoundaryFacet> facets_;
    std::vector<double> volume_;
    std::vector<std::array<std::array<double, 2>, 3>> grads_;
    std::vector<int> dirichlet_nodes_;
    std::vector<char> dirichlet_mask_;
};

/// Unit square split into nx * ny squares, each cut into two triangles with
/// the diagonal direction alternating in a checkerboard pattern. Nodes are
/// numbered j * (nx + 1) + i for the point (i / nx, j / ny); cell count is
/// 2 nx ny and the boundary has 2 (nx + ny) facets.
Mesh build_rect_mesh(int nx, int ny, const DirichletSpec& dirichlet);

/// Uniform mesh of (0, 1) with nx cells; node i sits at i / nx.
Mesh build_interval_mesh(int nx, const DirichletSpec& dirichlet);

}  // namespace perfplast
