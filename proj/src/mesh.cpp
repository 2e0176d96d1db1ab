#include "perfplast/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace perfplast {

DirichletSpec DirichletSpec::parse(const std::string& text) {
    DirichletSpec spec{0u};
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char ch) { return std::isspace(ch); }),
                   item.end());
        if (item == "left") spec.sides |= kLeft;
        else if (item == "right") spec.sides |= kRight;
        else if (item == "bottom") spec.sides |= kBottom;
        else if (item == "top") spec.sides |= kTop;
        else if (item == "all") spec.sides |= kAllSides;
        else if (!item.empty()) throw std::invalid_argument("DirichletSpec: unknown side '" + item + "'");
    }
    if (spec.sides == 0u) throw std::invalid_argument("DirichletSpec: no Dirichlet side given");
    return spec;
}

std::string DirichletSpec::to_string() const {
    std::string out;
    const std::pair<Side, const char*> names[] = {{kLeft, "left"}, {kRight, "right"}, {kBottom, "bottom"}, {kTop, "top"}};
    for (const auto& [s, name] : names) {
        if (contains(s)) out += (out.empty() ? "" : ",") + std::string(name);
    }
    return out;
}

Mesh::Mesh(int dim, std::vector<std::array<double, 2>> nodes, std::vector<std::array<int, 3>> cells,
           std::vector<BoundaryFacet> facets)
    : dim_(dim), nodes_(std::move(nodes)), cells_(std::move(cells)), facets_(std::move(facets)) {
    if (dim_ != 1 && dim_ != 2) throw std::invalid_argument("Mesh: only dim 1 and 2 are supported");
    for (const auto& c : cells_) {
        for (int k = 0; k < dim_ + 1; ++k) {
            if (c[k] < 0 || c[k] >= num_nodes()) throw std::invalid_argument("Mesh: cell references missing node");
        }
    }
    compute_geometry();
}

void Mesh::compute_geometry() {
    volume_.assign(cells_.size(), 0.0);
    grads_.assign(cells_.size(), {});
    for (int c = 0; c < num_cells(); ++c) {
        const auto& cn = cells_[c];
        if (dim_ == 1) {
            const double h = nodes_[cn[1]][0] - nodes_[cn[0]][0];
            if (!(h > 0.0)) throw std::invalid_argument("Mesh: interval cell not positively oriented");
            volume_[c] = h;
            grads_[c][0] = {-1.0 / h, 0.0};
            grads_[c][1] = {1.0 / h, 0.0};
        } else {
            const auto& p0 = nodes_[cn[0]];
            const auto& p1 = nodes_[cn[1]];
            const auto& p2 = nodes_[cn[2]];
            const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
            if (!(det > 0.0)) throw std::invalid_argument("Mesh: triangle not positively oriented");
            volume_[c] = 0.5 * det;
            // grad phi_k = rot90(opposite edge) / det
            grads_[c][0] = {(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det};
            grads_[c][1] = {(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det};
            grads_[c][2] = {(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det};
        }
    }

    dirichlet_mask_.assign(nodes_.size(), 0);
    for (const auto& f : facets_) {
        if (f.tag != BoundaryTag::Dirichlet) continue;
        for (int k = 0; k < dim_; ++k) dirichlet_mask_[f.nodes[k]] = 1;
    }
    dirichlet_nodes_.clear();
    for (int i = 0; i < num_nodes(); ++i) {
        if (dirichlet_mask_[i]) dirichlet_nodes_.push_back(i);
    }
}

std::array<double, 2> Mesh::cell_centroid(int c) const {
    std::array<double, 2> x{0.0, 0.0};
    const int k = nodes_per_cell();
    for (int a = 0; a < k; ++a) {
        x[0] += nodes_[cells_[c][a]][0] / k;
        x[1] += nodes_[cells_[c][a]][1] / k;
    }
    return x;
}

std::vector<double> Mesh::lumped_mass() const {
    std::vector<double> m(nodes_.size(), 0.0);
    const int k = nodes_per_cell();
    for (int c = 0; c < num_cells(); ++c) {
        for (int a = 0; a < k; ++a) m[cells_[c][a]] += volume_[c] / k;
    }
    return m;
}

double Mesh::total_volume() const {
    double v = 0.0;
    for (double x : volume_) v += x;
    return v;
}

bool Mesh::operator==(const Mesh& o) const {
    if (dim_ != o.dim_ || nodes_ != o.nodes_ || cells_ != o.cells_ || facets_.size() != o.facets_.size()) return false;
    for (std::size_t i = 0; i < facets_.size(); ++i) {
        const auto& a = facets_[i];
        const auto& b = o.facets_[i];
        if (a.nodes != b.nodes || a.side != b.side || a.tag != b.tag) return false;
    }
    return true;
}

Mesh build_rect_mesh(int nx, int ny, const DirichletSpec& dirichlet) {
    if (nx < 1 || ny < 1) throw std::invalid_argument("build_rect_mesh: nx and ny must be at least 1");
    std::vector<std::array<double, 2>> nodes;
    nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) nodes.push_back({static_cast<double>(i) / nx, static_cast<double>(j) / ny});
    }
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };

    std::vector<std::array<int, 3>> cells;
    cells.reserve(static_cast<std::size_t>(2 * nx * ny));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
            if ((i + j) % 2 == 0) {
                cells.push_back({a, b, c});
                cells.push_back({a, c, d});
            } else {
                cells.push_back({a, b, d});
                cells.push_back({b, c, d});
            }
        }
    }

    std::vector<BoundaryFacet> facets;
    auto tag = [&](Side s) { return dirichlet.contains(s) ? BoundaryTag::Dirichlet : BoundaryTag::Neumann; };
    for (int i = 0; i < nx; ++i) facets.push_back({{id(i, 0), id(i + 1, 0)}, kBottom, tag(kBottom)});
    for (int j = 0; j < ny; ++j) facets.push_back({{id(nx, j), id(nx, j + 1)}, kRight, tag(kRight)});
    for (int i = 0; i < nx; ++i) facets.push_back({{id(i, ny), id(i + 1, ny)}, kTop, tag(kTop)});
    for (int j = 0; j < ny; ++j) facets.push_back({{id(0, j), id(0, j + 1)}, kLeft, tag(kLeft)});

    return Mesh(2, std::move(nodes), std::move(cells), std::move(facets));
}

Mesh build_interval_mesh(int nx, const DirichletSpec& dirichlet) {
    if (nx < 1) throw std::invalid_argument("build_interval_mesh: nx must be at least 1");
    std::vector<std::array<double, 2>> nodes;
    for (int i = 0; i <= nx; ++i) nodes.push_back({static_cast<double>(i) / nx, 0.0});
    std::vector<std::array<int, 3>> cells;
    for (int i = 0; i < nx; ++i) cells.push_back({i, i + 1, -1});
    auto tag = [&](Side s) { return dirichlet.contains(s) ? BoundaryTag::Dirichlet : BoundaryTag::Neumann; };
    std::vector<BoundaryFacet> facets{{{0, -1}, kLeft, tag(kLeft)}, {{nx, -1}, kRight, tag(kRight)}};
    return Mesh(1, std::move(nodes), std::move(cells), std::move(facets));
}

}  // namespace perfplast
