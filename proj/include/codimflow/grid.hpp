#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "codimflow/symmat.hpp"

namespace codimflow {

// Uniform isotropic grid carrying one scalar per node, ambient dimension 2..4.

struct GridSpec {
    int n = 0;
    std::array<int, 4> shape{};  // node counts per axis, axes beyond n unused
    Vec origin;                  // position of node (0,...,0)
    double h = 0.0;

    std::int64_t node_count() const;
    double diameter() const;  // euclidean extent of the node bounding box
    void validate() const;
};

class ScalarGrid {
  public:
    ScalarGrid() = default;
    explicit ScalarGrid(const GridSpec& spec, double fill = 0.0);

    const GridSpec& spec() const { return spec_; }
    int n() const { return spec_.n; }
    double h() const { return spec_.h; }
    double time = 0.0;

    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
    double operator[](std::int64_t i) const { return data_[static_cast<size_t>(i)]; }
    double& operator[](std::int64_t i) { return data_[static_cast<size_t>(i)]; }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    std::int64_t stride(int axis) const { return strides_[static_cast<size_t>(axis)]; }
    std::int64_t flat(const std::array<int, 4>& iv) const;
    std::array<int, 4> unflatten(std::int64_t i) const;
    Vec node_point(const std::array<int, 4>& iv) const;
    Vec node_point(std::int64_t i) const { return node_point(unflatten(i)); }
    bool is_interior(const std::array<int, 4>& iv) const;  // >=1 cell from every face

    // Multilinear interpolation; throws std::domain_error outside the grid.
    double interpolate(const Vec& x) const;

  private:
    GridSpec spec_;
    std::array<std::int64_t, 4> strides_{};
    std::vector<double> data_;
};

// Finite sample of a compact set, with ambient dimension n and an intrinsic
// dimension tag k < n.
struct PointCloud {
    int n = 0;
    int k = 0;
    std::vector<Vec> points;

    void validate() const;  // nonempty, finite coordinates, k < n
};

// Exact nearest-neighbor queries over a fixed cloud via uniform spatial bins.
// Results are identical to a brute-force scan.
class NearestNeighborIndex {
  public:
    explicit NearestNeighborIndex(const std::vector<Vec>& points);

    // Returns (index, distance) of the closest stored point.
    std::pair<int, double> nearest(const Vec& x) const;
    double distance(const Vec& x) const { return nearest(x).second; }
    int size() const { return static_cast<int>(points_.size()); }
    const Vec& point(int i) const { return points_[static_cast<size_t>(i)]; }

  private:
    std::vector<Vec> points_;
    int n_ = 0;
    Vec lo_;
    double cell_ = 1.0;
    std::array<int, kMaxDim> dims_{};
    std::vector<std::vector<int>> bins_;
    std::int64_t bin_index(const std::array<int, kMaxDim>& c) const;
};

// Exact symmetric Hausdorff distance (bin-accelerated; equals brute force).
// Throws std::domain_error on an empty input.
double hausdorff(const PointCloud& a, const PointCloud& b);

}  // namespace codimflow
