#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codimflow/grid.hpp"

namespace codimflow {

inline constexpr const char* kToolVersion = "codimflow 1.0.0";

// Written at the top of every artifact so runs can be reproduced and
// compared byte for byte (wall-clock columns excluded by convention).
struct Provenance {
    std::string config_hash = "0";
    std::uint64_t seed = 0;
    std::string header_line() const;  // "# codimflow x.y.z; config=...; seed=..."
};

// FNV-1a over the canonical config text.
std::string fnv1a_hex(const std::string& text);

// Grid snapshot, plain text: one header line then node values in flat order
// (axis 0 fastest), one value per line, 17 significant digits.
void write_grid(const std::string& path, const ScalarGrid& g);
ScalarGrid read_grid(const std::string& path);

void write_cloud(const std::string& path, const PointCloud& pc);
PointCloud read_cloud(const std::string& path);

// CSV with a provenance header comment. Values are preformatted strings so
// callers control digit counts (and can isolate wall-clock columns).
void write_csv(const std::string& path, const Provenance& prov,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows);

std::string format_double(double x);  // 17 significant digits, shortest form

// 2D slice of a grid as PGM (P2). For n > 2 the remaining axes are fixed at
// the given indices. The header comment documents the affine value->gray map.
void write_pgm_slice(const std::string& path, const ScalarGrid& g, int axis_a, int axis_b,
                     const std::array<int, 4>& fixed, const Provenance& prov);

}  // namespace codimflow
