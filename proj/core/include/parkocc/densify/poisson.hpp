#pragma once

#include <array>
#include <span>
#include <vector>

#include "parkocc/densify/mesh.hpp"
#include "parkocc/densify/normals.hpp"

namespace parkocc::densify {

enum class Boundary { Neumann, Dirichlet };
enum class Preconditioner { None, Jacobi, Multigrid };

/// Cell-centered scalar field on a regular grid. Value (i, j, k) sits at
/// origin + h * (i + 0.5, j + 0.5, k + 0.5).
struct ScalarGrid {
  std::array<int, 3> dims{0, 0, 0};
  double h = 1.0;
  Vec3 origin = Vec3::Zero();
  std::vector<double> values;

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * k);
  }
  std::size_t count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
  /// Trilinear interpolation between cell centers, clamped at the border.
  double sample(const Vec3& p) const;
};

struct SolverOptions {
  double tolerance = 1e-6;  // relative residual ||b - A x|| / ||b||
  int max_iterations = 2000;
  Preconditioner preconditioner = Preconditioner::Multigrid;
  Boundary boundary = Boundary::Neumann;
  int smoothing_sweeps = 2;
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Solves -Lap_h(u) = b with the 7-point Laplacian on a cell-centered grid.
/// Neumann: zero normal derivative (b is projected to zero mean; the solution
/// has zero mean). Dirichlet: u = 0 on the domain faces (mirrored ghost
/// cells). Throws parkocc::Error("densify") on non-convergence.
SolveStats solve_poisson(std::array<int, 3> dims, double h, std::span<const double> b,
                         std::vector<double>& u, const SolverOptions& options);

/// Applies -Lap_h; exposed for residual checks.
void apply_negative_laplacian(std::array<int, 3> dims, double h, Boundary boundary,
                              std::span<const double> u, std::span<double> out);

struct PoissonConfig {
  int resolution = 128;    // cells along the longest padded axis
  double cell_size = 0.0;  // when > 0, overrides resolution
  double padding = 0.05;   // fraction of each axis extent added on both sides
  int smoothing = 1;       // [1 2 1] passes over the splatted field
  int trim_radius = 3;     // cells around samples where the surface is kept
  double min_confidence = 1e-6;
  SolverOptions solver{};
  std::size_t max_cells = 64u << 20;

  void validate() const;
};

struct PoissonResult {
  TriMesh mesh;
  SolveStats stats;
  double iso_level = 0.0;
  ScalarGrid indicator;
};

/// Grid Poisson surface reconstruction: splat normals into a staggered vector
/// field, solve for the indicator, extract the iso-surface at the mean
/// indicator value over the samples. Needs at least 50 usable points.
PoissonResult poisson_reconstruct_full(const OrientedPointCloud& cloud, const PoissonConfig& cfg);
TriMesh poisson_reconstruct(const OrientedPointCloud& cloud, const PoissonConfig& cfg);

/// Marching cubes over the lattice of cell centers; a node is inside when its
/// value exceeds `iso`. `mask` (optional, one byte per cell) limits the cubes
/// to those whose lowest corner is marked. Triangles face decreasing values.
TriMesh marching_cubes(const ScalarGrid& field, double iso, std::span<const std::uint8_t> mask = {});

}  // namespace parkocc::densify
