#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "parkocc/densify/mesh.hpp"
#include "parkocc/densify/normals.hpp"
#include "parkocc/densify/poisson.hpp"
#include "parkocc/error.hpp"
#include "parkocc/util/rng.hpp"
#include "oracles.hpp"

using namespace parkocc;
using namespace parkocc::densify;

using testsupport::fibonacci_sphere;

namespace {

constexpr double kPi = std::numbers::pi;

OrientedPointCloud sphere_cloud(int n, const Vec3& c = Vec3::Zero()) {
  OrientedPointCloud pc;
  pc.points = fibonacci_sphere(n, 1.0, c);
  for (const auto& p : pc.points) pc.normals.push_back((p - c).normalized());
  pc.confidence.assign(pc.points.size(), 1.0);
  return pc;
}

double brute_nn(const std::vector<Vec3>& pts, const Vec3& q) {
  double best = 1e300;
  for (const auto& p : pts) best = std::min(best, (p - q).squaredNorm());
  return std::sqrt(best);
}

}  // namespace

TEST(Solver, SeparableDirichletMatchesAnalytic) {
  const int n = 64;
  const double h = 1.0 / n;
  std::vector<double> b(n * n * n), exact(n * n * n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double x = (i + 0.5) * h, y = (j + 0.5) * h, z = (k + 0.5) * h;
        const double u = std::sin(kPi * x) * std::sin(kPi * y) * std::sin(kPi * z);
        exact[i + n * (j + n * k)] = u;
        b[i + n * (j + n * k)] = 3 * kPi * kPi * u;
      }
  std::vector<double> u;
  SolverOptions opts;
  opts.boundary = Boundary::Dirichlet;
  const auto st = solve_poisson({n, n, n}, h, b, u, opts);
  EXPECT_TRUE(st.converged);
  EXPECT_LE(st.relative_residual, 1e-6);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    num += (u[i] - exact[i]) * (u[i] - exact[i]);
    den += exact[i] * exact[i];
  }
  EXPECT_LE(std::sqrt(num / den), 1e-3);
}

TEST(Solver, ResidualIsTrueResidualForEveryPreconditioner) {
  const std::array<int, 3> d{16, 8, 12};
  util::Rng rng(3);
  std::vector<double> b(16 * 8 * 12);
  for (auto& v : b) v = rng.uniform(-1, 1);
  for (auto pc : {Preconditioner::None, Preconditioner::Jacobi, Preconditioner::Multigrid}) {
    for (auto bc : {Boundary::Neumann, Boundary::Dirichlet}) {
      SolverOptions o;
      o.preconditioner = pc;
      o.boundary = bc;
      std::vector<double> u;
      const auto st = solve_poisson(d, 0.5, b, u, o);
      std::vector<double> bb = b;
      if (bc == Boundary::Neumann) {
        double m = 0;
        for (double v : bb) m += v;
        m /= static_cast<double>(bb.size());
        for (auto& v : bb) v -= m;
      }
      std::vector<double> au(u.size());
      apply_negative_laplacian(d, 0.5, bc, u, au);
      double rn = 0, bn = 0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        rn += (bb[i] - au[i]) * (bb[i] - au[i]);
        bn += bb[i] * bb[i];
      }
      EXPECT_LE(std::sqrt(rn / bn), 1.01e-6);
      EXPECT_TRUE(st.converged);
    }
  }
}

TEST(Solver, NonConvergenceReportsResidual) {
  const std::array<int, 3> d{32, 32, 32};
  std::vector<double> b(32 * 32 * 32, 0.0);
  b[100] = 1;
  b[2000] = -1;
  SolverOptions o;
  o.preconditioner = Preconditioner::None;
  o.max_iterations = 2;
  std::vector<double> u;
  try {
    solve_poisson(d, 1.0, b, u, o);
    FAIL() << "expected non-convergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.stage(), "densify");
    EXPECT_NE(std::string(e.what()).find("residual"), std::string::npos);
  }
}

TEST(MarchingCubes, SphereVerticesNearRadius) {
  ScalarGrid g;
  g.dims = {40, 40, 40};
  g.h = 0.08;
  g.origin = Vec3::Constant(-1.6);
  g.values.resize(g.count());
  for (int k = 0; k < 40; ++k)
    for (int j = 0; j < 40; ++j)
      for (int i = 0; i < 40; ++i) {
        const Vec3 c = g.origin + g.h * Vec3(i + 0.5, j + 0.5, k + 0.5);
        g.values[g.index(i, j, k)] = 1.0 - c.norm();
      }
  const auto m = marching_cubes(g, 0.0);
  ASSERT_FALSE(m.triangles.empty());
  m.check();
  for (const auto& v : m.vertices) EXPECT_NEAR(v.norm(), 1.0, 1.5 * g.h);
  // Outward facing: triangle normals point away from the center.
  int outward = 0;
  for (const auto& t : m.triangles) {
    const Vec3 a = m.vertices[t[0]], b = m.vertices[t[1]], c = m.vertices[t[2]];
    const Vec3 n = (b - a).cross(c - a);
    EXPECT_GT(n.norm(), 0.0);
    if (n.dot((a + b + c) / 3.0) > 0) ++outward;
  }
  EXPECT_EQ(outward, static_cast<int>(m.triangles.size()));
}

TEST(MarchingCubes, ClosedSurfaceEveryEdgeSharedTwice) {
  ScalarGrid g;
  g.dims = {20, 20, 20};
  g.h = 0.1;
  g.origin = Vec3::Constant(-1.0);
  g.values.resize(g.count());
  util::Rng rng(11);
  for (auto& v : g.values) v = rng.uniform(-1, 1);
  // Force the border outside so the surface is closed.
  for (int k = 0; k < 20; ++k)
    for (int j = 0; j < 20; ++j)
      for (int i = 0; i < 20; ++i)
        if (i == 0 || j == 0 || k == 0 || i == 19 || j == 19 || k == 19) g.values[g.index(i, j, k)] = -1;
  const auto m = marching_cubes(g, 0.0);
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> directed;
  for (const auto& t : m.triangles)
    for (int e = 0; e < 3; ++e) directed[{t[e], t[(e + 1) % 3]}]++;
  for (const auto& [e, cnt] : directed) {
    EXPECT_EQ(cnt, 1);
    EXPECT_EQ(directed.count({e.second, e.first}), 1u);
  }
}

TEST(Poisson, SphereRmsRadialError) {
  const auto pc = sphere_cloud(2000);
  const auto res = poisson_reconstruct_full(pc, PoissonConfig{});
  ASSERT_FALSE(res.mesh.vertices.empty());
  double s = 0;
  for (const auto& v : res.mesh.vertices) s += (v.norm() - 1.0) * (v.norm() - 1.0);
  EXPECT_LE(std::sqrt(s / res.mesh.vertices.size()), 0.05);
  EXPECT_TRUE(res.stats.converged);
}

TEST(Poisson, PlanarPatchStaysOnPlane) {
  OrientedPointCloud pc;
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 40; ++j) {
      pc.points.emplace_back(i * 0.05, j * 0.05, 0.3);
      pc.normals.emplace_back(0, 0, 1);
    }
  pc.confidence.assign(pc.points.size(), 1.0);
  PoissonConfig cfg;
  cfg.resolution = 64;
  const auto m = poisson_reconstruct(pc, cfg);
  ASSERT_FALSE(m.vertices.empty());
  int checked = 0;
  for (const auto& v : m.vertices) {
    if (v.x() < 0.1 || v.x() > 1.85 || v.y() < 0.1 || v.y() > 1.85) continue;
    EXPECT_NEAR(v.z(), 0.3, 0.02);
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(Poisson, TooFewPointsIsPreconditionError) {
  const auto pc = sphere_cloud(10);
  EXPECT_THROW(poisson_reconstruct(pc, PoissonConfig{}), Error);
}

TEST(Poisson, InvalidConfigRejected) {
  PoissonConfig cfg;
  cfg.resolution = 4;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.solver.tolerance = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Poisson, TranslationEquivariant) {
  const auto a = sphere_cloud(800);
  const Vec3 t(3.25, -7.5, 1.125);
  const auto b = sphere_cloud(800, t);
  PoissonConfig cfg;
  cfg.resolution = 48;
  const auto ma = poisson_reconstruct(a, cfg);
  const auto mb = poisson_reconstruct(b, cfg);
  ASSERT_EQ(ma.vertices.size(), mb.vertices.size());
  ASSERT_EQ(ma.triangles, mb.triangles);
  for (std::size_t i = 0; i < ma.vertices.size(); ++i) {
    EXPECT_LE((ma.vertices[i] + t - mb.vertices[i]).norm(), 1e-6);
  }
}

TEST(Normals, PlaneFacesSensor) {
  util::Rng rng(5);
  std::vector<Vec3> pts;
  for (int i = 0; i < 300; ++i) pts.emplace_back(rng.uniform(-2, 2), rng.uniform(-2, 2), 0.0);
  const auto pc = estimate_normals(pts, 10, Vec3(0.3, 0.1, 5.0));
  for (const auto& n : pc.normals) EXPECT_LE((n - Vec3::UnitZ()).norm(), 1e-3);
}

TEST(Normals, SphereNormalsRadial) {
  const auto pts = fibonacci_sphere(2000);
  std::vector<Vec3> views;
  for (const auto& p : pts) views.push_back(3.0 * p);
  const auto pc = estimate_normals(pts, views, 10);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_NEAR(pc.normals[i].norm(), 1.0, 1e-6);
    const double ang = std::acos(std::clamp(pc.normals[i].dot(pts[i].normalized()), -1.0, 1.0));
    EXPECT_LE(ang, 5.0 * kPi / 180.0);
  }
}

TEST(Normals, CollinearNeighborhoodHasZeroConfidence) {
  const std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  const auto pc = estimate_normals(pts, 3, Vec3(0, 0, 1));
  for (double c : pc.confidence) EXPECT_EQ(c, 0.0);
  EXPECT_THROW(estimate_normals(std::span<const Vec3>(pts.data(), 3), 3, Vec3::Zero()), Error);
  EXPECT_THROW(estimate_normals(pts, 2, Vec3::Zero()), Error);
}

TEST(Normals, DownsampleKeepsCentroids) {
  stitch::LabeledCloud c;
  c.viewpoints.push_back(Vec3::Zero());
  c.push_back({0.01, 0.01, 0.01}, 17, 0);
  c.push_back({0.03, 0.05, 0.07}, 28, 0);
  c.push_back({0.5, 0.5, 0.5}, 24, 0);
  const auto d = voxel_downsample(c, 0.1);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_LE((d.points[0] - Vec3(0.02, 0.03, 0.04)).norm(), 1e-12);
  EXPECT_EQ(d.labels[0], 17);
}

TEST(DensifyMesh, SingleTriangleSpacing) {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2, 0}};
  m.triangles = {{0, 1, 2}};
  const auto pts = densify_mesh(m, 0.25);
  // Probe the triangle: every point of it lies within max_edge of an output point.
  util::Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    double a = rng.uniform01(), b = rng.uniform01();
    if (a + b > 1) {
      a = 1 - a;
      b = 1 - b;
    }
    const Vec3 q = m.vertices[0] + a * (m.vertices[1] - m.vertices[0]) + b * (m.vertices[2] - m.vertices[0]);
    EXPECT_LE(brute_nn(pts, q), 0.25);
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double best = 1e300;
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (i != j) best = std::min(best, (pts[i] - pts[j]).norm());
    EXPECT_LE(best, 0.25 + 1e-12);
  }
}

TEST(DensifyMesh, FineMeshUnchanged) {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {0.1, 0, 0}, {0, 0.1, 0}, {0.1, 0.1, 0}};
  m.triangles = {{0, 1, 2}, {1, 3, 2}};
  const auto pts = densify_mesh(m, 0.5);
  EXPECT_EQ(pts, m.vertices);
}

TEST(DensifyMesh, SphereCoverage) {
  const auto pc = sphere_cloud(2000);
  PoissonConfig cfg;
  cfg.resolution = 64;
  const auto mesh = poisson_reconstruct(pc, cfg);
  const auto pts = densify_mesh(mesh, 0.1);
  const auto probes = fibonacci_sphere(1000);
  double worst = 0;
  for (const auto& q : probes) worst = std::max(worst, brute_nn(pts, q));
  EXPECT_LE(worst, 0.1);
}
