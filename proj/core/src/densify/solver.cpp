#include <algorithm>
#include <optional>
#include <cmath>
#include <numeric>

#include "parkocc/densify/poisson.hpp"
#include "parkocc/error.hpp"

namespace parkocc::densify {

namespace {

using Dims = std::array<int, 3>;

std::size_t count_of(const Dims& d) { return static_cast<std::size_t>(d[0]) * d[1] * d[2]; }

struct Level {
  Dims dims;
  double h;
  std::vector<double> u, b, r;
};

// Off-diagonal neighbors contribute -1/h^2; the diagonal is the number of
// interior neighbors (plus 2 per Dirichlet face) over h^2.
void apply_op(const Dims& d, double h, Boundary bc, const double* u, double* out) {
  const int nx = d[0], ny = d[1], nz = d[2];
  const std::size_t sx = 1, sy = static_cast<std::size_t>(nx), sz = static_cast<std::size_t>(nx) * ny;
  const double inv = 1.0 / (h * h);
  const double face = bc == Boundary::Dirichlet ? 2.0 : 0.0;
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      std::size_t c = sz * k + sy * j;
      for (int i = 0; i < nx; ++i, ++c) {
        const double uc = u[c];
        double acc = 0.0;
        if (i > 0) acc += uc - u[c - sx]; else acc += face * uc;
        if (i < nx - 1) acc += uc - u[c + sx]; else acc += face * uc;
        if (j > 0) acc += uc - u[c - sy]; else acc += face * uc;
        if (j < ny - 1) acc += uc - u[c + sy]; else acc += face * uc;
        if (k > 0) acc += uc - u[c - sz]; else acc += face * uc;
        if (k < nz - 1) acc += uc - u[c + sz]; else acc += face * uc;
        out[c] = acc * inv;
      }
    }
  }
}

void gs_color(const Dims& d, double h, Boundary bc, double* u, const double* b, int color) {
  const int nx = d[0], ny = d[1], nz = d[2];
  const std::size_t sy = static_cast<std::size_t>(nx), sz = static_cast<std::size_t>(nx) * ny;
  const double h2 = h * h;
  const double face = bc == Boundary::Dirichlet ? 2.0 : 0.0;
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      int i0 = (color + j + k) & 1;
      std::size_t c = sz * k + sy * j + i0;
      for (int i = i0; i < nx; i += 2, c += 2) {
        double diag = 0.0, sum = b[c] * h2;
        if (i > 0) { diag += 1; sum += u[c - 1]; } else diag += face;
        if (i < nx - 1) { diag += 1; sum += u[c + 1]; } else diag += face;
        if (j > 0) { diag += 1; sum += u[c - sy]; } else diag += face;
        if (j < ny - 1) { diag += 1; sum += u[c + sy]; } else diag += face;
        if (k > 0) { diag += 1; sum += u[c - sz]; } else diag += face;
        if (k < nz - 1) { diag += 1; sum += u[c + sz]; } else diag += face;
        if (diag > 0) u[c] = sum / diag;
      }
    }
  }
}

void diag_of(const Dims& d, double h, Boundary bc, std::vector<double>& out) {
  out.assign(count_of(d), 0.0);
  const double face = bc == Boundary::Dirichlet ? 2.0 : 0.0;
  std::size_t c = 0;
  for (int k = 0; k < d[2]; ++k)
    for (int j = 0; j < d[1]; ++j)
      for (int i = 0; i < d[0]; ++i, ++c) {
        double n = 0;
        n += i > 0 ? 1 : face;
        n += i < d[0] - 1 ? 1 : face;
        n += j > 0 ? 1 : face;
        n += j < d[1] - 1 ? 1 : face;
        n += k > 0 ? 1 : face;
        n += k < d[2] - 1 ? 1 : face;
        out[c] = n / (h * h);
      }
}

// Cell-centered trilinear prolongation: each fine cell takes 3/4 of its
// parent and 1/4 of the parent's neighbor on the fine cell's side, per axis,
// clamped at the border. Restriction is its transpose divided by 8.
template <bool Restrict>
void transfer(const Dims& fd, const Dims& cd, double* fine, double* coarse) {
  for (int k = 0; k < fd[2]; ++k) {
    const int pk = k / 2, qk = std::clamp(pk + ((k & 1) ? 1 : -1), 0, cd[2] - 1);
    for (int j = 0; j < fd[1]; ++j) {
      const int pj = j / 2, qj = std::clamp(pj + ((j & 1) ? 1 : -1), 0, cd[1] - 1);
      for (int i = 0; i < fd[0]; ++i) {
        const int pi = i / 2, qi = std::clamp(pi + ((i & 1) ? 1 : -1), 0, cd[0] - 1);
        const std::size_t f = static_cast<std::size_t>(i) + static_cast<std::size_t>(fd[0]) * (j + static_cast<std::size_t>(fd[1]) * k);
        const int xs[2] = {pi, qi}, ys[2] = {pj, qj}, zs[2] = {pk, qk};
        static constexpr double w[2] = {0.75, 0.25};
        double acc = 0.0;
        const double rf = Restrict ? fine[f] / 8.0 : 0.0;
        for (int c = 0; c < 2; ++c)
          for (int b = 0; b < 2; ++b)
            for (int a = 0; a < 2; ++a) {
              const std::size_t ci = static_cast<std::size_t>(xs[a]) +
                                     static_cast<std::size_t>(cd[0]) * (ys[b] + static_cast<std::size_t>(cd[1]) * zs[c]);
              const double wt = w[a] * w[b] * w[c];
              if constexpr (Restrict) coarse[ci] += wt * rf;
              else acc += wt * coarse[ci];
            }
        if constexpr (!Restrict) fine[f] += acc;
      }
    }
  }
}

void remove_mean(std::vector<double>& v) {
  if (v.empty()) return;
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (auto& x : v) x -= m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

class Multigrid {
 public:
  Multigrid(const Dims& dims, double h, Boundary bc, int sweeps) : bc_(bc), sweeps_(sweeps) {
    Dims d = dims;
    double hh = h;
    levels_.push_back({d, hh, {}, {}, {}});
    while (levels_.size() < 10 && d[0] % 2 == 0 && d[1] % 2 == 0 && d[2] % 2 == 0 &&
           std::min({d[0], d[1], d[2]}) >= 4) {
      d = {d[0] / 2, d[1] / 2, d[2] / 2};
      hh *= 2;
      levels_.push_back({d, hh, {}, {}, {}});
    }
    for (auto& l : levels_) {
      l.u.assign(count_of(l.dims), 0.0);
      l.b.assign(count_of(l.dims), 0.0);
      l.r.assign(count_of(l.dims), 0.0);
    }
  }

  // z = M r with a symmetric V-cycle.
  void apply(const std::vector<double>& r, std::vector<double>& z) {
    levels_[0].b = r;
    vcycle(0);
    z = levels_[0].u;
  }

 private:
  void smooth(Level& l, bool forward, int sweeps) {
    for (int s = 0; s < sweeps; ++s) {
      gs_color(l.dims, l.h, bc_, l.u.data(), l.b.data(), forward ? 0 : 1);
      gs_color(l.dims, l.h, bc_, l.u.data(), l.b.data(), forward ? 1 : 0);
    }
  }

  void vcycle(std::size_t li) {
    Level& l = levels_[li];
    std::fill(l.u.begin(), l.u.end(), 0.0);
    if (li + 1 == levels_.size()) {
      const int n = std::max(20, 2 * std::max({l.dims[0], l.dims[1], l.dims[2]}));
      smooth(l, true, n);
      smooth(l, false, n);
      return;
    }
    smooth(l, true, sweeps_);
    apply_op(l.dims, l.h, bc_, l.u.data(), l.r.data());
    for (std::size_t i = 0; i < l.r.size(); ++i) l.r[i] = l.b[i] - l.r[i];
    Level& c = levels_[li + 1];
    std::fill(c.b.begin(), c.b.end(), 0.0);
    transfer<true>(l.dims, c.dims, l.r.data(), c.b.data());
    vcycle(li + 1);
    transfer<false>(l.dims, c.dims, l.u.data(), c.u.data());
    smooth(l, false, sweeps_);
  }

  Boundary bc_;
  int sweeps_;
  std::vector<Level> levels_;
};

}  // namespace

void apply_negative_laplacian(std::array<int, 3> dims, double h, Boundary boundary,
                              std::span<const double> u, std::span<double> out) {
  if (u.size() != count_of(dims) || out.size() != u.size()) {
    throw Error("densify", "laplacian operand size mismatch");
  }
  apply_op(dims, h, boundary, u.data(), out.data());
}

SolveStats solve_poisson(std::array<int, 3> dims, double h, std::span<const double> b_in,
                         std::vector<double>& x, const SolverOptions& opt) {
  const std::size_t n = count_of(dims);
  if (b_in.size() != n) throw Error("densify", "right-hand side size mismatch");
  if (std::min({dims[0], dims[1], dims[2]}) < 2) throw Error("densify", "grid needs >= 2 cells per axis");
  const bool neumann = opt.boundary == Boundary::Neumann;
  std::vector<double> b(b_in.begin(), b_in.end());
  if (neumann) remove_mean(b);
  x.assign(n, 0.0);
  SolveStats st;
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    st.converged = true;
    return st;
  }
  std::vector<double> r = b, z(n), p(n), q(n), diag;
  std::optional<Multigrid> mg;
  if (opt.preconditioner == Preconditioner::Multigrid) mg.emplace(dims, h, opt.boundary, opt.smoothing_sweeps);
  if (opt.preconditioner == Preconditioner::Jacobi) diag_of(dims, h, opt.boundary, diag);
  auto precondition = [&](const std::vector<double>& in, std::vector<double>& out) {
    switch (opt.preconditioner) {
      case Preconditioner::None: out = in; break;
      case Preconditioner::Jacobi:
        for (std::size_t i = 0; i < n; ++i) out[i] = in[i] / diag[i];
        break;
      case Preconditioner::Multigrid: mg->apply(in, out); break;
    }
    if (neumann) remove_mean(out);
  };
  auto true_residual = [&]() {
    apply_op(dims, h, opt.boundary, x.data(), q.data());
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    if (neumann) remove_mean(r);
    return std::sqrt(dot(r, r)) / bnorm;
  };
  int it = 0;
  bool breakdown = false;
  st.relative_residual = 1.0;
  // Restart from the true residual whenever the recurrence claims convergence
  // but rounding has let the true residual drift above the tolerance.
  while (it < opt.max_iterations && !st.converged) {
    precondition(r, z);
    p = z;
    double rz = dot(r, z);
    while (it < opt.max_iterations) {
      apply_op(dims, h, opt.boundary, p.data(), q.data());
      const double pq = dot(p, q);
      if (!(pq > 0)) {
        breakdown = true;
        break;
      }
      const double alpha = rz / pq;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
      if (neumann) remove_mean(r);
      ++it;
      if (std::sqrt(dot(r, r)) / bnorm <= opt.tolerance) break;
      precondition(r, z);
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    st.relative_residual = true_residual();
    st.converged = st.relative_residual <= opt.tolerance;
    if (breakdown) break;
  }
  st.iterations = it;
  if (neumann) remove_mean(x);
  if (!st.converged) {
    throw Error("densify", "conjugate gradient did not converge in " + std::to_string(st.iterations) +
                               " iterations (relative residual " + std::to_string(st.relative_residual) + ")");
  }
  return st;
}

}  // namespace parkocc::densify
