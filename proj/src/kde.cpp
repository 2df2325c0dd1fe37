#include "lyapflow/kde.hpp"

#include <cmath>
#include <numbers>

#include "lyapflow/error.hpp"

namespace lyapflow {

KdeResult kde_grid(const Mat& samples, const GridSpec& grid, Bandwidth rule, double h)
{
  const Eigen::Index n = samples.cols();
  if (n == 0)
    throw ParameterError("kde needs at least one sample");
  if (samples.rows() != 2)
    throw DimensionError("kde expects 2 x n samples");
  if (grid.nx < 1 || grid.ny < 1 || !(grid.x_max > grid.x_min) || !(grid.y_max > grid.y_min))
    throw ParameterError("invalid kde grid");

  if (rule == Bandwidth::scott) {
    if (n < 2)
      throw ParameterError("scott bandwidth needs at least two samples");
    const Vec mean = samples.rowwise().mean();
    const double var = (samples.colwise() - mean).squaredNorm() / (2.0 * static_cast<double>(n - 1));
    h = std::pow(static_cast<double>(n), -1.0 / 6.0) * std::sqrt(var);
  }
  if (!(h > 0.0))
    throw ParameterError("kde bandwidth must be positive");

  // separable kernel: density = Ky * Kx^T / n
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * h);
  Mat Kx(grid.nx, n), Ky(grid.ny, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    for (int j = 0; j < grid.nx; ++j) {
      const double z = (grid.x(j) - samples(0, s)) / h;
      Kx(j, s) = norm * std::exp(-0.5 * z * z);
    }
    for (int i = 0; i < grid.ny; ++i) {
      const double z = (grid.y(i) - samples(1, s)) / h;
      Ky(i, s) = norm * std::exp(-0.5 * z * z);
    }
  }
  KdeResult out;
  out.grid = grid;
  out.bandwidth = h;
  out.density = (Ky * Kx.transpose()) / static_cast<double>(n);
  out.mass = out.density.sum() * grid.dx() * grid.dy();
  return out;
}

} // namespace lyapflow
