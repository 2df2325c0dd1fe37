#pragma once

#include "lyapflow/types.hpp"

namespace lyapflow {

struct GridSpec
{
  double x_min = -3.0, x_max = 3.0;
  double y_min = -3.0, y_max = 3.0;
  int nx = 101, ny = 101;

  double dx() const { return (x_max - x_min) / nx; }
  double dy() const { return (y_max - y_min) / ny; }
  /// Cell centers.
  double x(int j) const { return x_min + (j + 0.5) * dx(); }
  double y(int i) const { return y_min + (i + 0.5) * dy(); }
};

enum class Bandwidth
{
  scott,
  fixed
};

struct KdeResult
{
  GridSpec grid;
  Mat density; ///< ny x nx, entry (i, j) at (x(j), y(i))
  double bandwidth = 0.0;
  double mass = 0.0; ///< sum of density times cell area
};

/// Isotropic Gaussian KDE of 2 x n samples on the cell centers of `grid`.
/// Scott's rule uses h = n^(-1/6) * sqrt((var_x + var_y) / 2).
KdeResult kde_grid(const Mat& samples, const GridSpec& grid, Bandwidth rule = Bandwidth::scott, double h = 0.0);

} // namespace lyapflow
