#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "tma/grid.hpp"
#include "tma/ma_measure.hpp"
#include "tma/oracle.hpp"
#include "tma/sections.hpp"

namespace tma {

struct GrowthOptions {
  Vec2 base{0.0, 0.0};       // circles are centred here
  Vec2 support{0.0, 0.0};    // subtracted plane slope at the base
  int n_angles = 256;
  double slope_theory = std::numeric_limits<double>::quiet_NaN();
  std::optional<Domain2D> domain;  // circles must stay inside when given
};

struct GrowthFit {
  std::vector<double> radii;
  std::vector<double> vmin;
  std::vector<double> vmax;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_theory = std::numeric_limits<double>::quiet_NaN();
  double ratio_proxy = 0.0;
};

// Samples w(R, theta) = v(base + R e) - v(base) - <support, R e> on geometric
// circles and fits log sqrt(min max) against log R, dropping the smallest
// circle.
GrowthFit growth_exponent(const Field& v, double r_min, double r_max, int n_circles,
                          const GrowthOptions& options = {});

Mat2 dt_matrix(double t, double alpha);

enum class GammaRegion { inside, band, outside };

// Gamma = {|x1|^(1/alpha - 2) + x2^2 < 1}; inside means x in (1 - theta) Gamma,
// outside means x outside (1 + theta) Gamma.
GammaRegion gamma_membership(Vec2 x, double alpha, double theta);
const char* gamma_region_name(GammaRegion r);

struct CascadeSeries {
  std::vector<double> levels;
  std::vector<EllipsoidFit> fits;
  std::vector<double> eccentricities;  // |A_t|
  std::vector<double> areas;           // section areas
  double slope = 0.0;                  // OLS of log |A_t| against log t
  double intercept = 0.0;
};

CascadeSeries eccentricity_cascade(const GridFunction& v, Vec2 x0, Vec2 p,
                                   const std::vector<double>& levels);
CascadeSeries eccentricity_cascade(const PLConvexFunction& v, Vec2 x0, Vec2 p,
                                   const std::vector<double>& levels);

// Each level gets its own sampling grid, e.g. to resolve sections whose
// shape changes with the level.
using LevelGrid = std::function<std::pair<Domain2D, double>(double level)>;
CascadeSeries eccentricity_cascade(const Field& v, Vec2 x0, Vec2 p,
                                   const std::vector<double>& levels, const LevelGrid& grid);

// Rectangle of 1.5 times the exact semi-axes sampled with 40 points per
// shorter semi-axis.
CascadeSeries eccentricity_cascade(const SeparableSolution& s, const std::vector<double>& levels,
                                   int points_per_axis = 40);

std::vector<double> dyadic_levels(double first, int count, double ratio = 2.0);

struct StabilityResult {
  bool holds = false;
  double min_c1 = std::numeric_limits<double>::infinity();  // max_{l >= l'} |A_l| / M
  int l_prime = -1;  // index of the first level with |A| <= M, -1 if none
};

StabilityResult stability_check(const CascadeSeries& series, double M, double C1);

// Ordinary least squares y = slope x + intercept.
std::pair<double, double> least_squares(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace tma
