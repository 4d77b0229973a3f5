#ifndef SEBCOMM_PLOT_HPP_
#define SEBCOMM_PLOT_HPP_

#include <string>
#include <vector>

namespace sebcomm {
namespace plot {

// Minimal dependency-free chart emitter: PNG rasters with axes, ticks, a
// 5x7 bitmap font (lowercase folds to uppercase), line series with markers,
// and stacked bars. Meant for report figures, not publication typography.

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct StackedBars {
  std::vector<std::string> group_labels;
  std::vector<std::string> part_labels;         // stacking order, bottom up
  std::vector<std::vector<double>> values;      // [part][group], nonnegative
};

void lines(const std::string& path, const std::vector<Series>& series, const std::string& title,
           const std::string& xlabel, const std::string& ylabel);

void stacked_bars(const std::string& path, const StackedBars& bars, const std::string& title,
                  const std::string& ylabel);

}  // namespace plot
}  // namespace sebcomm

#endif  // SEBCOMM_PLOT_HPP_
