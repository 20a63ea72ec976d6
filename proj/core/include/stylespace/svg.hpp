#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stylespace/embedspace.hpp"
#include "stylespace/matrix.hpp"

namespace stylespace::svg {

struct BarGroup {
  std::string label;                        // one group per comparison class
  std::vector<std::optional<double>> values;  // one per series; nullopt draws nothing
  std::vector<bool> marked;                 // asterisk above the bar
};

/// Grouped bar chart with a zero line; `series` names the bars in a group.
std::string bar_chart(const std::string& title, const std::vector<std::string>& series,
                      const std::vector<BarGroup>& groups, const std::string& y_label);

/// 2D scatter coloured by class, with one outline ellipse per class.
std::string scatter(const std::string& title, const Matrix& points, const std::vector<std::string>& classes,
                    const std::map<std::string, Ellipse>& ellipses);

/// Row-normalized heatmap with raw counts printed in each cell.
std::string heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                    const std::vector<std::string>& col_labels, const std::vector<std::vector<std::size_t>>& counts);

/// XML text escaping.
std::string escape(const std::string& text);

}  // namespace stylespace::svg
