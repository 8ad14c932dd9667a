#pragma once

// Standalone SVG report: metric-vs-parameter line charts from a sweep table
// and grouped bar charts from an event table. Output is deterministic for
// identical inputs.

#include "afmm/eventstudy.hpp"
#include "afmm/experiments.hpp"

#include <optional>
#include <string>
#include <vector>

namespace afmm {

std::string render_report_svg(const std::optional<SweepTable>& sweep,
                              const std::vector<GroupTableRow>& event_table);

} // namespace afmm
