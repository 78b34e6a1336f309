// Copyright 2026 The specmer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "specmer/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace specmer {

std::string cost_curve_svg(const std::vector<CostPoint>& points, const std::string& title) {
  constexpr double kW = 640, kH = 400, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" << title << "</text>\n";

  const double plot_w = kW - kLeft - kRight, plot_h = kH - kTop - kBottom;
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kH - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
         "window (mean of consecutive epochs)</text>\n";
  svg << "<text x=\"16\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 16 " << kTop + plot_h / 2 << ")\">cost</text>\n";

  if (!points.empty()) {
    double lo = points[0].mean_cost, hi = lo;
    for (const auto& p : points) {
      lo = std::min(lo, p.mean_cost);
      hi = std::max(hi, p.mean_cost);
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double n = static_cast<double>(points.size());
    auto x_of = [&](int index) {
      return n > 1 ? kLeft + plot_w * (index - 1) / (n - 1) : kLeft + plot_w / 2;
    };
    auto y_of = [&](double c) { return kTop + plot_h * (hi - c) / (hi - lo); };
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", hi);
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.4g", lo);
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + plot_h + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << buf << "</text>\n";
    svg << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const auto& p : points) svg << x_of(p.index) << ',' << y_of(p.mean_cost) << ' ';
    svg << "\"/>\n";
    for (const auto& p : points) {
      svg << "<circle cx=\"" << x_of(p.index) << "\" cy=\"" << y_of(p.mean_cost)
          << "\" r=\"3\" fill=\"steelblue\"/>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace specmer
