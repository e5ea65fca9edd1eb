// Copyright 2026 The lindmag Authors
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

#pragma once

#include <string>
#include <vector>

namespace lindmag::plot {

struct LineSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // optional half-width band, same length as y
  bool dashed = false;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<LineSeries> series;
};

struct Bar {
  std::string label;
  double value = 0.0;
  double err = 0.0;
};

struct BarChart {
  std::string title;
  std::string y_label;
  bool log_y = false;
  std::vector<Bar> bars;
};

std::string render_svg(const LineChart& chart);
std::string render_svg(const BarChart& chart);

// Throws std::runtime_error when the file cannot be written.
void write_svg(const std::string& path, const std::string& svg);

}  // namespace lindmag::plot
