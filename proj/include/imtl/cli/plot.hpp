#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "imtl/harness/metrics.hpp"

namespace imtl::cli {

/// One chart: columns of one CSV against an x column.
///
/// Spec files hold one [plot] section per chart:
///   input  = curves.csv         (relative to the spec file)
///   output = overall.svg
///   x      = epoch
///   series = lp_mean, rand_mean (default: every column except x)
///   title  = optional
/// A series named "foo_mean" gets a mean ± std band when "foo_std" exists.
struct PlotSpec {
    std::filesystem::path input;
    std::filesystem::path output;
    std::string x = "epoch";
    std::vector<std::string> series;
    std::string title;
};

std::vector<PlotSpec> read_plot_spec(const std::filesystem::path& path);

struct RenderedSeries {
    std::string name;
    bool band = false;
};

/// SVG text for `spec` over `table`; `rendered` lists what was drawn.
std::string render_svg(const harness::CsvTable& table, const PlotSpec& spec,
                       std::vector<RenderedSeries>* rendered = nullptr);

void write_plot(const PlotSpec& spec);

}  // namespace imtl::cli
