#include "imtl/cli/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "imtl/cli/config_file.hpp"
#include "imtl/errors.hpp"

namespace imtl::cli {

namespace {

constexpr double kWidth = 800, kHeight = 480;
constexpr double kLeft = 70, kRight = 180, kTop = 40, kBottom = 50;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::vector<PlotSpec> read_plot_spec(const std::filesystem::path& path) {
    const auto base = path.parent_path();
    std::vector<PlotSpec> out;
    // [plot] may repeat, so each section is parsed on its own.
    std::ifstream in(path);
    if (!in) throw IoError("cannot open plot spec '" + path.string() + "'");
    std::string line;
    std::string chunk;
    std::vector<std::string> chunks;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t");
        if (first != std::string::npos && line.compare(first, 6, "[plot]") == 0) {
            if (!chunk.empty()) chunks.push_back(chunk);
            chunk = "[plot]\n";
            continue;
        }
        chunk += line + "\n";
    }
    if (!chunk.empty()) chunks.push_back(chunk);
    for (const auto& text : chunks) {
        const auto chart = parse_config_text(text, path.string());
        if (chart.empty()) continue;
        PlotSpec spec;
        for (const auto& e : chart) {
            if (e.section != "plot") throw ConfigError("plot spec: unknown section '" + e.section + "'");
            if (e.key == "input") spec.input = base / e.value;
            else if (e.key == "output") spec.output = base / e.value;
            else if (e.key == "x") spec.x = e.value;
            else if (e.key == "title") spec.title = e.value;
            else if (e.key == "series") {
                std::string item;
                for (char c : e.value + ",") {
                    if (c == ',') {
                        const auto b = item.find_first_not_of(" \t");
                        if (b != std::string::npos) spec.series.push_back(item.substr(b, item.find_last_not_of(" \t") - b + 1));
                        item.clear();
                    } else {
                        item += c;
                    }
                }
            } else {
                throw ConfigError("plot spec: unknown key '" + e.key + "' (line " + std::to_string(e.line) + ")");
            }
        }
        if (spec.input.empty() || spec.output.empty()) throw ConfigError("plot spec: input and output are required");
        out.push_back(std::move(spec));
    }
    if (out.empty()) throw ConfigError("plot spec '" + path.string() + "' defines no [plot] section");
    return out;
}

std::string render_svg(const harness::CsvTable& table, const PlotSpec& spec, std::vector<RenderedSeries>* rendered) {
    const std::vector<double> xs = table.numeric(spec.x);
    std::vector<std::string> names = spec.series;
    if (names.empty()) {
        for (const auto& h : table.header) {
            if (h != spec.x && !ends_with(h, "_std") && h != "task_name") names.push_back(h);
        }
    }
    struct Line {
        std::string name;
        std::vector<double> y;
        std::vector<double> sd;
    };
    std::vector<Line> lines;
    for (const auto& n : names) {
        std::string col = n;
        if (!table.has_column(col) && table.has_column(n + "_mean")) col = n + "_mean";
        Line l{col, table.numeric(col), {}};
        if (ends_with(col, "_mean")) {
            const std::string sd = col.substr(0, col.size() - 5) + "_std";
            if (table.has_column(sd)) l.sd = table.numeric(sd);
        }
        lines.push_back(std::move(l));
    }

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (double x : xs) {
        if (std::isfinite(x)) xmin = std::min(xmin, x), xmax = std::max(xmax, x);
    }
    for (const auto& l : lines) {
        for (std::size_t i = 0; i < l.y.size(); ++i) {
            const double s = l.sd.empty() ? 0.0 : l.sd[i];
            if (!std::isfinite(l.y[i])) continue;
            ymin = std::min(ymin, l.y[i] - (std::isfinite(s) ? s : 0.0));
            ymax = std::max(ymax, l.y[i] + (std::isfinite(s) ? s : 0.0));
        }
    }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1;
    if (!std::isfinite(ymin)) ymin = 0, ymax = 1;
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return kTop + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
           "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!spec.title.empty()) {
        svg += "<text x=\"" + fmt(kLeft) + "\" y=\"24\" font-size=\"15\">" + escape(spec.title) + "</text>\n";
    }
    svg += "<g stroke=\"#333\" fill=\"none\"><rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" + fmt(pw) +
           "\" height=\"" + fmt(ph) + "\"/></g>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 5.0, yv = ymin + (ymax - ymin) * i / 5.0;
        svg += "<text x=\"" + fmt(sx(xv)) + "\" y=\"" + fmt(kTop + ph + 18) + "\" text-anchor=\"middle\">" +
               label_num(xv) + "</text>\n";
        svg += "<text x=\"" + fmt(kLeft - 6) + "\" y=\"" + fmt(sy(yv) + 4) + "\" text-anchor=\"end\">" +
               label_num(yv) + "</text>\n";
    }
    svg += "<text x=\"" + fmt(kLeft + pw / 2) + "\" y=\"" + fmt(kHeight - 10) + "\" text-anchor=\"middle\">" +
           escape(spec.x) + "</text>\n";

    for (std::size_t k = 0; k < lines.size(); ++k) {
        const Line& l = lines[k];
        const char* color = kPalette[k % std::size(kPalette)];
        if (!l.sd.empty()) {
            std::string pts;
            for (std::size_t i = 0; i < xs.size(); ++i) pts += fmt(sx(xs[i])) + "," + fmt(sy(l.y[i] + l.sd[i])) + " ";
            for (std::size_t i = xs.size(); i-- > 0;) pts += fmt(sx(xs[i])) + "," + fmt(sy(l.y[i] - l.sd[i])) + " ";
            svg += "<polygon class=\"band\" fill=\"" + std::string(color) + "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"" +
                   pts + "\"/>\n";
        }
        std::string pts;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (std::isfinite(xs[i]) && std::isfinite(l.y[i])) pts += fmt(sx(xs[i])) + "," + fmt(sy(l.y[i])) + " ";
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        const double ly = kTop + 14 + 18.0 * static_cast<double>(k);
        svg += "<line x1=\"" + fmt(kWidth - kRight + 12) + "\" y1=\"" + fmt(ly - 4) + "\" x2=\"" + fmt(kWidth - kRight + 32) +
               "\" y2=\"" + fmt(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + fmt(kWidth - kRight + 38) + "\" y=\"" + fmt(ly) + "\">" + escape(l.name) + "</text>\n";
        if (rendered) rendered->push_back({l.name, !l.sd.empty()});
    }
    svg += "</svg>\n";
    return svg;
}

void write_plot(const PlotSpec& spec) {
    const auto table = harness::read_csv(spec.input);
    const std::string svg = render_svg(table, spec);
    std::ofstream out(spec.output, std::ios::binary);
    if (!out) throw IoError("cannot write '" + spec.output.string() + "'");
    out << svg;
    if (!out) throw IoError("error writing '" + spec.output.string() + "'");
}

}  // namespace imtl::cli
