#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "srl/errors.hpp"
#include "srl/harness.hpp"
#include "srl/textio.hpp"

namespace srl {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 780.0;
constexpr double kTop = 25.0;
constexpr double kBottom = 450.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Band {
    std::vector<double> mean, lo, hi;
};

// Seed series smoothed, then aggregated per episode index (truncated to the
// shortest seed so every point averages the same seeds).
Band aggregate_run(const std::map<std::uint64_t, std::vector<double>>& by_seed, int window) {
    std::size_t length = std::numeric_limits<std::size_t>::max();
    std::vector<std::vector<double>> smoothed;
    for (const auto& [seed, series] : by_seed) {
        smoothed.push_back(moving_average(series, window));
        length = std::min(length, smoothed.back().size());
    }
    Band band;
    for (std::size_t i = 0; i < length; ++i) {
        double lo = smoothed.front()[i], hi = lo, sum = 0.0;
        for (const auto& s : smoothed) {
            lo = std::min(lo, s[i]);
            hi = std::max(hi, s[i]);
            sum += s[i];
        }
        band.mean.push_back(sum / static_cast<double>(smoothed.size()));
        band.lo.push_back(lo);
        band.hi.push_back(hi);
    }
    return band;
}

std::string xy(double x, double y) { return format_fixed(x, 2) + "," + format_fixed(y, 2); }

// Largest of 1/2/5 * 10^k not above the raw step.
double nice_step(double range, int ticks) {
    const double raw = range / ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {5.0, 2.0, 1.0}) {
        if (m * mag <= raw) return m * mag;
    }
    return mag;
}

std::string tick_label(double v) {
    // Snap tiny float residue from tick arithmetic before printing.
    const double snapped = std::abs(v) < 1e-12 ? 0.0 : v;
    return format_double(std::round(snapped * 1e6) / 1e6);
}

}  // namespace

std::string render_plot_svg(const std::vector<MetricsRow>& rows, int window) {
    if (rows.empty()) throw ContractError("render_plot_svg: no metrics rows");

    // run_id -> seed -> returns by episode order
    std::map<std::string, std::map<std::uint64_t, std::vector<double>>> runs;
    for (const MetricsRow& r : rows) runs[r.run_id][r.seed].push_back(r.return_total);

    std::map<std::string, Band> bands;
    std::size_t max_len = 0;
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& [run_id, by_seed] : runs) {
        Band band = aggregate_run(by_seed, window);
        if (band.mean.empty()) throw ContractError("render_plot_svg: empty series for " + run_id);
        max_len = std::max(max_len, band.mean.size());
        for (std::size_t i = 0; i < band.mean.size(); ++i) {
            if (first) {
                lo = band.lo[i];
                hi = band.hi[i];
                first = false;
            }
            lo = std::min(lo, band.lo[i]);
            hi = std::max(hi, band.hi[i]);
        }
        bands.emplace(run_id, std::move(band));
    }
    if (hi - lo < 1e-12) {
        lo -= 1.0;
        hi += 1.0;
    } else {
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }

    const double x_span = max_len > 1 ? static_cast<double>(max_len - 1) : 1.0;
    auto px = [&](double episode) { return kLeft + (episode / x_span) * (kRight - kLeft); };
    auto py = [&](double value) { return kBottom - (value - lo) / (hi - lo) * (kBottom - kTop); };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 " +
           format_double(kWidth) + " " + format_double(kHeight) + "\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + format_double(kWidth) + "\" height=\"" +
           format_double(kHeight) + "\" fill=\"white\"/>\n";

    // axes and ticks
    svg += "<line x1=\"" + format_fixed(kLeft, 2) + "\" y1=\"" + format_fixed(kBottom, 2) +
           "\" x2=\"" + format_fixed(kRight, 2) + "\" y2=\"" + format_fixed(kBottom, 2) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + format_fixed(kLeft, 2) + "\" y1=\"" + format_fixed(kTop, 2) +
           "\" x2=\"" + format_fixed(kLeft, 2) + "\" y2=\"" + format_fixed(kBottom, 2) +
           "\" stroke=\"black\"/>\n";

    const double x_step = nice_step(x_span, 5);
    for (double t = 0.0; t <= x_span + 1e-9; t += x_step) {
        const double x = px(t);
        svg += "<line x1=\"" + format_fixed(x, 2) + "\" y1=\"" + format_fixed(kBottom, 2) +
               "\" x2=\"" + format_fixed(x, 2) + "\" y2=\"" + format_fixed(kBottom + 5, 2) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + format_fixed(x, 2) + "\" y=\"" + format_fixed(kBottom + 20, 2) +
               "\" font-size=\"12\" text-anchor=\"middle\">" + tick_label(t) + "</text>\n";
    }
    const double y_step = nice_step(hi - lo, 5);
    const double y_first = std::ceil(lo / y_step) * y_step;
    for (double v = y_first; v <= hi + 1e-9 * std::max(1.0, std::abs(hi)); v += y_step) {
        const double y = py(v);
        svg += "<line x1=\"" + format_fixed(kLeft - 5, 2) + "\" y1=\"" + format_fixed(y, 2) +
               "\" x2=\"" + format_fixed(kLeft, 2) + "\" y2=\"" + format_fixed(y, 2) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + format_fixed(kLeft - 8, 2) + "\" y=\"" + format_fixed(y + 4, 2) +
               "\" font-size=\"12\" text-anchor=\"end\">" + tick_label(v) + "</text>\n";
    }
    svg += "<text x=\"" + format_fixed((kLeft + kRight) / 2, 2) + "\" y=\"" +
           format_fixed(kHeight - 10, 2) +
           "\" font-size=\"14\" text-anchor=\"middle\">episode</text>\n";
    svg += "<text x=\"18\" y=\"" + format_fixed((kTop + kBottom) / 2, 2) +
           "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
           format_fixed((kTop + kBottom) / 2, 2) + ")\">return</text>\n";

    // bands and mean curves, legend entries in run_id order
    int color = 0;
    for (const auto& [run_id, band] : bands) {
        const char* stroke = kPalette[color % 6];
        if (band.mean.size() > 1) {
            bool flat = true;
            for (std::size_t i = 0; i < band.mean.size(); ++i) {
                flat = flat && band.lo[i] == band.hi[i];
            }
            if (!flat) {
                std::string pts;
                for (std::size_t i = 0; i < band.mean.size(); ++i) {
                    pts += xy(px(static_cast<double>(i)), py(band.hi[i])) + " ";
                }
                for (std::size_t i = band.mean.size(); i-- > 0;) {
                    pts += xy(px(static_cast<double>(i)), py(band.lo[i]));
                    if (i > 0) pts += " ";
                }
                svg += "<polygon points=\"" + pts + "\" fill=\"" + stroke +
                       "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
            }
            std::string pts;
            for (std::size_t i = 0; i < band.mean.size(); ++i) {
                if (i > 0) pts += " ";
                pts += xy(px(static_cast<double>(i)), py(band.mean[i]));
            }
            svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + stroke +
                   "\" stroke-width=\"1.5\"/>\n";
        } else {
            svg += "<circle cx=\"" + format_fixed(px(0.0), 2) + "\" cy=\"" +
                   format_fixed(py(band.mean[0]), 2) + "\" r=\"3\" fill=\"" + stroke + "\"/>\n";
        }
        const double ly = kTop + 18.0 * color;
        svg += "<line x1=\"" + format_fixed(kRight - 170, 2) + "\" y1=\"" + format_fixed(ly, 2) +
               "\" x2=\"" + format_fixed(kRight - 140, 2) + "\" y2=\"" + format_fixed(ly, 2) +
               "\" stroke=\"" + stroke + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + format_fixed(kRight - 134, 2) + "\" y=\"" + format_fixed(ly + 4, 2) +
               "\" font-size=\"12\">" + run_id + "</text>\n";
        ++color;
    }
    svg += "</svg>\n";
    return svg;
}

void emit_plot(const std::vector<std::filesystem::path>& inputs, int window,
               const std::filesystem::path& output) {
    if (inputs.empty()) throw ContractError("emit_plot: no input files");
    std::vector<MetricsRow> rows;
    for (const auto& path : inputs) {
        std::vector<MetricsRow> file_rows = read_metrics_csv(path);
        rows.insert(rows.end(), file_rows.begin(), file_rows.end());
    }
    const std::string svg = render_plot_svg(rows, window);
    std::ofstream file(output, std::ios::binary);
    if (!file) throw IoError("cannot write plot file " + output.string());
    file << svg;
}

}  // namespace srl
