#include "spectronet/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "spectronet/errors.hpp"

namespace spectronet::svg {

namespace {

constexpr double kWidth = 820;
constexpr double kHeight = 500;
constexpr double kLeft = 70, kRight = 30, kTop = 40, kBottom = 55;
constexpr const char* kRawBlue = "#1f77b4";
constexpr const char* kCleanOrange = "#ff7f0e";

struct Axis {
    double lo, hi;
    double to_px(double v, double px_lo, double px_hi) const {
        const double f = (v - lo) / (hi - lo);
        return px_lo + f * (px_hi - px_lo);
    }
};

Axis make_axis(double lo, double hi) {
    if (!(hi > lo)) {
        const double pad = std::max(1.0, std::abs(lo)) * 0.5;
        return {lo - pad, hi + pad};
    }
    const double pad = (hi - lo) * 0.05;
    return {lo - pad, hi + pad};
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

void open_doc(std::ofstream& out, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
        << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kWidth / 2 << "\" y=\"24\" font-size=\"16\" "
        << "text-anchor=\"middle\" font-family=\"sans-serif\">" << title
        << "</text>\n";
}

void draw_axes(std::ofstream& out, const Axis& x, const Axis& y,
               const std::string& xlabel, const std::string& ylabel) {
    const double x0 = kLeft, x1 = kWidth - kRight;
    const double y0 = kHeight - kBottom, y1 = kTop;
    out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1
        << "\" y2=\"" << y0 << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0
        << "\" y2=\"" << y1 << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = x.lo + (x.hi - x.lo) * i / 5.0;
        const double px = x.to_px(fx, x0, x1);
        out << "<line x1=\"" << px << "\" y1=\"" << y0 << "\" x2=\"" << px
            << "\" y2=\"" << y0 + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << px << "\" y=\"" << y0 + 20
            << "\" font-size=\"11\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\">" << fmt(fx) << "</text>\n";
        const double fy = y.lo + (y.hi - y.lo) * i / 5.0;
        const double py = y.to_px(fy, y0, y1);
        out << "<line x1=\"" << x0 - 5 << "\" y1=\"" << py << "\" x2=\"" << x0
            << "\" y2=\"" << py << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << x0 - 8 << "\" y=\"" << py + 4
            << "\" font-size=\"11\" text-anchor=\"end\" "
            << "font-family=\"sans-serif\">" << fmt(fy) << "</text>\n";
    }
    out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12
        << "\" font-size=\"13\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\">" << xlabel << "</text>\n"
        << "<text x=\"18\" y=\"" << (y0 + y1) / 2
        << "\" font-size=\"13\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" transform=\"rotate(-90 18 "
        << (y0 + y1) / 2 << ")\">" << ylabel << "</text>\n";
}

void draw_polyline(std::ofstream& out, const Axis& x, const Axis& y,
                   const std::vector<double>& xs,
                   const std::vector<double>& ys, const char* color) {
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out << x.to_px(xs[i], kLeft, kWidth - kRight) << ','
            << y.to_px(ys[i], kHeight - kBottom, kTop) << ' ';
    }
    out << "\"/>\n";
}

void legend_entry(std::ofstream& out, double ypos, const char* color,
                  const std::string& label, bool line) {
    const double x = kWidth - kRight - 180;
    if (line) {
        out << "<line x1=\"" << x << "\" y1=\"" << ypos << "\" x2=\""
            << x + 24 << "\" y2=\"" << ypos << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
    } else {
        out << "<circle cx=\"" << x + 12 << "\" cy=\"" << ypos
            << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
    }
    out << "<text x=\"" << x + 30 << "\" y=\"" << ypos + 4
        << "\" font-size=\"12\" font-family=\"sans-serif\">" << label
        << "</text>\n";
}

} // namespace

void write_overlay(const std::string& path,
                   const std::vector<double>& wavelengths,
                   const std::vector<double>& raw,
                   const std::vector<double>& cleaned,
                   const std::string& title) {
    if (wavelengths.empty() || wavelengths.size() != raw.size() ||
        wavelengths.size() != cleaned.size()) {
        throw UsageError("overlay plot: input length mismatch");
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    Axis x = make_axis(wavelengths.front(), wavelengths.back());
    double lo = raw[0], hi = raw[0];
    for (double v : raw) { lo = std::min(lo, v); hi = std::max(hi, v); }
    for (double v : cleaned) { lo = std::min(lo, v); hi = std::max(hi, v); }
    Axis y = make_axis(lo, hi);

    open_doc(out, title);
    draw_axes(out, x, y, "wavelength [nm]", "intensity");
    draw_polyline(out, x, y, wavelengths, raw, kRawBlue);
    draw_polyline(out, x, y, wavelengths, cleaned, kCleanOrange);
    legend_entry(out, kTop + 14, kRawBlue, "raw", true);
    legend_entry(out, kTop + 32, kCleanOrange, "cleaned", true);
    out << "</svg>\n";
}

void write_scatter(const std::string& path, const std::vector<double>& truth,
                   const std::vector<double>& prediction,
                   const std::string& title, double rmse_value) {
    if (truth.empty() || truth.size() != prediction.size()) {
        throw UsageError("scatter plot: input length mismatch");
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    double lo = truth[0], hi = truth[0];
    for (double v : truth) { lo = std::min(lo, v); hi = std::max(hi, v); }
    for (double v : prediction) { lo = std::min(lo, v); hi = std::max(hi, v); }
    Axis x = make_axis(lo, hi);
    Axis y = x;

    open_doc(out, title);
    draw_axes(out, x, y, "true wt%", "predicted wt%");
    // Ideal 1:1 line across the shared range.
    out << "<line x1=\"" << x.to_px(x.lo, kLeft, kWidth - kRight) << "\" y1=\""
        << y.to_px(x.lo, kHeight - kBottom, kTop) << "\" x2=\""
        << x.to_px(x.hi, kLeft, kWidth - kRight) << "\" y2=\""
        << y.to_px(x.hi, kHeight - kBottom, kTop)
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    for (std::size_t i = 0; i < truth.size(); ++i) {
        out << "<circle cx=\"" << x.to_px(truth[i], kLeft, kWidth - kRight)
            << "\" cy=\"" << y.to_px(prediction[i], kHeight - kBottom, kTop)
            << "\" r=\"3.5\" fill=\"" << kCleanOrange
            << "\" fill-opacity=\"0.8\"/>\n";
    }
    legend_entry(out, kTop + 14, kCleanOrange, "RMSE = " + fmt(rmse_value),
                 false);
    legend_entry(out, kTop + 32, "black", "1:1", true);
    out << "</svg>\n";
}

} // namespace spectronet::svg
