#include "specforge/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>

#include "specforge/errors.hpp"

namespace specforge::cli {

namespace {

struct Rgb {
    std::uint8_t r, g, b;
};

// viridis anchors, interpolated
Rgb colormap(double t) {
    static const double stops[9][3] = {
        {0.267, 0.005, 0.329}, {0.283, 0.141, 0.458}, {0.254, 0.265, 0.530},
        {0.207, 0.372, 0.553}, {0.164, 0.471, 0.558}, {0.128, 0.567, 0.551},
        {0.135, 0.659, 0.518}, {0.478, 0.821, 0.318}, {0.993, 0.906, 0.144}};
    t = std::clamp(t, 0.0, 1.0);
    const double x = t * 8.0;
    const int i = std::min(7, static_cast<int>(x));
    const double f = x - i;
    Rgb out;
    out.r = static_cast<std::uint8_t>(
        255.0 * (stops[i][0] + f * (stops[i + 1][0] - stops[i][0])));
    out.g = static_cast<std::uint8_t>(
        255.0 * (stops[i][1] + f * (stops[i + 1][1] - stops[i][1])));
    out.b = static_cast<std::uint8_t>(
        255.0 * (stops[i][2] + f * (stops[i + 1][2] - stops[i][2])));
    return out;
}

// 5x7 glyphs for tick labels, column-major bits
const std::uint8_t* glyph(char c) {
    static const std::uint8_t digits[][5] = {
        {0x3E, 0x51, 0x49, 0x45, 0x3E},  // 0
        {0x00, 0x42, 0x7F, 0x40, 0x00},  // 1
        {0x42, 0x61, 0x51, 0x49, 0x46},  // 2
        {0x21, 0x41, 0x45, 0x4B, 0x31},  // 3
        {0x18, 0x14, 0x12, 0x7F, 0x10},  // 4
        {0x27, 0x45, 0x45, 0x45, 0x39},  // 5
        {0x3C, 0x4A, 0x49, 0x49, 0x30},  // 6
        {0x01, 0x71, 0x09, 0x05, 0x03},  // 7
        {0x36, 0x49, 0x49, 0x49, 0x36},  // 8
        {0x06, 0x49, 0x49, 0x29, 0x1E},  // 9
    };
    static const std::uint8_t minus[5] = {0x08, 0x08, 0x08, 0x08, 0x08};
    static const std::uint8_t dot[5] = {0x00, 0x60, 0x60, 0x00, 0x00};
    static const std::uint8_t ee[5] = {0x3C, 0x52, 0x52, 0x52, 0x0C};
    static const std::uint8_t vee[5] = {0x1F, 0x20, 0x40, 0x20, 0x1F};
    static const std::uint8_t blank[5] = {0, 0, 0, 0, 0};
    if (c >= '0' && c <= '9') return digits[c - '0'];
    if (c == '-') return minus;
    if (c == '.') return dot;
    if (c == 'e') return ee;
    if (c == 'V') return vee;
    return blank;
}

struct Canvas {
    std::size_t w = 0, h = 0;
    std::vector<Rgb> px;

    Canvas(std::size_t width, std::size_t height)
        : w(width), h(height), px(width * height, Rgb{255, 255, 255}) {}

    void set(std::size_t x, std::size_t y, Rgb c) {
        if (x < w && y < h) px[y * w + x] = c;
    }

    void text(std::size_t x, std::size_t y, const std::string& s, Rgb c) {
        for (char ch : s) {
            const std::uint8_t* g = glyph(ch);
            for (int col = 0; col < 5; ++col)
                for (int row = 0; row < 7; ++row)
                    if (g[col] & (1 << row)) set(x + col, y + row, c);
            x += 6;
        }
    }
};

std::string format_ev(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf) + " eV";
}

}  // namespace

void render_heatmap(const spectra::Spectrum2D& spectrum,
                    const std::string& path, const RenderOptions& opts) {
    spectra::Spectrum2D view = spectrum;
    if (opts.quadrant == "rephasing")
        view = spectra::select_quadrant(spectrum, spectra::QuadrantKind::rephasing);
    else if (opts.quadrant == "nonrephasing")
        view = spectra::select_quadrant(spectrum,
                                        spectra::QuadrantKind::nonrephasing);
    else if (opts.quadrant != "all")
        view = spectra::quadrant(spectrum, std::stoi(opts.quadrant));

    if (opts.invert_y) {
        std::vector<double> f2(view.f2_ev.size());
        std::vector<algebra::cplx> vals(view.values.size());
        const std::size_t n2 = view.f2_ev.size();
        for (std::size_t j = 0; j < n2; ++j) f2[j] = -view.f2_ev[n2 - 1 - j];
        for (std::size_t i = 0; i < view.f1_ev.size(); ++i)
            for (std::size_t j = 0; j < n2; ++j)
                vals[i * n2 + j] = view.at(i, n2 - 1 - j);
        view.f2_ev = std::move(f2);
        view.values = std::move(vals);
    }

    const std::size_t n1 = view.f1_ev.size(), n2 = view.f2_ev.size();
    if (n1 == 0 || n2 == 0) throw ValidationError("render: empty spectrum");

    auto component = [&](const algebra::cplx& v) {
        if (opts.component == "real") return v.real();
        if (opts.component == "imag") return v.imag();
        return std::abs(v);
    };

    double vmin = 0, vmax = 0;
    bool any_finite = false;
    for (const auto& v : view.values) {
        const double x = component(v);
        if (!std::isfinite(x)) continue;
        if (!any_finite) {
            vmin = vmax = x;
            any_finite = true;
        } else {
            vmin = std::min(vmin, x);
            vmax = std::max(vmax, x);
        }
    }
    if (!any_finite) throw ValidationError("render: data contains no finite values");
    if (opts.center_zero) {
        const double m = std::max(std::abs(vmin), std::abs(vmax));
        vmin = -m;
        vmax = m;
    }

    const bool log_scale = opts.scale == "log";
    const double log_floor = 1e-6;  // six decades below the max
    double log_max = 0, log_min = 0;
    if (log_scale) {
        double amax = 0;
        for (const auto& v : view.values)
            amax = std::max(amax, std::abs(component(v)));
        if (amax <= 0) amax = 1.0;
        log_max = std::log10(amax);
        log_min = log_max + std::log10(log_floor);
    }

    auto normalize = [&](const algebra::cplx& v) {
        const double x = component(v);
        if (!std::isfinite(x)) return 0.0;
        if (log_scale) {
            const double l = std::log10(std::max(std::abs(x), 1e-300));
            return std::clamp((l - log_min) / (log_max - log_min), 0.0, 1.0);
        }
        if (vmax == vmin) return 0.5;
        return std::clamp((x - vmin) / (vmax - vmin), 0.0, 1.0);
    };

    const std::size_t stride1 = std::max<std::size_t>(1, n1 / opts.max_pixels);
    const std::size_t stride2 = std::max<std::size_t>(1, n2 / opts.max_pixels);
    const std::size_t pw = (n1 + stride1 - 1) / stride1;
    const std::size_t ph = (n2 + stride2 - 1) / stride2;

    const std::size_t ml = 70, mb = 26, mt = 8, mr = 8;  // margins
    Canvas canvas(pw + ml + mr, ph + mt + mb);

    const double f1_lo = view.f1_ev.front(), f1_hi = view.f1_ev.back();
    const double f2_lo = view.f2_ev.front(), f2_hi = view.f2_ev.back();
    const Rgb line{230, 60, 60};

    for (std::size_t px = 0; px < pw; ++px) {
        const std::size_t i = std::min(n1 - 1, px * stride1);
        for (std::size_t py = 0; py < ph; ++py) {
            const std::size_t j = std::min(n2 - 1, py * stride2);
            // y axis points up: row 0 of the canvas is the top (largest f2)
            const std::size_t jj = n2 - 1 - j;
            Rgb c = colormap(normalize(view.at(i, jj)));
            const double f1 = view.f1_ev[i];
            const double f2 = view.f2_ev[jj];
            const double bin1 = (f1_hi - f1_lo) / std::max<std::size_t>(1, n1 - 1);
            const double bin2 = (f2_hi - f2_lo) / std::max<std::size_t>(1, n2 - 1);
            const double binw = std::max(bin1, bin2) * std::max(stride1, stride2);
            if (opts.diagonal_line && std::abs(f1 - f2) < 0.5 * binw) c = line;
            if (opts.antidiagonal_line &&
                std::abs((f1 + f2) - 0.5 * (f1_lo + f1_hi + f2_lo + f2_hi)) <
                    0.5 * binw)
                c = line;
            canvas.set(ml + px, mt + py, c);
        }
    }

    // frame
    const Rgb black{0, 0, 0};
    for (std::size_t px = 0; px < pw; ++px) {
        canvas.set(ml + px, mt, black);
        canvas.set(ml + px, mt + ph - 1, black);
    }
    for (std::size_t py = 0; py < ph; ++py) {
        canvas.set(ml, mt + py, black);
        canvas.set(ml + pw - 1, mt + py, black);
    }
    // tick labels: f1 min/max along the bottom, f2 min/max on the left
    canvas.text(ml, mt + ph + 6, format_ev(f1_lo), black);
    const std::string f1hi = format_ev(f1_hi);
    canvas.text(ml + pw - 6 * f1hi.size(), mt + ph + 6, f1hi, black);
    canvas.text(2, mt, format_ev(f2_hi), black);
    canvas.text(2, mt + ph - 8, format_ev(f2_lo), black);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open image file: " + path);
    out << "P6\n" << canvas.w << ' ' << canvas.h << "\n255\n";
    out.write(reinterpret_cast<const char*>(canvas.px.data()),
              static_cast<std::streamsize>(canvas.px.size() * 3));
    if (!out) throw IoError("image write failed: " + path);
}

}  // namespace specforge::cli
