#include "specforge/spectra.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "specforge/errors.hpp"
#include "specforge/fft.hpp"

namespace specforge::spectra {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_uniform(const std::vector<double>& axis, const char* name) {
    if (axis.size() < 2) return;
    const double dt = axis[1] - axis[0];
    for (std::size_t i = 1; i + 1 < axis.size(); ++i)
        if (std::abs((axis[i + 1] - axis[i]) - dt) > 1e-9 * std::max(1.0, dt))
            throw ValidationError(std::string("transform: non-uniform ") + name +
                                  " axis");
}

std::vector<double> centered_axis(std::size_t n, double dt_fs) {
    // energy of shifted bin i: (i - floor(n/2)) * 2*pi*hbar / (n*dt)
    const double df = kTwoPi * dynamics::kHbarEvFs /
                      (static_cast<double>(n) * dt_fs);
    std::vector<double> f(n);
    const auto half = static_cast<long long>(n / 2);
    for (std::size_t i = 0; i < n; ++i)
        f[i] = df * (static_cast<long long>(i) - half);
    return f;
}

// unshifted bin k -> shifted slot: shifted[i] = raw[(i + (n+1)/2) % n]
template <typename T>
std::vector<T> fftshift(const std::vector<T>& raw) {
    const std::size_t n = raw.size();
    const std::size_t offset = (n + 1) / 2;
    std::vector<T> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = raw[(i + offset) % n];
    return out;
}

}  // namespace

Part parse_part(const std::string& name) {
    if (name == "real") return Part::Real;
    if (name == "imag") return Part::Imag;
    if (name == "complex") return Part::Complex;
    throw ConfigError("unknown part selector: " + name +
                      " (want real|imag|complex)");
}

std::string part_name(Part p) {
    switch (p) {
        case Part::Real: return "real";
        case Part::Imag: return "imag";
        case Part::Complex: return "complex";
    }
    return "complex";
}

Spectrum2D transform2d(const response::ResponseGrid& grid, Part part,
                       std::size_t zero_pad) {
    if (zero_pad < 1) throw ValidationError("transform2d: zero_pad must be >= 1");
    check_uniform(grid.axis1_fs, "axis1");
    check_uniform(grid.axis2_fs, "axis2");
    const std::size_t n1 = grid.axis1_fs.size();
    const std::size_t n2 = grid.axis2_fs.size();
    if (n1 == 0 || n2 == 0) throw ValidationError("transform2d: empty grid");
    const double dt = 1.0 / static_cast<double>(grid.r);
    const std::size_t m1 = n1 * zero_pad;
    const std::size_t m2 = n2 * zero_pad;

    std::vector<cplx> work(m1 * m2, cplx(0.0));
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j) {
            const cplx v = grid.at(i, j);
            switch (part) {
                case Part::Real: work[i * m2 + j] = cplx(v.real(), 0.0); break;
                case Part::Imag: work[i * m2 + j] = cplx(v.imag(), 0.0); break;
                case Part::Complex: work[i * m2 + j] = v; break;
            }
        }

    fft::Plan row_plan(m2), col_plan(m1);
    for (std::size_t i = 0; i < m1; ++i) row_plan.forward(work.data() + i * m2);
    std::vector<cplx> col(m1);
    for (std::size_t j = 0; j < m2; ++j) {
        for (std::size_t i = 0; i < m1; ++i) col[i] = work[i * m2 + j];
        col_plan.forward(col.data());
        for (std::size_t i = 0; i < m1; ++i) work[i * m2 + j] = col[i];
    }

    // fftshift both axes
    Spectrum2D s;
    s.part = part;
    s.f1_ev = centered_axis(m1, dt);
    s.f2_ev = centered_axis(m2, dt);
    s.values.assign(m1 * m2, cplx(0.0));
    const std::size_t o1 = (m1 + 1) / 2, o2 = (m2 + 1) / 2;
    for (std::size_t i = 0; i < m1; ++i) {
        const std::size_t si = (i + o1) % m1;
        for (std::size_t j = 0; j < m2; ++j)
            s.values[i * m2 + j] = work[si * m2 + (j + o2) % m2];
    }
    s.extent = {s.f1_ev.front(), s.f1_ev.back(), s.f2_ev.front(), s.f2_ev.back()};

    std::ostringstream src;
    src << "diagram = " << diagrams::to_dsl(grid.diagram) << '\n'
        << "detection = " << grid.detection << '\n'
        << "part = " << part_name(part) << '\n'
        << "axis_map = t1->f1(rows), t2->f2(cols)\n"
        << "normalization = unnormalized-forward\n"
        << "r_per_fs = " << grid.r << '\n'
        << "zero_pad = " << zero_pad << '\n';
    s.source = src.str();
    return s;
}

namespace {

Spectrum2D take_block(const Spectrum2D& s, std::size_t i0, std::size_t i1,
                      std::size_t j0, std::size_t j1) {
    Spectrum2D out;
    out.part = s.part;
    out.source = s.source;
    out.f1_ev.assign(s.f1_ev.begin() + i0, s.f1_ev.begin() + i1);
    out.f2_ev.assign(s.f2_ev.begin() + j0, s.f2_ev.begin() + j1);
    out.values.reserve((i1 - i0) * (j1 - j0));
    for (std::size_t i = i0; i < i1; ++i)
        for (std::size_t j = j0; j < j1; ++j) out.values.push_back(s.at(i, j));
    out.extent = {out.f1_ev.empty() ? 0.0 : out.f1_ev.front(),
                  out.f1_ev.empty() ? 0.0 : out.f1_ev.back(),
                  out.f2_ev.empty() ? 0.0 : out.f2_ev.front(),
                  out.f2_ev.empty() ? 0.0 : out.f2_ev.back()};
    return out;
}

std::size_t first_nonnegative(const std::vector<double>& axis) {
    std::size_t i = 0;
    while (i < axis.size() && axis[i] < 0.0) ++i;
    return i;
}

std::size_t first_positive(const std::vector<double>& axis) {
    std::size_t i = 0;
    while (i < axis.size() && axis[i] <= 0.0) ++i;
    return i;
}

}  // namespace

Spectrum2D select_quadrant(const Spectrum2D& s, QuadrantKind kind) {
    const std::size_t r0 = first_nonnegative(s.f1_ev);
    if (kind == QuadrantKind::nonrephasing) {
        const std::size_t c0 = first_nonnegative(s.f2_ev);
        Spectrum2D out = take_block(s, r0, s.f1_ev.size(), c0, s.f2_ev.size());
        out.source += "quadrant = nonrephasing (f1>=0, f2>=0)\n";
        return out;
    }
    // rephasing: f2 <= 0, then negate and flip so the axis ascends
    const std::size_t c1 = first_positive(s.f2_ev);
    Spectrum2D block = take_block(s, r0, s.f1_ev.size(), 0, c1);
    Spectrum2D out;
    out.part = block.part;
    out.source = s.source + "quadrant = rephasing (f1>=0, f2<=0, f2 negated)\n";
    out.f1_ev = block.f1_ev;
    out.f2_ev.resize(block.f2_ev.size());
    const std::size_t nc = block.f2_ev.size();
    for (std::size_t j = 0; j < nc; ++j)
        out.f2_ev[j] = -block.f2_ev[nc - 1 - j];
    out.values.resize(block.values.size());
    for (std::size_t i = 0; i < block.f1_ev.size(); ++i)
        for (std::size_t j = 0; j < nc; ++j)
            out.values[i * nc + j] = block.at(i, nc - 1 - j);
    out.extent = {out.f1_ev.empty() ? 0.0 : out.f1_ev.front(),
                  out.f1_ev.empty() ? 0.0 : out.f1_ev.back(),
                  out.f2_ev.empty() ? 0.0 : out.f2_ev.front(),
                  out.f2_ev.empty() ? 0.0 : out.f2_ev.back()};
    return out;
}

Spectrum2D quadrant(const Spectrum2D& s, int q) {
    const std::size_t r_split = first_nonnegative(s.f1_ev);
    const std::size_t c_split = first_nonnegative(s.f2_ev);
    switch (q) {
        case 1: return take_block(s, r_split, s.f1_ev.size(), c_split, s.f2_ev.size());
        case 2: return take_block(s, 0, r_split, c_split, s.f2_ev.size());
        case 3: return take_block(s, 0, r_split, 0, c_split);
        case 4: return take_block(s, r_split, s.f1_ev.size(), 0, c_split);
        default: throw ValidationError("quadrant: q must be 1..4");
    }
}

Spectrum1D transform1d(const std::vector<cplx>& series, std::size_t r,
                       std::size_t zero_pad) {
    if (series.empty()) throw ValidationError("transform1d: empty series");
    if (r < 1) throw ValidationError("transform1d: resolution must be >= 1");
    if (zero_pad < 1) throw ValidationError("transform1d: zero_pad must be >= 1");
    const std::size_t m = series.size() * zero_pad;
    std::vector<cplx> work(m, cplx(0.0));
    std::copy(series.begin(), series.end(), work.begin());
    fft::Plan plan(m);
    plan.forward(work.data());
    Spectrum1D out;
    out.values = fftshift(work);
    out.f_ev = centered_axis(m, 1.0 / static_cast<double>(r));
    return out;
}

Spectrum2D combine(const std::vector<Spectrum2D>& spectra,
                   const std::vector<double>& weights) {
    if (spectra.empty()) throw ValidationError("combine: no spectra");
    if (!weights.empty() && weights.size() != spectra.size())
        throw ValidationError("combine: weight count mismatch");
    const Spectrum2D& first = spectra.front();
    Spectrum2D out = first;
    const double w0 = weights.empty() ? 1.0 : weights[0];
    for (auto& v : out.values) v *= w0;
    for (std::size_t n = 1; n < spectra.size(); ++n) {
        const Spectrum2D& s = spectra[n];
        if (s.f1_ev.size() != first.f1_ev.size() ||
            s.f2_ev.size() != first.f2_ev.size())
            throw ValidationError("combine: axis length mismatch");
        for (std::size_t i = 0; i < s.f1_ev.size(); ++i)
            if (std::abs(s.f1_ev[i] - first.f1_ev[i]) > 1e-9)
                throw ValidationError("combine: f1 axis mismatch");
        for (std::size_t j = 0; j < s.f2_ev.size(); ++j)
            if (std::abs(s.f2_ev[j] - first.f2_ev[j]) > 1e-9)
                throw ValidationError("combine: f2 axis mismatch");
        const double w = weights.empty() ? 1.0 : weights[n];
        for (std::size_t k = 0; k < out.values.size(); ++k)
            out.values[k] += w * s.values[k];
    }
    out.source += "combined = " + std::to_string(spectra.size()) + " spectra\n";
    return out;
}

namespace {

void write_axis(const std::string& path, const std::vector<double>& axis) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    out.precision(17);
    for (double v : axis) out << v << '\n';
    if (!out) throw IoError("write failed: " + path);
}

std::vector<double> read_axis(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    return out;
}

}  // namespace

void save_spectrum(const std::string& dir, const Spectrum2D& s) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());

    std::ofstream meta(dir + "/metadata.txt");
    if (!meta) throw IoError("cannot open " + dir + "/metadata.txt");
    meta << "format = specforge-spectrum/1\n";
    meta << "f1_len = " << s.f1_ev.size() << '\n';
    meta << "f2_len = " << s.f2_ev.size() << '\n';
    meta << "units = eV\n";
    meta << s.source;
    meta.close();

    std::ofstream re(dir + "/real.csv"), im(dir + "/imag.csv");
    if (!re || !im) throw IoError("cannot open spectrum csv in " + dir);
    re.precision(17);
    im.precision(17);
    const std::size_t n2 = s.f2_ev.size();
    for (std::size_t i = 0; i < s.f1_ev.size(); ++i) {
        for (std::size_t j = 0; j < n2; ++j) {
            if (j) {
                re << ',';
                im << ',';
            }
            re << s.at(i, j).real();
            im << s.at(i, j).imag();
        }
        re << '\n';
        im << '\n';
    }
    write_axis(dir + "/f1.csv", s.f1_ev);
    write_axis(dir + "/f2.csv", s.f2_ev);
}

Spectrum2D load_spectrum(const std::string& dir) {
    std::ifstream meta(dir + "/metadata.txt");
    if (!meta) throw IoError("cannot open " + dir + "/metadata.txt");
    Spectrum2D s;
    std::string line;
    bool format_ok = false;
    while (std::getline(meta, line)) {
        if (line.rfind("format", 0) == 0) {
            format_ok = line.find("specforge-spectrum/1") != std::string::npos;
            continue;
        }
        if (line.rfind("part = ", 0) == 0) s.part = parse_part(line.substr(7));
        s.source += line + '\n';
    }
    if (!format_ok) throw ParseError(dir + ": not a specforge spectrum directory");
    s.f1_ev = read_axis(dir + "/f1.csv");
    s.f2_ev = read_axis(dir + "/f2.csv");

    std::ifstream re(dir + "/real.csv"), im(dir + "/imag.csv");
    if (!re || !im) throw IoError("cannot open spectrum csv in " + dir);
    s.values.assign(s.f1_ev.size() * s.f2_ev.size(), cplx(0.0));
    std::string lre, lim;
    for (std::size_t i = 0; i < s.f1_ev.size(); ++i) {
        if (!std::getline(re, lre) || !std::getline(im, lim))
            throw ParseError(dir + ": csv shorter than axes");
        std::istringstream sre(lre), sim(lim);
        std::string cre, cim;
        for (std::size_t j = 0; j < s.f2_ev.size(); ++j) {
            if (!std::getline(sre, cre, ',') || !std::getline(sim, cim, ','))
                throw ParseError(dir + ": csv row shorter than f2 axis");
            s.at(i, j) = cplx(std::stod(cre), std::stod(cim));
        }
    }
    s.extent = {s.f1_ev.empty() ? 0.0 : s.f1_ev.front(),
                s.f1_ev.empty() ? 0.0 : s.f1_ev.back(),
                s.f2_ev.empty() ? 0.0 : s.f2_ev.front(),
                s.f2_ev.empty() ? 0.0 : s.f2_ev.back()};
    return s;
}

}  // namespace specforge::spectra
