#include "specforge/pipeline.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "specforge/builders.hpp"
#include "specforge/errors.hpp"
#include "specforge/render.hpp"
#include "specforge/spectra.hpp"

namespace specforge::cli {

namespace fs = std::filesystem;

namespace {

std::string two_digits(std::size_t n) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02zu", n);
    return buf;
}

std::vector<std::pair<std::size_t, std::size_t>> parse_elements(
    const std::string& text) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos)
            throw ConfigError("trajectory_elements: expected i:j pairs");
        out.emplace_back(std::stoul(tok.substr(0, colon)),
                         std::stoul(tok.substr(colon + 1)));
    }
    return out;
}

response::RunOptions run_options(const IniFile& ini, std::size_t jobs) {
    response::RunOptions opts;
    opts.jobs = jobs;
    opts.parallel = jobs > 1;
    const std::string det = ini.get_or("detection", "operator", "mu_minus");
    if (det == "mu_minus")
        opts.detect = response::DetectionOperator::mu_minus;
    else if (det == "mu")
        opts.detect = response::DetectionOperator::mu_full;
    else
        throw ConfigError("[detection] operator must be mu_minus or mu");
    const std::string pl = ini.get_or("detection", "population_index", "auto");
    if (pl != "auto") opts.pl_element = std::stoul(pl);
    return opts;
}

struct ScanStage {
    const IniFile& ini;
    const response::QuantumSystem& sys;
    response::RunOptions opts;
    spectra::Part part;
    std::size_t zero_pad;
    std::size_t r;
    bool image;
    RenderOptions render_opts;
    std::vector<std::string>* outputs;
    std::ostream* log;

    void save_rendered(const spectra::Spectrum2D& s, const std::string& stem) {
        spectra::save_spectrum(stem, s);
        outputs->push_back(stem);
        if (image) {
            render_heatmap(s, stem + ".ppm", render_opts);
            outputs->push_back(stem + ".ppm");
        }
    }

    // Runs one diagram group at fixed delays; writes grids, per-diagram
    // spectra, the sum and its quadrant view.
    void run_group(const DiagramGroup& group, const std::vector<double>& delays,
                   const std::pair<std::size_t, std::size_t>& scan,
                   const std::string& dir) {
        std::vector<spectra::Spectrum2D> specs;
        for (std::size_t n = 0; n < group.diagrams.size(); ++n) {
            const auto& d = group.diagrams[n];
            *log << "  diagram " << diagrams::to_dsl(d) << "\n";
            response::ResponseGrid grid =
                response::coherence2d(sys, delays, d, scan, r, opts);
            const std::string gdir = dir + "/diagram_" + two_digits(n);
            response::save_grid(gdir, grid);
            outputs->push_back(gdir);
            specs.push_back(spectra::transform2d(grid, part, zero_pad));
            spectra::save_spectrum(dir + "/spectrum_" + two_digits(n),
                                   specs.back());
            outputs->push_back(dir + "/spectrum_" + two_digits(n));
        }
        if (ini.get_bool("output", "sum_diagrams", true) && !specs.empty()) {
            spectra::Spectrum2D sum = spectra::combine(specs);
            save_rendered(sum, dir + "/spectrum_sum");
            if (group.quadrant == "rephasing" ||
                group.quadrant == "nonrephasing") {
                const auto kind = group.quadrant == "rephasing"
                                      ? spectra::QuadrantKind::rephasing
                                      : spectra::QuadrantKind::nonrephasing;
                save_rendered(spectra::select_quadrant(sum, kind),
                              dir + "/spectrum_sum_" + group.quadrant);
            }
        }
    }
};

}  // namespace

std::vector<DiagramGroup> resolve_diagram_groups(const IniFile& ini) {
    std::vector<DiagramGroup> groups;
    for (const std::string& section : ini.section_names()) {
        if (section != "diagrams" && section.rfind("diagrams ", 0) != 0) continue;
        DiagramGroup g;
        g.name = section == "diagrams" ? "main" : section.substr(9);
        if (auto dsl = ini.get(section, "dsl")) {
            std::istringstream in(*dsl);
            std::string item;
            while (std::getline(in, item, ';')) {
                const auto a = item.find_first_not_of(" \t");
                if (a == std::string::npos) continue;
                g.diagrams.push_back(diagrams::parse(item));
            }
        } else {
            const auto phase = parse_phase_spec(ini.require(section, "phase"));
            const auto times = parse_double_list(ini.require(section, "times_fs"),
                                                 "[" + section + "] times_fs");
            const std::size_t manifold = ini.get_size(section, "manifold", 1);
            g.diagrams = diagrams::generate(phase, times, manifold);
        }
        g.quadrant = ini.get_or(section, "quadrant", "none");
        if (g.quadrant != "none" && g.quadrant != "rephasing" &&
            g.quadrant != "nonrephasing")
            throw ConfigError("[" + section + "] quadrant must be none, "
                              "rephasing or nonrephasing");
        if (g.diagrams.empty())
            throw ConfigError("[" + section + "] resolved to no diagrams");
        groups.push_back(std::move(g));
    }
    return groups;
}

std::vector<std::string> run_pipeline(const std::string& config_path,
                                      std::size_t jobs, std::ostream& log) {
    return run_pipeline(IniFile::parse_file(config_path), jobs, log);
}

std::vector<std::string> run_pipeline(const IniFile& ini, std::size_t jobs,
                                      std::ostream& log) {
    const std::string out_dir = ini.require("output", "directory");

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " +
                          ec.message());
    {
        std::ofstream echo(out_dir + "/config_used.cfg");
        if (!echo) throw IoError("cannot write config echo in " + out_dir);
        echo << ini.normalized();
    }

    std::vector<std::string> outputs{out_dir + "/config_used.cfg"};

    if (jobs == 0) {
        if (const char* env = std::getenv("SPECFORGE_JOBS"))
            jobs = static_cast<std::size_t>(std::stoul(env));
    }
    if (jobs == 0) {
        const unsigned hc = std::thread::hardware_concurrency();
        jobs = hc > 0 ? hc : 1;
    }

    log << "building system (" << ini.require("system", "kind") << ")\n";
    const response::QuantumSystem sys = build_from_config(ini, &log);
    log << "dimension " << sys.dim() << ", jobs " << jobs << "\n";

    const std::string mode = ini.get_or("scan", "mode", "coherence2d");
    const std::size_t r = ini.get_size("scan", "r_per_fs", 10);

    ScanStage stage{ini,
                    sys,
                    run_options(ini, jobs),
                    spectra::parse_part(ini.get_or("detection", "part", "complex")),
                    ini.get_size("detection", "zero_pad", 1),
                    r,
                    ini.get_bool("output", "image", false),
                    RenderOptions{},
                    &outputs,
                    &log};
    stage.render_opts.scale = ini.get_or("output", "image_scale", "linear");
    stage.render_opts.component = ini.get_or("output", "image_component", "abs");

    if (mode == "coherence2d" || mode == "pop_study") {
        const auto groups = resolve_diagram_groups(ini);
        if (groups.empty())
            throw ConfigError("no [diagrams] section for scan mode " + mode);
        const auto delays = ini.get_double_list("scan", "delays_fs");
        const auto scan_list = ini.get_size_list("scan", "scan_id");
        if (scan_list.size() != 2)
            throw ConfigError("[scan] scan_id needs exactly two indices");
        const std::pair<std::size_t, std::size_t> scan{scan_list[0], scan_list[1]};

        if (mode == "coherence2d") {
            for (const auto& g : groups) {
                log << "group " << g.name << " (" << g.diagrams.size()
                    << " diagrams)\n";
                stage.run_group(g, delays, scan, out_dir + "/" + g.name);
            }
        } else {
            const auto pop_times = ini.get_double_list("scan", "pop_times_fs");
            const std::size_t pop_index = ini.get_size("scan", "pop_index", 1);
            if (pop_index >= delays.size() || pop_index == scan.first ||
                pop_index == scan.second)
                throw ConfigError("[scan] pop_index must name a fixed delay");
            for (const auto& g : groups)
                for (std::size_t k = 0; k < pop_times.size(); ++k) {
                    auto d = delays;
                    d[pop_index] = pop_times[k];
                    log << "group " << g.name << ", population time "
                        << pop_times[k] << " fs\n";
                    stage.run_group(g, d, scan,
                                    out_dir + "/" + g.name + "/pop_" +
                                        two_digits(k));
                }
        }
    } else if (mode == "linear") {
        const double scan_time = ini.require_double("scan", "scan_time_fs");
        std::optional<diagrams::Diagram> diagram;
        if (auto dsl = ini.get("scan", "diagram"))
            diagram = diagrams::parse(*dsl);
        const auto lr = response::linear_response(sys, scan_time, diagram, r);
        const auto spec = spectra::transform1d(lr.mu_series, r,
                                               stage.zero_pad);
        fs::create_directories(out_dir + "/linear");
        {
            std::ofstream out(out_dir + "/linear/series.csv");
            if (!out) throw IoError("cannot write linear series");
            out.precision(17);
            out << "t_fs,re,im\n";
            for (std::size_t i = 0; i < lr.times_fs.size(); ++i)
                out << lr.times_fs[i] << ',' << lr.mu_series[i].real() << ','
                    << lr.mu_series[i].imag() << '\n';
        }
        {
            std::ofstream out(out_dir + "/linear/spectrum.csv");
            if (!out) throw IoError("cannot write linear spectrum");
            out.precision(17);
            out << "f_ev,re,im\n";
            for (std::size_t i = 0; i < spec.f_ev.size(); ++i)
                out << spec.f_ev[i] << ',' << spec.values[i].real() << ','
                    << spec.values[i].imag() << '\n';
        }
        outputs.push_back(out_dir + "/linear/series.csv");
        outputs.push_back(out_dir + "/linear/spectrum.csv");
    } else if (mode == "donkey") {
        const auto groups = resolve_diagram_groups(ini);
        if (groups.empty())
            throw ConfigError("no [diagrams] section for scan mode donkey");
        const auto times = ini.get_double_list("scan", "interaction_times_fs");
        std::vector<std::pair<std::size_t, std::size_t>> elements;
        if (auto e = ini.get("output", "trajectory_elements"))
            elements = parse_elements(*e);
        else
            for (std::size_t i = 0; i < sys.dim(); ++i) elements.emplace_back(i, i);
        fs::create_directories(out_dir + "/donkey");
        for (const auto& g : groups) {
            const auto results = response::diagram_donkey(sys, times, g.diagrams, r);
            for (std::size_t n = 0; n < results.size(); ++n) {
                const std::string path = out_dir + "/donkey/" + g.name + "_" +
                                         two_digits(n) + ".csv";
                dynamics::write_trajectory_csv(path, results[n].times_fs,
                                               results[n].states, elements);
                outputs.push_back(path);
            }
        }
    } else {
        throw ConfigError("unknown scan mode: " + mode);
    }

    log << "wrote " << outputs.size() << " outputs under " << out_dir << "\n";
    return outputs;
}

}  // namespace specforge::cli
