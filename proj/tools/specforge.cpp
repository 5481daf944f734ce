#include <CLI11.hpp>
#include <iostream>

#include "specforge/builders.hpp"
#include "specforge/errors.hpp"
#include "specforge/kernels.hpp"
#include "specforge/pipeline.hpp"
#include "specforge/render.hpp"
#include "specforge/spectra.hpp"

namespace {

using namespace specforge;

int dispatch(int argc, char** argv) {
    CLI::App app{"specforge: nonlinear optical response of Lindblad-evolved "
                 "model systems via double-sided diagrams"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run a config-driven pipeline");
    std::string run_cfg;
    std::size_t jobs = 0;
    run->add_option("config", run_cfg, "config file")->required();
    run->add_option("--jobs", jobs,
                    "worker count for scans (default: SPECFORGE_JOBS or all "
                    "cores)");

    // diagrams
    auto* diag = app.add_subcommand("diagrams",
                                    "enumerate diagrams for a phase spec");
    std::string phase_text, times_text, format = "dsl";
    std::size_t manifold = 1;
    diag->add_option("--phase", phase_text,
                     "per-pulse (n_minus,n_plus) pairs, e.g. "
                     "\"(1,0),(0,1),(0,1)\"")
        ->required();
    diag->add_option("--times", times_text,
                     "pulse arrival times in fs, optionally plus a detection "
                     "time, e.g. \"0,100,200,200\"")
        ->required();
    diag->add_option("--manifold", manifold, "max excitation manifold");
    diag->add_option("--format", format, "dsl | ascii")
        ->check(CLI::IsMember({"dsl", "ascii"}));

    // linear
    auto* lin = app.add_subcommand("linear", "linear response from a config");
    std::string lin_cfg;
    lin->add_option("config", lin_cfg, "config file")->required();

    // spectra
    auto* spec = app.add_subcommand("spectra", "re-transform a saved grid");
    std::string grid_dir, spec_out, part_name = "complex";
    std::size_t zero_pad = 1;
    spec->add_option("grid", grid_dir, "response grid directory")->required();
    spec->add_option("--out", spec_out, "output spectrum directory");
    spec->add_option("--part", part_name, "real | imag | complex");
    spec->add_option("--pad", zero_pad, "zero-padding factor");

    // render
    auto* rend = app.add_subcommand("render", "render a spectrum heatmap");
    std::string spec_dir, image_out;
    cli::RenderOptions ropts;
    rend->add_option("spectrum", spec_dir, "spectrum directory")->required();
    rend->add_option("--out", image_out, "output image (PPM)");
    rend->add_option("--scale", ropts.scale, "linear | log")
        ->check(CLI::IsMember({"linear", "log"}));
    rend->add_option("--component", ropts.component, "abs | real | imag")
        ->check(CLI::IsMember({"abs", "real", "imag"}));
    rend->add_option("--quadrant", ropts.quadrant,
                     "all | 1 | 2 | 3 | 4 | rephasing | nonrephasing");
    rend->add_flag("--invert-y", ropts.invert_y, "negate the f2 axis");
    rend->add_flag("--center-zero", ropts.center_zero,
                   "symmetric color range about zero");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        cli::run_pipeline(run_cfg, jobs, std::cerr);
        return 0;
    }
    if (diag->parsed()) {
        const auto phase = cli::parse_phase_spec(phase_text);
        const auto times = cli::parse_double_list(times_text, "--times");
        const auto list = diagrams::generate(phase, times, manifold);
        for (const auto& d : list) {
            if (format == "ascii")
                std::cout << diagrams::to_dsl(d) << "\n"
                          << diagrams::render_ascii(d) << "\n";
            else
                std::cout << diagrams::to_dsl(d) << "\n";
        }
        return 0;
    }
    if (lin->parsed()) {
        cli::IniFile ini = cli::IniFile::parse_file(lin_cfg);
        ini.set("scan", "mode", "linear");
        cli::run_pipeline(ini, jobs, std::cerr);
        return 0;
    }
    if (spec->parsed()) {
        const auto grid = response::load_grid(grid_dir);
        const auto s = spectra::transform2d(grid, spectra::parse_part(part_name),
                                            zero_pad);
        if (spec_out.empty()) spec_out = grid_dir + "_spectrum";
        spectra::save_spectrum(spec_out, s);
        std::cout << spec_out << "\n";
        return 0;
    }
    if (rend->parsed()) {
        const auto s = spectra::load_spectrum(spec_dir);
        if (image_out.empty()) image_out = spec_dir + "/heatmap.ppm";
        cli::render_heatmap(s, image_out, ropts);
        std::cout << image_out << "\n";
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const DivergenceError& e) {
        std::cerr << "divergence error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
