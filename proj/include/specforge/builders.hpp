#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "specforge/config.hpp"
#include "specforge/response.hpp"

namespace specforge::cli {

struct TwoLevelParams {
    double energy_ev = 2.0;
    double mu = 1.0;
    double gamma_per_fs = 0.0;      // amplitude damping rate
    double dephasing_per_fs = 0.0;  // pure dephasing rate (L = sqrt(g/2) sz)
};

response::QuantumSystem build_two_level(const TwoLevelParams& p);

struct CoupledOscillatorsParams {
    double omega1_ev = 2.0;
    double omega2_ev = 2.0;
    double j_ev = 0.0;
    double mu_a = 1.0;
    double mu_b = 1.0;
    std::size_t n_levels = 2;  // per oscillator
    // thermal baths: downward sqrt(g(nbar+1)) a_i, upward sqrt(g nbar) a_i^dag
    double gamma1_per_fs = 0.0;
    double gamma2_per_fs = 0.0;
    double nbar1 = 0.0;
    double nbar2 = 0.0;
    bool diagonalize = true;
};

response::QuantumSystem build_coupled_oscillators(
    const CoupledOscillatorsParams& p);

struct DickeParams {
    double cavity_ev = 1.0;
    double spin_ev = 1.0;
    double coupling_ev = 0.25;  // g; critical at sqrt(cavity*spin)/2
    std::size_t n_spins = 6;
    std::size_t n_cavity = 6;
    double kappa_per_fs = 0.05;
    double n_th = 0.0;
    double dephasing_per_fs = 0.0;  // L = sqrt(g) Sz
    bool diagonalize = true;
};

// Cavity (x) collective-spin system; the probe couples to the cavity mode,
// so mu_minus is the (transformed) cavity lowering operator and the initial
// state is the steady state of the dissipative model. Emits a truncation
// warning when the steady state holds weight in the top two cavity levels.
response::QuantumSystem build_dicke(const DickeParams& p,
                                    std::ostream* warnings = nullptr);

struct CustomParams {
    std::string h_file;
    std::string lowering_file;           // optional
    std::string dipole_file;             // optional when lowering given
    std::vector<std::string> c_op_files;
    std::string rho_file;                // optional
    double mu_scale = 1.0;
    bool diagonalize = true;
    std::string interaction = "split";   // split | lowering
};

response::QuantumSystem build_custom(const CustomParams& p);

// Dispatch on [system] kind = two_level | coupled_oscillators | dicke | custom.
response::QuantumSystem build_from_config(const IniFile& ini,
                                          std::ostream* warnings = nullptr);

}  // namespace specforge::cli
