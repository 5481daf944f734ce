#include "specforge/builders.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "specforge/errors.hpp"

namespace specforge::cli {

using algebra::CMatrix;
using algebra::cplx;
using algebra::Operator;

namespace {

Operator number_op(const Operator& a) {
    return algebra::matmul(algebra::dagger(a), a);
}

// Ground-state projector in an ascending eigenbasis.
algebra::DensityMatrix ground_state(const algebra::SpaceSignature& space) {
    CMatrix rho(space.total_dim());
    rho.at(0, 0) = cplx(1.0);
    return algebra::DensityMatrix::physical(space, std::move(rho));
}

CMatrix exact_diag(const std::vector<double>& eigenvalues) {
    CMatrix h(eigenvalues.size());
    for (std::size_t i = 0; i < eigenvalues.size(); ++i)
        h.at(i, i) = eigenvalues[i];
    return h;
}

struct DiagonalizedSystem {
    algebra::EigenbasisTransform basis;
    Operator h;  // rebuilt exactly diagonal from the eigenvalues
    std::vector<Operator> ops;
};

DiagonalizedSystem to_eigenbasis(const Operator& h,
                                 const std::vector<Operator>& ops) {
    auto [basis, transformed] = algebra::diagonalize(h, ops);
    DiagonalizedSystem out;
    out.h = Operator(h.space, exact_diag(basis.eigenvalues));
    out.basis = std::move(basis);
    out.ops = std::move(transformed);
    return out;
}

}  // namespace

response::QuantumSystem build_two_level(const TwoLevelParams& p) {
    if (p.energy_ev <= 0.0)
        throw ConfigError("two_level: energy must be > 0");
    if (p.gamma_per_fs < 0.0 || p.dephasing_per_fs < 0.0)
        throw ConfigError("two_level: rates must be >= 0");
    const Operator a = algebra::destroy(2);
    const auto& space = a.space;
    CMatrix h(2);
    h.at(1, 1) = p.energy_ev;

    std::vector<Operator> c_ops;
    if (p.gamma_per_fs > 0.0)
        c_ops.push_back(algebra::scale(a, std::sqrt(p.gamma_per_fs)));
    if (p.dephasing_per_fs > 0.0) {
        CMatrix sz(2);
        sz.at(0, 0) = 1.0;
        sz.at(1, 1) = -1.0;
        c_ops.push_back(algebra::scale(Operator(space, std::move(sz)),
                                       std::sqrt(p.dephasing_per_fs / 2.0)));
    }

    const Operator mu_minus = algebra::scale(a, p.mu);
    const Operator mu_plus = algebra::dagger(mu_minus);
    const Operator mu = algebra::add(mu_plus, mu_minus);
    algebra::EigenbasisTransform basis;
    basis.eigenvalues = {0.0, p.energy_ev};
    basis.unitary = algebra::identity_matrix(2);

    dynamics::LindbladModel model(Operator(space, std::move(h)), std::move(c_ops));
    return {std::move(model), mu, mu_plus, mu_minus, ground_state(space), basis};
}

response::QuantumSystem build_coupled_oscillators(
    const CoupledOscillatorsParams& p) {
    if (p.n_levels < 2)
        throw ConfigError("coupled_oscillators: n_levels must be >= 2");
    if (p.gamma1_per_fs < 0 || p.gamma2_per_fs < 0 || p.nbar1 < 0 || p.nbar2 < 0)
        throw ConfigError("coupled_oscillators: rates must be >= 0");
    const Operator ladder = algebra::destroy(p.n_levels);
    const Operator unit = algebra::identity(ladder.space);
    const Operator a = algebra::tensor({ladder, unit});
    const Operator b = algebra::tensor({unit, ladder});
    const auto& space = a.space;

    Operator h = algebra::add(
        algebra::scale(number_op(a), p.omega1_ev),
        algebra::scale(number_op(b), p.omega2_ev));
    const Operator adag_b = algebra::matmul(algebra::dagger(a), b);
    h = algebra::add(h, algebra::scale(
                             algebra::add(adag_b, algebra::dagger(adag_b)),
                             p.j_ev));

    const Operator mu = algebra::add(
        algebra::scale(algebra::add(a, algebra::dagger(a)), p.mu_a),
        algebra::scale(algebra::add(b, algebra::dagger(b)), p.mu_b));

    std::vector<Operator> c_ops;
    const auto add_bath = [&](const Operator& osc, double gamma, double nbar) {
        if (gamma <= 0.0) return;
        c_ops.push_back(algebra::scale(osc, std::sqrt(gamma * (nbar + 1.0))));
        if (nbar > 0.0)
            c_ops.push_back(
                algebra::scale(algebra::dagger(osc), std::sqrt(gamma * nbar)));
    };
    add_bath(a, p.gamma1_per_fs, p.nbar1);
    add_bath(b, p.gamma2_per_fs, p.nbar2);

    if (!p.diagonalize) {
        const Operator mu_minus = algebra::add(algebra::scale(a, p.mu_a),
                                               algebra::scale(b, p.mu_b));
        const Operator mu_plus = algebra::dagger(mu_minus);
        dynamics::LindbladModel model(h, c_ops);
        return {std::move(model), mu, mu_plus, mu_minus, ground_state(space), {}};
    }

    std::vector<Operator> ops;
    ops.push_back(mu);
    for (const auto& c : c_ops) ops.push_back(c);
    DiagonalizedSystem eig = to_eigenbasis(h, ops);
    const Operator mu_t = eig.ops[0];
    std::vector<Operator> c_t(eig.ops.begin() + 1, eig.ops.end());
    auto [mu_plus, mu_minus] = algebra::split_dipole(mu_t, eig.basis);
    dynamics::LindbladModel model(eig.h, std::move(c_t));
    return {std::move(model), mu_t, mu_plus, mu_minus, ground_state(space),
            eig.basis};
}

response::QuantumSystem build_dicke(const DickeParams& p,
                                    std::ostream* warnings) {
    if (p.n_cavity < 2) throw ConfigError("dicke: n_cavity must be >= 2");
    if (p.n_spins < 1) throw ConfigError("dicke: n_spins must be >= 1");
    if (p.kappa_per_fs < 0 || p.n_th < 0 || p.dephasing_per_fs < 0)
        throw ConfigError("dicke: rates must be >= 0");

    const Operator cav = algebra::destroy(p.n_cavity);
    const auto spins = algebra::spin_ops(p.n_spins);
    const Operator unit_cav = algebra::identity(cav.space);
    const Operator unit_spin = algebra::identity(spins.sz.space);

    const Operator a = algebra::tensor({cav, unit_spin});
    const Operator sx = algebra::tensor({unit_cav, spins.sx});
    const Operator sz = algebra::tensor({unit_cav, spins.sz});
    const auto& space = a.space;

    const Operator x_cav = algebra::add(a, algebra::dagger(a));
    Operator h = algebra::add(
        algebra::scale(number_op(a), p.cavity_ev),
        algebra::scale(sz, p.spin_ev));
    h = algebra::add(h, algebra::scale(algebra::matmul(x_cav, sx),
                                       p.coupling_ev));

    std::vector<Operator> c_ops;
    if (p.kappa_per_fs > 0.0) {
        c_ops.push_back(
            algebra::scale(a, std::sqrt(p.kappa_per_fs * (p.n_th + 1.0))));
        if (p.n_th > 0.0)
            c_ops.push_back(algebra::scale(algebra::dagger(a),
                                           std::sqrt(p.kappa_per_fs * p.n_th)));
    }
    if (p.dephasing_per_fs > 0.0)
        c_ops.push_back(algebra::scale(sz, std::sqrt(p.dephasing_per_fs)));
    if (c_ops.empty())
        throw ConfigError("dicke: need at least one dissipation channel for "
                          "the steady-state initial condition");

    Operator mu, mu_plus, mu_minus;
    dynamics::LindbladModel model;
    std::optional<algebra::EigenbasisTransform> basis;
    Operator a_eig = a;
    if (p.diagonalize) {
        std::vector<Operator> ops;
        ops.push_back(a);
        for (const auto& c : c_ops) ops.push_back(c);
        DiagonalizedSystem eig = to_eigenbasis(h, ops);
        a_eig = eig.ops[0];
        std::vector<Operator> c_t(eig.ops.begin() + 1, eig.ops.end());
        mu_minus = a_eig;
        mu_plus = algebra::dagger(a_eig);
        mu = algebra::add(mu_plus, mu_minus);
        model = dynamics::LindbladModel(eig.h, std::move(c_t));
        basis = eig.basis;
    } else {
        mu_minus = a;
        mu_plus = algebra::dagger(a);
        mu = algebra::add(mu_plus, mu_minus);
        model = dynamics::LindbladModel(h, c_ops);
    }

    algebra::DensityMatrix rho_ss = dynamics::steady_state(model);

    // truncation check: weight in the top two cavity levels
    if (warnings) {
        CMatrix rho_bare = rho_ss.mat;
        if (basis) {
            // back to the bare product basis for the cavity marginal
            const CMatrix& u = basis->unitary;
            rho_bare = algebra::matmul(
                u, algebra::matmul(rho_ss.mat, algebra::dagger(u)));
        }
        const std::size_t ds = p.n_spins + 1;
        double top_weight = 0.0;
        for (std::size_t k = p.n_cavity - 2; k < p.n_cavity; ++k)
            for (std::size_t s = 0; s < ds; ++s)
                top_weight += rho_bare.at(k * ds + s, k * ds + s).real();
        if (top_weight > 1e-3)
            *warnings << "warning: dicke steady state holds " << top_weight
                      << " population within 2 levels of the cavity cutoff; "
                         "raise n_cavity\n";
    }

    return {std::move(model), mu, mu_plus, mu_minus, std::move(rho_ss),
            std::move(basis)};
}

response::QuantumSystem build_custom(const CustomParams& p) {
    if (p.h_file.empty()) throw ConfigError("custom: h_file is required");
    if (p.lowering_file.empty() && p.dipole_file.empty())
        throw ConfigError("custom: need lowering_file or dipole_file");
    if (p.interaction != "split" && p.interaction != "lowering")
        throw ConfigError("custom: interaction must be split or lowering");
    if (p.interaction == "lowering" && p.lowering_file.empty())
        throw ConfigError("custom: interaction=lowering needs lowering_file");

    const Operator h = algebra::read_operator_file(p.h_file);
    std::optional<Operator> lowering;
    if (!p.lowering_file.empty())
        lowering = algebra::read_operator_file(p.lowering_file);

    Operator mu;
    if (!p.dipole_file.empty())
        mu = algebra::read_operator_file(p.dipole_file);
    else
        mu = algebra::scale(algebra::add(*lowering, algebra::dagger(*lowering)),
                            p.mu_scale);

    std::vector<Operator> c_ops;
    for (const auto& f : p.c_op_files)
        c_ops.push_back(algebra::read_operator_file(f));

    std::optional<Operator> rho_in;
    if (!p.rho_file.empty()) rho_in = algebra::read_operator_file(p.rho_file);

    std::optional<algebra::EigenbasisTransform> basis;
    Operator h_final = h;
    if (p.diagonalize) {
        std::vector<Operator> ops;
        ops.push_back(mu);
        if (lowering) ops.push_back(*lowering);
        for (const auto& c : c_ops) ops.push_back(c);
        if (rho_in) ops.push_back(*rho_in);
        DiagonalizedSystem eig = to_eigenbasis(h, ops);
        std::size_t at = 0;
        mu = eig.ops[at++];
        if (lowering) lowering = eig.ops[at++];
        for (auto& c : c_ops) c = eig.ops[at++];
        if (rho_in) rho_in = eig.ops[at++];
        h_final = eig.h;
        basis = std::move(eig.basis);
    }

    Operator mu_plus, mu_minus;
    if (p.interaction == "lowering") {
        mu_minus = *lowering;
        mu_plus = algebra::dagger(*lowering);
    } else {
        if (!basis)
            throw ConfigError(
                "custom: interaction=split requires diagonalize=true");
        std::tie(mu_plus, mu_minus) = algebra::split_dipole(mu, *basis);
    }

    algebra::DensityMatrix rho_init =
        rho_in ? algebra::DensityMatrix::physical(h.space, rho_in->mat)
               : ground_state(h.space);

    dynamics::LindbladModel model(h_final, std::move(c_ops));
    return {std::move(model), mu, mu_plus, mu_minus, std::move(rho_init),
            std::move(basis)};
}

response::QuantumSystem build_from_config(const IniFile& ini,
                                          std::ostream* warnings) {
    const std::string kind = ini.require("system", "kind");
    if (kind == "two_level") {
        TwoLevelParams p;
        p.energy_ev = ini.get_double("system", "energy_ev", p.energy_ev);
        p.mu = ini.get_double("system", "mu", p.mu);
        p.gamma_per_fs = ini.get_double("system", "gamma_per_fs", p.gamma_per_fs);
        p.dephasing_per_fs =
            ini.get_double("system", "dephasing_per_fs", p.dephasing_per_fs);
        return build_two_level(p);
    }
    if (kind == "coupled_oscillators") {
        CoupledOscillatorsParams p;
        p.omega1_ev = ini.get_double("system", "omega1_ev", p.omega1_ev);
        p.omega2_ev = ini.get_double("system", "omega2_ev", p.omega2_ev);
        p.j_ev = ini.get_double("system", "j_ev", p.j_ev);
        p.mu_a = ini.get_double("system", "mu_a", p.mu_a);
        p.mu_b = ini.get_double("system", "mu_b", p.mu_b);
        p.n_levels = ini.get_size("system", "n_levels", p.n_levels);
        p.gamma1_per_fs = ini.get_double("system", "gamma1_per_fs", p.gamma1_per_fs);
        p.gamma2_per_fs = ini.get_double("system", "gamma2_per_fs", p.gamma2_per_fs);
        p.nbar1 = ini.get_double("system", "nbar1", p.nbar1);
        p.nbar2 = ini.get_double("system", "nbar2", p.nbar2);
        p.diagonalize = ini.get_bool("system", "diagonalize", p.diagonalize);
        return build_coupled_oscillators(p);
    }
    if (kind == "dicke") {
        DickeParams p;
        p.cavity_ev = ini.get_double("system", "cavity_ev", p.cavity_ev);
        p.spin_ev = ini.get_double("system", "spin_ev", p.spin_ev);
        p.coupling_ev = ini.get_double("system", "coupling_ev", p.coupling_ev);
        p.n_spins = ini.get_size("system", "n_spins", p.n_spins);
        p.n_cavity = ini.get_size("system", "n_cavity", p.n_cavity);
        p.kappa_per_fs = ini.get_double("system", "kappa_per_fs", p.kappa_per_fs);
        p.n_th = ini.get_double("system", "n_th", p.n_th);
        p.dephasing_per_fs =
            ini.get_double("system", "dephasing_per_fs", p.dephasing_per_fs);
        p.diagonalize = ini.get_bool("system", "diagonalize", p.diagonalize);
        return build_dicke(p, warnings);
    }
    if (kind == "custom") {
        CustomParams p;
        p.h_file = ini.require("system", "h_file");
        p.lowering_file = ini.get_or("system", "lowering_file", "");
        p.dipole_file = ini.get_or("system", "dipole_file", "");
        if (auto v = ini.get("system", "c_op_files"); v && !v->empty()) {
            std::istringstream in(*v);
            std::string tok;
            while (std::getline(in, tok, ',')) {
                const auto a = tok.find_first_not_of(" \t");
                const auto b = tok.find_last_not_of(" \t");
                if (a != std::string::npos)
                    p.c_op_files.push_back(tok.substr(a, b - a + 1));
            }
        }
        p.rho_file = ini.get_or("system", "rho_file", "");
        p.mu_scale = ini.get_double("system", "mu_scale", p.mu_scale);
        p.diagonalize = ini.get_bool("system", "diagonalize", p.diagonalize);
        p.interaction = ini.get_or("system", "interaction", p.interaction);
        return build_custom(p);
    }
    throw ConfigError("unknown system kind: " + kind);
}

}  // namespace specforge::cli
