#pragma once

#include <optional>
#include <string>
#include <vector>

#include "specforge/algebra.hpp"
#include "specforge/diagrams.hpp"
#include "specforge/dynamics.hpp"

namespace specforge::response {

using algebra::cplx;

// A model system wired for diagram execution: Lindblad model, dipole
// observable and the raising/lowering interaction pair, all in one basis.
struct QuantumSystem {
    dynamics::LindbladModel model;
    algebra::Operator mu;        // dipole observable
    algebra::Operator mu_plus;   // interaction raising part
    algebra::Operator mu_minus;  // interaction lowering part
    algebra::DensityMatrix rho_init;
    std::optional<algebra::EigenbasisTransform> basis;

    QuantumSystem() = default;
    QuantumSystem(dynamics::LindbladModel m, algebra::Operator dipole,
                  algebra::Operator dipole_plus, algebra::Operator dipole_minus,
                  algebra::DensityMatrix rho0,
                  std::optional<algebra::EigenbasisTransform> eigenbasis = {});

    std::size_t dim() const { return model.dim(); }
};

enum class DetectionOperator {
    mu_minus,  // ket-side de-excitation (default; matches the diagram rules)
    mu_full    // full dipole, for comparison
};

struct RunOptions {
    bool parallel = false;
    std::size_t jobs = 0;  // 0 = all available cores (when parallel)
    DetectionOperator detect = DetectionOperator::mu_minus;
    // Diagonal element reported by PL-type diagrams; defaults to the
    // pathway's final ladder level.
    std::optional<std::size_t> pl_element;
};

// One diagram execution: delays[i] is the free-evolution interval after
// interaction i (the Eq.-6 time variables), r the RK4 resolution.
struct DiagramRun {
    diagrams::Diagram diagram;
    std::vector<double> delays_fs;
    std::size_t r = 10;
};

struct ExecuteResult {
    algebra::CMatrix final_state;
    cplx value = 0.0;
    // Recording: branch state at t=0+ and after every RK4 step; interaction
    // instants appear twice (pre- and post-projection).
    std::vector<double> times_fs;
    std::vector<algebra::CMatrix> states;
};

// Run one diagram as an alternating project/propagate chain. Projections:
// Ku -> mu_plus * rho, Kd -> mu_minus * rho, Bu -> rho * mu_minus,
// Bd -> rho * mu_plus. Detected value: sign * Tr(D rho_final) for
// polarization diagrams (D per options), sign * <n|rho|n> for PL-type ones.
// An empty diagram reports Tr(mu * rho_init).
ExecuteResult execute(const QuantumSystem& sys, const DiagramRun& run,
                      bool record = false, const RunOptions& opts = {});

// Recorded single-shot evolutions for a list of diagrams. interaction_times
// holds the pulse arrival times (first pulse at t=0) plus one trailing entry
// that closes the observation window.
std::vector<ExecuteResult> diagram_donkey(
    const QuantumSystem& sys, const std::vector<double>& interaction_times_fs,
    const std::vector<diagrams::Diagram>& diagram_list, std::size_t r = 10);

struct ResponseGrid {
    std::vector<double> axis1_fs, axis2_fs;
    std::vector<double> delays_fs;  // the run's delay list (scan maxima included)
    std::vector<std::size_t> scan_id;
    diagrams::Diagram diagram;
    std::size_t r = 10;
    std::string detection;  // "polarization"/"population:<n>" + operator
    std::vector<cplx> values;  // row-major, axis1 rows x axis2 cols

    cplx& at(std::size_t i, std::size_t j) { return values[i * axis2_fs.size() + j]; }
    const cplx& at(std::size_t i, std::size_t j) const {
        return values[i * axis2_fs.size() + j];
    }
};

// 2D delay scan of one diagram. The two scanned delays run over a 1/r grid
// from 0 to their listed maxima inclusive; all other delays stay fixed. The
// axis-1 propagation is checkpointed once per row, and the axis-2 sweep is
// folded into adjoint-propagated detection operators, which matches naive
// per-point recomputation to roundoff. Parallel runs split rows across
// workers and are bitwise identical to serial ones.
ResponseGrid coherence2d(const QuantumSystem& sys,
                         const std::vector<double>& time_delays_fs,
                         const diagrams::Diagram& diagram,
                         const std::pair<std::size_t, std::size_t>& scan_id,
                         std::size_t r = 10, const RunOptions& opts = {});

// Naive per-point recomputation via execute(); the equivalence reference.
ResponseGrid coherence2d_reference(
    const QuantumSystem& sys, const std::vector<double>& time_delays_fs,
    const diagrams::Diagram& diagram,
    const std::pair<std::size_t, std::size_t>& scan_id, std::size_t r = 10,
    const RunOptions& opts = {});

// coherence2d repeated with delays[pop_index] set to each population time.
std::vector<ResponseGrid> pop_study(
    const QuantumSystem& sys, const std::vector<double>& pop_times_fs,
    std::size_t pop_index, const std::vector<double>& time_delays_fs,
    const diagrams::Diagram& diagram,
    const std::pair<std::size_t, std::size_t>& scan_id, std::size_t r = 10,
    const RunOptions& opts = {});

struct LinearResponse {
    std::vector<double> times_fs;
    std::vector<cplx> mu_series;  // Tr(mu * rho(t))
};

// All interactions of the diagram applied at t=0 (default: a single Bu),
// then one recorded propagation of scan_time.
LinearResponse linear_response(const QuantumSystem& sys, double scan_time_fs,
                               const std::optional<diagrams::Diagram>& diagram,
                               std::size_t r = 10);

// Directory format: metadata.txt plus real.csv / imag.csv (axis1 rows).
void save_grid(const std::string& dir, const ResponseGrid& grid);
ResponseGrid load_grid(const std::string& dir);

}  // namespace specforge::response
