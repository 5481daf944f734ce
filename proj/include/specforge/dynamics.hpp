#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "specforge/algebra.hpp"

namespace specforge::dynamics {

inline constexpr double kHbarEvFs = 0.658211951;  // eV fs

// H plus collapse operators with sqrt(rate) already absorbed, so the
// dissipator is sum_i( L_i rho L_i^dag - 1/2 {L_i^dag L_i, rho} ).
struct LindbladModel {
    algebra::Operator h;
    std::vector<algebra::Operator> c_ops;
    double hbar = kHbarEvFs;

    LindbladModel() = default;
    LindbladModel(algebra::Operator hamiltonian,
                  std::vector<algebra::Operator> collapse_ops,
                  double hbar_ev_fs = kHbarEvFs);

    std::size_t dim() const { return h.dim(); }
};

struct TimeGrid {
    double t_start = 0.0;  // fs
    double t_end = 0.0;    // fs
    std::size_t r = 10;    // steps per fs

    TimeGrid() = default;
    TimeGrid(double start, double end, std::size_t steps_per_fs);

    double step_size() const { return 1.0 / static_cast<double>(r); }
    std::size_t steps() const;
};

// Right-hand side of the master equation; accepts non-hermitian branches.
algebra::CMatrix lindblad_rhs(const LindbladModel& model,
                              const algebra::CMatrix& rho);

// Precompiled RK4 stepper for a fixed model. Direction::state evolves
// density-matrix branches; Direction::adjoint evolves detection operators
// under the trace-dual generator, so that
//   Tr(D * step_state^k(rho)) == Tr(step_adjoint^k(D) * rho)
// up to roundoff. Workspaces carry the per-thread scratch.
class Propagator {
public:
    enum class Direction { state, adjoint };

    struct Workspace {
        algebra::CMatrix k1, k2, k3, k4, stage, tmp;
    };

    Propagator(const LindbladModel& model, Direction dir = Direction::state);

    std::size_t dim() const { return dim_; }
    Workspace make_workspace() const;

    void apply_rhs(const algebra::CMatrix& in, algebra::CMatrix& out,
                   Workspace& ws) const;
    void step(algebra::CMatrix& x, double h, Workspace& ws) const;

private:
    std::size_t dim_ = 0;
    double hbar_ = kHbarEvFs;
    Direction dir_ = Direction::state;
    bool h_diagonal_ = false;
    algebra::CMatrix comm_phase_;  // elementwise commutator factors, diagonal H
    algebra::CMatrix h_;
    std::vector<algebra::CMatrix> sand_left_, sand_right_;
    algebra::CMatrix msum_;  // sum_i L_i^dag L_i
    bool has_msum_ = false;
};

struct PropagationResult {
    algebra::CMatrix final_state;
    // When recording: state at t_start plus one entry per step.
    std::optional<std::vector<algebra::CMatrix>> trajectory;
};

// Fixed-step classical RK4. Non-hermitian inputs are first-class (diagram
// branches). Throws DivergenceError naming the step if NaN/Inf shows up.
PropagationResult propagate(const LindbladModel& model,
                            const algebra::CMatrix& rho0, const TimeGrid& grid,
                            bool record = false);

// Null vector of the vectorized Liouvillian (column-stacking convention),
// rescaled to unit trace. Requires at least one collapse operator and a
// one-dimensional null space.
algebra::DensityMatrix steady_state(const LindbladModel& model);

// CSV trajectory dump: one row per state, "t_fs" then re,im pairs of the
// selected elements.
void write_trajectory_csv(const std::string& path,
                          const std::vector<double>& times_fs,
                          const std::vector<algebra::CMatrix>& states,
                          const std::vector<std::pair<std::size_t, std::size_t>>&
                              elements);

}  // namespace specforge::dynamics
