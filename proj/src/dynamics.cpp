#include "specforge/dynamics.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <fstream>

#include "specforge/errors.hpp"
#include "specforge/kernels.hpp"

namespace specforge::dynamics {

using algebra::CMatrix;
using algebra::cplx;

LindbladModel::LindbladModel(algebra::Operator hamiltonian,
                             std::vector<algebra::Operator> collapse_ops,
                             double hbar_ev_fs)
    : h(std::move(hamiltonian)), c_ops(std::move(collapse_ops)), hbar(hbar_ev_fs) {
    const double defect = algebra::hermiticity_defect(h.mat);
    if (defect > 1e-10)
        throw ValidationError("lindblad model: H not hermitian, defect " +
                              std::to_string(defect));
    for (const auto& c : c_ops)
        if (!(c.space == h.space))
            throw DimensionError("lindblad model: collapse operator space " +
                                 c.space.str() + " does not match H space " +
                                 h.space.str());
    if (hbar <= 0.0) throw ValidationError("lindblad model: hbar must be > 0");
}

TimeGrid::TimeGrid(double start, double end, std::size_t steps_per_fs)
    : t_start(start), t_end(end), r(steps_per_fs) {
    if (end < start)
        throw ValidationError("time grid: t_end < t_start");
    if (r < 1) throw ValidationError("time grid: resolution must be >= 1");
}

std::size_t TimeGrid::steps() const {
    return static_cast<std::size_t>(
        std::llround((t_end - t_start) * static_cast<double>(r)));
}

Propagator::Propagator(const LindbladModel& model, Direction dir)
    : dim_(model.dim()), hbar_(model.hbar), dir_(dir), h_(model.h.mat) {
    // Exactly-diagonal H (the case after eigenbasis setup) gets an
    // elementwise commutator.
    h_diagonal_ = true;
    for (std::size_t i = 0; i < dim_ && h_diagonal_; ++i)
        for (std::size_t j = 0; j < dim_; ++j)
            if (i != j && h_.at(i, j) != cplx(0.0)) {
                h_diagonal_ = false;
                break;
            }
    const double comm_sign = (dir_ == Direction::state) ? -1.0 : 1.0;
    if (h_diagonal_) {
        comm_phase_ = CMatrix(dim_);
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j)
                comm_phase_.at(i, j) =
                    cplx(0.0, comm_sign / hbar_) *
                    (h_.at(i, i) - h_.at(j, j));
    }
    if (!model.c_ops.empty()) {
        msum_ = CMatrix(dim_);
        has_msum_ = true;
        for (const auto& c : model.c_ops) {
            const CMatrix cdag = algebra::dagger(c.mat);
            algebra::matmul_acc(msum_, cdag, c.mat, cplx(1.0), cplx(1.0));
            if (dir_ == Direction::state) {
                sand_left_.push_back(c.mat);
                sand_right_.push_back(cdag);
            } else {
                sand_left_.push_back(cdag);
                sand_right_.push_back(c.mat);
            }
        }
    }
}

Propagator::Workspace Propagator::make_workspace() const {
    Workspace ws;
    ws.k1 = CMatrix(dim_);
    ws.k2 = CMatrix(dim_);
    ws.k3 = CMatrix(dim_);
    ws.k4 = CMatrix(dim_);
    ws.stage = CMatrix(dim_);
    ws.tmp = CMatrix(dim_);
    return ws;
}

void Propagator::apply_rhs(const CMatrix& in, CMatrix& out,
                           Workspace& ws) const {
    const auto& k = kernels::active();
    if (h_diagonal_) {
        for (std::size_t i = 0; i < in.size(); ++i)
            out.data()[i] = comm_phase_.data()[i] * in.data()[i];
    } else {
        const double comm_sign = (dir_ == Direction::state) ? -1.0 : 1.0;
        const cplx pref(0.0, comm_sign / hbar_);
        k.gemm(out.data(), h_.data(), in.data(), dim_, pref, cplx(0.0));
        k.gemm(out.data(), in.data(), h_.data(), dim_, -pref, cplx(1.0));
    }
    for (std::size_t c = 0; c < sand_left_.size(); ++c) {
        k.gemm(ws.tmp.data(), sand_left_[c].data(), in.data(), dim_, cplx(1.0),
               cplx(0.0));
        k.gemm(out.data(), ws.tmp.data(), sand_right_[c].data(), dim_,
               cplx(1.0), cplx(1.0));
    }
    if (has_msum_) {
        k.gemm(out.data(), msum_.data(), in.data(), dim_, cplx(-0.5), cplx(1.0));
        k.gemm(out.data(), in.data(), msum_.data(), dim_, cplx(-0.5), cplx(1.0));
    }
}

void Propagator::step(CMatrix& x, double h, Workspace& ws) const {
    const auto& k = kernels::active();
    const std::size_t n = x.size();
    apply_rhs(x, ws.k1, ws);
    k.axpy(ws.stage.data(), x.data(), ws.k1.data(), 0.5 * h, n);
    apply_rhs(ws.stage, ws.k2, ws);
    k.axpy(ws.stage.data(), x.data(), ws.k2.data(), 0.5 * h, n);
    apply_rhs(ws.stage, ws.k3, ws);
    k.axpy(ws.stage.data(), x.data(), ws.k3.data(), h, n);
    apply_rhs(ws.stage, ws.k4, ws);
    k.rk4_combine(x.data(), ws.k1.data(), ws.k2.data(), ws.k3.data(),
                  ws.k4.data(), h, n);
}

CMatrix lindblad_rhs(const LindbladModel& model, const CMatrix& rho) {
    if (rho.dim() != model.dim())
        throw DimensionError("lindblad_rhs: state dimension " +
                             std::to_string(rho.dim()) + " vs model " +
                             std::to_string(model.dim()));
    Propagator prop(model);
    auto ws = prop.make_workspace();
    CMatrix out(rho.dim());
    prop.apply_rhs(rho, out, ws);
    return out;
}

PropagationResult propagate(const LindbladModel& model, const CMatrix& rho0,
                            const TimeGrid& grid, bool record) {
    if (rho0.dim() != model.dim())
        throw DimensionError("propagate: state dimension mismatch");
    Propagator prop(model);
    auto ws = prop.make_workspace();
    const std::size_t steps = grid.steps();
    const double h = grid.step_size();

    PropagationResult result;
    result.final_state = rho0;
    if (record) {
        result.trajectory.emplace();
        result.trajectory->reserve(steps + 1);
        result.trajectory->push_back(rho0);
    }
    for (std::size_t s = 0; s < steps; ++s) {
        prop.step(result.final_state, h, ws);
        if (algebra::has_non_finite(result.final_state))
            throw DivergenceError(
                "propagate: non-finite state at step " + std::to_string(s + 1) +
                " (t = " +
                std::to_string(grid.t_start + (s + 1) * h) + " fs)");
        if (record) result.trajectory->push_back(result.final_state);
    }
    return result;
}

namespace {

// vec by column stacking: element (i,j) sits at index j*d + i.
// Adds alpha * vec(A rho B) as the superoperator block A(i,k) B(l,j).
void add_sandwich(Eigen::MatrixXcd& s, const CMatrix& a, const CMatrix& b,
                  cplx alpha) {
    const std::size_t d = a.dim();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            const cplx aik = alpha * a.at(i, k);
            if (aik == cplx(0.0)) continue;
            for (std::size_t l = 0; l < d; ++l)
                for (std::size_t j = 0; j < d; ++j) {
                    const cplx blj = b.at(l, j);
                    if (blj == cplx(0.0)) continue;
                    s(static_cast<Eigen::Index>(j * d + i),
                      static_cast<Eigen::Index>(l * d + k)) += aik * blj;
                }
        }
}

}  // namespace

algebra::DensityMatrix steady_state(const LindbladModel& model) {
    if (model.c_ops.empty())
        throw ValidationError(
            "steady_state: need at least one collapse operator (otherwise the "
            "steady state is non-unique)");
    const std::size_t d = model.dim();
    const std::size_t d2 = d * d;
    const CMatrix eye = algebra::identity_matrix(d);

    Eigen::MatrixXcd liou = Eigen::MatrixXcd::Zero(d2, d2);
    const cplx ih(0.0, 1.0 / model.hbar);
    add_sandwich(liou, model.h.mat, eye, -ih);
    add_sandwich(liou, eye, model.h.mat, ih);
    CMatrix msum(d);
    for (const auto& c : model.c_ops) {
        const CMatrix cdag = algebra::dagger(c.mat);
        add_sandwich(liou, c.mat, cdag, cplx(1.0));
        algebra::matmul_acc(msum, cdag, c.mat, cplx(1.0), cplx(1.0));
    }
    add_sandwich(liou, msum, eye, cplx(-0.5));
    add_sandwich(liou, eye, msum, cplx(-0.5));

    Eigen::BDCSVD<Eigen::MatrixXcd> svd(liou, Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    const double smax = sigma(0);
    const double tol = std::max(smax, 1.0) * 1e-12;
    std::size_t null_dim = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        if (sigma(i) <= tol) ++null_dim;
    if (null_dim != 1)
        throw ValidationError("steady_state: Liouvillian null space has "
                              "dimension " + std::to_string(null_dim) +
                              " (expected 1)");

    const Eigen::VectorXcd v = svd.matrixV().col(static_cast<Eigen::Index>(d2 - 1));
    CMatrix rho(d);
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < d; ++i)
            rho.at(i, j) = v(static_cast<Eigen::Index>(j * d + i));
    const cplx tr = algebra::trace(rho);
    if (std::abs(tr) < 1e-10)
        throw ValidationError("steady_state: null vector is traceless");
    rho = algebra::scale(rho, cplx(1.0) / tr);
    // symmetrize away roundoff before the physicality checks
    const CMatrix rdag = algebra::dagger(rho);
    for (std::size_t i = 0; i < rho.size(); ++i)
        rho.data()[i] = 0.5 * (rho.data()[i] + rdag.data()[i]);
    return algebra::DensityMatrix::physical(model.h.space, std::move(rho));
}

void write_trajectory_csv(
    const std::string& path, const std::vector<double>& times_fs,
    const std::vector<CMatrix>& states,
    const std::vector<std::pair<std::size_t, std::size_t>>& elements) {
    if (times_fs.size() != states.size())
        throw ValidationError("trajectory dump: times/states length mismatch");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open trajectory file: " + path);
    out << "t_fs";
    for (const auto& [i, j] : elements)
        out << ",re_" << i << "_" << j << ",im_" << i << "_" << j;
    out << '\n';
    out.precision(17);
    for (std::size_t s = 0; s < states.size(); ++s) {
        out << times_fs[s];
        for (const auto& [i, j] : elements) {
            const cplx v = states[s].at(i, j);
            out << ',' << v.real() << ',' << v.imag();
        }
        out << '\n';
    }
    if (!out) throw IoError("trajectory write failed: " + path);
}

}  // namespace specforge::dynamics
