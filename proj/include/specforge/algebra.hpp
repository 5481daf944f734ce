#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace specforge::algebra {

using cplx = std::complex<double>;

// Ordered subsystem dimensions of a tensor-product Fock space.
struct SpaceSignature {
    std::vector<std::size_t> dims;

    SpaceSignature() = default;
    explicit SpaceSignature(std::vector<std::size_t> d);

    std::size_t total_dim() const;
    bool operator==(const SpaceSignature&) const = default;
    std::string str() const;
};

// Square dense complex matrix, row-major.
class CMatrix {
public:
    CMatrix() = default;
    explicit CMatrix(std::size_t dim) : dim_(dim), a_(dim * dim, cplx(0.0)) {}

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return a_.size(); }
    cplx* data() { return a_.data(); }
    const cplx* data() const { return a_.data(); }
    cplx& at(std::size_t i, std::size_t j) { return a_[i * dim_ + j]; }
    const cplx& at(std::size_t i, std::size_t j) const { return a_[i * dim_ + j]; }

    bool operator==(const CMatrix&) const = default;

private:
    std::size_t dim_ = 0;
    std::vector<cplx> a_;
};

// Elementwise and product helpers. Products run through the kernel layer.
CMatrix matmul(const CMatrix& a, const CMatrix& b);
void matmul_acc(CMatrix& c, const CMatrix& a, const CMatrix& b, cplx alpha,
                cplx beta);
CMatrix dagger(const CMatrix& a);
CMatrix transpose(const CMatrix& a);
CMatrix add(const CMatrix& a, const CMatrix& b);
CMatrix sub(const CMatrix& a, const CMatrix& b);
CMatrix scale(const CMatrix& a, cplx s);
CMatrix commutator(const CMatrix& a, const CMatrix& b);      // AB - BA
CMatrix anticommutator(const CMatrix& a, const CMatrix& b);  // AB + BA
cplx trace(const CMatrix& a);
cplx trace_mul(const CMatrix& a, const CMatrix& b);  // Tr(A*B)
double max_abs(const CMatrix& a);
double hermiticity_defect(const CMatrix& a);  // max |A_ij - conj(A_ji)|
bool has_non_finite(const CMatrix& a);
CMatrix identity_matrix(std::size_t dim);

// Operator in a fixed tensor-product space.
struct Operator {
    SpaceSignature space;
    CMatrix mat;

    Operator() = default;
    Operator(SpaceSignature s, CMatrix m);

    std::size_t dim() const { return mat.dim(); }
};

Operator identity(const SpaceSignature& space);
Operator dagger(const Operator& a);
Operator add(const Operator& a, const Operator& b);
Operator scale(const Operator& a, cplx s);
Operator matmul(const Operator& a, const Operator& b);
Operator commutator(const Operator& a, const Operator& b);

// Density matrix. Physical states are hermitian, unit-trace and positive
// semidefinite; perturbative diagram branches are plain CMatrix and skip
// these checks.
struct DensityMatrix {
    SpaceSignature space;
    CMatrix mat;

    DensityMatrix() = default;
    DensityMatrix(SpaceSignature s, CMatrix m);

    // Throws ValidationError unless hermitian within 1e-12, trace 1 within
    // 1e-10 and eigenvalues >= -1e-10.
    static DensityMatrix physical(SpaceSignature s, CMatrix m);
};

struct EigenbasisTransform {
    std::vector<double> eigenvalues;  // ascending
    CMatrix unitary;                  // columns are eigenvectors
};

// Truncated n-level lowering operator: <i|a|i+1> = sqrt(i+1).
Operator destroy(std::size_t n);

struct SpinOps {
    Operator sx, sy, sz;
};

// Collective spin operators for N identical spin-1/2s in the symmetric
// (2S+1)-dimensional sector, S = N/2, hbar = 1. sz = diag(S, S-1, ..., -S).
SpinOps spin_ops(std::size_t n_spins);

// Kronecker product in list order; dims concatenate.
Operator tensor(const std::vector<Operator>& ops);

// Diagonalize hermitian H (defect <= 1e-10) and transform ops to the
// eigenbasis (U^dag * op * U). Eigenvalues ascending; each eigenvector's
// first significant component is rotated to be real-positive so repeated
// runs produce identical transforms.
std::pair<EigenbasisTransform, std::vector<Operator>> diagonalize(
    const Operator& h, const std::vector<Operator>& ops);

// Split a dipole operator expressed in an ascending-energy eigenbasis into
// the energy-raising part (strictly lower triangle) and the energy-lowering
// part (strictly upper triangle). The diagonal drives no transitions and is
// dropped from both.
std::pair<Operator, Operator> split_dipole(const Operator& mu,
                                           const EigenbasisTransform& basis);

// Tr(A * rho)
cplx expectation(const Operator& a, const DensityMatrix& rho);

// Matrix text format:
//   dims d1 d2 ...
// followed by total_dim rows of total_dim entries, each "(re,im)" or a bare
// real. Whitespace-separated.
Operator read_operator(std::istream& in, const std::string& origin = "<stream>");
Operator read_operator_file(const std::string& path);
void write_operator(std::ostream& out, const Operator& op);
void write_operator_file(const std::string& path, const Operator& op);

}  // namespace specforge::algebra
