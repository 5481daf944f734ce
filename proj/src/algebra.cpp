#include "specforge/algebra.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "specforge/errors.hpp"
#include "specforge/kernels.hpp"

namespace specforge::algebra {

namespace {

using EMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic,
                              Eigen::RowMajor>;

Eigen::Map<const EMatrix> emap(const CMatrix& m) {
    return {m.data(), static_cast<Eigen::Index>(m.dim()),
            static_cast<Eigen::Index>(m.dim())};
}

CMatrix from_eigen(const EMatrix& e) {
    CMatrix out(static_cast<std::size_t>(e.rows()));
    Eigen::Map<EMatrix>(out.data(), e.rows(), e.cols()) = e;
    return out;
}

void require_same_dim(const CMatrix& a, const CMatrix& b, const char* what) {
    if (a.dim() != b.dim())
        throw DimensionError(std::string(what) + ": dimension mismatch " +
                             std::to_string(a.dim()) + " vs " +
                             std::to_string(b.dim()));
}

}  // namespace

SpaceSignature::SpaceSignature(std::vector<std::size_t> d) : dims(std::move(d)) {
    if (dims.empty())
        throw DimensionError("space signature needs at least one subsystem");
    for (std::size_t dim : dims)
        if (dim < 1) throw DimensionError("space signature: dim < 1");
}

std::size_t SpaceSignature::total_dim() const {
    std::size_t total = 1;
    for (std::size_t d : dims) total *= d;
    return total;
}

std::string SpaceSignature::str() const {
    std::string out;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(dims[i]);
    }
    return out;
}

CMatrix matmul(const CMatrix& a, const CMatrix& b) {
    require_same_dim(a, b, "matmul");
    CMatrix c(a.dim());
    kernels::active().gemm(c.data(), a.data(), b.data(), a.dim(), cplx(1.0),
                           cplx(0.0));
    return c;
}

void matmul_acc(CMatrix& c, const CMatrix& a, const CMatrix& b, cplx alpha,
                cplx beta) {
    require_same_dim(a, b, "matmul_acc");
    require_same_dim(c, a, "matmul_acc");
    kernels::active().gemm(c.data(), a.data(), b.data(), a.dim(), alpha, beta);
}

CMatrix dagger(const CMatrix& a) {
    CMatrix out(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < a.dim(); ++j)
            out.at(j, i) = std::conj(a.at(i, j));
    return out;
}

CMatrix transpose(const CMatrix& a) {
    CMatrix out(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < a.dim(); ++j) out.at(j, i) = a.at(i, j);
    return out;
}

CMatrix add(const CMatrix& a, const CMatrix& b) {
    require_same_dim(a, b, "add");
    CMatrix out = a;
    for (std::size_t i = 0; i < b.size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

CMatrix sub(const CMatrix& a, const CMatrix& b) {
    require_same_dim(a, b, "sub");
    CMatrix out = a;
    for (std::size_t i = 0; i < b.size(); ++i) out.data()[i] -= b.data()[i];
    return out;
}

CMatrix scale(const CMatrix& a, cplx s) {
    CMatrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= s;
    return out;
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) {
    CMatrix c(a.dim());
    kernels::active().gemm(c.data(), a.data(), b.data(), a.dim(), cplx(1.0),
                           cplx(0.0));
    kernels::active().gemm(c.data(), b.data(), a.data(), a.dim(), cplx(-1.0),
                           cplx(1.0));
    return c;
}

CMatrix anticommutator(const CMatrix& a, const CMatrix& b) {
    CMatrix c(a.dim());
    kernels::active().gemm(c.data(), a.data(), b.data(), a.dim(), cplx(1.0),
                           cplx(0.0));
    kernels::active().gemm(c.data(), b.data(), a.data(), a.dim(), cplx(1.0),
                           cplx(1.0));
    return c;
}

cplx trace(const CMatrix& a) {
    cplx t(0.0);
    for (std::size_t i = 0; i < a.dim(); ++i) t += a.at(i, i);
    return t;
}

cplx trace_mul(const CMatrix& a, const CMatrix& b) {
    require_same_dim(a, b, "trace_mul");
    cplx t(0.0);
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t k = 0; k < a.dim(); ++k) t += a.at(i, k) * b.at(k, i);
    return t;
}

double max_abs(const CMatrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.data()[i]));
    return m;
}

double hermiticity_defect(const CMatrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = i; j < a.dim(); ++j)
            m = std::max(m, std::abs(a.at(i, j) - std::conj(a.at(j, i))));
    return m;
}

bool has_non_finite(const CMatrix& a) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        const cplx v = a.data()[i];
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return true;
    }
    return false;
}

CMatrix identity_matrix(std::size_t dim) {
    CMatrix out(dim);
    for (std::size_t i = 0; i < dim; ++i) out.at(i, i) = cplx(1.0);
    return out;
}

Operator::Operator(SpaceSignature s, CMatrix m)
    : space(std::move(s)), mat(std::move(m)) {
    if (mat.dim() != space.total_dim())
        throw DimensionError("operator matrix side " + std::to_string(mat.dim()) +
                             " does not match space " + space.str());
}

Operator identity(const SpaceSignature& space) {
    return {space, identity_matrix(space.total_dim())};
}

Operator dagger(const Operator& a) { return {a.space, dagger(a.mat)}; }

Operator add(const Operator& a, const Operator& b) {
    if (!(a.space == b.space))
        throw DimensionError("operator add: space mismatch " + a.space.str() +
                             " vs " + b.space.str());
    return {a.space, add(a.mat, b.mat)};
}

Operator scale(const Operator& a, cplx s) { return {a.space, scale(a.mat, s)}; }

Operator matmul(const Operator& a, const Operator& b) {
    if (!(a.space == b.space))
        throw DimensionError("operator matmul: space mismatch");
    return {a.space, matmul(a.mat, b.mat)};
}

Operator commutator(const Operator& a, const Operator& b) {
    if (!(a.space == b.space))
        throw DimensionError("operator commutator: space mismatch");
    return {a.space, commutator(a.mat, b.mat)};
}

DensityMatrix::DensityMatrix(SpaceSignature s, CMatrix m)
    : space(std::move(s)), mat(std::move(m)) {
    if (mat.dim() != space.total_dim())
        throw DimensionError("density matrix side does not match space");
}

DensityMatrix DensityMatrix::physical(SpaceSignature s, CMatrix m) {
    DensityMatrix rho(std::move(s), std::move(m));
    const double herm = hermiticity_defect(rho.mat);
    if (herm > 1e-12)
        throw ValidationError("density matrix not hermitian, defect " +
                              std::to_string(herm));
    const cplx tr = trace(rho.mat);
    if (std::abs(tr - cplx(1.0)) > 1e-10)
        throw ValidationError("density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<EMatrix> solver(
        emap(rho.mat), Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -1e-10)
        throw ValidationError("density matrix has negative eigenvalues");
    return rho;
}

Operator destroy(std::size_t n) {
    if (n < 2) throw DimensionError("destroy: need at least 2 levels");
    CMatrix a(n);
    for (std::size_t i = 0; i + 1 < n; ++i)
        a.at(i, i + 1) = std::sqrt(static_cast<double>(i + 1));
    return {SpaceSignature({n}), std::move(a)};
}

SpinOps spin_ops(std::size_t n_spins) {
    if (n_spins < 1) throw DimensionError("spin_ops: need at least one spin");
    const double s = 0.5 * static_cast<double>(n_spins);
    const std::size_t dim = n_spins + 1;
    CMatrix sp(dim), sz(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        const double m = s - static_cast<double>(i);
        sz.at(i, i) = m;
        if (i >= 1) {
            // S+ |s,m> = sqrt(s(s+1) - m(m+1)) |s,m+1>; index i-1 holds m+1
            sp.at(i - 1, i) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
        }
    }
    const CMatrix sm = dagger(sp);
    SpaceSignature space({dim});
    CMatrix sx(dim), sy(dim);
    for (std::size_t i = 0; i < sx.size(); ++i) {
        sx.data()[i] = 0.5 * (sp.data()[i] + sm.data()[i]);
        sy.data()[i] = cplx(0.0, -0.5) * (sp.data()[i] - sm.data()[i]);
    }
    return {Operator(space, std::move(sx)), Operator(space, std::move(sy)),
            Operator(space, std::move(sz))};
}

Operator tensor(const std::vector<Operator>& ops) {
    if (ops.empty()) throw ValidationError("tensor: empty operator list");
    std::vector<std::size_t> dims;
    CMatrix acc = ops.front().mat;
    dims = ops.front().space.dims;
    for (std::size_t n = 1; n < ops.size(); ++n) {
        const CMatrix& b = ops[n].mat;
        const std::size_t da = acc.dim(), db = b.dim();
        CMatrix out(da * db);
        for (std::size_t i = 0; i < da; ++i)
            for (std::size_t j = 0; j < da; ++j) {
                const cplx aij = acc.at(i, j);
                if (aij == cplx(0.0)) continue;
                for (std::size_t k = 0; k < db; ++k)
                    for (std::size_t l = 0; l < db; ++l)
                        out.at(i * db + k, j * db + l) = aij * b.at(k, l);
            }
        acc = std::move(out);
        dims.insert(dims.end(), ops[n].space.dims.begin(),
                    ops[n].space.dims.end());
    }
    return {SpaceSignature(std::move(dims)), std::move(acc)};
}

std::pair<EigenbasisTransform, std::vector<Operator>> diagonalize(
    const Operator& h, const std::vector<Operator>& ops) {
    const double defect = hermiticity_defect(h.mat);
    if (defect > 1e-10)
        throw ValidationError("diagonalize: H not hermitian, defect " +
                              std::to_string(defect));
    Eigen::SelfAdjointEigenSolver<EMatrix> solver(emap(h.mat));
    if (solver.info() != Eigen::Success)
        throw ValidationError("diagonalize: eigensolver failed");

    EMatrix u = solver.eigenvectors();
    // Fix each eigenvector's global phase: first significant component made
    // real-positive, so degenerate subspaces come out reproducibly.
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        const double colmax = u.col(c).cwiseAbs().maxCoeff();
        for (Eigen::Index r = 0; r < u.rows(); ++r) {
            const cplx v = u(r, c);
            if (std::abs(v) > 1e-8 * colmax) {
                u.col(c) *= std::conj(v) / std::abs(v);
                break;
            }
        }
    }

    EigenbasisTransform basis;
    basis.eigenvalues.assign(solver.eigenvalues().data(),
                             solver.eigenvalues().data() +
                                 solver.eigenvalues().size());
    basis.unitary = from_eigen(u);

    std::vector<Operator> transformed;
    transformed.reserve(ops.size());
    const EMatrix udag = u.adjoint();
    for (const Operator& op : ops) {
        if (!(op.space == h.space))
            throw DimensionError("diagonalize: operator space mismatch");
        EMatrix t = udag * emap(op.mat) * u;
        transformed.emplace_back(op.space, from_eigen(t));
    }
    return {std::move(basis), std::move(transformed)};
}

std::pair<Operator, Operator> split_dipole(const Operator& mu,
                                           const EigenbasisTransform& basis) {
    if (basis.eigenvalues.size() != mu.dim())
        throw DimensionError("split_dipole: basis size mismatch");
    if (!std::is_sorted(basis.eigenvalues.begin(), basis.eigenvalues.end()))
        throw ValidationError("split_dipole: eigenvalues not ascending");
    CMatrix plus(mu.dim()), minus(mu.dim());
    for (std::size_t i = 0; i < mu.dim(); ++i)
        for (std::size_t j = 0; j < mu.dim(); ++j) {
            if (i > j)
                plus.at(i, j) = mu.mat.at(i, j);
            else if (i < j)
                minus.at(i, j) = mu.mat.at(i, j);
        }
    return {Operator(mu.space, std::move(plus)),
            Operator(mu.space, std::move(minus))};
}

cplx expectation(const Operator& a, const DensityMatrix& rho) {
    if (!(a.space == rho.space))
        throw DimensionError("expectation: space mismatch " + a.space.str() +
                             " vs " + rho.space.str());
    return trace_mul(a.mat, rho.mat);
}

namespace {

cplx parse_entry(const std::string& tok, std::size_t row, std::size_t col,
                 const std::string& origin) {
    const auto fail = [&](const std::string& why) {
        throw ParseError(origin + ": row " + std::to_string(row) + " col " +
                         std::to_string(col) + ": " + why + ": '" + tok + "'");
    };
    auto parse_real = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            fail("not a number");
        }
        if (used != s.size()) fail("trailing characters in number");
        return v;
    };
    if (!tok.empty() && tok.front() == '(') {
        if (tok.back() != ')') fail("unterminated complex entry");
        const auto comma = tok.find(',');
        if (comma == std::string::npos) fail("missing comma in complex entry");
        const std::string re = tok.substr(1, comma - 1);
        const std::string im = tok.substr(comma + 1, tok.size() - comma - 2);
        return {parse_real(re), parse_real(im)};
    }
    return {parse_real(tok), 0.0};
}

}  // namespace

Operator read_operator(std::istream& in, const std::string& origin) {
    std::string header;
    if (!(in >> header) || header != "dims")
        throw ParseError(origin + ": expected leading 'dims' line");
    std::string rest;
    std::getline(in, rest);
    std::istringstream dims_in(rest);
    std::vector<std::size_t> dims;
    long long d = 0;
    while (dims_in >> d) {
        if (d < 1) throw ParseError(origin + ": dims entries must be >= 1");
        dims.push_back(static_cast<std::size_t>(d));
    }
    if (dims.empty()) throw ParseError(origin + ": no dimensions given");
    SpaceSignature space(dims);
    const std::size_t n = space.total_dim();
    CMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            std::string tok;
            if (!(in >> tok))
                throw ParseError(origin + ": unexpected end of data at row " +
                                 std::to_string(i) + " col " + std::to_string(j));
            m.at(i, j) = parse_entry(tok, i, j, origin);
        }
    return {std::move(space), std::move(m)};
}

Operator read_operator_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open matrix file: " + path);
    return read_operator(in, path);
}

void write_operator(std::ostream& out, const Operator& op) {
    out << "dims";
    for (std::size_t d : op.space.dims) out << ' ' << d;
    out << '\n';
    out.precision(17);
    const std::size_t n = op.dim();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const cplx v = op.mat.at(i, j);
            if (j) out << ' ';
            out << '(' << v.real() << ',' << v.imag() << ')';
        }
        out << '\n';
    }
}

void write_operator_file(const std::string& path, const Operator& op) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open matrix file for writing: " + path);
    write_operator(out, op);
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace specforge::algebra
