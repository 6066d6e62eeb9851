/**
 * Weighted inner products, adjoints, n-Laplace operators and Fourier bases on
 * a structural simplex.
 *
 * With P_n the boundary matrix and W_n = diag(w_n), the adjoint of the
 * boundary map is delta_n = W_{n+1}^{-1} P_{n+1}^T W_n and
 *
 *     L_n = P_{n+1} W_{n+1}^{-1} P_{n+1}^T W_n  +  W_n^{-1} P_n^T W_{n-1} P_n,
 *
 * which is self-adjoint for <a, b>_w = a^T W_n b. Its w-orthonormal
 * eigenbasis is obtained from the symmetric matrix W^{1/2} L W^{-1/2}.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include "hyperharmonic/complex.hpp"
#include "hyperharmonic/errors.hpp"
#include "hyperharmonic/simplex.hpp"

namespace hyperharmonic {

/// Largest dense operator dimension C(N+1, n+1) that will be assembled.
inline constexpr Eigen::Index kMaxDenseDimension = 5000;

/// Diagonal inner product <s, s'>_w = w_n(s) if s == s', else 0.
class WeightedInnerProduct {
public:
    WeightedInnerProduct(int n, Eigen::VectorXd weights) : n_(n), weights_(std::move(weights))
    {
        detail::require(weights_.size() >= 1, "inner product needs at least one weight");
        detail::require(weights_.allFinite() && (weights_.array() > 0.0).all(),
                        "inner-product weights must be finite and strictly positive");
    }

    int dimension() const { return n_; }
    Eigen::Index size() const { return weights_.size(); }
    const Eigen::VectorXd& weights() const { return weights_; }
    Eigen::MatrixXd matrix() const { return weights_.asDiagonal(); }

    double operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const
    {
        detail::require(a.size() == size() && b.size() == size(), "vector length does not match the inner product");
        return (a.array() * weights_.array() * b.array()).sum();
    }

private:
    int n_;
    Eigen::VectorXd weights_;
};

inline WeightedInnerProduct weighted_inner_product(const StructuralSimplex& s, int n)
{
    return WeightedInnerProduct(n, s.weights(n));
}

namespace detail {

inline void require_dense_capacity(Eigen::Index d)
{
    if (d > kMaxDenseDimension)
        throw CapacityError("dense operator of dimension " + std::to_string(d) + " exceeds the limit of " +
                            std::to_string(kMaxDenseDimension));
}

}  // namespace detail

/// Matrix of delta_n : C_n -> C_{n+1}, the w-adjoint of the boundary map.
inline Eigen::MatrixXd adjoint_matrix(const StructuralSimplex& s, int n)
{
    detail::require(n >= 0 && n < s.N(), "adjoint needs 0 <= n < N (got n = " + std::to_string(n) + ")");
    const Eigen::VectorXd& lower = s.weights(n);
    const Eigen::VectorXd& upper = s.weights(n + 1);
    detail::require_dense_capacity(std::max(lower.size(), upper.size()));
    const Eigen::SparseMatrix<double> p = boundary_matrix(s.N(), n + 1).to_sparse();
    Eigen::MatrixXd out = Eigen::MatrixXd(p.transpose());
    return upper.cwiseInverse().asDiagonal() * out * lower.asDiagonal();
}

/// Which matrix expression assembles the Laplacian.
enum class LaplacianForm {
    /// Derived from the operator definition with the boundary-map adjoint; self-adjoint.
    derived,
    /// The alternative printed matrix form with B_n read as P_{n+1}^T. Kept for
    /// comparison only; not self-adjoint in general.
    step4_printed,
};

inline std::string to_string(LaplacianForm f)
{
    return f == LaplacianForm::derived ? "derived" : "step4_printed";
}

inline LaplacianForm parse_laplacian_form(const std::string& name)
{
    if (name == "derived") return LaplacianForm::derived;
    if (name == "step4_printed" || name == "printed") return LaplacianForm::step4_printed;
    throw ValidationError("unknown Laplacian form '" + name + "'");
}

struct LaplaceOperator {
    int n = 0;
    LaplacianForm form = LaplacianForm::derived;
    Eigen::MatrixXd up;
    Eigen::MatrixXd down;

    Eigen::MatrixXd matrix() const { return up + down; }
    Eigen::Index size() const { return up.rows(); }
};

inline LaplaceOperator laplacian(const StructuralSimplex& s, int n, LaplacianForm form = LaplacianForm::derived)
{
    detail::validate_dimension(s.N(), n);
    const Eigen::VectorXd& w = s.weights(n);
    const Eigen::Index d = w.size();
    detail::require_dense_capacity(d);

    LaplaceOperator op;
    op.n = n;
    op.form = form;
    op.up = Eigen::MatrixXd::Zero(d, d);
    op.down = Eigen::MatrixXd::Zero(d, d);

    if (n < s.N()) {
        const Eigen::VectorXd& w_up = s.weights(n + 1);
        const Eigen::SparseMatrix<double> p = boundary_matrix(s.N(), n + 1).to_sparse();
        if (form == LaplacianForm::derived) {
            const Eigen::SparseMatrix<double> inner = p * w_up.cwiseInverse().asDiagonal() * p.transpose();
            op.up = Eigen::MatrixXd(inner) * w.asDiagonal();
        } else {
            const Eigen::SparseMatrix<double> inner = p * w_up.asDiagonal() * p.transpose();
            op.up = w.cwiseInverse().asDiagonal() * Eigen::MatrixXd(inner);
        }
    }
    if (n > 0) {
        const Eigen::VectorXd& w_down = s.weights(n - 1);
        const Eigen::SparseMatrix<double> p = boundary_matrix(s.N(), n).to_sparse();
        if (form == LaplacianForm::derived) {
            const Eigen::SparseMatrix<double> inner = p.transpose() * w_down.asDiagonal() * p;
            op.down = w.cwiseInverse().asDiagonal() * Eigen::MatrixXd(inner);
        } else {
            const Eigen::SparseMatrix<double> inner = p.transpose() * w_down.cwiseInverse().asDiagonal() * p;
            op.down = Eigen::MatrixXd(inner) * w.asDiagonal();
        }
    }
    return op;
}

/// ||W L - (W L)^T||_F / ||W L||_F; zero for the zero operator.
inline double self_adjointness_residual(const Eigen::MatrixXd& l, const WeightedInnerProduct& inner)
{
    const Eigen::MatrixXd wl = inner.weights().asDiagonal() * l;
    const double scale = wl.norm();
    return scale == 0.0 ? 0.0 : (wl - wl.transpose()).norm() / scale;
}

struct BasisDiagnostics {
    double self_adjointness = 0.0;  ///< ||W L - (W L)^T|| / ||W L||
    double diagonalization = 0.0;   ///< ||F L F^{-1} - diag(eigenvalues)|| / ||L||
    double orthonormality = 0.0;    ///< ||(F^{-1})^T W F^{-1} - I||
    double inverse = 0.0;           ///< ||F F^{-1} - I||
};

/// w-orthonormal eigenbasis of an n-Laplace operator.
///
/// Columns of `inverse` are eigenvectors in canonical coordinates; `forward`
/// maps canonical coefficients to Fourier coefficients. Eigenvalues ascend.
/// Within a degenerate eigenspace any orthonormal basis the solver returns is
/// accepted, so coefficients inside such an eigenspace are basis dependent.
struct FourierBasis {
    int n = 0;
    LaplacianForm form = LaplacianForm::derived;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd forward;
    Eigen::MatrixXd inverse;
    WeightedInnerProduct inner{0, Eigen::VectorXd::Ones(1)};
    BasisDiagnostics diagnostics;

    Eigen::Index size() const { return eigenvalues.size(); }
};

namespace detail {

/// Flips each column so its first entry that is not negligible is positive.
inline void fix_signs(Eigen::MatrixXd& columns, Eigen::MatrixXd* paired = nullptr)
{
    for (Eigen::Index c = 0; c < columns.cols(); ++c) {
        const double scale = columns.col(c).cwiseAbs().maxCoeff();
        for (Eigen::Index r = 0; r < columns.rows(); ++r) {
            if (std::abs(columns(r, c)) > 1e-12 * scale) {
                if (columns(r, c) < 0.0) {
                    columns.col(c) *= -1.0;
                    if (paired)
                        paired->col(c) *= -1.0;
                }
                break;
            }
        }
    }
}

inline BasisDiagnostics diagnose(const Eigen::MatrixXd& l, const FourierBasis& b)
{
    const Eigen::Index d = l.rows();
    BasisDiagnostics diag;
    diag.self_adjointness = self_adjointness_residual(l, b.inner);
    const double scale = l.norm();
    const Eigen::MatrixXd conj = b.forward * l * b.inverse;
    const Eigen::MatrixXd lambda = b.eigenvalues.asDiagonal();
    diag.diagonalization = scale == 0.0 ? (conj - lambda).norm() : (conj - lambda).norm() / scale;
    diag.orthonormality =
        (b.inverse.transpose() * b.inner.weights().asDiagonal() * b.inverse - Eigen::MatrixXd::Identity(d, d)).norm();
    diag.inverse = (b.forward * b.inverse - Eigen::MatrixXd::Identity(d, d)).norm();
    return diag;
}

inline FourierBasis whitened_basis(const LaplaceOperator& op, const WeightedInnerProduct& inner)
{
    const Eigen::MatrixXd l = op.matrix();
    const Eigen::VectorXd root = inner.weights().cwiseSqrt();
    const Eigen::VectorXd inv_root = root.cwiseInverse();

    Eigen::MatrixXd sym = root.asDiagonal() * l * inv_root.asDiagonal();
    sym = 0.5 * (sym + sym.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success)
        throw NumericalError("symmetric eigensolver failed for the " + std::to_string(op.n) +
                             "-Laplacian (self-adjointness residual " +
                             std::to_string(self_adjointness_residual(l, inner)) + ")");

    Eigen::MatrixXd q = solver.eigenvectors();
    FourierBasis b;
    b.n = op.n;
    b.form = op.form;
    b.inner = inner;
    b.eigenvalues = solver.eigenvalues();
    b.inverse = inv_root.asDiagonal() * q;
    fix_signs(b.inverse, &q);
    b.forward = q.transpose() * root.asDiagonal();
    b.diagnostics = diagnose(l, b);
    return b;
}

inline FourierBasis general_basis(const LaplaceOperator& op, const WeightedInnerProduct& inner)
{
    const Eigen::MatrixXd l = op.matrix();
    Eigen::EigenSolver<Eigen::MatrixXd> solver(l);
    if (solver.info() != Eigen::Success)
        throw NumericalError("general eigensolver failed for the " + std::to_string(op.n) + "-Laplacian");
    const Eigen::VectorXcd values = solver.eigenvalues();
    const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    if (values.imag().cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw NumericalError("Laplacian has a complex spectrum; no real Fourier basis exists");

    const Eigen::Index d = l.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return values(a).real() < values(b).real(); });

    const Eigen::MatrixXd vectors = solver.eigenvectors().real();
    FourierBasis b;
    b.n = op.n;
    b.form = op.form;
    b.inner = inner;
    b.eigenvalues.resize(d);
    b.inverse.resize(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        Eigen::VectorXd v = vectors.col(order[static_cast<std::size_t>(k)]);
        v /= std::sqrt(inner(v, v));
        b.inverse.col(k) = v;
        b.eigenvalues(k) = values(order[static_cast<std::size_t>(k)]).real();
    }
    fix_signs(b.inverse);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(b.inverse);
    if (!lu.isInvertible())
        throw NumericalError("eigenvectors of the " + std::to_string(op.n) + "-Laplacian are not independent");
    b.forward = lu.inverse();
    b.diagnostics = diagnose(l, b);
    return b;
}

}  // namespace detail

inline FourierBasis fourier_basis(const LaplaceOperator& op, const WeightedInnerProduct& inner)
{
    detail::require(op.size() == inner.size(), "Laplacian and inner product have different dimensions");
    return op.form == LaplacianForm::derived ? detail::whitened_basis(op, inner) : detail::general_basis(op, inner);
}

/// Convenience: Laplacian and its Fourier basis for dimension n.
inline FourierBasis fourier_basis(const StructuralSimplex& s, int n, LaplacianForm form = LaplacianForm::derived)
{
    return fourier_basis(laplacian(s, n, form), weighted_inner_product(s, n));
}

/// Default relative threshold below which an eigenvalue counts as zero.
inline constexpr double kKernelTolerance = 1e-8;

/// Number of eigenvalues below tolerance * largest eigenvalue.
inline int kernel_dimension(const Eigen::VectorXd& eigenvalues, double relative_tolerance = kKernelTolerance)
{
    const double largest = eigenvalues.maxCoeff();
    if (largest <= 0.0)
        return static_cast<int>(eigenvalues.size());
    return static_cast<int>((eigenvalues.array() < relative_tolerance * largest).count());
}

}  // namespace hyperharmonic
