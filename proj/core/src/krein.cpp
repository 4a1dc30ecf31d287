#include "kdvstar/krein.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kdvstar {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw DimensionError(what);
}

Vector diag_of(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

KreinForm build_B(const std::vector<double>& alphas, const std::vector<double>& betas, KreinSide side) {
    require(alphas.size() == betas.size(), "alphas and betas differ in length");
    for (double a : alphas)
        if (!(a > 0.0)) throw std::invalid_argument("alpha must be positive");
    auto n = static_cast<Eigen::Index>(alphas.size());
    KreinForm K;
    K.side = side;
    K.B = Matrix::Zero(3 * n, 3 * n);
    for (Eigen::Index e = 0; e < n; ++e) {
        double a = alphas[static_cast<std::size_t>(e)], b = betas[static_cast<std::size_t>(e)];
        K.B(e, e) = -b;
        K.B(e, 2 * n + e) = a;
        K.B(2 * n + e, e) = a;
        K.B(n + e, n + e) = -a;
    }
    return K;
}

double indefinite_inner(const KreinForm& K, const Vector& x, const Vector& y) {
    require(x.size() == K.B.rows() && y.size() == K.B.rows(), "boundary vector has the wrong length");
    return (K.B * x).dot(y);
}

Matrix sharp_adjoint(const KreinForm& Km, const KreinForm& Kp, const Matrix& L) {
    require(L.rows() == Kp.B.rows() && L.cols() == Km.B.rows(), "L must be 3|E+| x 3|E-|");
    return Km.B.partialPivLu().solve(L.transpose() * Kp.B);
}

UnitaryVerdict is_krein_unitary(const KreinForm& Km, const KreinForm& Kp, const Matrix& L, double tol) {
    require(L.rows() == Kp.B.rows() && L.cols() == Km.B.rows(), "L must be 3|E+| x 3|E-|");
    UnitaryVerdict v;
    v.residual = (L.transpose() * Kp.B * L - Km.B).cwiseAbs().maxCoeff();
    v.pass = v.residual <= tol;
    return v;
}

double min_symmetric_eigenvalue(const Matrix& S) {
    if (S.size() == 0) return 0.0;
    Matrix sym = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

ContractiveVerdict is_krein_contractive(const KreinForm& Km, const KreinForm& Kp, const Matrix& L,
                                        double tol) {
    require(L.rows() == Kp.B.rows() && L.cols() == Km.B.rows(), "L must be 3|E+| x 3|E-|");
    Matrix Ls = sharp_adjoint(Km, Kp, L);
    ContractiveVerdict v;
    v.min_eig_forward = min_symmetric_eigenvalue(Km.B - L.transpose() * Kp.B * L);
    v.min_eig_adjoint = min_symmetric_eigenvalue(Kp.B - Ls.transpose() * Km.B * Ls);
    v.pass = v.min_eig_forward >= -tol && v.min_eig_adjoint >= -tol;
    return v;
}

namespace {

void check_weighted(const Matrix& U, const std::vector<double>& am, const std::vector<double>& ap) {
    require(U.rows() == static_cast<Eigen::Index>(am.size()) &&
                U.cols() == static_cast<Eigen::Index>(ap.size()),
            "U must be |E-| x |E+|");
    for (double a : am)
        if (!(a > 0.0)) throw std::invalid_argument("weights must be positive");
    for (double a : ap)
        if (!(a > 0.0)) throw std::invalid_argument("weights must be positive");
}

}  // namespace

WeightedVerdict is_weighted_unitary(const Matrix& U, const std::vector<double>& am,
                                    const std::vector<double>& ap, double tol) {
    check_weighted(U, am, ap);
    Matrix G = U.transpose() * diag_of(am).asDiagonal() * U;
    G -= diag_of(ap).asDiagonal();
    WeightedVerdict v;
    v.residual = G.size() ? G.cwiseAbs().maxCoeff() : 0.0;
    v.pass = v.residual <= tol;
    return v;
}

WeightedVerdict is_weighted_contraction(const Matrix& U, const std::vector<double>& am,
                                        const std::vector<double>& ap, double tol) {
    check_weighted(U, am, ap);
    Matrix G = Matrix(diag_of(ap).asDiagonal()) - U.transpose() * diag_of(am).asDiagonal() * U;
    WeightedVerdict v;
    v.residual = std::max(0.0, -min_symmetric_eigenvalue(G));
    v.pass = v.residual <= tol;
    return v;
}

Matrix orthonormal_basis(const Matrix& Y, double tol) {
    Eigen::ColPivHouseholderQR<Matrix> qr(Y);
    qr.setThreshold(tol);
    if (qr.rank() != Y.cols()) throw DimensionError("spanning set of Y is linearly dependent");
    Matrix Q = qr.householderQ();
    return Q.leftCols(Y.cols());
}

Matrix orthogonal_complement(const Matrix& Y, double tol) {
    Eigen::ColPivHouseholderQR<Matrix> qr(Y);
    qr.setThreshold(tol);
    if (qr.rank() != Y.cols()) throw DimensionError("spanning set of Y is linearly dependent");
    Matrix Q = qr.householderQ();
    return Q.rightCols(Y.rows() - Y.cols());
}

}  // namespace kdvstar
