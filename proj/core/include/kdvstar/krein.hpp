#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace kdvstar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class KreinSide { Minus, Plus };

// Boundary data is stacked as (u(0), u'(0), u''(0)), each block holding one
// entry per edge in graph order. B has the block layout
//   [[-beta, 0, alpha], [0, -alpha, 0], [alpha, 0, 0]]
// with diagonal blocks.
struct KreinForm {
    Matrix B;
    KreinSide side = KreinSide::Minus;
    std::size_t edges() const { return static_cast<std::size_t>(B.rows() / 3); }
};

KreinForm build_B(const std::vector<double>& alphas, const std::vector<double>& betas,
                  KreinSide side = KreinSide::Minus);

double indefinite_inner(const KreinForm& K, const Vector& x, const Vector& y);

// L maps minus boundary data (3n) to plus boundary data (3m), so L is 3m x 3n.
Matrix sharp_adjoint(const KreinForm& Kminus, const KreinForm& Kplus, const Matrix& L);

struct UnitaryVerdict {
    bool pass = false;
    double residual = 0.0;  // max |L^T B+ L - B-|
};

UnitaryVerdict is_krein_unitary(const KreinForm& Kminus, const KreinForm& Kplus,
                                const Matrix& L, double tol);

struct ContractiveVerdict {
    bool pass = false;
    double min_eig_forward = 0.0;  // of B- - L^T B+ L
    double min_eig_adjoint = 0.0;  // of B+ - L#^T B- L#
};

ContractiveVerdict is_krein_contractive(const KreinForm& Kminus, const KreinForm& Kplus,
                                        const Matrix& L, double tol);

// U maps (R^{E+}, alpha+) to (R^{E-}, alpha-), so U is |E-| x |E+|.
struct WeightedVerdict {
    bool pass = false;
    double residual = 0.0;  // unitary: max |U^T D- U - D+|; contraction: -min eig, floored at 0
};

WeightedVerdict is_weighted_unitary(const Matrix& U, const std::vector<double>& alphas_minus,
                                    const std::vector<double>& alphas_plus, double tol);
WeightedVerdict is_weighted_contraction(const Matrix& U,
                                        const std::vector<double>& alphas_minus,
                                        const std::vector<double>& alphas_plus, double tol);

// Smallest eigenvalue of a symmetric matrix (the symmetric part is used).
double min_symmetric_eigenvalue(const Matrix& S);

// (Y, U) coupling data: Y given by spanning columns in R^{E-} + R^{E+}.
struct YUCoupling {
    Matrix Y;
    Matrix U;
};

// Orthonormal basis of span(Y) and of its Euclidean complement. Throws
// DimensionError when the spanning columns are dependent.
Matrix orthonormal_basis(const Matrix& Y, double tol = 1e-12);
Matrix orthogonal_complement(const Matrix& Y, double tol = 1e-12);

}  // namespace kdvstar
