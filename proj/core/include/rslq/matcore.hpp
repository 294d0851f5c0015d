#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <string_view>

namespace rslq {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raised when an operation receives malformed or non-finite data.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double kDefaultPinvTol = 1e-12;
inline constexpr double kDefaultRangeTol = 1e-8;

bool all_finite(const Mat& m);

/// Throws InvalidInput naming `what` if `m` holds a NaN or Inf.
void require_finite(const Mat& m, std::string_view what);

/// Square symmetric matrix. Construction from an arbitrary square matrix
/// stores (M + M^T)/2, so entries(i,j) == entries(j,i) holds bit-for-bit.
class SymMat {
public:
    SymMat() = default;
    explicit SymMat(Index dim);
    explicit SymMat(const Mat& m);

    static SymMat zero(Index dim) { return SymMat(dim); }
    static SymMat identity(Index dim);

    Index dim() const { return m_.rows(); }
    const Mat& mat() const { return m_; }
    double operator()(Index i, Index j) const { return m_(i, j); }

    SymMat& operator+=(const SymMat& o);
    SymMat& operator-=(const SymMat& o);
    SymMat& operator*=(double s);

    friend SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
    friend SymMat operator-(SymMat a, const SymMat& b) { return a -= b; }
    friend SymMat operator*(double s, SymMat a) { return a *= s; }
    friend SymMat operator*(SymMat a, double s) { return a *= s; }

    bool operator==(const SymMat& o) const { return m_ == o.m_; }

private:
    Mat m_;
};

/// Moore-Penrose pseudo-inverse via SVD. Singular values below
/// rel_tol * sigma_max are treated as zero.
Mat pinv(const Mat& m, double rel_tol = kDefaultPinvTol);

/// Smallest eigenvalue of a symmetric matrix (self-adjoint tridiagonal solver).
double min_eig_sym(const SymMat& m);

/// true iff ||(I - R R^+) S||_F <= tol * max(1, ||S||_F), i.e. range(S) lies in
/// range(R) up to tolerance.
bool range_included(const Mat& s, const SymMat& r, double tol = kDefaultRangeTol);

/// Residual ||(I - R R^+) S||_F used by range_included.
double range_defect(const Mat& s, const SymMat& r, double pinv_tol = kDefaultPinvTol);

/// Frobenius-norm sup helper for matrices of matching shape.
inline double frob_dist(const Mat& a, const Mat& b) { return (a - b).norm(); }

}  // namespace rslq
