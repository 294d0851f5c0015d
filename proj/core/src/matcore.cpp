#include "rslq/matcore.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace rslq {

bool all_finite(const Mat& m) { return m.allFinite(); }

void require_finite(const Mat& m, std::string_view what)
{
    if (!m.allFinite()) {
        throw InvalidInput(std::string(what) + ": non-finite entry");
    }
}

SymMat::SymMat(Index dim) : m_(Mat::Zero(dim, dim)) {}

SymMat::SymMat(const Mat& m)
{
    if (m.rows() != m.cols()) {
        throw InvalidInput("SymMat: matrix is not square");
    }
    // a + b == b + a in IEEE arithmetic, so the result is exactly symmetric.
    m_ = 0.5 * (m + m.transpose());
}

SymMat SymMat::identity(Index dim)
{
    SymMat s(dim);
    s.m_.setIdentity();
    return s;
}

SymMat& SymMat::operator+=(const SymMat& o)
{
    m_ += o.m_;
    return *this;
}

SymMat& SymMat::operator-=(const SymMat& o)
{
    m_ -= o.m_;
    return *this;
}

SymMat& SymMat::operator*=(double s)
{
    m_ *= s;
    return *this;
}

Mat pinv(const Mat& m, double rel_tol)
{
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
        throw InvalidInput("pinv: rel_tol must lie in (0, 1)");
    }
    require_finite(m, "pinv");
    if (m.size() == 0) {
        return Mat::Zero(m.cols(), m.rows());
    }

    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    const double cutoff = rel_tol * (sv.size() > 0 ? sv(0) : 0.0);

    Vec inv_sv = Vec::Zero(sv.size());
    for (Index k = 0; k < sv.size(); ++k) {
        if (sv(k) > cutoff && sv(k) > 0.0) {
            inv_sv(k) = 1.0 / sv(k);
        }
    }
    return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

double min_eig_sym(const SymMat& m)
{
    if (m.dim() == 0) {
        throw InvalidInput("min_eig_sym: empty matrix");
    }
    require_finite(m.mat(), "min_eig_sym");
    Eigen::SelfAdjointEigenSolver<Mat> es(m.mat(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double range_defect(const Mat& s, const SymMat& r, double pinv_tol)
{
    if (s.rows() != r.dim()) {
        throw InvalidInput("range_included: row count of S must equal dim of R");
    }
    require_finite(s, "range_included(S)");
    const Mat proj = r.mat() * pinv(r.mat(), pinv_tol);
    return (s - proj * s).norm();
}

bool range_included(const Mat& s, const SymMat& r, double tol)
{
    return range_defect(s, r) <= tol * std::max(1.0, s.norm());
}

}  // namespace rslq
