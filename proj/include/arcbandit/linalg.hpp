#pragma once

#include <Eigen/Dense>

#include <cmath>

namespace arcbandit {

using Index = Eigen::Index;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;

/// Frobenius norm, sqrt(<A;A>) = sqrt(Tr(A^T A)).
template <class Derived>
typename Derived::Scalar frobenius_norm(const Eigen::MatrixBase<Derived>& m)
{
    return m.norm();
}

template <class Derived>
void symmetrize(Eigen::MatrixBase<Derived>& m)
{
    m = (0.5 * (m + m.transpose())).eval();
}

/// Clamps the spectrum of a symmetric matrix from below. Returns true when
/// the matrix was modified.
template <class Scalar>
bool floor_eigenvalues(Matrix<Scalar>& m, Scalar floor)
{
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(m);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() >= floor)
        return false;
    Vector<Scalar> ev = es.eigenvalues().cwiseMax(floor);
    m = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    symmetrize(m);
    return true;
}

/// Lowest index attaining the maximum.
template <class Derived>
Index argmax_lowest(const Eigen::DenseBase<Derived>& v)
{
    Index best = 0;
    for (Index i = 1; i < v.size(); ++i)
        if (v(i) > v(best))
            best = i;
    return best;
}

} // namespace arcbandit
