#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "pgr/error.hpp"
#include "pgr/types.hpp"

namespace pgr {

// Rows of Z are unit-norm embeddings laid out in anchor/positive pairs:
// row 2k is anchor k, row 2k+1 is its positive. All similarities are scaled
// dot products s_ij = <z_i, z_j> / tau.

template <class Scalar>
MatX<Scalar> similarity_matrix(const MatX<Scalar>& z, Scalar tau) {
    if (!(tau > Scalar(0))) throw RangeError("temperature must be positive");
    for (long i = 0; i < z.rows(); ++i) {
        Scalar n = z.row(i).norm();
        if (std::abs(n - Scalar(1)) > Scalar(1e-6))
            throw NormViolation("embedding row " + std::to_string(i) +
                                " has norm " + std::to_string(static_cast<double>(n)));
    }
    return (z * z.transpose()) / tau;
}

inline long partner_row(long i) { return (i % 2 == 0) ? i + 1 : i - 1; }

// Mean of the per-row cross-entropy terms: each row treats its pair partner
// as the single positive among all other rows in the batch.
template <class Scalar>
Scalar info_nce_loss(const MatX<Scalar>& z, Scalar tau) {
    const long rows = z.rows();
    if (rows == 0 || rows % 2 != 0)
        throw DimensionMismatch("batch must contain whole anchor/positive pairs");
    MatX<Scalar> s = similarity_matrix(z, tau);
    Scalar total = 0;
    for (long i = 0; i < rows; ++i) {
        Scalar mx = -std::numeric_limits<Scalar>::infinity();
        for (long j = 0; j < rows; ++j)
            if (j != i) mx = std::max(mx, s(i, j));
        Scalar denom = 0;
        for (long j = 0; j < rows; ++j)
            if (j != i) denom += std::exp(s(i, j) - mx);
        total += -(s(i, partner_row(i)) - mx - std::log(denom));
    }
    return total / Scalar(rows);
}

// Loss plus dL/dZ. With G_ij = (softmax over j != i of s_ij minus the
// partner indicator) / rows, the gradient is (G + G^T) Z / tau.
template <class Scalar>
Scalar info_nce_loss_and_grad(const MatX<Scalar>& z, Scalar tau, MatX<Scalar>& grad_z) {
    const long rows = z.rows();
    if (rows == 0 || rows % 2 != 0)
        throw DimensionMismatch("batch must contain whole anchor/positive pairs");
    MatX<Scalar> s = similarity_matrix(z, tau);
    MatX<Scalar> g = MatX<Scalar>::Zero(rows, rows);
    Scalar total = 0;
    for (long i = 0; i < rows; ++i) {
        Scalar mx = -std::numeric_limits<Scalar>::infinity();
        for (long j = 0; j < rows; ++j)
            if (j != i) mx = std::max(mx, s(i, j));
        Scalar denom = 0;
        for (long j = 0; j < rows; ++j)
            if (j != i) denom += std::exp(s(i, j) - mx);
        const long p = partner_row(i);
        total += -(s(i, p) - mx - std::log(denom));
        for (long j = 0; j < rows; ++j) {
            if (j == i) continue;
            Scalar soft = std::exp(s(i, j) - mx) / denom;
            g(i, j) = (soft - (j == p ? Scalar(1) : Scalar(0))) / Scalar(rows);
        }
    }
    grad_z.noalias() = (g + g.transpose()) * z / tau;
    return total / Scalar(rows);
}

}  // namespace pgr
