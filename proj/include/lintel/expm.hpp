#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace lintel {

namespace detail {

inline Eigen::MatrixXd pade_solve(const Eigen::MatrixXd& odd_part,
                                  const Eigen::MatrixXd& even_part) {
    // r(A) = (V - U)^{-1} (V + U) with U the odd and V the even polynomial part
    return Eigen::PartialPivLU<Eigen::MatrixXd>(even_part - odd_part)
        .solve(even_part + odd_part);
}

} // namespace detail

/// Matrix exponential by scaling and squaring with diagonal Pade
/// approximants (degrees 3/5/7/9/13 picked from the 1-norm).
inline Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& mat) {
    const auto n = mat.rows();
    if (n == 1) {
        Eigen::MatrixXd out(1, 1);
        out(0, 0) = std::exp(mat(0, 0));
        return out;
    }

    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
    const double norm = mat.cwiseAbs().colwise().sum().maxCoeff();

    const Eigen::MatrixXd mat2 = mat * mat;
    if (norm <= 1.495585217958292e-2) {
        const double b[] = {120., 60., 12., 1.};
        const Eigen::MatrixXd odd = mat * (b[3] * mat2 + b[1] * identity);
        const Eigen::MatrixXd even = b[2] * mat2 + b[0] * identity;
        return detail::pade_solve(odd, even);
    }
    const Eigen::MatrixXd mat4 = mat2 * mat2;
    if (norm <= 2.539398330063230e-1) {
        const double b[] = {30240., 15120., 3360., 420., 30., 1.};
        const Eigen::MatrixXd odd = mat * (b[5] * mat4 + b[3] * mat2 + b[1] * identity);
        const Eigen::MatrixXd even = b[4] * mat4 + b[2] * mat2 + b[0] * identity;
        return detail::pade_solve(odd, even);
    }
    const Eigen::MatrixXd mat6 = mat4 * mat2;
    if (norm <= 9.504178996162932e-1) {
        const double b[] = {17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
        const Eigen::MatrixXd odd =
            mat * (b[7] * mat6 + b[5] * mat4 + b[3] * mat2 + b[1] * identity);
        const Eigen::MatrixXd even = b[6] * mat6 + b[4] * mat4 + b[2] * mat2 + b[0] * identity;
        return detail::pade_solve(odd, even);
    }
    if (norm <= 2.097847961257068) {
        const double b[] = {17643225600., 8821612800., 2075673600., 302702400.,
                            30270240.,   2162160.,    110880.,     3960.,
                            90.,         1.};
        const Eigen::MatrixXd mat8 = mat4 * mat4;
        const Eigen::MatrixXd odd =
            mat * (b[9] * mat8 + b[7] * mat6 + b[5] * mat4 + b[3] * mat2 + b[1] * identity);
        const Eigen::MatrixXd even =
            b[8] * mat8 + b[6] * mat6 + b[4] * mat4 + b[2] * mat2 + b[0] * identity;
        return detail::pade_solve(odd, even);
    }

    // Degree 13 with scaling: exp(A) = (r13(A / 2^s))^(2^s)
    const double theta13 = 5.371920351148152;
    int squarings = 0;
    double scale = 1.0;
    if (norm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
        scale = std::ldexp(1.0, -squarings);
    }
    const Eigen::MatrixXd a = mat * scale;
    const Eigen::MatrixXd a2 = mat2 * (scale * scale);
    const Eigen::MatrixXd a4 = a2 * a2;
    const Eigen::MatrixXd a6 = a4 * a2;
    const double b[] = {64764752532480000., 32382376266240000., 7771770303897600.,
                        1187353796428800.,  129060195264000.,   10559470521600.,
                        670442572800.,      33522128640.,       1323241920.,
                        40840800.,          960960.,            16380.,
                        182.,               1.};
    const Eigen::MatrixXd odd =
        a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
             b[3] * a2 + b[1] * identity);
    const Eigen::MatrixXd even = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 +
                                 b[4] * a4 + b[2] * a2 + b[0] * identity;
    Eigen::MatrixXd result = detail::pade_solve(odd, even);
    for (int i = 0; i < squarings; ++i) result = result * result;
    return result;
}

} // namespace lintel
