#pragma once

#include <Eigen/Dense>

namespace crmopo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Tables indexed (state, action) are flattened row-major: index = s * n_actions + a.
// Gradient vectors, Fisher blocks and direction vectors all share this layout.
inline Vector flatten(const Matrix& table) {
    Vector v(table.size());
    for (Eigen::Index s = 0; s < table.rows(); ++s)
        for (Eigen::Index a = 0; a < table.cols(); ++a)
            v(s * table.cols() + a) = table(s, a);
    return v;
}

inline Matrix unflatten(const Vector& v, Eigen::Index n_states, Eigen::Index n_actions) {
    Matrix table(n_states, n_actions);
    for (Eigen::Index s = 0; s < n_states; ++s)
        for (Eigen::Index a = 0; a < n_actions; ++a)
            table(s, a) = v(s * n_actions + a);
    return table;
}

}  // namespace crmopo
