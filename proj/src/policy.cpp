#include "crmopo/policy.hpp"

#include <stdexcept>

namespace crmopo {

Matrix policy_from_params(const Matrix& params) {
    if (!params.allFinite()) throw std::invalid_argument("policy parameters must be finite");
    Matrix probs(params.rows(), params.cols());
    for (Eigen::Index s = 0; s < params.rows(); ++s) {
        double shift = params.row(s).maxCoeff();
        probs.row(s) = (params.row(s).array() - shift).exp();
        probs.row(s) /= probs.row(s).sum();
    }
    return probs;
}

Matrix score_function(const Matrix& policy, int s, int a) {
    if (s < 0 || s >= policy.rows() || a < 0 || a >= policy.cols())
        throw std::out_of_range("score_function: state or action index out of range");
    Matrix score = Matrix::Zero(policy.rows(), policy.cols());
    score.row(s) = -policy.row(s);
    score(s, a) += 1.0;
    return score;
}

}  // namespace crmopo
