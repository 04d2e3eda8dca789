#include "waveinform/covariance.hpp"

#include <sstream>

namespace waveinform {

JitteredCholesky factorize_with_jitter(const Eigen::MatrixXd& A) {
    JitteredCholesky out;
    if (A.rows() == 0) return out;
    out.llt.compute(A);
    if (out.llt.info() == Eigen::Success) return out;

    const double mean_diag = A.diagonal().mean();
    std::vector<double> tried;
    const double base = mean_diag > 0.0 ? mean_diag : 1.0;
    for (double rel = 1e-10; rel <= 1e-4 * (1 + 1e-9); rel *= 10.0) {
        const double jitter = rel * base;
        tried.push_back(jitter);
        Eigen::MatrixXd B = A;
        B.diagonal().array() += jitter;
        out.llt.compute(B);
        if (out.llt.info() == Eigen::Success) {
            out.jitter = jitter;
            return out;
        }
    }
    std::ostringstream os;
    os << "Cholesky failed on " << A.rows() << "x" << A.rows()
       << " covariance after jitters up to " << tried.back();
    throw SingularCovarianceError(os.str(), std::move(tried));
}

}  // namespace waveinform
