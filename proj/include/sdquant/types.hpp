#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace sdquant {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Thrown when a normal matrix or triangular factor is numerically singular.
class singular_operator_error : public std::runtime_error {
public:
    explicit singular_operator_error(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when an iterative numeric kernel (e.g. SVD) fails to converge.
class numeric_failure : public std::runtime_error {
public:
    explicit numeric_failure(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown on file I/O problems; carries the offending path in the message.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

/// max_i |v_i| (complex modulus per entry).
inline double max_abs(const ComplexVector& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// Component-wise sup norm: max over entries of |Re| and |Im|. This is the
// norm the decoders use for their feasibility tubes, so that the state bound
// |Re u_i|, |Im u_i| <= delta/2 keeps the quantized instance's true signal
// feasible.
inline double box_inf_norm(const ComplexVector& v) {
    double m = 0.0;
    for (Index i = 0; i < v.size(); ++i) {
        m = std::max(m, std::abs(v[i].real()));
        m = std::max(m, std::abs(v[i].imag()));
    }
    return m;
}

inline bool all_finite(const ComplexMatrix& m) {
    return m.array().isFinite().all();
}

} // namespace sdquant
