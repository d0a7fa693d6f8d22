// hilbert.hpp — Truncated composite Fock spaces, operators and states.
//
// Basis convention: modes are ordered as declared; basis index is row-major
// over that order, i.e. the first declared mode is the most significant
// digit. Operators are stored sparse (column-major CSC); states are dense.

#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "ensq/errors.hpp"

namespace ensq {

using cplx = std::complex<double>;
using SpMat = Eigen::SparseMatrix<cplx>;
using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;

struct Mode {
    std::string label;
    int dim{0};
};

class HilbertSpace {
public:
    HilbertSpace() = default;
    explicit HilbertSpace(std::vector<Mode> modes);

    int total_dim() const { return total_dim_; }
    int n_modes() const { return static_cast<int>(modes_.size()); }
    const Mode& mode(int i) const { return modes_.at(static_cast<std::size_t>(i)); }
    const std::vector<Mode>& modes() const { return modes_; }

    bool has_mode(const std::string& label) const;
    int mode_index(const std::string& label) const; // throws on unknown label
    int dim_of(const std::string& label) const { return modes_[static_cast<std::size_t>(mode_index(label))].dim; }

    // Row-major stride of mode i: product of dims of all later modes.
    int stride(int mode_idx) const;

    // Basis index of a full occupation vector (one entry per mode).
    int basis_index(const std::vector<int>& occupations) const;

    bool operator==(const HilbertSpace& other) const;
    bool operator!=(const HilbertSpace& other) const { return !(*this == other); }

private:
    std::vector<Mode> modes_;
    int total_dim_{0};
};

HilbertSpace make_space(const std::vector<std::pair<std::string, int>>& mode_specs);

class Operator {
public:
    Operator() = default;
    Operator(HilbertSpace space, SpMat matrix);

    const HilbertSpace& space() const { return space_; }
    const SpMat& sparse() const { return mat_; }
    DenseMatrix dense() const { return DenseMatrix(mat_); }
    int dim() const { return space_.total_dim(); }
    long nnz() const { return mat_.nonZeros(); }

    Operator dagger() const;
    bool is_hermitian(double tol = 1e-12) const;
    double max_abs() const;

    Operator& operator+=(const Operator& rhs);
    Operator& operator-=(const Operator& rhs);
    Operator& operator*=(cplx scalar);

    friend Operator operator+(Operator lhs, const Operator& rhs) { return lhs += rhs; }
    friend Operator operator-(Operator lhs, const Operator& rhs) { return lhs -= rhs; }
    friend Operator operator*(cplx scalar, Operator op) { return op *= scalar; }
    friend Operator operator*(Operator op, cplx scalar) { return op *= scalar; }
    friend Operator operator*(const Operator& lhs, const Operator& rhs);

private:
    HilbertSpace space_;
    SpMat mat_;
};

Operator commutator(const Operator& a, const Operator& b);

// Elementary operators, embedded on the full space by identity-tensoring.
Operator identity_op(const HilbertSpace& space);
Operator annihilation(const HilbertSpace& space, const std::string& label);
Operator creation(const HilbertSpace& space, const std::string& label);
Operator number_op(const HilbertSpace& space, const std::string& label);
Operator parity_operator(const HilbertSpace& space, const std::string& label);
// |i><j| on one mode, identity elsewhere.
Operator transition_op(const HilbertSpace& space, const std::string& label, int i, int j);
// Embed an arbitrary single-mode matrix.
Operator embed(const HilbertSpace& space, const std::string& label, const DenseMatrix& local);

struct StateVector {
    HilbertSpace space;
    DenseVector amps;

    double norm() const { return amps.norm(); }
};

struct DensityMatrix {
    HilbertSpace space;
    DenseMatrix mat;

    cplx trace() const { return mat.trace(); }
    double hermiticity_error() const;
    double min_eigenvalue() const;
    // trace = 1 +- 1e-10, Hermiticity <= 1e-12, min eigenvalue >= -1e-8
    void validate() const;
};

StateVector basis_state(const HilbertSpace& space, const std::vector<int>& occupations);
// Coherent amplitude alpha on `label`, vacuum on every other mode. Errors if
// the truncated Poisson tail beyond the mode dimension exceeds 1e-6.
StateVector coherent_state(const HilbertSpace& space, const std::string& label, cplx alpha);
double coherent_tail_weight(cplx alpha, int dim);

DensityMatrix pure_density(const StateVector& psi);

cplx expectation(const DensityMatrix& rho, const Operator& op);
cplx expectation(const StateVector& psi, const Operator& op);

double max_abs_diff(const Operator& a, const Operator& b);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

} // namespace ensq
