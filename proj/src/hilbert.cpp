#include "ensq/hilbert.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <set>

namespace ensq {

HilbertSpace::HilbertSpace(std::vector<Mode> modes) : modes_(std::move(modes)) {
    if (modes_.empty()) throw ConfigError("HilbertSpace: at least one mode required");
    std::set<std::string> seen;
    total_dim_ = 1;
    for (const auto& m : modes_) {
        if (m.dim < 2) throw ConfigError("HilbertSpace: mode '" + m.label + "' has dim < 2");
        if (!seen.insert(m.label).second)
            throw ConfigError("HilbertSpace: duplicate mode label '" + m.label + "'");
        total_dim_ *= m.dim;
    }
}

bool HilbertSpace::has_mode(const std::string& label) const {
    for (const auto& m : modes_)
        if (m.label == label) return true;
    return false;
}

int HilbertSpace::mode_index(const std::string& label) const {
    for (std::size_t i = 0; i < modes_.size(); ++i)
        if (modes_[i].label == label) return static_cast<int>(i);
    throw ConfigError("HilbertSpace: unknown mode label '" + label + "'");
}

int HilbertSpace::stride(int mode_idx) const {
    int s = 1;
    for (std::size_t j = static_cast<std::size_t>(mode_idx) + 1; j < modes_.size(); ++j)
        s *= modes_[j].dim;
    return s;
}

int HilbertSpace::basis_index(const std::vector<int>& occupations) const {
    if (occupations.size() != modes_.size())
        throw ConfigError("basis_index: occupation count does not match mode count");
    int idx = 0;
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        if (occupations[i] < 0 || occupations[i] >= modes_[i].dim)
            throw ConfigError("basis_index: occupation out of range for mode '" + modes_[i].label + "'");
        idx = idx * modes_[i].dim + occupations[i];
    }
    return idx;
}

bool HilbertSpace::operator==(const HilbertSpace& other) const {
    if (modes_.size() != other.modes_.size()) return false;
    for (std::size_t i = 0; i < modes_.size(); ++i)
        if (modes_[i].label != other.modes_[i].label || modes_[i].dim != other.modes_[i].dim)
            return false;
    return true;
}

HilbertSpace make_space(const std::vector<std::pair<std::string, int>>& mode_specs) {
    std::vector<Mode> modes;
    modes.reserve(mode_specs.size());
    for (const auto& [label, dim] : mode_specs) modes.push_back({label, dim});
    return HilbertSpace(std::move(modes));
}

Operator::Operator(HilbertSpace space, SpMat matrix) : space_(std::move(space)), mat_(std::move(matrix)) {
    if (mat_.rows() != space_.total_dim() || mat_.cols() != space_.total_dim())
        throw ConfigError("Operator: matrix shape does not match space dimension");
    mat_.makeCompressed();
}

Operator Operator::dagger() const {
    SpMat adj = mat_.adjoint();
    return Operator(space_, std::move(adj));
}

bool Operator::is_hermitian(double tol) const {
    SpMat diff = SpMat(mat_ - SpMat(mat_.adjoint()));
    for (int k = 0; k < diff.outerSize(); ++k)
        for (SpMat::InnerIterator it(diff, k); it; ++it)
            if (std::abs(it.value()) > tol) return false;
    return true;
}

double Operator::max_abs() const {
    double m = 0.0;
    for (int k = 0; k < mat_.outerSize(); ++k)
        for (SpMat::InnerIterator it(mat_, k); it; ++it)
            m = std::max(m, std::abs(it.value()));
    return m;
}

namespace {
void check_same_space(const HilbertSpace& a, const HilbertSpace& b, const char* what) {
    if (a != b) throw ConfigError(std::string(what) + ": operands live on different spaces");
}
} // namespace

Operator& Operator::operator+=(const Operator& rhs) {
    check_same_space(space_, rhs.space_, "Operator+");
    mat_ = SpMat(mat_ + rhs.mat_);
    return *this;
}

Operator& Operator::operator-=(const Operator& rhs) {
    check_same_space(space_, rhs.space_, "Operator-");
    mat_ = SpMat(mat_ - rhs.mat_);
    return *this;
}

Operator& Operator::operator*=(cplx scalar) {
    mat_ = SpMat(scalar * mat_);
    return *this;
}

Operator operator*(const Operator& lhs, const Operator& rhs) {
    check_same_space(lhs.space_, rhs.space_, "Operator*");
    SpMat prod = lhs.mat_ * rhs.mat_;
    return Operator(lhs.space_, std::move(prod));
}

Operator commutator(const Operator& a, const Operator& b) {
    return a * b - b * a;
}

Operator identity_op(const HilbertSpace& space) {
    SpMat m(space.total_dim(), space.total_dim());
    m.setIdentity();
    return Operator(space, std::move(m));
}

Operator embed(const HilbertSpace& space, const std::string& label, const DenseMatrix& local) {
    const int mi = space.mode_index(label);
    const int d = space.mode(mi).dim;
    if (local.rows() != d || local.cols() != d)
        throw ConfigError("embed: local matrix shape does not match mode dim");
    const int inner = space.stride(mi);       // product of later dims
    const int outer = space.total_dim() / (inner * d);

    std::vector<Eigen::Triplet<cplx>> trips;
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
            const cplx v = local(r, c);
            if (v == cplx(0.0, 0.0)) continue;
            for (int o = 0; o < outer; ++o)
                for (int k = 0; k < inner; ++k)
                    trips.emplace_back((o * d + r) * inner + k, (o * d + c) * inner + k, v);
        }
    SpMat m(space.total_dim(), space.total_dim());
    m.setFromTriplets(trips.begin(), trips.end());
    return Operator(space, std::move(m));
}

Operator annihilation(const HilbertSpace& space, const std::string& label) {
    const int d = space.dim_of(label);
    DenseMatrix a = DenseMatrix::Zero(d, d);
    for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return embed(space, label, a);
}

Operator creation(const HilbertSpace& space, const std::string& label) {
    return annihilation(space, label).dagger();
}

Operator number_op(const HilbertSpace& space, const std::string& label) {
    const int d = space.dim_of(label);
    DenseMatrix n = DenseMatrix::Zero(d, d);
    for (int k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
    return embed(space, label, n);
}

Operator parity_operator(const HilbertSpace& space, const std::string& label) {
    const int d = space.dim_of(label);
    DenseMatrix p = DenseMatrix::Zero(d, d);
    for (int k = 0; k < d; ++k) p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
    return embed(space, label, p);
}

Operator transition_op(const HilbertSpace& space, const std::string& label, int i, int j) {
    const int d = space.dim_of(label);
    if (i < 0 || i >= d || j < 0 || j >= d) throw ConfigError("transition_op: index out of range");
    DenseMatrix t = DenseMatrix::Zero(d, d);
    t(i, j) = 1.0;
    return embed(space, label, t);
}

double DensityMatrix::hermiticity_error() const {
    return (mat - mat.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (mat + mat.adjoint()));
    return es.eigenvalues().minCoeff();
}

void DensityMatrix::validate() const {
    if (mat.rows() != space.total_dim() || mat.cols() != space.total_dim())
        throw ConfigError("DensityMatrix: shape does not match space");
    if (std::abs(trace() - cplx(1.0, 0.0)) > 1e-10)
        throw NumericalError("DensityMatrix: trace deviates from 1 beyond 1e-10");
    if (hermiticity_error() > 1e-12)
        throw NumericalError("DensityMatrix: Hermiticity violation beyond 1e-12");
    if (min_eigenvalue() < -1e-8)
        throw NumericalError("DensityMatrix: negative eigenvalue beyond -1e-8");
}

StateVector basis_state(const HilbertSpace& space, const std::vector<int>& occupations) {
    DenseVector v = DenseVector::Zero(space.total_dim());
    v(space.basis_index(occupations)) = 1.0;
    return StateVector{space, std::move(v)};
}

double coherent_tail_weight(cplx alpha, int dim) {
    // 1 - sum_{n<dim} e^{-|a|^2} |a|^{2n} / n!, summed stably from n=0.
    const double x = std::norm(alpha);
    double term = std::exp(-x);
    double head = 0.0;
    for (int n = 0; n < dim; ++n) {
        head += term;
        term *= x / static_cast<double>(n + 1);
    }
    return std::max(0.0, 1.0 - head);
}

StateVector coherent_state(const HilbertSpace& space, const std::string& label, cplx alpha) {
    const int mi = space.mode_index(label);
    const int d = space.mode(mi).dim;
    const double tail = coherent_tail_weight(alpha, d);
    if (tail > 1e-6)
        throw GuardError("coherent_state: truncation dim " + std::to_string(d) +
                         " too small for |alpha|=" + std::to_string(std::abs(alpha)) +
                         " (tail weight " + std::to_string(tail) + " > 1e-6)");

    // Coefficients e^{-|a|^2/2} a^n / sqrt(n!), then renormalized on the truncation.
    DenseVector local(d);
    cplx c = std::exp(-0.5 * std::norm(alpha));
    for (int n = 0; n < d; ++n) {
        local(n) = c;
        c *= alpha / std::sqrt(static_cast<double>(n + 1));
    }
    local.normalize();

    DenseVector v = DenseVector::Zero(space.total_dim());
    std::vector<int> occ(static_cast<std::size_t>(space.n_modes()), 0);
    for (int n = 0; n < d; ++n) {
        occ[static_cast<std::size_t>(mi)] = n;
        v(space.basis_index(occ)) = local(n);
    }
    return StateVector{space, std::move(v)};
}

DensityMatrix pure_density(const StateVector& psi) {
    DenseVector v = psi.amps;
    const double n = v.norm();
    if (std::abs(n - 1.0) > 1e-10) v /= n;
    return DensityMatrix{psi.space, v * v.adjoint()};
}

cplx expectation(const DensityMatrix& rho, const Operator& op) {
    if (rho.space != op.space()) throw ConfigError("expectation: state and operator spaces differ");
    // Tr[op rho] = sum_{k,i} op(i,k) rho(k,i)
    cplx tr(0.0, 0.0);
    const SpMat& m = op.sparse();
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it)
            tr += it.value() * rho.mat(k, it.row());
    return tr;
}

cplx expectation(const StateVector& psi, const Operator& op) {
    if (psi.space != op.space()) throw ConfigError("expectation: state and operator spaces differ");
    return psi.amps.dot(op.sparse() * psi.amps);
}

double max_abs_diff(const Operator& a, const Operator& b) {
    return (a.dense() - b.dense()).cwiseAbs().maxCoeff();
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

} // namespace ensq
