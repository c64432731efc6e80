#include "spinqed/lattice.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace spinqed {

double RydbergParams::gamma_bar(double gamma) const {
    if (detuning == 0.0) throw DetuningZero("gamma_bar undefined at delta = 0");
    return gamma * rabi * rabi / (detuning * detuning);
}

double RydbergParams::gamma0_bar(double gamma0) const {
    if (detuning == 0.0) throw DetuningZero("gamma0_bar undefined at delta = 0");
    return gamma0 * rabi * rabi / (detuning * detuning);
}

double RydbergParams::stark_resonance() const {
    if (detuning == 0.0) throw DetuningZero("Stark resonance undefined at delta = 0");
    return -detuning - rabi * rabi / detuning;
}

AtomArray AtomArray::chiral(int n, double gamma0) {
    AtomArray a;
    a.n_atoms = n;
    a.gamma_right = 1.0;
    a.gamma_left = 0.0;
    a.gamma_free = gamma0;
    a.validate();
    return a;
}

AtomArray AtomArray::bidirectional(int n, double k0d, double gamma0) {
    AtomArray a;
    a.n_atoms = n;
    a.k0d = k0d;
    a.gamma_right = 0.5;
    a.gamma_left = 0.5;
    a.gamma_free = gamma0;
    a.validate();
    return a;
}

void AtomArray::validate() const {
    if (n_atoms < 1) throw ConfigInvalid("n_atoms must be >= 1");
    if (gamma_right < 0 || gamma_left < 0 || gamma_free < 0)
        throw ConfigInvalid("rates must be non-negative");
    if (gamma() <= 0) throw ConfigInvalid("Gamma_R + Gamma_L must be positive");
    if (!positions.empty()) {
        if ((int)positions.size() != n_atoms)
            throw ConfigInvalid("positions size does not match n_atoms");
        for (size_t i = 1; i < positions.size(); ++i)
            if (positions[i] <= positions[i - 1])
                throw ConfigInvalid("positions must be strictly increasing");
    }
}

namespace {

std::vector<double> resolved_positions(const AtomArray& a) {
    if (!a.positions.empty()) return a.positions;
    std::vector<double> x(a.n_atoms);
    for (int n = 0; n < a.n_atoms; ++n) x[n] = n + 1.0;
    return x;
}

}  // namespace

MatrixXcd build_interaction_matrix(const AtomArray& array) {
    array.validate();
    const int N = array.n_atoms;
    const auto x = resolved_positions(array);
    const double k0 = wrap_phase(array.k0d);
    MatrixXcd A(N, N);
    for (int n = 0; n < N; ++n) {
        for (int m = 0; m < N; ++m) {
            const double dx = std::abs(x[n] - x[m]);
            const cplx phase = std::exp(ii * k0 * dx);
            double w = 0.0;
            if (x[n] > x[m]) w = array.gamma_right;
            else if (x[n] < x[m]) w = array.gamma_left;
            else w = 0.5 * array.gamma();  // theta_nn = 1/2 for both terms
            A(n, m) = w * phase;
        }
    }
    return A;
}

EffectiveHamiltonian build_single_excitation_hamiltonian(const AtomArray& array,
                                                         double omega_in) {
    const int N = array.n_atoms;
    AtomArray a = array;
    if (array.is_chiral()) a.k0d = 0.0;  // gauge absorbs the propagation phases
    MatrixXcd H = -ii * build_interaction_matrix(a);
    for (int n = 0; n < N; ++n)
        H(n, n) += -0.5 * ii * array.gamma_free - omega_in;
    EffectiveHamiltonian out;
    out.matrix = std::move(H);
    out.sector = {1, LevelScheme::tla};
    out.basis.reserve(N);
    for (int n = 0; n < N; ++n) out.basis.push_back("e_" + std::to_string(n + 1));
    return out;
}

double DecayModel::total_collective_rate() const {
    double s = 0.0;
    for (const auto& ch : channels)
        if (!ch.local) s += ch.rate;
    return s;
}

DecayModel build_jump_operators(const AtomArray& array) {
    const int N = array.n_atoms;
    AtomArray a = array;
    if (array.is_chiral()) a.k0d = 0.0;
    const MatrixXcd A = build_interaction_matrix(a);
    DecayModel dm;
    dm.collective_matrix = A + A.adjoint();
    dm.local_rate = array.gamma_free;

    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(dm.collective_matrix);
    for (int mu = N - 1; mu >= 0; --mu) {  // descending rate
        const double g = es.eigenvalues()(mu);
        if (g < -rate_eps)
            throw NegativeRate("collective mode with rate " + std::to_string(g));
        JumpChannel ch;
        ch.rate = std::max(g, 0.0);
        // Conjugated weights make sum_mu L_mu^dag L_mu reproduce the
        // anti-hermitian part of H_eff exactly.
        ch.weights = es.eigenvectors().col(mu).conjugate();
        dm.channels.push_back(std::move(ch));
    }
    if (dm.local_rate > 0) {
        for (int n = 0; n < N; ++n) {
            JumpChannel ch;
            ch.rate = dm.local_rate;
            ch.weights = VectorXcd::Zero(N);
            ch.weights(n) = 1.0;
            ch.local = true;
            ch.site = n;
            dm.channels.push_back(std::move(ch));
        }
    }
    return dm;
}

DriveField DriveField::cw_field(double amp, double omega_in) {
    DriveField f;
    f.shape = Shape::cw;
    f.amplitude = amp;
    f.omega_in = omega_in;
    return f;
}

DriveField DriveField::gaussian(double n_ph, double sigma, double t0, double omega_in) {
    DriveField f;
    f.shape = Shape::gaussian;
    f.n_ph = n_ph;
    f.sigma = sigma;
    f.t0 = t0;
    f.omega_in = omega_in;
    return f;
}

DriveField DriveField::sech_soliton(double n_ph, double t0, double rate, double omega_in) {
    DriveField f;
    f.shape = Shape::sech;
    f.n_ph = n_ph;
    f.t0 = t0;
    f.rate = rate;
    f.omega_in = omega_in;
    return f;
}

DriveField DriveField::rydberg_ansatz(double n_ph, double alpha, double t0, double gamma_bar) {
    DriveField f;
    f.shape = Shape::rydberg_sech;
    f.n_ph = n_ph;
    f.alpha = alpha;
    f.t0 = t0;
    f.rate = gamma_bar;
    return f;
}

cplx DriveField::envelope(double t) const {
    switch (shape) {
        case Shape::none:
            return 0.0;
        case Shape::cw:
            return amplitude;
        case Shape::gaussian: {
            const double u = (t - t0) / sigma;
            return std::sqrt(n_ph) * std::exp(-0.5 * u * u) /
                   (std::sqrt(sigma) * std::pow(pi, 0.25));
        }
        case Shape::sech: {
            const double a = 0.5 * n_ph * rate;
            return 0.5 * n_ph * std::sqrt(rate) / std::cosh(a * (t - t0));
        }
        case Shape::rydberg_sech: {
            const double a = 0.5 * rate * alpha * alpha * n_ph;
            return 0.5 * n_ph * alpha * std::sqrt(rate) / std::cosh(a * (t - t0));
        }
    }
    return 0.0;
}

VectorXcd build_drive(const AtomArray& array, const DriveField& field, double t) {
    const int N = array.n_atoms;
    const auto x = resolved_positions(array);
    const cplx e = field.envelope(t);
    VectorXcd d(N);
    const double sqg = std::sqrt(array.gamma_right);
    const bool keep_phase = !array.is_chiral();
    for (int n = 0; n < N; ++n) {
        const cplx phase = keep_phase ? std::exp(ii * wrap_phase(array.k0d) * x[n]) : cplx(1.0);
        d(n) = sqg * e * phase;
    }
    return d;
}

EffectiveHamiltonian build_rydberg_hamiltonian(const AtomArray& array,
                                               const RydbergParams& ryd,
                                               double omega_in) {
    const int N = array.n_atoms;
    if (ryd.use_effective_tla) {
        if (ryd.detuning == 0.0)
            throw DetuningZero("effective TLA requires delta != 0");
        const double gb = ryd.gamma_bar(array.gamma());
        const double gb0 = ryd.gamma0_bar(array.gamma_free);
        const double est = ryd.stark_resonance();
        // Chiral spin model over |g>,|s> with renormalized rates; Rydberg
        // interaction enters only two-excitation sectors (handled by callers).
        AtomArray eff = array;
        eff.gamma_right = gb;
        eff.gamma_left = 0.0;
        eff.gamma_free = gb0;
        EffectiveHamiltonian h = build_single_excitation_hamiltonian(eff, omega_in);
        for (int n = 0; n < N; ++n) h.matrix(n, n) += est;
        h.sector = {1, LevelScheme::effective_tla};
        for (int n = 0; n < N; ++n) h.basis[n] = "s_" + std::to_string(n + 1);
        return h;
    }
    // Full three-level single-excitation block: [e_1..e_N, s_1..s_N].
    EffectiveHamiltonian tla = build_single_excitation_hamiltonian(array, omega_in);
    EffectiveHamiltonian out;
    out.matrix = MatrixXcd::Zero(2 * N, 2 * N);
    out.matrix.topLeftCorner(N, N) = tla.matrix;
    for (int n = 0; n < N; ++n) {
        out.matrix(N + n, N + n) = -ryd.detuning - omega_in;
        out.matrix(n, N + n) = ryd.rabi;
        out.matrix(N + n, n) = ryd.rabi;
    }
    out.sector = {1, LevelScheme::three_level};
    for (int n = 0; n < N; ++n) out.basis.push_back("e_" + std::to_string(n + 1));
    for (int n = 0; n < N; ++n) out.basis.push_back("s_" + std::to_string(n + 1));
    return out;
}

}  // namespace spinqed
