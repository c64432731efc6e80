#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spinqed/common.hpp"

namespace spinqed {

// Units: Gamma = Gamma_R + Gamma_L = 1 and lattice spacing d = 1 throughout.
// All dynamics are written in the frame co-rotating with the input field, so
// omega_in shows up as a diagonal shift and never as a fast phase.

enum class LevelScheme { tla, three_level, effective_tla };

struct RydbergParams {
    double rabi = 0.0;       // Omega
    double detuning = 0.0;   // delta = omega_c - omega_se
    double c6 = 0.0;         // C6 / d^6
    bool use_effective_tla = false;

    double gamma_bar(double gamma) const;    // Gamma * Omega^2 / delta^2
    double gamma0_bar(double gamma0) const;  // Gamma0 * Omega^2 / delta^2
    double stark_resonance() const;          // E_st = -delta - Omega^2/delta
    double potential(double xr) const { return c6 / std::pow(xr, 6); }
};

struct AtomArray {
    int n_atoms = 1;
    double k0d = 0.0;        // reduced into (-pi, pi]
    double gamma_right = 1.0;
    double gamma_left = 0.0;
    double gamma_free = 0.0;
    std::vector<double> positions;  // x_n in units of d; defaults to 1..N

    static AtomArray chiral(int n, double gamma0 = 0.0);
    static AtomArray bidirectional(int n, double k0d, double gamma0 = 0.0);

    void validate() const;
    double gamma() const { return gamma_right + gamma_left; }
    bool is_chiral() const { return gamma_left == 0.0 || gamma_right == 0.0; }
    double x(int n) const { return positions[n]; }  // 0-based site index
};

struct Sector {
    int n_excitations = 1;
    LevelScheme scheme = LevelScheme::tla;
};

struct EffectiveHamiltonian {
    MatrixXcd matrix;
    Sector sector;
    std::vector<std::string> basis;

    MatrixXcd hermitian_part() const { return 0.5 * (matrix + matrix.adjoint()); }
    MatrixXcd antihermitian_part() const { return 0.5 * (matrix - matrix.adjoint()); }
};

// One collective emission channel: L = sqrt(rate) * sum_n weight[n] sigma_ge^n.
struct JumpChannel {
    double rate = 0.0;
    VectorXcd weights;
    bool local = false;  // true for the sqrt(Gamma0) single-site channels
    int site = -1;       // set for local channels
};

struct DecayModel {
    MatrixXcd collective_matrix;  // A + A^dagger
    double local_rate = 0.0;      // Gamma0
    std::vector<JumpChannel> channels;

    double total_collective_rate() const;
};

// Time-dependent coherent input envelope, scalar part only; spatial phases
// e^{i k0 x_n} are applied by the dynamics backends where the gauge keeps them.
struct DriveField {
    enum class Shape { none, cw, gaussian, sech, rydberg_sech };
    Shape shape = Shape::none;
    double n_ph = 0.0;
    double sigma = 1.0;   // gaussian width
    double t0 = 0.0;      // peak time
    double alpha = 1.0;   // rydberg_sech renormalization
    double rate = 1.0;    // decay rate entering the sech widths (Gamma_R or Gamma_bar)
    double omega_in = 0.0;
    double amplitude = 0.0;  // cw

    cplx envelope(double t) const;

    static DriveField none_field() { return {}; }
    static DriveField cw_field(double amp, double omega_in = 0.0);
    static DriveField gaussian(double n_ph, double sigma, double t0, double omega_in = 0.0);
    static DriveField sech_soliton(double n_ph, double t0, double rate, double omega_in = 0.0);
    static DriveField rydberg_ansatz(double n_ph, double alpha, double t0, double gamma_bar);
};

// A_nm of the photon-mediated interaction. Orientation: the Gamma_R term sits
// at theta(x_n - x_m) so a right-moving excitation hops m -> n with x_n > x_m,
// making the chiral matrix lower triangular as in the cascaded Hamiltonian.
MatrixXcd build_interaction_matrix(const AtomArray& array);

// Single-excitation sector, H = -i A (+ diagonal -i Gamma0/2 and -omega_in).
// Chiral arrays are built in the gauge sigma_ge^n e^{i k0 x_n} -> sigma_ge^n,
// so the result does not depend on k0d.
EffectiveHamiltonian build_single_excitation_hamiltonian(const AtomArray& array,
                                                         double omega_in = 0.0);

DecayModel build_jump_operators(const AtomArray& array);

// Per-site drive amplitudes at time t: entry n multiplies sigma_eg^n (+ h.c.).
VectorXcd build_drive(const AtomArray& array, const DriveField& field, double t);

// Single-excitation Hamiltonian of the three-level scheme (Eq. (28) structure)
// or of the effective two-level reduction when ryd.use_effective_tla is set.
// Basis for three_level: [e_1..e_N, s_1..s_N].
EffectiveHamiltonian build_rydberg_hamiltonian(const AtomArray& array,
                                               const RydbergParams& ryd,
                                               double omega_in = 0.0);

}  // namespace spinqed
