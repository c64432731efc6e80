#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "spinqed/lattice.hpp"

namespace spinqed {

// Default bound-state detection thresholds (units of Gamma where relevant).
struct BoundCriteria {
    double gap_tol = 1e-3;
    double ipr_min = 0.05;
    double tail_max = 1e-3;
    // r_cut for the tail test defaults to (N-1)/2 inside the extractor.
};

struct DispersionCurve {
    std::vector<double> momentum_grid;  // kd
    std::vector<cplx> energy;
    std::string branch_tag;
    std::vector<double> rydberg_fraction;  // |beta_k|^2, three-level branches only
};

// Single-excitation dispersions (infinite lattice).
double dispersion_bidirectional(double k0d, double kd, double pole_tol = 1e-9);
double dispersion_chiral(double kd, double pole_tol = 1e-9);
double group_velocity_chiral(double kd);  // Gamma d / (4 sin^2(kd/2))

struct RydbergBranchPoint {
    cplx upper, lower;
    double frac_upper = 0.0;  // |beta|^2 of the upper branch
    double frac_lower = 0.0;
};
RydbergBranchPoint dispersion_rydberg(const AtomArray& array, const RydbergParams& ryd,
                                      double kd, double pole_tol = 1e-9);

// Two-excitation relative-coordinate Hamiltonians, r = 1 .. N-1.
EffectiveHamiltonian relative_hamiltonian_bidirectional(const AtomArray& array, double Kd);
EffectiveHamiltonian relative_hamiltonian_chiral(const AtomArray& array, double Kd);
// Effective two-level Rydberg model: diag 2 E_st + V(r) plus chiral kernel
// scaled by Gamma_bar. Hermitian; used for spectra near the Stark resonance.
EffectiveHamiltonian relative_hamiltonian_rydberg_effective(const AtomArray& array,
                                                            const RydbergParams& ryd,
                                                            double Kd);
// Full three-level relative Hamiltonian; sectors [ee, ss, es, se], dimension
// 4(N-1). "es" = e on the left site, "se" = s on the left site.
EffectiveHamiltonian relative_hamiltonian_rydberg(const AtomArray& array,
                                                  const RydbergParams& ryd, double Kd);

// The two-polariton continuum at fixed K: set of J(q) + J(K-q) over q, as a
// union of closed intervals (the curve is segmented at dispersion poles).
struct ContinuumEnvelope {
    std::vector<std::pair<double, double>> intervals;
    double distance(double energy) const;
    bool contains(double energy, double tol) const { return distance(energy) <= tol; }
};

using DispersionFn = std::function<double(double)>;  // kd -> Re J

ContinuumEnvelope continuum_envelope(const DispersionFn& dispersion,
                                     const std::vector<double>& poles, double Kd,
                                     int n_q = 4096, double pole_excl = 1e-6);

struct LocalizationReport {
    std::vector<double> population;  // |f(r)|^2, normalized, r = 1..N-1
    double decay_constant = 0.0;     // kappa d: amplitude decay, p ~ e^{-2 kappa r}
    double population_slope = 0.0;   // fitted -d ln p / dr
    double ipr = 0.0;
    double tail_weight = 0.0;
    bool even_subsequence = false;   // fit restricted to even r (Kd = +-pi dimers)
};

LocalizationReport localization_report(const VectorXcd& eigenvector, double Kd,
                                       int r_cut = -1);

struct BoundState {
    double Kd = 0.0;
    cplx energy;
    VectorXcd eigenvector;
    double ipr = 0.0;
    double tail_weight = 0.0;
    double kappa_d = 0.0;
    int branch_id = -1;
};

struct BandStructure {
    std::vector<double> K_grid;
    std::vector<std::vector<cplx>> eigenvalues;  // per K, sorted by real part
    std::vector<ContinuumEnvelope> envelopes;
    std::vector<BoundState> bound_states;        // tagged, with branch ids
    int n_sites = 0;
};

// K grid sampled at 2 pi m / N, m = -N/2 .. N/2-1 (even N convention).
std::vector<double> momentum_grid(int n_atoms);

enum class Medium { chiral, bidirectional, rydberg_effective, rydberg_full };

// Diagonalize the relative Hamiltonian over the K grid and attach envelopes.
// For rydberg media the envelope is built from the near-Stark branch and an
// energy window around 2 E_st is applied when tagging bound states.
BandStructure compute_band_structure(const AtomArray& array, Medium medium,
                                     const RydbergParams* ryd = nullptr,
                                     const BoundCriteria& crit = {});

// Tag bound states in an existing band structure and connect branches across
// adjacent K by nearest-energy matching (max jump 0.5 Gamma).
void extract_bound_branches(BandStructure& band, const BoundCriteria& crit,
                            double window_center = 0.0, double window_half = -1.0);

// Centered finite-difference group velocity along a connected branch.
// Throws EdgeOfBranch at the endpoints unless one_sided is set.
double bound_group_velocity(const BandStructure& band, int branch_id, double Kd,
                            bool one_sided = false);

// Closed-form references (paper section III.B) used by tests and the CLI.
namespace reference {
double dimer_energy_K0(double k0d);          // 2 Gamma cot(k0d)
double dimer_energy_Kpi(double k0d);         // 2 Gamma cot(2 k0d)
double dimer_q0d(double k0d);                // -log cos(k0d); population ~ e^{-2 q0 r}
double dimer_qpid(double k0d);               // -log|cos(2 k0d)|; population ~ cos^2 e^{-q_pi r}
double chiral_bound_energy(double Kd);       // -2 Gamma cot(Kd/2)
double chiral_bound_kappa(double Kd);        // -log cos(Kd/2) (amplitude decay)
double chiral_bound_velocity(double Kd);     // Gamma d / sin^2(Kd/2)
// Eq. (B8) with Delta_p = -delta, energy relative to the bare level -2 delta.
double rydberg_bound_omega(double Kd, double rabi, double detuning);
}  // namespace reference

}  // namespace spinqed
