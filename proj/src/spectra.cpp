#include "spinqed/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace spinqed {

namespace {

double cot(double x) { return std::cos(x) / std::sin(x); }

double dist_to_pole(double x, double pole) {
    return std::abs(wrap_phase(x - pole));
}

}  // namespace

double dispersion_bidirectional(double k0d, double kd, double pole_tol) {
    if (dist_to_pole(kd, k0d) < pole_tol || dist_to_pole(kd, -k0d) < pole_tol)
        throw Divergence("bidirectional dispersion pole at kd = +-k0d");
    return 0.25 * (cot(0.5 * (k0d + kd)) + cot(0.5 * (k0d - kd)));
}

double dispersion_chiral(double kd, double pole_tol) {
    if (dist_to_pole(kd, 0.0) < pole_tol)
        throw Divergence("chiral dispersion pole at kd = 0");
    return -0.5 * cot(0.5 * kd);
}

double group_velocity_chiral(double kd) {
    const double s = std::sin(0.5 * kd);
    return 0.25 / (s * s);
}

RydbergBranchPoint dispersion_rydberg(const AtomArray& array, const RydbergParams& ryd,
                                      double kd, double pole_tol) {
    if (dist_to_pole(kd, 0.0) < pole_tol)
        throw Divergence("rydberg dispersion pole at kd = 0");
    const cplx Jt = -0.5 * array.gamma() * cot(0.5 * kd) - 0.5 * ii * array.gamma_free;
    const double delta = ryd.detuning, Om = ryd.rabi;
    const cplx disc = (Jt - delta) * (Jt - delta) + 4.0 * (Om * Om + delta * Jt);
    const cplx root = std::sqrt(disc);
    RydbergBranchPoint p;
    p.upper = 0.5 * (Jt - delta) + 0.5 * root;
    p.lower = 0.5 * (Jt - delta) - 0.5 * root;
    auto frac = [&](cplx E) {
        const double num = Om * Om;
        const double den = std::norm(delta + E) + Om * Om;
        return num / den;
    };
    p.frac_upper = frac(p.upper);
    p.frac_lower = frac(p.lower);
    return p;
}

EffectiveHamiltonian relative_hamiltonian_bidirectional(const AtomArray& array, double Kd) {
    const int n = array.n_atoms - 1;
    const double k0 = wrap_phase(array.k0d);
    MatrixXcd H(n, n);
    for (int r = 1; r <= n; ++r) {
        for (int rp = 1; rp <= n; ++rp) {
            cplx v = 0.0;
            for (int e = -1; e <= 1; e += 2) {
                const double k = k0 + 0.5 * e * Kd;
                for (int ep = -1; ep <= 1; ep += 2) {
                    const double xx = std::abs(double(r) + ep * double(rp));
                    v += -0.5 * ii * array.gamma() * std::exp(ii * k * xx);
                }
            }
            H(r - 1, rp - 1) = v;
        }
    }
    EffectiveHamiltonian out;
    out.matrix = std::move(H);
    out.sector = {2, LevelScheme::tla};
    return out;
}

namespace {

// Eq. (20) kernel: -gamma [ sin(K/2 (r+r')) + sin(K/2 |r-r'|) ], real symmetric.
MatrixXcd chiral_relative_kernel(int n, double Kd, double gamma) {
    MatrixXcd H(n, n);
    for (int r = 1; r <= n; ++r)
        for (int rp = 1; rp <= n; ++rp)
            H(r - 1, rp - 1) = -gamma * (std::sin(0.5 * Kd * (r + rp)) +
                                         std::sin(0.5 * Kd * std::abs(r - rp)));
    return H;
}

}  // namespace

EffectiveHamiltonian relative_hamiltonian_chiral(const AtomArray& array, double Kd) {
    EffectiveHamiltonian out;
    out.matrix = chiral_relative_kernel(array.n_atoms - 1, Kd, array.gamma());
    out.sector = {2, LevelScheme::tla};
    return out;
}

EffectiveHamiltonian relative_hamiltonian_rydberg_effective(const AtomArray& array,
                                                            const RydbergParams& ryd,
                                                            double Kd) {
    const int n = array.n_atoms - 1;
    const double gb = ryd.gamma_bar(array.gamma());
    const double est = ryd.stark_resonance();
    MatrixXcd H = chiral_relative_kernel(n, Kd, gb);
    for (int r = 1; r <= n; ++r) H(r - 1, r - 1) += 2.0 * est + ryd.potential(r);
    EffectiveHamiltonian out;
    out.matrix = std::move(H);
    out.sector = {2, LevelScheme::effective_tla};
    return out;
}

EffectiveHamiltonian relative_hamiltonian_rydberg(const AtomArray& array,
                                                  const RydbergParams& ryd, double Kd) {
    // Sectors [ee, ss, es, se]; "es" = e on the left site of the pair.
    // Within-sector and cross kernels re-derived from the hermitian chiral
    // Hamiltonian with the center-of-mass plane-wave ansatz; the excitation
    // crossing the s partner accumulates the phase of x_r + x_r'.
    const int n = array.n_atoms - 1;
    const double G = array.gamma();
    const double delta = ryd.detuning, Om = ryd.rabi;
    const int EE = 0, SS = 1, ES = 2, SE = 3;
    MatrixXcd H = MatrixXcd::Zero(4 * n, 4 * n);
    auto at = [&](int s1, int r1, int s2, int r2) -> cplx& {
        return H(s1 * n + r1 - 1, s2 * n + r2 - 1);
    };
    for (int r = 1; r <= n; ++r) {
        at(SS, r, SS, r) = -2.0 * delta + ryd.potential(r);
        at(ES, r, ES, r) = -delta;
        at(SE, r, SE, r) = -delta;
    }
    H.block(0, 0, n, n) = chiral_relative_kernel(n, Kd, G);
    for (int r = 1; r <= n; ++r) {
        for (int rp = 1; rp <= n; ++rp) {
            const double ad = std::abs(r - rp);
            const double sm = r + rp;
            if (r > rp) {
                at(ES, r, ES, rp) = +0.5 * ii * G * std::exp(+0.5 * ii * Kd * ad);
                at(SE, r, SE, rp) = -0.5 * ii * G * std::exp(-0.5 * ii * Kd * ad);
            } else if (r < rp) {
                at(ES, r, ES, rp) = -0.5 * ii * G * std::exp(-0.5 * ii * Kd * ad);
                at(SE, r, SE, rp) = +0.5 * ii * G * std::exp(+0.5 * ii * Kd * ad);
            }
            at(SE, r, ES, rp) = -0.5 * ii * G * std::exp(-0.5 * ii * Kd * sm);
            at(ES, r, SE, rp) = +0.5 * ii * G * std::exp(+0.5 * ii * Kd * sm);
        }
        at(ES, r, EE, r) = Om;
        at(EE, r, ES, r) = Om;
        at(SE, r, EE, r) = Om;
        at(EE, r, SE, r) = Om;
        at(ES, r, SS, r) = Om;
        at(SS, r, ES, r) = Om;
        at(SE, r, SS, r) = Om;
        at(SS, r, SE, r) = Om;
    }
    EffectiveHamiltonian out;
    out.matrix = std::move(H);
    out.sector = {2, LevelScheme::three_level};
    return out;
}

double ContinuumEnvelope::distance(double energy) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& [lo, hi] : intervals) {
        if (energy >= lo && energy <= hi) return 0.0;
        d = std::min(d, std::min(std::abs(energy - lo), std::abs(energy - hi)));
    }
    return d;
}

ContinuumEnvelope continuum_envelope(const DispersionFn& dispersion,
                                     const std::vector<double>& poles, double Kd,
                                     int n_q, double pole_excl) {
    auto near_pole = [&](double q) {
        for (double p : poles)
            if (dist_to_pole(q, p) < pole_excl) return true;
        return false;
    };
    ContinuumEnvelope env;
    bool open = false;
    double lo = 0, hi = 0;
    for (int i = 0; i < n_q; ++i) {
        const double q = -pi + 2.0 * pi * i / n_q;
        const double q2 = Kd - q;
        if (near_pole(q) || near_pole(q2)) {
            if (open) env.intervals.emplace_back(lo, hi);
            open = false;
            continue;
        }
        const double w = dispersion(q) + dispersion(q2);
        if (!open) {
            lo = hi = w;
            open = true;
        } else {
            lo = std::min(lo, w);
            hi = std::max(hi, w);
        }
    }
    if (open) env.intervals.emplace_back(lo, hi);
    return env;
}

LocalizationReport localization_report(const VectorXcd& eigenvector, double Kd, int r_cut) {
    const int n = eigenvector.size();
    LocalizationReport rep;
    rep.population.resize(n);
    double norm = eigenvector.squaredNorm();
    double p2 = 0.0;
    for (int i = 0; i < n; ++i) {
        rep.population[i] = std::norm(eigenvector(i)) / norm;
        p2 += rep.population[i] * rep.population[i];
    }
    rep.ipr = p2;
    if (r_cut < 0) r_cut = n / 2;
    for (int i = r_cut; i < n; ++i) rep.tail_weight += rep.population[i];  // r = i+1 > r_cut

    // Detect the cos^2(K r / 2) modulation of the Kd ~ +-pi dimers: odd-r
    // populations collapse and the fit runs on the even-r subsequence.
    double even_sum = 0, odd_sum = 0;
    for (int i = 0; i < n; ++i)
        ((i + 1) % 2 == 0 ? even_sum : odd_sum) += rep.population[i];
    rep.even_subsequence = odd_sum < 1e-3 * even_sum;

    const double pmax = *std::max_element(rep.population.begin(), rep.population.end());
    const int r_peak = 1 + int(std::max_element(rep.population.begin(), rep.population.end()) -
                               rep.population.begin());
    const double floor = std::max(pmax * 1e-22, 1e-300);
    std::vector<double> xs, ys;
    const int r_hi = std::max(4, (8 * n) / 10);  // keep clear of the truncation edge
    for (int r = r_peak + 1; r <= r_hi; ++r) {
        if (rep.even_subsequence && r % 2 != 0) continue;
        const double p = rep.population[r - 1];
        if (p <= floor) break;
        xs.push_back(r);
        ys.push_back(std::log(p));
    }
    if (xs.size() < 4)
        throw FitFailure("fewer than 4 tail points above numerical floor");
    // least squares line fit
    const double sn = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double slope = (sn * sxy - sx * sy) / (sn * sxx - sx * sx);
    rep.population_slope = -slope;
    rep.decay_constant = 0.5 * rep.population_slope;
    return rep;
}

std::vector<double> momentum_grid(int n_atoms) {
    std::vector<double> K;
    const int half = n_atoms / 2;
    for (int m = -half; m < n_atoms - half; ++m)
        K.push_back(2.0 * pi * m / n_atoms);
    return K;
}

namespace {

struct SortedEig {
    std::vector<cplx> values;
    MatrixXcd vectors;
};

SortedEig sorted_eigen(const MatrixXcd& H, bool hermitian) {
    SortedEig out;
    const int n = H.rows();
    VectorXcd vals;
    MatrixXcd vecs;
    if (hermitian) {
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
        vals = es.eigenvalues().cast<cplx>();
        vecs = es.eigenvectors();
    } else {
        Eigen::ComplexEigenSolver<MatrixXcd> es(H);
        vals = es.eigenvalues();
        vecs = es.eigenvectors();
    }
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return vals(a).real() < vals(b).real(); });
    out.values.reserve(n);
    out.vectors.resize(n, n);
    for (int i = 0; i < n; ++i) {
        out.values.push_back(vals(idx[i]));
        out.vectors.col(i) = vecs.col(idx[i]).normalized();
    }
    return out;
}

// Per-r population summed over internal sectors (1 for TLA, 4 for three-level).
std::vector<double> sector_population(const VectorXcd& v, int n_sites) {
    const int nsec = v.size() / n_sites;
    std::vector<double> p(n_sites, 0.0);
    for (int s = 0; s < nsec; ++s)
        for (int r = 0; r < n_sites; ++r) p[r] += std::norm(v(s * n_sites + r));
    const double tot = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& x : p) x /= tot;
    return p;
}

}  // namespace

BandStructure compute_band_structure(const AtomArray& array, Medium medium,
                                     const RydbergParams* ryd, const BoundCriteria& crit) {
    BandStructure band;
    band.K_grid = momentum_grid(array.n_atoms);
    band.n_sites = array.n_atoms - 1;
    double window_center = 0.0, window_half = -1.0;

    DispersionFn disp;
    std::vector<double> poles;
    switch (medium) {
        case Medium::chiral:
            disp = [](double q) { return dispersion_chiral(q); };
            poles = {0.0};
            break;
        case Medium::bidirectional:
            disp = [k0 = array.k0d](double q) { return dispersion_bidirectional(k0, q); };
            poles = {array.k0d, -array.k0d};
            break;
        case Medium::rydberg_effective: {
            const double gb = ryd->gamma_bar(array.gamma());
            const double est = ryd->stark_resonance();
            disp = [gb, est](double q) { return est - 0.5 * gb * std::cos(0.5 * q) / std::sin(0.5 * q); };
            poles = {0.0};
            window_center = 2.0 * est;
            window_half = 45.0 * gb;
            break;
        }
        case Medium::rydberg_full: {
            AtomArray lossless = array;
            lossless.gamma_free = 0.0;  // spectra are computed for the hermitian problem
            disp = [a = lossless, r = *ryd](double q) {
                return dispersion_rydberg(a, r, q).upper.real();
            };
            poles = {0.0};
            const double est = ryd->stark_resonance();
            window_center = 2.0 * est;
            window_half = 45.0 * ryd->gamma_bar(array.gamma());
            break;
        }
    }

    for (double Kd : band.K_grid) {
        EffectiveHamiltonian h;
        bool herm = true;
        switch (medium) {
            case Medium::chiral: h = relative_hamiltonian_chiral(array, Kd); break;
            case Medium::bidirectional:
                h = relative_hamiltonian_bidirectional(array, Kd);
                herm = false;
                break;
            case Medium::rydberg_effective:
                h = relative_hamiltonian_rydberg_effective(array, *ryd, Kd);
                break;
            case Medium::rydberg_full: {
                AtomArray lossless = array;
                lossless.gamma_free = 0.0;
                h = relative_hamiltonian_rydberg(lossless, *ryd, Kd);
                break;
            }
        }
        auto eig = sorted_eigen(h.matrix, herm);
        band.eigenvalues.push_back(eig.values);
        band.envelopes.push_back(continuum_envelope(disp, poles, Kd));

        const int ncand = eig.values.size();
        for (int i = 0; i < ncand; ++i) {
            const double E = eig.values[i].real();
            if (window_half > 0 && std::abs(E - window_center) > window_half) continue;
            if (band.envelopes.back().contains(E, crit.gap_tol)) continue;
            const auto pop = sector_population(eig.vectors.col(i), band.n_sites);
            double ipr = 0, tail = 0;
            for (int r = 0; r < band.n_sites; ++r) ipr += pop[r] * pop[r];
            for (int r = band.n_sites / 2; r < band.n_sites; ++r) tail += pop[r];
            if (ipr < crit.ipr_min || tail > crit.tail_max) continue;
            BoundState bs;
            bs.Kd = Kd;
            bs.energy = eig.values[i];
            bs.eigenvector = eig.vectors.col(i);
            bs.ipr = ipr;
            bs.tail_weight = tail;
            try {
                VectorXcd amp(band.n_sites);
                for (int r = 0; r < band.n_sites; ++r) amp(r) = std::sqrt(pop[r]);
                bs.kappa_d = localization_report(amp, Kd).decay_constant;
            } catch (const FitFailure&) {
                bs.kappa_d = std::numeric_limits<double>::quiet_NaN();
            }
            band.bound_states.push_back(std::move(bs));
        }
    }
    extract_bound_branches(band, crit);
    return band;
}

void extract_bound_branches(BandStructure& band, const BoundCriteria&, double, double) {
    // Greedy nearest-energy continuation over ascending K, max jump 0.5 Gamma.
    // A tip only survives to the next grid point; equidistant candidates open
    // a fresh branch instead of merging.
    const double max_jump = 0.5;
    std::sort(band.bound_states.begin(), band.bound_states.end(),
              [](const BoundState& a, const BoundState& b) {
                  if (a.Kd != b.Kd) return a.Kd < b.Kd;
                  return a.energy.real() < b.energy.real();
              });
    struct Tip { int id; double E; };
    std::vector<Tip> tips;
    int next_id = 0;
    size_t i = 0;
    for (double Kd : band.K_grid) {
        std::vector<BoundState*> here;
        while (i < band.bound_states.size() && band.bound_states[i].Kd == Kd)
            here.push_back(&band.bound_states[i++]);
        std::vector<Tip> new_tips;
        std::vector<bool> used(tips.size(), false);
        for (auto* bs : here) {
            const double E = bs->energy.real();
            int best = -1;
            double bd = max_jump, sd = max_jump;
            for (size_t t = 0; t < tips.size(); ++t) {
                if (used[t]) continue;
                const double d = std::abs(tips[t].E - E);
                if (d < bd) { sd = bd; bd = d; best = int(t); }
                else if (d < sd) sd = d;
            }
            if (best >= 0 && std::abs(bd - sd) < 1e-12) best = -1;  // ambiguous: keep both
            if (best >= 0) {
                bs->branch_id = tips[best].id;
                used[best] = true;
            } else {
                bs->branch_id = next_id++;
            }
            new_tips.push_back({bs->branch_id, E});
        }
        tips = std::move(new_tips);
    }
}

double bound_group_velocity(const BandStructure& band, int branch_id, double Kd,
                            bool one_sided) {
    std::vector<const BoundState*> branch;
    for (const auto& bs : band.bound_states)
        if (bs.branch_id == branch_id) branch.push_back(&bs);
    std::sort(branch.begin(), branch.end(),
              [](auto* a, auto* b) { return a->Kd < b->Kd; });
    int at = -1;
    for (size_t j = 0; j < branch.size(); ++j)
        if (std::abs(branch[j]->Kd - Kd) < 1e-12) at = int(j);
    if (at < 0) throw Error("Kd not on the requested branch");
    const double dK = 2.0 * pi / band.K_grid.size();
    const bool has_prev = at > 0 && branch[at]->Kd - branch[at - 1]->Kd < 1.5 * dK;
    const bool has_next = at + 1 < int(branch.size()) &&
                          branch[at + 1]->Kd - branch[at]->Kd < 1.5 * dK;
    if (has_prev && has_next) {
        return (branch[at + 1]->energy.real() - branch[at - 1]->energy.real()) /
               (branch[at + 1]->Kd - branch[at - 1]->Kd);
    }
    if (!one_sided) throw EdgeOfBranch("centered difference unavailable at branch endpoint");
    if (has_next)
        return (branch[at + 1]->energy.real() - branch[at]->energy.real()) /
               (branch[at + 1]->Kd - branch[at]->Kd);
    if (has_prev)
        return (branch[at]->energy.real() - branch[at - 1]->energy.real()) /
               (branch[at]->Kd - branch[at - 1]->Kd);
    throw EdgeOfBranch("branch has a single point");
}

namespace reference {

double dimer_energy_K0(double k0d) { return 2.0 * cot(k0d); }
double dimer_energy_Kpi(double k0d) { return 2.0 * cot(2.0 * k0d); }
double dimer_q0d(double k0d) { return -std::log(std::cos(k0d)); }
double dimer_qpid(double k0d) { return -std::log(std::abs(std::cos(2.0 * k0d))); }
double chiral_bound_energy(double Kd) { return -2.0 * cot(0.5 * Kd); }
double chiral_bound_kappa(double Kd) { return -std::log(std::cos(0.5 * Kd)); }
double chiral_bound_velocity(double Kd) {
    const double s = std::sin(0.5 * Kd);
    return 1.0 / (s * s);
}
double rydberg_bound_omega(double Kd, double rabi, double detuning) {
    const double dp = -detuning;
    return 2.0 * rabi * rabi / dp - 2.0 * (rabi / dp) * (rabi / dp) * cot(0.5 * Kd);
}

}  // namespace reference

}  // namespace spinqed
