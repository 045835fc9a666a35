#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace ionqec::gatekit {

using cplx = std::complex<double>;

struct Tone {
    double amp_rad_s = 0.0;    // drive amplitude
    double freq_rad_s = 0.0;   // tone frequency (rotating frame, near a mode)
    double phase_rad = 0.0;
};

// Normal-mode description: frequencies plus the generalized Lamb-Dicke matrix
// eta[mode][ion].
struct ModeSpec {
    std::vector<double> freq_rad_s;            // strictly positive, increasing
    std::vector<std::vector<double>> eta;      // mode-major, eta[j][n]

    int mode_count() const { return static_cast<int>(freq_rad_s.size()); }
    int ion_count() const { return eta.empty() ? 0 : static_cast<int>(eta[0].size()); }
    void validate() const;
};

struct GateSpec {
    int ion_count = 0;
    double tau_s = 0.0;
    std::vector<std::vector<Tone>> tones;      // per-ion waveform f_n(t) as tone list
    std::vector<double> target_phi;            // pair-indexed (n<m), rad
    void validate() const;
};

enum class TrajSource { ms, robust, magnus };

inline size_t pair_index(int n, int m, int ions) {
    if (n > m) std::swap(n, m);
    return static_cast<size_t>(n) * ions - static_cast<size_t>(n) * (n + 1) / 2 + (m - n - 1);
}
inline size_t pair_count(int ions) { return static_cast<size_t>(ions) * (ions - 1) / 2; }

// Sampled phase-space trajectories alpha_j^(n)(t_k) and entangling phases
// phi_nm(t_k) on a uniform grid. alpha(t_0) = 0 and phi(t_0) = 0 always.
struct TrajectoryTable {
    TrajSource source = TrajSource::ms;
    int ion_count = 0;
    int mode_count = 0;
    double tau_s = 0.0;
    std::vector<double> t;                     // grid, size K+1
    std::vector<cplx> alpha;                   // [mode][ion][k] flattened
    std::vector<double> phi;                   // [pair][k] flattened
    std::vector<double> target_phi;            // pair-indexed, phi_nm(tau)
    double quad_tol = 0.0;                     // dt^2 Richardson estimate

    size_t samples() const { return t.size(); }
    double dt() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }
    cplx alpha_at(int mode, int ion, size_t k) const {
        return alpha[(static_cast<size_t>(mode) * ion_count + ion) * t.size() + k];
    }
    cplx& alpha_ref(int mode, int ion, size_t k) {
        return alpha[(static_cast<size_t>(mode) * ion_count + ion) * t.size() + k];
    }
    double phi_at(int n, int m, size_t k) const {
        if (n == m) return 0.0;
        return phi[pair_index(n, m, ion_count) * t.size() + k];
    }
    double& phi_ref(size_t pair, size_t k) { return phi[pair * t.size() + k]; }
    double target_at(int n, int m) const {
        return n == m ? 0.0 : target_phi[pair_index(n, m, ion_count)];
    }
};

// Analytic Molmer-Sorensen family on the COM mode:
// alpha(t) = (1 - e^{i xi t})/4, phi_nm(t) = (xi t - sin xi t)/8, xi = 2 pi / tau.
TrajectoryTable ms_trajectory(int n_ions, double tau_s, int grid_points);

// Two-harmonic robust family: alpha(t) = (e^{4 pi i t/tau} - e^{2 pi i t/tau})/sqrt(24),
// with phi accumulated from the trajectory on the same grid.
TrajectoryTable robust_trajectory(int n_ions, double tau_s, int grid_points);

// General multi-tone gate by cumulative quadrature of the first two Magnus orders:
// alpha_j^(n)(t) = eta_j^(n) int_0^t f_n e^{i nu_j t'} dt', phi from the nested
// sine-kernel double integral (evaluated as Im integral of alpha-dot alpha*).
TrajectoryTable magnus_trajectories(const GateSpec& gate, const ModeSpec& modes,
                                    int grid_points);

struct ClosureResidual {
    double max_alpha = 0.0;       // max_j,n |alpha_j^(n)(tau)|
    double max_phi_error = 0.0;   // max_{n<m} |phi_nm(tau) - target|
};
ClosureResidual closure_residual(const TrajectoryTable& traj);

// Gate-file ingestion: [modes] / [gate] / [tones] sections, see docs/README.
struct GateFile {
    GateSpec gate;
    ModeSpec modes;
};
GateFile load_gate_file(const std::string& path);

}  // namespace ionqec::gatekit
