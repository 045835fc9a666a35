#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ionqec/gatekit.hpp"

namespace ionqec::noisechan {

using gatekit::TrajectoryTable;

// Sparse Pauli-diagonal channel: strings over {I,X,Y,Z} with probabilities,
// plus the residual identity weight. Terms are unique; everything sums to 1.
struct PauliChannel {
    int qubit_count = 0;
    double identity = 1.0;
    std::vector<std::pair<std::string, double>> terms;

    double term_total() const;
    void validate(double tol = 1e-12) const;
};

struct RateSet {
    double gamma_s_hz = 0.0;            // photon scattering / spin dephasing
    std::vector<double> gamma_h_hz;     // heating rate per mode
    std::vector<double> nbar_th;        // heating steady-state occupation per mode
    std::vector<double> gamma_d_hz;     // motional dephasing rate per mode
    std::vector<double> nbar;           // initial thermal occupation per mode

    void validate(int mode_count) const;
};

// Phonon-trace bit-flip density gamma_k(t) on the faulty ion:
// (1 - exp[-2 sum_j (2 nbar_j + 1) |alpha_j^(k)(t)|^2]) / 2.
double gamma_k(const TrajectoryTable& traj, const std::vector<double>& nbars, int k, double t);

enum class ScatterVariant { z, y };

// Marginal flip probabilities given a sigma_z (or sigma_y) event on ion k at
// rate gamma_s. Row n != k integrates sin^2(2 phi_nk) (cos^2 for the y
// variant); row k carries the gamma_k and product-of-cos(4 phi) terms.
std::vector<double> scatter_single_flip_probs(const TrajectoryTable& traj, int k,
                                              double gamma_s_hz,
                                              ScatterVariant variant = ScatterVariant::z,
                                              const std::vector<double>* nbars = nullptr);

struct ScatterOptions {
    double eps_trunc = 0.0;             // drop strings below this probability
    double theta_support = 1e-3;        // rad; support-set threshold on max_t |phi_mk|
    ScatterVariant variant = ScatterVariant::z;
    std::vector<double> nbars;          // per-mode initial occupation (empty = ground state)
};

// Full correlated channel for a fault on ion k: enumerates flip patterns over
// the support set, weighting the faulty qubit by the parity-dependent
// gamma/(1-gamma) factor at each quadrature node. Truncated mass refolds into
// the identity. Pre-truncation pattern mass totals gamma_s * tau.
PauliChannel scatter_correlated_channel(const TrajectoryTable& traj, int k, double gamma_s_hz,
                                        const ScatterOptions& opts = {});

// Pattern probabilities (flip subset over partner qubits, faulty-flip bit),
// used by the channel builder and by the QEC propagation tables.
struct ScatterPattern {
    unsigned subset = 0;   // bit i set = i-th support qubit flipped
    bool faulty_flipped = false;
    double p = 0.0;        // in units of gamma_s * tau when rate = 1/tau
};
std::vector<ScatterPattern> scatter_patterns(const TrajectoryTable& traj, int k,
                                             double gamma_s_hz, const ScatterOptions& opts,
                                             std::vector<int>* support_out = nullptr);

// Distribution of the number of flipped data qubits after an MS-evolution
// fault on a traced-out ancilla, for n_data partner qubits.
std::vector<double> hook_distribution(int n_data, int quad_points = 32768);

// Large-N estimates: 0.43 N^{-1/6} at the edges and 1/(pi N) in the bulk.
std::pair<double, double> hook_asymptotics(int n_data);

struct HeatingMatrix {
    int n = 0;
    std::vector<double> a;  // row-major n x n, symmetric PSD
    double at(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }
};

// A_nm = sum_j Gamma_h,j (2 nbar_th,j + 1)/2 * int Re[alpha_j^(n) alpha_j^(m)*] dt.
HeatingMatrix heating_matrix(const TrajectoryTable& traj, const RateSet& rates);

// Diagonal of the heating process matrix: builds rho_xx' from A, conjugates by
// the N-fold Hadamard, clamps tiny negatives. Dense 2^N construction, N <= 14.
std::vector<double> heating_eta(const HeatingMatrix& a);

// Leading order per-ion bit-flip probabilities from heating.
std::vector<double> heating_1q_probs(const TrajectoryTable& traj, const RateSet& rates);

struct DephasingProbs {
    std::vector<double> p1;   // per ion
    std::vector<double> p2;   // pair-indexed (n<m)
    double total_p1() const;
    double total_p2() const;
};

// Motional-dephasing single- and two-qubit flip probabilities. The pair term
// squares the coherent pair amplitude 2 Re(alpha_n* alpha_m), which the exact
// Lindblad leading order produces for the a'a jump.
DephasingProbs dephasing_probs(const TrajectoryTable& traj, const RateSet& rates);

struct MedianSplit {
    double coupled = 0.0;
    double uncoupled = 0.0;
    bool coupled_empty = false;
    bool uncoupled_empty = false;
};
MedianSplit coupled_uncoupled_split(const std::vector<double>& p2_pairs,
                                    const std::vector<double>& target_phi, int ions);

// Kramers-Heisenberg estimate Gamma = (O1 O2 / Delta^2) gamma_P, unit prefactor.
double raman_rate(double omega1_rad_s, double omega2_rad_s, double delta_rad_s,
                  double gamma_p_rad_s);
// Scattering budget Gamma_s tau = (Omega_R gamma_P / Delta) tau with Omega_R in Hz.
double scatter_budget(double omega_r_hz, double gamma_p_rad_s, double delta_rad_s,
                      double tau_s);

}  // namespace ionqec::noisechan
