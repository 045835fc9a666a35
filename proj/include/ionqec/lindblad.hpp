#pragma once

#include <cstdint>
#include <vector>

#include "ionqec/gatekit.hpp"
#include "ionqec/noisechan.hpp"

namespace ionqec::oracle {

using gatekit::TrajectoryTable;

enum class JumpKind { sigma_x, sigma_y, sigma_z, lower, raise_, number };

struct Jump {
    JumpKind kind = JumpKind::sigma_z;
    int target = 0;       // ion index for sigma ops, mode index otherwise
    double rate_hz = 0.0;
};

struct OracleConfig {
    TrajectoryTable traj;
    std::vector<int> fock_cutoff;    // per mode, >= 8
    std::vector<double> nbar;        // per-mode initial thermal occupation
    std::vector<Jump> jumps;
    long shots = 50000;
    uint64_t seed = 1;
    int threads = 0;                 // 0 = hardware concurrency
    double max_step_jump_prob = 1e-3;

    void validate() const;
    size_t hilbert_dim() const;
};

struct FlipHistogram {
    int qubit_count = 0;
    long shots = 0;
    double leakage = 0.0;            // peak top-Fock-level population over the run
    std::vector<long> pattern_counts;  // indexed by flip pattern bitmask

    double p(size_t pattern) const {
        return static_cast<double>(pattern_counts[pattern]) / shots;
    }
    double stderr_of(size_t pattern) const;
    std::vector<double> weight_totals() const;  // probability per flip count
};

// Quantum-jump Monte Carlo over the dense spin (x) phonon state. The ideal
// evolution steps exactly per sigma_x sector (displacement + phase); jumps use
// the first-order waiting-time algorithm. Qubits are measured in z after the
// ideal inverse gate, so bit flips in the rotated frame show up directly.
FlipHistogram evolve_jump(const OracleConfig& cfg);

// Direct numeric integration of the leading-order channel: rotates each jump
// by the ideal gate, traces phonons over the initial thermal state, and
// returns flip-pattern probabilities (Pauli-diagonal part).
noisechan::PauliChannel leading_order_channel(const TrajectoryTable& traj,
                                              const std::vector<Jump>& jumps,
                                              const std::vector<double>& nbar,
                                              const std::vector<int>& fock_cutoff,
                                              int quad_points = 512);

}  // namespace ionqec::oracle
