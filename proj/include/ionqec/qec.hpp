#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace ionqec::qec {

enum class Schedule { simultaneous, split_rows };
enum class PairMode { all_pairs, coupled_only };

struct Stabilizer {
    char type = 'X';             // 'X' or 'Z'
    int ancilla = 0;             // ancilla index in [0, (d^2-1)/2)
    std::vector<int> data;       // data-qubit ids, weight 2 or 4
    int group = 0;               // sub-gate group under the split schedule
};

struct SurfaceCodeLayout {
    int d = 0;
    Schedule schedule = Schedule::simultaneous;
    int n_data = 0, n_anc = 0;
    std::vector<Stabilizer> x_stabs, z_stabs;
    std::vector<int> logical_x, logical_z;   // data-qubit supports
    std::vector<std::pair<double, double>> data_coord, anc_coord;

    int data_id(int row, int col) const { return row * d + col; }
};

SurfaceCodeLayout build_layout(int d, Schedule schedule = Schedule::simultaneous);

enum class ScatterSource { ms_closed_form, channel_file };

struct NoiseModel {
    double p_ph = 0.0;
    double p_2q = 0.0;
    PairMode mode = PairMode::coupled_only;
    ScatterSource scatter_source = ScatterSource::ms_closed_form;
    // conditional data-flip pattern tables per stabilizer weight, subset-indexed;
    // probabilities conditioned on an anticommuting ancilla fault
    std::array<std::vector<double>, 5> tables;  // index by weight (2 or 4 used)

    double table_marginal(int weight) const;   // per-partner flip probability
};

NoiseModel build_noise_model(const SurfaceCodeLayout& layout, double p_ph, double p_2q,
                             PairMode mode,
                             ScatterSource source = ScatterSource::ms_closed_form,
                             const std::string& channel_file = {});

// Weighted syndrome-matching graph for the Z-stabilizer detector stream
// (X-error side / memory-Z). Nodes are (z-stab, round) pairs; a virtual
// boundary absorbs odd defects.
struct DetectorGraph {
    int n_z = 0, rounds = 0;            // detectors = n_z * (rounds + 1)
    int nodes() const { return n_z * (rounds + 1); }
    // dense all-pairs shortest-path distance and path logical parity
    std::vector<float> dist;
    std::vector<uint8_t> parity;
    std::vector<float> bdist;           // distance to boundary per node
    std::vector<uint8_t> bparity;

    double dist_at(int a, int b) const { return dist[static_cast<size_t>(a) * nodes() + b]; }
    bool parity_at(int a, int b) const { return parity[static_cast<size_t>(a) * nodes() + b]; }
};

DetectorGraph build_detector_graph(const SurfaceCodeLayout& layout, const NoiseModel& noise,
                                   int rounds);

struct ShotRecord {
    std::vector<uint8_t> detectors;   // z-stream, (rounds+1) x n_z
    bool logical_flip = false;        // actual X-error parity on logical-Z support
};

// Sample one memory-Z shot; exposed for the record-level tests and tools.
ShotRecord simulate_shot(const SurfaceCodeLayout& layout, const NoiseModel& noise, int rounds,
                         std::mt19937_64& rng);

struct DecodeResult {
    std::vector<std::pair<int, int>> matched_pairs;   // detector-node pairs
    std::vector<int> boundary_matches;                // detector nodes sent to boundary
    bool predicted_flip = false;
};

DecodeResult decode_mwpm(const DetectorGraph& graph, const std::vector<uint8_t>& detectors);

struct SimResult {
    long shots = 0;
    long failures = 0;
    double p_l = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;   // Wilson 95%
    double seconds = 0.0;
    uint64_t seed = 0;
    std::string config_digest;
};

SimResult logical_error_rate(long shots, long failures);
double gain_factor(double p_ph, double p_l);

// Full memory experiment: sample, decode, count logical failures.
SimResult run_memory(const SurfaceCodeLayout& layout, const NoiseModel& noise, int rounds,
                     long shots, uint64_t seed, int threads = 0);

struct SweepPoint {
    int d = 0;
    double p_ph = 0.0, p_2q = 0.0;
    long shots = 0, failures = 0;
    double p_l = 0.0, ci_lo = 0.0, ci_hi = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    // pairwise curve-crossing estimates (d1, d2, p_cross); NaN if no crossing
    std::vector<std::array<double, 3>> crossings;
};

SweepResult threshold_sweep(const std::vector<int>& distances, const std::vector<double>& p_grid,
                            double p_2q, PairMode mode, Schedule schedule, long shots,
                            uint64_t seed, int rounds = 0, int threads = 0);

}  // namespace ionqec::qec
