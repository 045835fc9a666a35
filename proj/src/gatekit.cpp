#include "ionqec/gatekit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ionqec/quad.hpp"

namespace ionqec::gatekit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> uniform_grid(double tau, int grid_points) {
    if (grid_points < 16) throw std::invalid_argument("trajectory grid too coarse (< 16)");
    std::vector<double> t(grid_points + 1);
    for (int k = 0; k <= grid_points; ++k) t[k] = tau * k / grid_points;
    t.back() = tau;
    return t;
}

void check_gate_args(int n_ions, double tau) {
    if (n_ions < 2) throw std::invalid_argument("gate needs at least two ions");
    if (!(tau > 0.0)) throw std::invalid_argument("gate duration must be positive");
}

}  // namespace

void ModeSpec::validate() const {
    if (freq_rad_s.empty()) throw std::invalid_argument("mode spec: no modes");
    for (size_t j = 0; j < freq_rad_s.size(); ++j) {
        if (!(freq_rad_s[j] > 0.0))
            throw std::invalid_argument("mode frequencies must be strictly positive");
        if (j && !(freq_rad_s[j] > freq_rad_s[j - 1]))
            throw std::invalid_argument("mode frequencies must be strictly increasing");
    }
    if (eta.size() != freq_rad_s.size())
        throw std::invalid_argument("eta row count must match mode count");
    for (const auto& row : eta)
        if (row.size() != eta[0].size() || row.empty())
            throw std::invalid_argument("eta rows must be non-empty and equal length");
}

void GateSpec::validate() const {
    check_gate_args(ion_count, tau_s);
    if (tones.size() != static_cast<size_t>(ion_count))
        throw std::invalid_argument("tone list count must match ion count");
    if (target_phi.size() != pair_count(ion_count))
        throw std::invalid_argument("target phase matrix has wrong pair count");
}

TrajectoryTable ms_trajectory(int n_ions, double tau_s, int grid_points) {
    check_gate_args(n_ions, tau_s);
    TrajectoryTable tr;
    tr.source = TrajSource::ms;
    tr.ion_count = n_ions;
    tr.mode_count = 1;
    tr.tau_s = tau_s;
    tr.t = uniform_grid(tau_s, grid_points);
    const size_t K = tr.t.size();
    tr.alpha.assign(static_cast<size_t>(n_ions) * K, {});
    tr.phi.assign(pair_count(n_ions) * K, 0.0);
    tr.target_phi.assign(pair_count(n_ions), std::numbers::pi / 4.0);
    const double xi = kTwoPi / tau_s;
    for (size_t k = 0; k < K; ++k) {
        const double u = xi * tr.t[k];
        const cplx a = (1.0 - std::polar(1.0, u)) / 4.0;
        const double p = (u - std::sin(u)) / 8.0;
        for (int n = 0; n < n_ions; ++n) tr.alpha_ref(0, n, k) = a;
        for (size_t pr = 0; pr < pair_count(n_ions); ++pr) tr.phi_ref(pr, k) = p;
    }
    tr.quad_tol = 0.0;  // closed form
    return tr;
}

TrajectoryTable robust_trajectory(int n_ions, double tau_s, int grid_points) {
    check_gate_args(n_ions, tau_s);
    TrajectoryTable tr;
    tr.source = TrajSource::robust;
    tr.ion_count = n_ions;
    tr.mode_count = 1;
    tr.tau_s = tau_s;
    tr.t = uniform_grid(tau_s, grid_points);
    const size_t K = tr.t.size();
    tr.alpha.assign(static_cast<size_t>(n_ions) * K, {});
    tr.phi.assign(pair_count(n_ions) * K, 0.0);
    const double zeta = kTwoPi / tau_s;
    const double norm = 1.0 / std::sqrt(24.0);

    // alpha is closed-form; phi accumulates 2 Im(alpha-dot alpha*) per pair
    // (the two-ion Magnus double integral collapsed onto the trajectory).
    std::vector<double> integrand(K);
    for (size_t k = 0; k < K; ++k) {
        const double u = zeta * tr.t[k];
        const cplx e1 = std::polar(1.0, u), e2 = std::polar(1.0, 2.0 * u);
        const cplx a = (e2 - e1) * norm;
        const cplx adot = (cplx(0.0, 2.0 * zeta) * e2 - cplx(0.0, zeta) * e1) * norm;
        for (int n = 0; n < n_ions; ++n) tr.alpha_ref(0, n, k) = a;
        integrand[k] = 2.0 * std::imag(adot * std::conj(a));
    }
    auto pairphi = cumtrapz<double>(tr.dt(), integrand);
    for (size_t pr = 0; pr < pair_count(n_ions); ++pr)
        for (size_t k = 0; k < K; ++k) tr.phi_ref(pr, k) = pairphi[k];
    tr.target_phi.assign(pair_count(n_ions), pairphi.back());
    tr.quad_tol = richardson_tolerance<double>(tr.dt(), integrand);
    return tr;
}

TrajectoryTable magnus_trajectories(const GateSpec& gate, const ModeSpec& modes,
                                    int grid_points) {
    gate.validate();
    modes.validate();
    if (modes.ion_count() != gate.ion_count)
        throw std::invalid_argument("mode eta matrix does not match gate ion count");

    double fastest = 0.0;
    for (const auto& f : modes.freq_rad_s) fastest = std::max(fastest, f);
    for (const auto& ion : gate.tones)
        for (const auto& tn : ion) {
            if (!std::isfinite(tn.freq_rad_s) || !std::isfinite(tn.amp_rad_s))
                throw std::invalid_argument("non-finite tone parameters");
            fastest = std::max(fastest, std::abs(tn.freq_rad_s));
        }
    const double dt = gate.tau_s / grid_points;
    if (fastest > 0.0 && dt > kTwoPi / fastest / 20.0)
        throw std::invalid_argument(
            "grid does not resolve the fastest tone (need >= 20 samples per period)");

    TrajectoryTable tr;
    tr.source = TrajSource::magnus;
    tr.ion_count = gate.ion_count;
    tr.mode_count = modes.mode_count();
    tr.tau_s = gate.tau_s;
    tr.t = uniform_grid(gate.tau_s, grid_points);
    const size_t K = tr.t.size();
    const int N = gate.ion_count, J = modes.mode_count();
    tr.alpha.assign(static_cast<size_t>(J) * N * K, {});
    tr.phi.assign(pair_count(N) * K, 0.0);
    tr.target_phi = gate.target_phi;

    // waveforms f_n(t_k)
    std::vector<std::vector<double>> f(N, std::vector<double>(K, 0.0));
    for (int n = 0; n < N; ++n)
        for (size_t k = 0; k < K; ++k) {
            double v = 0.0;
            for (const auto& tn : gate.tones[n])
                v += tn.amp_rad_s * std::cos(tn.freq_rad_s * tr.t[k] + tn.phase_rad);
            f[n][k] = v;
        }

    double tol = 0.0;
    // adot[j][n][k] = eta_j^(n) f_n(t) e^{i nu_j t}; alpha by cumulative trapezoid
    std::vector<cplx> adot(static_cast<size_t>(J) * N * K);
    for (int j = 0; j < J; ++j) {
        for (int n = 0; n < N; ++n) {
            std::vector<cplx> g(K);
            for (size_t k = 0; k < K; ++k)
                g[k] = modes.eta[j][n] * f[n][k] * std::polar(1.0, modes.freq_rad_s[j] * tr.t[k]);
            auto a = cumtrapz<cplx>(tr.dt(), g);
            tol = std::max(tol, richardson_tolerance<cplx>(tr.dt(), g));
            const size_t base = (static_cast<size_t>(j) * N + n) * K;
            for (size_t k = 0; k < K; ++k) {
                tr.alpha[base + k] = a[k];
                adot[base + k] = g[k];
            }
        }
    }

    // phi_nm(t) = sum_j int_0^t Im(adot_n a_m* + adot_m a_n*), the App. A
    // double integral reduced to one cumulative pass.
    std::vector<double> integrand(K);
    for (int n = 0; n < N; ++n) {
        for (int m = n + 1; m < N; ++m) {
            std::fill(integrand.begin(), integrand.end(), 0.0);
            for (int j = 0; j < J; ++j) {
                const size_t bn = (static_cast<size_t>(j) * N + n) * K;
                const size_t bm = (static_cast<size_t>(j) * N + m) * K;
                for (size_t k = 0; k < K; ++k)
                    integrand[k] += std::imag(adot[bn + k] * std::conj(tr.alpha[bm + k])) +
                                    std::imag(adot[bm + k] * std::conj(tr.alpha[bn + k]));
            }
            auto p = cumtrapz<double>(tr.dt(), integrand);
            tol = std::max(tol, richardson_tolerance<double>(tr.dt(), integrand));
            const size_t pr = pair_index(n, m, N);
            for (size_t k = 0; k < K; ++k) tr.phi_ref(pr, k) = p[k];
        }
    }
    tr.quad_tol = tol;
    return tr;
}

ClosureResidual closure_residual(const TrajectoryTable& tr) {
    ClosureResidual r;
    const size_t last = tr.samples() - 1;
    for (int j = 0; j < tr.mode_count; ++j)
        for (int n = 0; n < tr.ion_count; ++n)
            r.max_alpha = std::max(r.max_alpha, std::abs(tr.alpha_at(j, n, last)));
    for (int n = 0; n < tr.ion_count; ++n)
        for (int m = n + 1; m < tr.ion_count; ++m)
            r.max_phi_error =
                std::max(r.max_phi_error, std::abs(tr.phi_at(n, m, last) - tr.target_at(n, m)));
    return r;
}

// ---------------------------------------------------------------------------
// gate-file parsing

namespace {

std::vector<double> parse_numbers(const std::string& s) {
    std::vector<double> out;
    std::string tok;
    std::istringstream iss(s);
    while (iss >> tok) {
        if (tok == ",") continue;
        while (!tok.empty() && (tok.back() == ',')) tok.pop_back();
        if (tok.empty()) continue;
        try {
            out.push_back(std::stod(tok));
        } catch (...) {
            throw std::invalid_argument("gate file: bad number '" + tok + "'");
        }
    }
    return out;
}

std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

GateFile load_gate_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open gate file: " + path);

    GateFile gf;
    std::string section;
    std::vector<std::vector<double>> eta_rows;
    std::vector<double> freqs_hz;
    std::vector<std::array<double, 3>> targets;
    std::vector<std::array<double, 4>> tone_rows;
    double tau_us = 0.0;
    int n = 0;

    std::string line;
    while (std::getline(in, line)) {
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = strip(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            section = strip(line.substr(1, line.find(']') - 1));
            continue;
        }
        const auto eq = line.find('=');
        std::string key = eq == std::string::npos ? "" : strip(line.substr(0, eq));
        std::string val = eq == std::string::npos ? line : strip(line.substr(eq + 1));

        if (section == "modes") {
            if (key == "frequencies_hz") {
                freqs_hz = parse_numbers(val);
            } else if (key == "eta") {
                std::istringstream rows(val);
                std::string row;
                while (std::getline(rows, row, ';')) eta_rows.push_back(parse_numbers(row));
            } else {
                throw std::invalid_argument("gate file: unknown [modes] key '" + key + "'");
            }
        } else if (section == "gate") {
            if (key == "n") {
                n = static_cast<int>(parse_numbers(val).at(0));
            } else if (key == "tau_us") {
                tau_us = parse_numbers(val).at(0);
            } else if (key == "targets") {
                std::istringstream rows(val);
                std::string row;
                while (std::getline(rows, row, ';')) {
                    auto v = parse_numbers(row);
                    if (v.size() != 3)
                        throw std::invalid_argument("gate file: target triple needs (i, j, phi)");
                    targets.push_back({v[0], v[1], v[2]});
                }
            } else {
                throw std::invalid_argument("gate file: unknown [gate] key '" + key + "'");
            }
        } else if (section == "tones") {
            auto v = parse_numbers(key.empty() ? val : line);
            if (v.size() != 4)
                throw std::invalid_argument("gate file: tone row needs ion amp_hz freq_hz phase");
            tone_rows.push_back({v[0], v[1], v[2], v[3]});
        } else {
            throw std::invalid_argument("gate file: content outside a known section");
        }
    }

    if (n < 2) throw std::invalid_argument("gate file: [gate] n must be >= 2");
    gf.gate.ion_count = n;
    gf.gate.tau_s = tau_us * 1e-6;
    gf.gate.tones.resize(n);
    for (const auto& r : tone_rows) {
        const int ion = static_cast<int>(r[0]);
        if (ion < 0 || ion >= n) throw std::invalid_argument("gate file: tone ion out of range");
        gf.gate.tones[ion].push_back(
            Tone{r[1] * kTwoPi, r[2] * kTwoPi, r[3]});
    }
    gf.gate.target_phi.assign(pair_count(n), 0.0);
    for (const auto& tg : targets) {
        const int i = static_cast<int>(tg[0]), j = static_cast<int>(tg[1]);
        if (i < 0 || j < 0 || i >= n || j >= n || i == j)
            throw std::invalid_argument("gate file: bad target pair");
        gf.gate.target_phi[pair_index(i, j, n)] = tg[2];
    }
    gf.modes.freq_rad_s.reserve(freqs_hz.size());
    for (double f : freqs_hz) gf.modes.freq_rad_s.push_back(f * kTwoPi);
    gf.modes.eta = std::move(eta_rows);
    gf.gate.validate();
    gf.modes.validate();
    if (gf.modes.ion_count() != n)
        throw std::invalid_argument("gate file: eta columns must equal ion count");
    return gf;
}

}  // namespace ionqec::gatekit
