#include "ionqec/noisechan.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ionqec/fwht.hpp"
#include "ionqec/quad.hpp"

namespace ionqec::noisechan {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double mode_occ(const std::vector<double>& nbars, int j) {
    return nbars.empty() ? 0.0 : nbars.at(j);
}

// sum_j (2 nbar_j + 1) |alpha_j^(k)(t_i)|^2 on the grid
std::vector<double> weighted_alpha_sq(const TrajectoryTable& tr, int k,
                                      const std::vector<double>& nbars) {
    std::vector<double> w(tr.samples(), 0.0);
    for (int j = 0; j < tr.mode_count; ++j) {
        const double occ = 2.0 * mode_occ(nbars, j) + 1.0;
        for (size_t i = 0; i < tr.samples(); ++i)
            w[i] += occ * std::norm(tr.alpha_at(j, k, i));
    }
    return w;
}

// gamma_k(t_i) as seen by the scattering channel. Conjugating sigma_z by the
// gate doubles the conditional displacement (D(-2 alpha sigma_x)), so the
// thermal coherence factor is exp[-8 sum (2n+1)|alpha|^2] in table units.
std::vector<double> gamma_series_channel(const TrajectoryTable& tr, int k,
                                         const std::vector<double>& nbars) {
    auto w = weighted_alpha_sq(tr, k, nbars);
    for (auto& v : w) v = (1.0 - std::exp(-8.0 * v)) / 2.0;
    return w;
}

void check_ion(const TrajectoryTable& tr, int k) {
    if (k < 0 || k >= tr.ion_count) throw std::invalid_argument("unknown ion index");
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

double PauliChannel::term_total() const {
    double s = 0.0;
    for (const auto& [_, p] : terms) s += p;
    return s;
}

void PauliChannel::validate(double tol) const {
    if (identity < -tol || identity > 1.0 + tol)
        throw std::runtime_error("pauli channel: identity weight out of range");
    double s = identity;
    for (const auto& [str, p] : terms) {
        if (static_cast<int>(str.size()) != qubit_count)
            throw std::runtime_error("pauli channel: string length mismatch");
        if (p < -tol || p > 1.0 + tol)
            throw std::runtime_error("pauli channel: probability out of range");
        s += p;
    }
    for (size_t i = 0; i < terms.size(); ++i)
        for (size_t j = i + 1; j < terms.size(); ++j)
            if (terms[i].first == terms[j].first)
                throw std::runtime_error("pauli channel: duplicate string");
    if (std::abs(s - 1.0) > tol)
        throw std::runtime_error("pauli channel: total probability differs from 1");
}

void RateSet::validate(int mode_count) const {
    auto chk = [&](const std::vector<double>& v, const char* name) {
        if (!v.empty() && static_cast<int>(v.size()) != mode_count)
            throw std::invalid_argument(std::string("rate set: ") + name +
                                        " length does not match mode count");
        for (double x : v)
            if (x < 0.0) throw std::invalid_argument(std::string("rate set: negative ") + name);
    };
    if (gamma_s_hz < 0.0) throw std::invalid_argument("rate set: negative gamma_s");
    chk(gamma_h_hz, "gamma_h");
    chk(nbar_th, "nbar_th");
    chk(gamma_d_hz, "gamma_d");
    chk(nbar, "nbar");
}

double gamma_k(const TrajectoryTable& tr, const std::vector<double>& nbars, int k, double t) {
    check_ion(tr, k);
    if (t < tr.t.front() - 1e-15 || t > tr.t.back() + 1e-12 * tr.tau_s)
        throw std::invalid_argument("gamma_k: time outside trajectory grid");
    // nearest-sample lookup with linear interpolation of the exponent
    const double dt = tr.dt();
    const size_t i0 = std::min(tr.samples() - 2, static_cast<size_t>(std::max(0.0, t / dt)));
    const double frac = std::clamp((t - tr.t[i0]) / dt, 0.0, 1.0);
    double w = 0.0;
    for (int j = 0; j < tr.mode_count; ++j) {
        const double occ = 2.0 * mode_occ(nbars, j) + 1.0;
        const double a0 = std::norm(tr.alpha_at(j, k, i0));
        const double a1 = std::norm(tr.alpha_at(j, k, i0 + 1));
        w += occ * ((1.0 - frac) * a0 + frac * a1);
    }
    return (1.0 - std::exp(-2.0 * w)) / 2.0;
}

std::vector<double> scatter_single_flip_probs(const TrajectoryTable& tr, int k,
                                              double gamma_s_hz, ScatterVariant variant,
                                              const std::vector<double>* nbars) {
    check_ion(tr, k);
    const size_t K = tr.samples();
    const size_t last = K - 1;
    const double dt = tr.dt();
    std::vector<double> p(tr.ion_count, 0.0);

    const auto gam = gamma_series_channel(tr, k, nbars ? *nbars : std::vector<double>{});
    for (int n = 0; n < tr.ion_count; ++n) {
        if (n == k) continue;
        double acc = 0.0;
        for (size_t i = 0; i < K; ++i) {
            const double s = std::sin(2.0 * tr.phi_at(n, k, i));
            const double integ = variant == ScatterVariant::z ? s * s : 1.0 - s * s;
            acc += trapezoid_weight(i, last, dt) * integ;
        }
        p[n] = gamma_s_hz * acc;
    }
    // faulty row: 1/2 - (1-2 gamma)/2 prod cos(4 phi_n'k)
    double acc = 0.0;
    for (size_t i = 0; i < K; ++i) {
        double prod = 1.0;
        for (int n = 0; n < tr.ion_count; ++n)
            if (n != k) prod *= std::cos(4.0 * tr.phi_at(n, k, i));
        acc += trapezoid_weight(i, last, dt) * (0.5 - 0.5 * (1.0 - 2.0 * gam[i]) * prod);
    }
    p[k] = gamma_s_hz * acc;
    return p;
}

std::vector<ScatterPattern> scatter_patterns(const TrajectoryTable& tr, int k,
                                             double gamma_s_hz, const ScatterOptions& opts,
                                             std::vector<int>* support_out) {
    check_ion(tr, k);
    const size_t K = tr.samples();
    const size_t last = K - 1;
    const double dt = tr.dt();

    std::vector<int> support;
    for (int m = 0; m < tr.ion_count; ++m) {
        if (m == k) continue;
        double peak = 0.0;
        for (size_t i = 0; i < K; ++i) peak = std::max(peak, std::abs(tr.phi_at(m, k, i)));
        if (peak > opts.theta_support) support.push_back(m);
    }
    if (support.size() > 20)
        throw std::runtime_error(
            "scatter support set exceeds 20 qubits; raise theta_support to bound enumeration");
    if (support_out) *support_out = support;

    const auto gam = gamma_series_channel(tr, k, opts.nbars);
    std::vector<std::vector<double>> s2(support.size(), std::vector<double>(K));
    for (size_t q = 0; q < support.size(); ++q)
        for (size_t i = 0; i < K; ++i) {
            const double s = std::sin(2.0 * tr.phi_at(support[q], k, i));
            s2[q][i] = s * s;
        }

    std::vector<ScatterPattern> out;
    out.reserve(2u << support.size());
    std::vector<double> prod(K);
    for (unsigned subset = 0; subset < (1u << support.size()); ++subset) {
        std::fill(prod.begin(), prod.end(), 1.0);
        for (size_t q = 0; q < support.size(); ++q) {
            if (subset >> q & 1)
                for (size_t i = 0; i < K; ++i) prod[i] *= s2[q][i];
            else
                for (size_t i = 0; i < K; ++i) prod[i] *= 1.0 - s2[q][i];
        }
        const int npart = std::popcount(subset);
        for (int b = 0; b < 2; ++b) {
            // total flip parity (partners + faulty) selects gamma vs 1-gamma
            const bool odd = (npart + b) % 2;
            double acc = 0.0;
            for (size_t i = 0; i < K; ++i)
                acc += trapezoid_weight(i, last, dt) * prod[i] * (odd ? gam[i] : 1.0 - gam[i]);
            out.push_back({subset, b == 1, gamma_s_hz * acc});
        }
    }
    return out;
}

PauliChannel scatter_correlated_channel(const TrajectoryTable& tr, int k, double gamma_s_hz,
                                        const ScatterOptions& opts) {
    if (opts.eps_trunc < 0.0 || opts.eps_trunc > 1e-3)
        throw std::invalid_argument("eps_trunc outside [0, 1e-3]");
    std::vector<int> support;
    auto pats = scatter_patterns(tr, k, gamma_s_hz, opts, &support);

    PauliChannel ch;
    ch.qubit_count = tr.ion_count;
    const double tau = tr.t.back();
    double kept = 0.0;
    for (const auto& pat : pats) {
        if (pat.p < opts.eps_trunc) continue;
        std::string str(tr.ion_count, 'I');
        for (size_t q = 0; q < support.size(); ++q)
            if (pat.subset >> q & 1) str[support[q]] = 'X';
        // faulty qubit keeps the phase flip; an additional bit flip makes it Y
        if (opts.variant == ScatterVariant::z)
            str[k] = pat.faulty_flipped ? 'Y' : 'Z';
        else
            str[k] = pat.faulty_flipped ? 'Z' : 'Y';
        ch.terms.emplace_back(std::move(str), pat.p);
        kept += pat.p;
    }
    ch.identity = 1.0 - kept;  // null event plus truncated mass
    (void)tau;
    return ch;
}

std::vector<double> hook_distribution(int n_data, int quad_points) {
    if (n_data < 1) throw std::invalid_argument("hook_distribution: need at least one qubit");
    const int K = quad_points;
    std::vector<double> p(n_data + 1, 0.0);
    // trapezoid over one period; the integrand is smooth and periodic so this
    // converges spectrally. Work in logs to survive large N.
    std::vector<double> logbin(n_data + 1);
    for (int n = 0; n <= n_data; ++n)
        logbin[n] = std::lgamma(n_data + 1.0) - std::lgamma(n + 1.0) -
                    std::lgamma(n_data - n + 1.0);
    for (int i = 0; i < K; ++i) {
        const double u = kTwoPi * i / K;
        const double ph = (u - std::sin(u)) / 4.0;
        const double s2 = std::sin(ph) * std::sin(ph);
        const double c2 = 1.0 - s2;
        const double ls = s2 > 0.0 ? std::log(s2) : -1e300;
        const double lc = c2 > 0.0 ? std::log(c2) : -1e300;
        for (int n = 0; n <= n_data; ++n) {
            const double lg = logbin[n] + n * ls + (n_data - n) * lc;
            if (lg > -700.0) p[n] += std::exp(lg);
        }
    }
    for (auto& v : p) v /= K;
    return p;
}

std::pair<double, double> hook_asymptotics(int n_data) {
    return {0.43 * std::pow(static_cast<double>(n_data), -1.0 / 6.0),
            1.0 / (std::numbers::pi * n_data)};
}

HeatingMatrix heating_matrix(const TrajectoryTable& tr, const RateSet& rates) {
    rates.validate(tr.mode_count);
    HeatingMatrix hm;
    hm.n = tr.ion_count;
    hm.a.assign(static_cast<size_t>(hm.n) * hm.n, 0.0);
    const size_t K = tr.samples();
    const size_t last = K - 1;
    const double dt = tr.dt();
    for (int j = 0; j < tr.mode_count; ++j) {
        const double rate = rates.gamma_h_hz.empty() ? 0.0 : rates.gamma_h_hz[j];
        if (rate == 0.0) continue;
        const double w = rate * (2.0 * mode_occ(rates.nbar_th, j) + 1.0) / 2.0;
        for (int n = 0; n < hm.n; ++n) {
            for (int m = n; m < hm.n; ++m) {
                double acc = 0.0;
                for (size_t i = 0; i < K; ++i)
                    acc += trapezoid_weight(i, last, dt) *
                           std::real(tr.alpha_at(j, n, i) * std::conj(tr.alpha_at(j, m, i)));
                hm.a[static_cast<size_t>(n) * hm.n + m] += w * acc;
                if (m != n) hm.a[static_cast<size_t>(m) * hm.n + n] += w * acc;
            }
        }
    }
    return hm;
}

std::vector<double> heating_eta(const HeatingMatrix& a) {
    const int N = a.n;
    if (N > 14) throw std::invalid_argument("heating_eta: dense construction limited to N <= 14");
    const size_t dim = 1ull << N;
    std::vector<double> rho(dim * dim);
    std::vector<int> spin(N);
    for (size_t x = 0; x < dim; ++x) {
        for (size_t xp = 0; xp < dim; ++xp) {
            double expo = 0.0;
            for (int n = 0; n < N; ++n) {
                const int dn = (1 - 2 * (static_cast<int>(x >> n) & 1)) -
                               (1 - 2 * (static_cast<int>(xp >> n) & 1));
                if (dn == 0) continue;
                for (int m = 0; m < N; ++m) {
                    const int dm = (1 - 2 * (static_cast<int>(x >> m) & 1)) -
                                   (1 - 2 * (static_cast<int>(xp >> m) & 1));
                    if (dm) expo += a.at(n, m) * dn * dm;
                }
            }
            rho[x * dim + xp] = std::exp(-expo) / static_cast<double>(dim);
        }
    }
    hadamard_conjugate(rho, dim);
    std::vector<double> eta(dim);
    for (size_t z = 0; z < dim; ++z) {
        double v = rho[z * dim + z];
        if (v < 0.0) {
            if (v < -1e-12) throw std::runtime_error("heating_eta: diagonal negative beyond tolerance");
            v = 0.0;
        }
        eta[z] = v;
    }
    return eta;
}

std::vector<double> heating_1q_probs(const TrajectoryTable& tr, const RateSet& rates) {
    rates.validate(tr.mode_count);
    std::vector<double> p(tr.ion_count, 0.0);
    const size_t K = tr.samples();
    const size_t last = K - 1;
    const double dt = tr.dt();
    for (int j = 0; j < tr.mode_count; ++j) {
        const double rate = rates.gamma_h_hz.empty() ? 0.0 : rates.gamma_h_hz[j];
        if (rate == 0.0) continue;
        const double w = rate * (2.0 * mode_occ(rates.nbar_th, j) + 1.0);
        for (int n = 0; n < tr.ion_count; ++n) {
            double acc = 0.0;
            for (size_t i = 0; i < K; ++i)
                acc += trapezoid_weight(i, last, dt) * std::norm(tr.alpha_at(j, n, i));
            p[n] += w * acc;
        }
    }
    return p;
}

double DephasingProbs::total_p1() const {
    double s = 0.0;
    for (double v : p1) s += v;
    return s;
}
double DephasingProbs::total_p2() const {
    double s = 0.0;
    for (double v : p2) s += v;
    return s;
}

DephasingProbs dephasing_probs(const TrajectoryTable& tr, const RateSet& rates) {
    rates.validate(tr.mode_count);
    DephasingProbs out;
    out.p1.assign(tr.ion_count, 0.0);
    out.p2.assign(gatekit::pair_count(tr.ion_count), 0.0);
    const size_t K = tr.samples();
    const size_t last = K - 1;
    const double dt = tr.dt();
    for (int j = 0; j < tr.mode_count; ++j) {
        const double rate = rates.gamma_d_hz.empty() ? 0.0 : rates.gamma_d_hz[j];
        if (rate == 0.0) continue;
        const double w1 = rate * (2.0 * mode_occ(rates.nbar, j) + 1.0);
        for (int n = 0; n < tr.ion_count; ++n) {
            double acc = 0.0;
            for (size_t i = 0; i < K; ++i)
                acc += trapezoid_weight(i, last, dt) * std::norm(tr.alpha_at(j, n, i));
            out.p1[n] += w1 * acc;
        }
        for (int n = 0; n < tr.ion_count; ++n) {
            for (int m = n + 1; m < tr.ion_count; ++m) {
                double acc = 0.0;
                for (size_t i = 0; i < K; ++i) {
                    const double amp =
                        2.0 * std::real(std::conj(tr.alpha_at(j, n, i)) * tr.alpha_at(j, m, i));
                    acc += trapezoid_weight(i, last, dt) * amp * amp;
                }
                out.p2[gatekit::pair_index(n, m, tr.ion_count)] += rate * acc;
            }
        }
    }
    return out;
}

MedianSplit coupled_uncoupled_split(const std::vector<double>& p2_pairs,
                                    const std::vector<double>& target_phi, int ions) {
    if (p2_pairs.size() != gatekit::pair_count(ions) || target_phi.size() != p2_pairs.size())
        throw std::invalid_argument("coupled_uncoupled_split: pair vector size mismatch");
    std::vector<double> coupled, uncoupled;
    for (size_t pr = 0; pr < p2_pairs.size(); ++pr) {
        if (std::abs(target_phi[pr]) > 1e-9)
            coupled.push_back(p2_pairs[pr]);
        else
            uncoupled.push_back(p2_pairs[pr]);
    }
    MedianSplit ms;
    ms.coupled_empty = coupled.empty();
    ms.uncoupled_empty = uncoupled.empty();
    ms.coupled = median_of(coupled);
    ms.uncoupled = median_of(uncoupled);
    return ms;
}

double raman_rate(double omega1_rad_s, double omega2_rad_s, double delta_rad_s,
                  double gamma_p_rad_s) {
    if (delta_rad_s == 0.0) throw std::invalid_argument("raman_rate: zero detuning");
    return omega1_rad_s * omega2_rad_s / (delta_rad_s * delta_rad_s) * gamma_p_rad_s;
}

double scatter_budget(double omega_r_hz, double gamma_p_rad_s, double delta_rad_s,
                      double tau_s) {
    if (delta_rad_s == 0.0) throw std::invalid_argument("scatter_budget: zero detuning");
    return omega_r_hz * gamma_p_rad_s / delta_rad_s * tau_s;
}

}  // namespace ionqec::noisechan
