#include "ionqec/lindblad.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include "ionqec/fwht.hpp"
#include "ionqec/quad.hpp"

namespace ionqec::oracle {

namespace {

using cplx = std::complex<double>;
using gatekit::pair_index;

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d49b3133111ebull;
    return x ^ (x >> 31);
}

// sector spin sum S^x = sum_n s_n and pair sum P^x = sum_{n<m} s_n s_m
struct SectorInfo {
    std::vector<int> spin_sum;
    std::vector<double> pair_phase_weight;  // used with uniform phi; general case below
};

// A_j^x(t_k) = sum_n s_n alpha_j^(n)(t_k); Phi^x(t_k) = sum_{n<m} s_n s_m phi_nm(t_k)
struct SectorTables {
    int n_sectors = 0, n_modes = 0;
    size_t K = 0;
    std::vector<cplx> A;        // [sector][mode][k]
    std::vector<double> Phi;    // [sector][k]

    cplx a_at(int x, int j, size_t k) const {
        return A[(static_cast<size_t>(x) * n_modes + j) * K + k];
    }
    double phi_at(int x, size_t k) const { return Phi[static_cast<size_t>(x) * K + k]; }
};

SectorTables build_sector_tables(const TrajectoryTable& tr) {
    const int N = tr.ion_count, J = tr.mode_count;
    SectorTables st;
    st.n_sectors = 1 << N;
    st.n_modes = J;
    st.K = tr.samples();
    st.A.assign(static_cast<size_t>(st.n_sectors) * J * st.K, {});
    st.Phi.assign(static_cast<size_t>(st.n_sectors) * st.K, 0.0);
    for (int x = 0; x < st.n_sectors; ++x) {
        std::vector<int> s(N);
        for (int n = 0; n < N; ++n) s[n] = 1 - 2 * ((x >> n) & 1);
        for (size_t k = 0; k < st.K; ++k) {
            for (int j = 0; j < J; ++j) {
                cplx a{};
                for (int n = 0; n < N; ++n)
                    a += static_cast<double>(s[n]) * tr.alpha_at(j, n, k);
                st.A[(static_cast<size_t>(x) * J + j) * st.K + k] = a;
            }
            double ph = 0.0;
            for (int n = 0; n < N; ++n)
                for (int m = n + 1; m < N; ++m)
                    ph += s[n] * s[m] * tr.phi_at(n, m, k);
            st.Phi[static_cast<size_t>(x) * st.K + k] = ph;
        }
    }
    return st;
}

// apply exp(beta a^dag - beta^* a) to a strided single-mode factor via a
// truncated Taylor series; the per-step displacements are small so a short
// series is exact to roundoff. fac/tmp/term are caller-provided scratch.
void apply_displacement(cplx* v, size_t stride, size_t d, cplx beta,
                        const std::vector<double>& sq, int order, cplx* fac, cplx* tmp,
                        cplx* term) {
    for (size_t i = 0; i < d; ++i) fac[i] = v[i * stride];
    std::copy(fac, fac + d, term);
    for (int k = 1; k <= order; ++k) {
        // term <- (beta a^dag - beta* a) term / k
        for (size_t i = 0; i < d; ++i) {
            cplx up = i > 0 ? beta * sq[i] * term[i - 1] : cplx{};
            cplx dn = i + 1 < d ? -std::conj(beta) * sq[i + 1] * term[i + 1] : cplx{};
            tmp[i] = (up + dn) / static_cast<double>(k);
        }
        std::swap_ranges(term, term + d, tmp);
        for (size_t i = 0; i < d; ++i) fac[i] += term[i];
    }
    for (size_t i = 0; i < d; ++i) v[i * stride] = fac[i];
}

struct ShotWorkspace {
    std::vector<cplx> psi;           // [sector][fock...] flattened
    std::vector<cplx> fac, tmp, term;
};

}  // namespace

void OracleConfig::validate() const {
    if (traj.ion_count < 1 || traj.ion_count > 6)
        throw std::invalid_argument("oracle: ion count must be 1..6");
    if (fock_cutoff.size() != static_cast<size_t>(traj.mode_count))
        throw std::invalid_argument("oracle: cutoff list must match mode count");
    for (int c : fock_cutoff)
        if (c < 8) throw std::invalid_argument("oracle: fock cutoff must be >= 8");
    if (!nbar.empty() && nbar.size() != static_cast<size_t>(traj.mode_count))
        throw std::invalid_argument("oracle: nbar list must match mode count");
    if (hilbert_dim() > 2'000'000)
        throw std::invalid_argument("oracle: hilbert dimension exceeds 2e6");
    for (const auto& j : jumps) {
        if (j.rate_hz < 0.0) throw std::invalid_argument("oracle: negative jump rate");
        const bool spin = j.kind == JumpKind::sigma_x || j.kind == JumpKind::sigma_y ||
                          j.kind == JumpKind::sigma_z;
        const int bound = spin ? traj.ion_count : traj.mode_count;
        if (j.target < 0 || j.target >= bound)
            throw std::invalid_argument("oracle: jump target out of range");
    }
    if (shots < 1) throw std::invalid_argument("oracle: shots must be positive");
}

size_t OracleConfig::hilbert_dim() const {
    size_t d = 1ull << traj.ion_count;
    for (int c : fock_cutoff) d *= static_cast<size_t>(c) + 1;
    return d;
}

double FlipHistogram::stderr_of(size_t pattern) const {
    const double ph = p(pattern);
    return std::sqrt(std::max(ph * (1.0 - ph), 0.0) / shots);
}

std::vector<double> FlipHistogram::weight_totals() const {
    std::vector<double> w(qubit_count + 1, 0.0);
    for (size_t z = 0; z < pattern_counts.size(); ++z)
        w[std::popcount(z)] += p(z);
    return w;
}

FlipHistogram evolve_jump(const OracleConfig& cfg) {
    cfg.validate();
    const auto& tr = cfg.traj;
    const int N = tr.ion_count, J = tr.mode_count;
    const int n_sectors = 1 << N;
    const size_t K = tr.samples();
    const double dt = tr.dt();
    const auto st = build_sector_tables(tr);

    std::vector<int> fdim(J);
    size_t ph_dim = 1;
    for (int j = 0; j < J; ++j) {
        fdim[j] = cfg.fock_cutoff[j] + 1;
        ph_dim *= fdim[j];
    }
    const size_t dim = n_sectors * ph_dim;

    // per-mode strides in the phonon index
    std::vector<size_t> stride(J, 1);
    for (int j = J - 2; j >= 0; --j) stride[j] = stride[j + 1] * fdim[j + 1];
    std::vector<std::vector<double>> sq(J);
    for (int j = 0; j < J; ++j) {
        sq[j].resize(fdim[j] + 1, 0.0);
        for (int i = 0; i <= fdim[j]; ++i) sq[j][i] = std::sqrt(static_cast<double>(i));
    }

    // guard: bound per-step jump probability
    double rate_bound = 0.0;
    for (const auto& jm : cfg.jumps) {
        double cc = 1.0;
        if (jm.kind == JumpKind::lower) cc = cfg.fock_cutoff[jm.target];
        if (jm.kind == JumpKind::raise_) cc = cfg.fock_cutoff[jm.target] + 1.0;
        if (jm.kind == JumpKind::number)
            cc = std::pow(static_cast<double>(cfg.fock_cutoff[jm.target]), 2);
        rate_bound += jm.rate_hz * cc;
    }
    if (rate_bound * dt > cfg.max_step_jump_prob)
        throw std::invalid_argument(
            "oracle: per-step jump probability bound exceeded; use a finer trajectory grid");

    const int n_threads =
        cfg.threads > 0 ? cfg.threads
                        : std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::vector<long>> counts(n_threads, std::vector<long>(n_sectors, 0));
    std::vector<double> leak(n_threads, 0.0);
    std::atomic<long> next_shot{0};

    auto worker = [&](int tid) {
        ShotWorkspace ws;
        ws.psi.resize(dim);
        size_t max_fd = 0;
        for (int j = 0; j < J; ++j) max_fd = std::max(max_fd, static_cast<size_t>(fdim[j]));
        ws.fac.resize(max_fd);
        ws.tmp.resize(max_fd);
        ws.term.resize(max_fd);
        std::vector<double> modal_n(J), modal_n2(J);
        std::vector<cplx> zamp(n_sectors);
        std::vector<double> pj(cfg.jumps.size(), 0.0);
        bool need_moments = false;
        for (const auto& jm : cfg.jumps)
            if (jm.kind == JumpKind::lower || jm.kind == JumpKind::raise_ ||
                jm.kind == JumpKind::number)
                need_moments = true;

        for (;;) {
            const long shot = next_shot.fetch_add(1);
            if (shot >= cfg.shots) break;
            std::mt19937_64 rng(splitmix64(cfg.seed ^ splitmix64(0x9e3779b9ull + shot)));
            std::uniform_real_distribution<double> uni(0.0, 1.0);

            // thermal Fock sample per mode
            std::vector<int> nf(J, 0);
            for (int j = 0; j < J; ++j) {
                const double nb = cfg.nbar.empty() ? 0.0 : cfg.nbar[j];
                if (nb > 0.0) {
                    const double r = uni(rng);
                    // geometric: P(n) = nb^n/(1+nb)^{n+1}
                    double c = 0.0, q = 1.0 / (1.0 + nb), pn = q;
                    int n = 0;
                    for (; n < fdim[j] - 1; ++n) {
                        c += pn;
                        if (r < c) break;
                        pn *= nb / (1.0 + nb);
                    }
                    nf[j] = n;
                }
            }
            size_t ph0 = 0;
            for (int j = 0; j < J; ++j) ph0 += stride[j] * nf[j];

            std::fill(ws.psi.begin(), ws.psi.end(), cplx{});
            const double amp0 = 1.0 / std::sqrt(static_cast<double>(n_sectors));
            for (int x = 0; x < n_sectors; ++x) ws.psi[x * ph_dim + ph0] = amp0;

            double shot_leak = 0.0;

            auto mode_moments = [&](int j) {
                double mn = 0.0, mn2 = 0.0, top = 0.0;
                for (size_t i = 0; i < dim; ++i) {
                    const double w = std::norm(ws.psi[i]);
                    if (w == 0.0) continue;
                    const int n = static_cast<int>((i % ph_dim) / stride[j] % fdim[j]);
                    mn += w * n;
                    mn2 += w * static_cast<double>(n) * n;
                    if (n == fdim[j] - 1) top += w;
                }
                modal_n[j] = mn;
                modal_n2[j] = mn2;
                return top;
            };

            for (size_t k = 0; k + 1 < K; ++k) {
                // jump decision at the step start (first-order algorithm)
                double ptot = 0.0;
                if (need_moments)
                    for (int j = 0; j < J; ++j) shot_leak = std::max(shot_leak, mode_moments(j));
                for (size_t c = 0; c < cfg.jumps.size(); ++c) {
                    const auto& jm = cfg.jumps[c];
                    double cc = 1.0;
                    if (jm.kind == JumpKind::lower) cc = modal_n[jm.target];
                    if (jm.kind == JumpKind::raise_) cc = modal_n[jm.target] + 1.0;
                    if (jm.kind == JumpKind::number) cc = modal_n2[jm.target];
                    pj[c] = jm.rate_hz * dt * cc;
                    ptot += pj[c];
                }
                const double r = uni(rng);
                if (r < ptot) {
                    // pick channel, apply bare jump operator, renormalize
                    double c0 = 0.0;
                    size_t pick = cfg.jumps.size() - 1;
                    for (size_t c = 0; c < cfg.jumps.size(); ++c) {
                        c0 += pj[c];
                        if (r < c0) {
                            pick = c;
                            break;
                        }
                    }
                    const auto& jm = cfg.jumps[pick];
                    if (jm.kind == JumpKind::sigma_x) {
                        for (int x = 0; x < n_sectors; ++x) {
                            if ((x >> jm.target) & 1)
                                for (size_t p = 0; p < ph_dim; ++p)
                                    ws.psi[x * ph_dim + p] = -ws.psi[x * ph_dim + p];
                        }
                    } else if (jm.kind == JumpKind::sigma_z || jm.kind == JumpKind::sigma_y) {
                        // sigma_z flips the x-basis bit; sigma_y adds the sector sign
                        for (int x = 0; x < n_sectors; ++x) {
                            const int xf = x ^ (1 << jm.target);
                            if (x > xf) continue;
                            for (size_t p = 0; p < ph_dim; ++p)
                                std::swap(ws.psi[x * ph_dim + p], ws.psi[xf * ph_dim + p]);
                        }
                        if (jm.kind == JumpKind::sigma_y)
                            for (int x = 0; x < n_sectors; ++x)
                                if ((x >> jm.target) & 1)
                                    for (size_t p = 0; p < ph_dim; ++p)
                                        ws.psi[x * ph_dim + p] = -ws.psi[x * ph_dim + p];
                    } else {
                        const int j = jm.target;
                        const size_t blk = stride[j], fd = fdim[j];
                        for (size_t base = 0; base < dim; base += blk * fd) {
                            for (size_t off = 0; off < blk; ++off) {
                                cplx* v = ws.psi.data() + base + off;
                                if (jm.kind == JumpKind::lower) {
                                    for (size_t n = 0; n + 1 < fd; ++n)
                                        v[n * blk] = sq[j][n + 1] * v[(n + 1) * blk];
                                    v[(fd - 1) * blk] = 0.0;
                                } else if (jm.kind == JumpKind::raise_) {
                                    for (size_t n = fd - 1; n > 0; --n)
                                        v[n * blk] = sq[j][n] * v[(n - 1) * blk];
                                    v[0] = 0.0;
                                } else {
                                    for (size_t n = 0; n < fd; ++n)
                                        v[n * blk] *= static_cast<double>(n);
                                }
                            }
                        }
                    }
                    double nrm = 0.0;
                    for (const auto& v : ws.psi) nrm += std::norm(v);
                    if (nrm <= 0.0) throw std::runtime_error("oracle: jump annihilated the state");
                    const double inv = 1.0 / std::sqrt(nrm);
                    for (auto& v : ws.psi) v *= inv;
                } else if (need_moments) {
                    // first-order no-jump reshaping for non-unitary jump sets
                    for (size_t i = 0; i < dim; ++i) {
                        double w = 0.0;
                        for (const auto& jm : cfg.jumps) {
                            if (jm.kind == JumpKind::sigma_x || jm.kind == JumpKind::sigma_y ||
                                jm.kind == JumpKind::sigma_z)
                                continue;
                            const int n = static_cast<int>((i % ph_dim) / stride[jm.target] %
                                                           fdim[jm.target]);
                            if (jm.kind == JumpKind::lower) w += jm.rate_hz * n;
                            if (jm.kind == JumpKind::raise_) w += jm.rate_hz * (n + 1.0);
                            if (jm.kind == JumpKind::number)
                                w += jm.rate_hz * static_cast<double>(n) * n;
                        }
                        ws.psi[i] *= 1.0 - 0.5 * dt * w;
                    }
                }

                // exact ideal-evolution step per sector
                for (int x = 0; x < n_sectors; ++x) {
                    double theta = st.phi_at(x, k + 1) - st.phi_at(x, k);
                    for (int j = 0; j < J; ++j) {
                        const cplx a1 = st.a_at(x, j, k + 1), a0 = st.a_at(x, j, k);
                        theta -= std::imag(a1 * std::conj(a0));
                        const cplx delta = a1 - a0;
                        if (std::abs(delta) < 1e-300) continue;
                        const size_t blk = stride[j], fd = fdim[j];
                        // displacement acts on the j-th fock axis of this sector
                        for (size_t base = x * ph_dim; base < (x + 1) * ph_dim; base += blk * fd)
                            for (size_t off = 0; off < blk; ++off)
                                apply_displacement(ws.psi.data() + base + off, blk, fd, delta,
                                                   sq[j], 8, ws.fac.data(), ws.tmp.data(),
                                                   ws.term.data());
                    }
                    const cplx ph = std::polar(1.0, theta);
                    for (size_t p = 0; p < ph_dim; ++p) ws.psi[x * ph_dim + p] *= ph;
                }
                // keep the norm pinned (Taylor truncation drift is ~1e-14/step)
                double nrm = 0.0;
                for (const auto& v : ws.psi) nrm += std::norm(v);
                const double inv = 1.0 / std::sqrt(nrm);
                for (auto& v : ws.psi) v *= inv;
            }

            // ideal inverse gate at tau, then measure qubits in z
            const size_t kl = K - 1;
            for (int x = 0; x < n_sectors; ++x) {
                double theta = -st.phi_at(x, kl);
                for (int j = 0; j < J; ++j) {
                    const cplx af = st.a_at(x, j, kl);
                    if (std::abs(af) > 1e-300) {
                        const size_t blk = stride[j], fd = fdim[j];
                        const int ord = std::max(12, static_cast<int>(8.0 * std::abs(af)) + 12);
                        for (size_t base = x * ph_dim; base < (x + 1) * ph_dim; base += blk * fd)
                            for (size_t off = 0; off < blk; ++off)
                                apply_displacement(ws.psi.data() + base + off, blk, fd, -af,
                                                   sq[j], ord, ws.fac.data(), ws.tmp.data(),
                                                   ws.term.data());
                    }
                }
                const cplx ph = std::polar(1.0, theta);
                for (size_t p = 0; p < ph_dim; ++p) ws.psi[x * ph_dim + p] *= ph;
            }
            // record final top-level population as cutoff leakage
            for (int j = 0; j < J; ++j) {
                double top = 0.0;
                for (size_t i = 0; i < dim; ++i) {
                    const int n = static_cast<int>((i % ph_dim) / stride[j] % fdim[j]);
                    if (n == fdim[j] - 1) top += std::norm(ws.psi[i]);
                }
                shot_leak = std::max(shot_leak, top);
            }

            // x -> z on the spin axis: orthonormal FWHT per phonon index
            std::vector<double> pz(n_sectors, 0.0);
            const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(n_sectors));
            for (size_t p = 0; p < ph_dim; ++p) {
                for (int x = 0; x < n_sectors; ++x) zamp[x] = ws.psi[x * ph_dim + p];
                // in-place FWHT over sector index
                for (int h = 1; h < n_sectors; h <<= 1)
                    for (int i = 0; i < n_sectors; i += h << 1)
                        for (int jj = i; jj < i + h; ++jj) {
                            const cplx u = zamp[jj], v = zamp[jj + h];
                            zamp[jj] = u + v;
                            zamp[jj + h] = u - v;
                        }
                for (int z = 0; z < n_sectors; ++z)
                    pz[z] += std::norm(zamp[z] * inv_sqrt);
            }
            double tot = 0.0;
            for (double v : pz) tot += v;
            double r = uni(rng) * tot;
            int zpick = n_sectors - 1;
            double c0 = 0.0;
            for (int z = 0; z < n_sectors; ++z) {
                c0 += pz[z];
                if (r < c0) {
                    zpick = z;
                    break;
                }
            }
            counts[tid][zpick] += 1;
            leak[tid] = std::max(leak[tid], shot_leak);
        }
    };

    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();

    FlipHistogram h;
    h.qubit_count = N;
    h.shots = cfg.shots;
    h.pattern_counts.assign(n_sectors, 0);
    for (int t = 0; t < n_threads; ++t) {
        for (int z = 0; z < n_sectors; ++z) h.pattern_counts[z] += counts[t][z];
        h.leakage = std::max(h.leakage, leak[t]);
    }
    return h;
}

noisechan::PauliChannel leading_order_channel(const TrajectoryTable& tr,
                                              const std::vector<Jump>& jumps,
                                              const std::vector<double>& nbar,
                                              const std::vector<int>& fock_cutoff,
                                              int quad_points) {
    const int N = tr.ion_count, J = tr.mode_count;
    if (N > 4) throw std::invalid_argument("leading_order_channel: dense algebra limited to N <= 4");
    if (fock_cutoff.size() != static_cast<size_t>(J))
        throw std::invalid_argument("leading_order_channel: cutoff per mode required");
    const int n_sectors = 1 << N;
    size_t ph_dim = 1;
    for (int c : fock_cutoff) ph_dim *= static_cast<size_t>(c) + 1;
    const size_t dim = n_sectors * ph_dim;
    if (dim > 4096) throw std::invalid_argument("leading_order_channel: dimension too large");

    using Mat = Eigen::MatrixXcd;
    std::vector<Mat> a_ops(J), n_ops(J);
    {
        // build per-mode operators on the full phonon factor
        std::vector<int> fdim(J);
        for (int j = 0; j < J; ++j) fdim[j] = fock_cutoff[j] + 1;
        for (int j = 0; j < J; ++j) {
            Mat aj = Mat::Zero(fdim[j], fdim[j]);
            for (int n = 1; n < fdim[j]; ++n) aj(n - 1, n) = std::sqrt(static_cast<double>(n));
            Mat full = Mat::Identity(1, 1);
            for (int l = 0; l < J; ++l) {
                const Mat& m = l == j ? aj : Mat(Mat::Identity(fdim[l], fdim[l]));
                Mat nx(full.rows() * m.rows(), full.cols() * m.cols());
                for (int r = 0; r < full.rows(); ++r)
                    for (int c = 0; c < full.cols(); ++c)
                        nx.block(r * m.rows(), c * m.cols(), m.rows(), m.cols()) = full(r, c) * m;
                full = std::move(nx);
            }
            a_ops[j] = full;
            n_ops[j] = full.adjoint() * full;
        }
    }

    // thermal phonon state (truncated, renormalized)
    Mat rho_ph = Mat::Zero(ph_dim, ph_dim);
    {
        std::vector<int> fdim(J);
        for (int j = 0; j < J; ++j) fdim[j] = fock_cutoff[j] + 1;
        for (size_t p = 0; p < ph_dim; ++p) {
            double w = 1.0;
            size_t rem = p;
            for (int j = J - 1; j >= 0; --j) {
                const int n = static_cast<int>(rem % fdim[j]);
                rem /= fdim[j];
                const double nb = nbar.empty() ? 0.0 : nbar[j];
                w *= nb > 0.0 ? std::pow(nb / (1.0 + nb), n) / (1.0 + nb) : (n == 0 ? 1.0 : 0.0);
            }
            rho_ph(p, p) = w;
        }
        rho_ph /= rho_ph.trace();
    }

    // initial rho in x-basis: uniform spin matrix o thermal phonons
    Mat rho0 = Mat::Zero(dim, dim);
    const double s0 = 1.0 / n_sectors;
    for (int x = 0; x < n_sectors; ++x)
        for (int xp = 0; xp < n_sectors; ++xp)
            rho0.block(x * ph_dim, xp * ph_dim, ph_dim, ph_dim) = s0 * rho_ph;

    // sector displacement builder via hermitian eigendecomposition
    std::vector<int> fdim(J);
    for (int j = 0; j < J; ++j) fdim[j] = fock_cutoff[j] + 1;
    auto displacement = [&](int j, cplx beta) {
        Mat h = Mat::Zero(fdim[j], fdim[j]);
        for (int n = 1; n < fdim[j]; ++n) {
            h(n, n - 1) = cplx(0, 1) * beta * std::sqrt(static_cast<double>(n));
            h(n - 1, n) = std::conj(h(n, n - 1));
        }
        Eigen::SelfAdjointEigenSolver<Mat> es(h);
        Mat d = Mat::Zero(fdim[j], fdim[j]);
        for (int n = 0; n < fdim[j]; ++n) d(n, n) = std::polar(1.0, -es.eigenvalues()(n));
        return Mat(es.eigenvectors() * d * es.eigenvectors().adjoint());
    };

    auto U_at = [&](double t) {
        // linear interpolation of trajectory samples onto quadrature nodes
        const double dt = tr.dt();
        const size_t i0 =
            std::min(tr.samples() - 2, static_cast<size_t>(std::max(0.0, t / dt)));
        const double fr = std::clamp((t - tr.t[i0]) / dt, 0.0, 1.0);
        Mat u = Mat::Zero(dim, dim);
        for (int x = 0; x < n_sectors; ++x) {
            std::vector<int> s(N);
            for (int n = 0; n < N; ++n) s[n] = 1 - 2 * ((x >> n) & 1);
            Mat blk = Mat::Identity(ph_dim, ph_dim);
            for (int j = 0; j < J; ++j) {
                cplx a{};
                for (int n = 0; n < N; ++n)
                    a += static_cast<double>(s[n]) *
                         ((1.0 - fr) * tr.alpha_at(j, n, i0) + fr * tr.alpha_at(j, n, i0 + 1));
                if (std::abs(a) < 1e-300) continue;
                // embed mode-j displacement in the phonon factor
                Mat dj = displacement(j, a);
                Mat full = Mat::Identity(1, 1);
                for (int l = 0; l < J; ++l) {
                    const Mat& m = l == j ? dj : Mat(Mat::Identity(fdim[l], fdim[l]));
                    Mat nx(full.rows() * m.rows(), full.cols() * m.cols());
                    for (int r = 0; r < full.rows(); ++r)
                        for (int c = 0; c < full.cols(); ++c)
                            nx.block(r * m.rows(), c * m.cols(), m.rows(), m.cols()) =
                                full(r, c) * m;
                    full = std::move(nx);
                }
                blk = full * blk;
            }
            double phv = 0.0;
            for (int n = 0; n < N; ++n)
                for (int m = n + 1; m < N; ++m) {
                    const double p0 = tr.phi_at(n, m, i0), p1 = tr.phi_at(n, m, i0 + 1);
                    phv += s[n] * s[m] * ((1.0 - fr) * p0 + fr * p1);
                }
            u.block(x * ph_dim, x * ph_dim, ph_dim, ph_dim) = std::polar(1.0, phv) * blk;
        }
        return u;
    };

    // bare jump operators in the x-sector representation
    auto bare = [&](const Jump& jm) {
        Mat c = Mat::Zero(dim, dim);
        if (jm.kind == JumpKind::sigma_x || jm.kind == JumpKind::sigma_y ||
            jm.kind == JumpKind::sigma_z) {
            for (int x = 0; x < n_sectors; ++x) {
                const double sx = 1.0 - 2.0 * ((x >> jm.target) & 1);
                const int xf = x ^ (1 << jm.target);
                for (size_t p = 0; p < ph_dim; ++p) {
                    if (jm.kind == JumpKind::sigma_x)
                        c(x * ph_dim + p, x * ph_dim + p) = sx;
                    else if (jm.kind == JumpKind::sigma_z)
                        c(xf * ph_dim + p, x * ph_dim + p) = 1.0;
                    else
                        c(xf * ph_dim + p, x * ph_dim + p) = cplx(0, 1) * (-sx);
                }
            }
        } else {
            Mat op = jm.kind == JumpKind::lower
                         ? a_ops[jm.target]
                         : (jm.kind == JumpKind::raise_ ? Mat(a_ops[jm.target].adjoint())
                                                        : n_ops[jm.target]);
            for (int x = 0; x < n_sectors; ++x)
                c.block(x * ph_dim, x * ph_dim, ph_dim, ph_dim) = op;
        }
        return c;
    };

    Mat acc = Mat::Zero(dim, dim);
    const double tau = tr.t.back();
    int K = quad_points;
    if (K % 2) ++K;
    for (int i = 0; i <= K; ++i) {
        const double t = tau * i / K;
        const double w = (i == 0 || i == K) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        const Mat u = U_at(t);
        for (const auto& jm : jumps) {
            if (jm.rate_hz == 0.0) continue;
            const Mat ct = u.adjoint() * bare(jm) * u;
            const Mat ctd = ct.adjoint();
            acc += (w * jm.rate_hz) *
                   (ct * rho0 * ctd - 0.5 * (ctd * ct * rho0 + rho0 * ctd * ct));
        }
    }
    acc *= tau / K / 3.0;
    Mat rho = rho0 + acc;

    // trace out phonons, rotate spin matrix x -> z
    Mat rspin = Mat::Zero(n_sectors, n_sectors);
    for (int x = 0; x < n_sectors; ++x)
        for (int xp = 0; xp < n_sectors; ++xp)
            rspin(x, xp) = rho.block(x * ph_dim, xp * ph_dim, ph_dim, ph_dim).trace();
    Mat had = Mat::Zero(n_sectors, n_sectors);
    for (int r = 0; r < n_sectors; ++r)
        for (int c = 0; c < n_sectors; ++c) {
            const int bits = std::popcount(static_cast<unsigned>(r & c));
            had(r, c) = ((bits & 1) ? -1.0 : 1.0) / std::sqrt(static_cast<double>(n_sectors));
        }
    Mat rz = had * rspin * had;

    noisechan::PauliChannel ch;
    ch.qubit_count = N;
    ch.identity = std::real(rz(0, 0));
    for (int z = 1; z < n_sectors; ++z) {
        std::string str(N, 'I');
        for (int n = 0; n < N; ++n)
            if ((z >> n) & 1) str[n] = 'X';
        ch.terms.emplace_back(std::move(str), std::real(rz(z, z)));
    }
    return ch;
}

}  // namespace ionqec::oracle
